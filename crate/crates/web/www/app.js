import init, { session, sweep, false_ones } from "./pkg/doublekey_web.js";

const num = (form, name) => Number(form.elements[name].value);
const str = (form, name) => form.elements[name].value;

function bind(id, run, render) {
  const form = document.getElementById(`${id}-form`);
  const out = document.getElementById(`${id}-out`);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    try {
      out.textContent = render(JSON.parse(run(form)));
    } catch (e) {
      out.textContent = `error: ${e.message ?? e}`;
    }
  });
}

function renderSession(v) {
  const lines = [
    `Alice's exponents ${v.alice_exponents.join(", ")}; Bob's exponent ${v.bob_exponent}`,
    `binary     ${v.binary}`,
    `codewords  ${v.codewords.join(" ")}  (${v.decoys} decoys)`,
    "",
  ];
  v.exchanges.slice(0, 4).forEach((x, i) => {
    lines.push(`exchange ${i + 1}: framework [${x.framework}] -> shuffled [${x.permuted}]`);
    lines.push(`  announced ordering #${x.announced} of ${v.orderings}, sent ${+x.sent}, read ${+x.read}` +
      (x.restarts ? `, ${x.restarts} restarts` : ""));
  });
  if (v.exchanges.length > 4) lines.push(`  ... ${v.exchanges.length - 4} more`);
  lines.push("", `sent  ${v.sent}`, `read  ${v.read}`);
  lines.push(`${v.bit_errors} false ones, ${v.restarts} restarts`);
  lines.push(v.recovered !== null ? `Bob decodes ${JSON.stringify(v.recovered)}` : `Bob cannot decode: ${v.decode_error}`);
  return lines.join("\n");
}

function renderSweep(v) {
  const lines = [`H(M) = ${v.h_m} bits`, "budget      spent  I_k     complete"];
  for (const p of v.points) {
    lines.push(`${String(p.budget).padStart(6)} ${String(p.spent).padStart(10)}  ${p.i_k.toFixed(3).padStart(6)}  ${p.complete}`);
  }
  lines.push(`monotone: ${v.monotone}`, v.caveat, "");
  lines.push(`unlimited search: ${v.full_search_spent} checks, ${v.surviving_keys ?? "?"} exponents survive`);
  if (v.reading) {
    lines.push(`Eve reads ${v.reading.bits}` + (v.reading.text !== null ? ` = ${JSON.stringify(v.reading.text)}` : ""));
    lines.push(`Bob read  ${v.bob_read}`);
  }
  return lines.join("\n");
}

function renderFalse(v) {
  const lines = [`${v.trials} zero bits per row`, "n  orderings  observed  expected"];
  for (const r of v.rows) {
    lines.push(`${r.n}  ${String(r.orderings).padStart(9)}  ${r.observed.toFixed(5)}   ${r.expected.toFixed(5)}`);
  }
  return lines.join("\n");
}

await init();
bind("session", (f) => session(num(f, "p"), num(f, "n"), num(f, "w"), num(f, "r"), num(f, "seed"), str(f, "message")), renderSession);
bind("sweep", (f) => sweep(num(f, "p"), num(f, "n"), num(f, "w"), num(f, "seed"), str(f, "message"), num(f, "step"), num(f, "points")), renderSweep);
bind("false", (f) => false_ones(num(f, "p"), num(f, "max_n"), num(f, "trials"), num(f, "seed")), renderFalse);
