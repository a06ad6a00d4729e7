//! Browser bindings. Each export takes plain numbers and a string, and returns
//! a JSON document the page renders. The pure `*_json` functions carry the
//! logic so they can be tested natively.

use doublekey::adversary::{bit_distinguisher, eavesdrop, AttackBudget, AttackContext, Strategy};
use doublekey::algebra::GroupParams;
use doublekey::entropy::unbreakability_report;
use doublekey::level1::factorial;
use doublekey::level2::{
    decode_channel_bits, receive_message, send_message, transmit_bit, MessageJob, ProtocolParams,
    SessionKeys,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Keeps the (n+1)! recovery search responsive in a browser tab.
pub const MAX_N: u32 = 5;
pub const MAX_MESSAGE_CHARS: usize = 8;
pub const MAX_TRIALS: u32 = 20_000;
pub const MAX_SWEEP_POINTS: u32 = 24;

type WebResult<T> = std::result::Result<T, String>;

fn params(p: u32, n: u32, w: u32, r: u32) -> WebResult<ProtocolParams> {
    if !(2..=MAX_N).contains(&n) {
        return Err(format!("n must be between 2 and {MAX_N}"));
    }
    let group = GroupParams::new(u64::from(p)).map_err(|e| e.to_string())?;
    ProtocolParams::new(group, n as usize, w as usize)
        .and_then(|pp| pp.with_repetition(r as usize))
        .map_err(|e| e.to_string())
}

fn bit_string(bits: impl IntoIterator<Item = bool>) -> String {
    bits.into_iter()
        .map(|b| if b { '1' } else { '0' })
        .collect()
}

fn run(message: &str, pp: &ProtocolParams, seed: u32) -> WebResult<(SessionKeys, MessageJob)> {
    if message.chars().count() > MAX_MESSAGE_CHARS {
        return Err(format!(
            "keep the message to {MAX_MESSAGE_CHARS} characters"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(u64::from(seed));
    let keys = SessionKeys::random(pp, &mut rng).map_err(|e| e.to_string())?;
    let job = send_message(message, &keys, pp, &mut rng).map_err(|e| e.to_string())?;
    Ok((keys, job))
}

/// One full message exchange, every step exposed.
pub fn session_json(p: u32, n: u32, w: u32, r: u32, seed: u32, message: &str) -> WebResult<Value> {
    let pp = params(p, n, w, r)?;
    let (keys, job) = run(message, &pp, seed)?;
    let exchanges: Vec<Value> = job
        .bit_records
        .iter()
        .map(|rec| {
            json!({
                "framework": rec.framework_msg.values(),
                "permuted": rec.permuted_msg.values(),
                "announced": rec.announced_index.index(),
                "restarts": rec.restarts.len(),
                "sent": rec.genuine,
                "read": rec.decoded,
            })
        })
        .collect();
    let recovered = receive_message(&job.bit_records, pp.w, pp.repetition);
    Ok(json!({
        "alice_exponents": keys.alice.exponents(),
        "bob_exponent": keys.bob.exponent(),
        "orderings": factorial(pp.n + 1).map_err(|e| e.to_string())?,
        "binary": job.binary,
        "codewords": job.codewords.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "decoys": job.decoy_count(),
        "sent": bit_string(job.bit_records.iter().map(|r| r.genuine)),
        "read": bit_string(job.bit_records.iter().map(|r| r.decoded)),
        "bit_errors": job.bit_errors(),
        "restarts": job.restarts(),
        "recovered": recovered.as_ref().ok(),
        "decode_error": recovered.err().map(|e| e.to_string()),
        "exchanges": exchanges,
    }))
}

/// Budgets `0, step, 2*step, ...` of the bit distinguisher on one transcript.
pub fn sweep_json(
    p: u32,
    n: u32,
    w: u32,
    seed: u32,
    message: &str,
    step: u32,
    points: u32,
) -> WebResult<Value> {
    if points == 0 || points > MAX_SWEEP_POINTS {
        return Err(format!("points must be between 1 and {MAX_SWEEP_POINTS}"));
    }
    let pp = params(p, n, w, 1)?;
    let (_, job) = run(message, &pp, seed)?;
    let transcript = eavesdrop(&job);
    let ctx = AttackContext::new(pp.group);
    let budgets: Vec<AttackBudget> = (0..points)
        .map(|i| AttackBudget::limited(u64::from(i) * u64::from(step)))
        .collect();
    let report = unbreakability_report(
        None,
        &transcript,
        Strategy::BitDistinguisher,
        &ctx,
        &budgets,
    )
    .map_err(|e| e.to_string())?;
    let pts: Vec<Value> = report
        .points
        .iter()
        .map(|pt| {
            json!({
                "budget": pt.budget.0,
                "spent": pt.spent,
                "i_k": pt.i_k,
                "complete": pt.complete,
            })
        })
        .collect();

    // What Eve reads once her search has run to the end.
    let full =
        bit_distinguisher(&transcript, &ctx, AttackBudget::default()).map_err(|e| e.to_string())?;
    let reading = full.reading().map(|top| {
        let bits: Vec<bool> = (0..full.bits).map(|i| top >> i & 1 == 1).collect();
        json!({
            "bits": bit_string(bits.iter().copied()),
            "text": decode_channel_bits(&bits, pp.w, 1).ok(),
        })
    });
    Ok(json!({
        "h_m": report.h_m,
        "monotone": report.monotone(),
        "caveat": report.caveat(),
        "points": pts,
        "full_search_spent": full.candidates.spent(),
        "surviving_keys": full.surviving_keys.as_ref().map(Vec::len),
        "reading": reading,
        "bob_read": bit_string(job.bit_records.iter().map(|r| r.decoded)),
    }))
}

/// Sends `trials` zero bits for each n and counts how often Bob reads a one.
pub fn false_one_json(p: u32, max_n: u32, trials: u32, seed: u32) -> WebResult<Value> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(format!("trials must be between 1 and {MAX_TRIALS}"));
    }
    let mut rows = Vec::new();
    for n in 2..=max_n {
        let pp = params(p, n, 2, 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(seed) ^ u64::from(n) << 32);
        let keys = SessionKeys::random(&pp, &mut rng).map_err(|e| e.to_string())?;
        let mut ones = 0u32;
        for _ in 0..trials {
            let rec = transmit_bit(&keys.alice, &keys.bob, false, pp.max_retries, &mut rng)
                .map_err(|e| e.to_string())?;
            ones += u32::from(rec.decoded);
        }
        let orderings = factorial(n as usize + 1).map_err(|e| e.to_string())?;
        rows.push(json!({
            "n": n,
            "orderings": orderings,
            "observed": f64::from(ones) / f64::from(trials),
            "expected": 1.0 / orderings as f64,
        }));
    }
    Ok(json!({ "trials": trials, "rows": rows }))
}

fn export(v: WebResult<Value>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn session(
    p: u32,
    n: u32,
    w: u32,
    r: u32,
    seed: u32,
    message: &str,
) -> Result<String, JsError> {
    export(session_json(p, n, w, r, seed, message))
}

#[wasm_bindgen]
pub fn sweep(
    p: u32,
    n: u32,
    w: u32,
    seed: u32,
    message: &str,
    step: u32,
    points: u32,
) -> Result<String, JsError> {
    export(sweep_json(p, n, w, seed, message, step, points))
}

#[wasm_bindgen]
pub fn false_ones(p: u32, max_n: u32, trials: u32, seed: u32) -> Result<String, JsError> {
    export(false_one_json(p, max_n, trials, seed))
}
