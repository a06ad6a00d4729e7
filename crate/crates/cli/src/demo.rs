//! Narrated run of one message between Alice and Bob, with Eve listening.

use doublekey::adversary::{bit_distinguisher, eavesdrop, AttackBudget, AttackContext, KeySpace};
use doublekey::level1::factorial;
use doublekey::level2::{receive_message, send_message, SessionKeys};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::num;
use crate::config::SessionConfig;
use crate::error::CliResult;

/// How many exchanges are printed in full before the rest are summarised.
const SHOWN_EXCHANGES: usize = 3;
/// Eve's effort in the closing attack.
pub const EVE_BUDGET: u64 = 200_000;

pub fn demo(cfg: &SessionConfig, message: &str) -> CliResult<String> {
    let (params, _) = cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let keys = SessionKeys::random(&params, &mut rng)?;
    let job = send_message(message, &keys, &params, &mut rng)?;
    let perms = factorial(cfg.n + 1)?;

    let mut out = String::new();
    let mut say = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    say(format!(
        "Group: multiplicative integers mod p={}; frameworks of n={} objects plus one extra.",
        cfg.p, cfg.n
    ));
    say(format!(
        "Alice's secret lock F raises object i to a_i and multiplies: a = {:?}.",
        keys.alice.exponents()
    ));
    say(format!(
        "Bob's secret lock T raises every element to k = {}. The two locks commute.",
        keys.bob.exponent()
    ));
    say(String::new());
    say(format!(
        "Message {message:?} as 8-bit codes: {}",
        job.binary
    ));
    let words: Vec<String> = job.codewords.iter().map(ToString::to_string).collect();
    say(format!(
        "Each bit becomes a random {}-bit codeword whose parity carries it; all-ones words are decoys and carry nothing ({} here):",
        cfg.w,
        job.decoy_count()
    ));
    say(format!("  {}", words.join(" ")));
    if cfg.r > 1 {
        say(format!("Every channel bit is repeated {} times.", cfg.r));
    }
    say(format!(
        "That makes {} channel bits, one framework exchange each.",
        job.bit_records.len()
    ));
    say(String::new());

    for (i, rec) in job.bit_records.iter().take(SHOWN_EXCHANGES).enumerate() {
        say(format!(
            "Exchange {} (channel bit {}):",
            i + 1,
            u8::from(rec.genuine)
        ));
        for (sent, _) in &rec.restarts {
            say(format!(
                "  framework {:?} was abandoned: Alice could not tell the shuffle apart",
                sent.values()
            ));
        }
        say(format!(
            "  Alice -> Bob  framework      {:?}",
            rec.framework_msg.values()
        ));
        say(format!(
            "  Bob -> Alice  locked, shuffled {:?}",
            rec.permuted_msg.values()
        ));
        let how = if rec.genuine {
            "the shuffle she recovered by trying her lock on every ordering"
        } else {
            "a random ordering"
        };
        say(format!(
            "  Alice -> Bob  announces ordering #{} of {perms}: {how}",
            rec.announced_index.index()
        ));
        say(format!(
            "  Bob reads {} (announcement {} his own shuffle)",
            u8::from(rec.decoded),
            if rec.decoded {
                "matches"
            } else {
                "differs from"
            }
        ));
    }
    if job.bit_records.len() > SHOWN_EXCHANGES {
        say(format!(
            "  ... {} more exchanges",
            job.bit_records.len() - SHOWN_EXCHANGES
        ));
    }
    say(String::new());

    let sent: String = job
        .bit_records
        .iter()
        .map(|r| if r.genuine { '1' } else { '0' })
        .collect();
    let read: String = job
        .bit_records
        .iter()
        .map(|r| if r.decoded { '1' } else { '0' })
        .collect();
    say(format!("Alice sent  {sent}"));
    say(format!("Bob read    {read}"));
    say(format!(
        "{} false ones (a 0 whose random announcement hit Bob's shuffle, chance 1/{perms} each), {} restarts.",
        job.bit_errors(),
        job.restarts()
    ));
    match receive_message(&job.bit_records, params.w, params.repetition) {
        Ok(text) => say(format!("Bob strips decoys and decodes {text:?}.")),
        Err(e) => say(format!("Bob cannot decode the stream: {e}")),
    }
    if job.bit_errors() > 0 && params.repetition == 1 {
        say("Nothing corrects a false one; --r 3 sends every channel bit three times and takes the majority.".into());
    }
    say(String::new());

    let transcript = eavesdrop(&job);
    let ctx = AttackContext::new(params.group);
    let space = KeySpace::new(params.group, None).len();
    say(format!(
        "Eve saw {} messages. Every exchange admits each of {space} exponents times {perms} orderings.",
        transcript.len()
    ));
    match bit_distinguisher(&transcript, &ctx, AttackBudget::limited(EVE_BUDGET)) {
        Ok(attack) => {
            let c = &attack.candidates;
            say(format!(
                "With a budget of {EVE_BUDGET} checks she keeps {} of 2^{} bit strings: {} bits learnt{}.",
                c.size(),
                num(c.space_bits()),
                num(c.space_bits() - c.entropy_bits()),
                if c.complete() { ", search complete" } else { ", search unfinished" }
            ));
        }
        Err(e) => say(format!("Eve's attack does not apply here: {e}")),
    }
    Ok(out)
}
