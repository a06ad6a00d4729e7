use std::fmt::Write as _;

use doublekey::adversary::{
    distinguisher_experiment, eavesdrop, universal_decipher_k, AttackBudget, AttackContext,
    Decipherment, ExchangeOutcome, ExperimentParams, GuessStrategy, Strategy, Transcript,
};
use doublekey::algebra::GroupParams;
use doublekey::entropy::{
    conditional_entropy, entropy, information_with_explicit_loss, joint_entropy,
    mutual_information, one_time_pad_information, perfect_secrecy_check, unbreakability_report,
    FiniteDistribution, JointDistribution,
};
use doublekey::level1::{alice_init, alice_recover, bob_respond, Recovery};
use doublekey::level2::{decode_channel_bits, receive_message, send_message, SessionKeys};
use doublekey::wire::{format_experiment, KeyFile, TranscriptFile};
use doublekey::Error;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SessionConfig;
use crate::error::{CliError, CliResult};

/// Complete Level-1 searches list their survivors up to this many.
pub const MAX_LISTED: usize = 8;
/// Independence tolerance for the perfect-secrecy flag.
pub const SECRECY_TOLERANCE: f64 = 1e-9;

/// Six decimals, with `-0.000000` folded to `0.000000`.
pub fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn rng_for(cfg: &SessionConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

pub fn keygen(cfg: &SessionConfig) -> CliResult<KeyFile> {
    let (params, _) = cfg.validate()?;
    let keys = SessionKeys::random(&params, &mut rng_for(cfg))?;
    Ok(KeyFile {
        group: params.group,
        keys,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    /// One bare framework exchange.
    #[value(name = "1")]
    One,
    /// A full message, one exchange per channel bit.
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub transcript: TranscriptFile,
    /// One `result key=value ...` line.
    pub record: String,
}

/// Without a key file, keys are drawn first from the seeded stream, so they
/// match what `keygen` prints for the same configuration.
pub fn simulate(
    cfg: &SessionConfig,
    message: &str,
    keys: Option<&KeyFile>,
    level: Level,
) -> CliResult<Simulation> {
    let (params, _) = cfg.validate()?;
    let mut rng = rng_for(cfg);
    let keys = match keys {
        Some(k) => {
            if k.group != params.group || k.keys.alice.exponents().len() != params.n {
                return Err(CliError::Config(format!(
                    "key file is for p={} n={}, configuration has p={} n={}",
                    k.group.modulus(),
                    k.keys.alice.exponents().len(),
                    cfg.p,
                    cfg.n
                )));
            }
            k.keys.clone()
        }
        None => SessionKeys::random(&params, &mut rng)?,
    };
    let mut header = vec![
        (
            "level".to_owned(),
            if level == Level::One { "1" } else { "2" }.to_owned(),
        ),
        ("p".to_owned(), cfg.p.to_string()),
        ("n".to_owned(), cfg.n.to_string()),
    ];
    let (transcript, record) = match level {
        Level::One => {
            let (mut alice, msg) = alice_init(&keys.alice, &mut rng)?;
            let (bob, reply) = bob_respond(&keys.bob, &msg, &mut rng)?;
            let outcome = match alice_recover(&mut alice, &reply)? {
                Recovery::Recovered(s) => format!("outcome=recovered recovered={}", s.index()),
                Recovery::Ambiguous(all) => format!("outcome=ambiguous candidates={}", all.len()),
                Recovery::NotFound => "outcome=not-found".to_owned(),
            };
            (
                eavesdrop(&(msg, reply)),
                format!("result level=1 sigma={} {outcome}", bob.sigma().index()),
            )
        }
        Level::Two => {
            header.extend([
                ("w".to_owned(), cfg.w.to_string()),
                ("r".to_owned(), cfg.r.to_string()),
                ("max_retries".to_owned(), cfg.max_retries.to_string()),
            ]);
            let job = send_message(message, &keys, &params, &mut rng)?;
            let recovered = receive_message(&job.bit_records, params.w, params.repetition);
            let shown = match &recovered {
                Ok(text) => format!("{text:?}"),
                Err(_) => "!".to_owned(),
            };
            let mut record = format!(
                "result level=2 message={message:?} recovered={shown} match={} channel_bits={} codewords={} decoys={} bit_errors={} restarts={}",
                u8::from(recovered.as_deref() == Ok(message)),
                job.bit_records.len(),
                job.codewords.len(),
                job.decoy_count(),
                job.bit_errors(),
                job.restarts()
            );
            if let Err(e) = recovered {
                let _ = write!(record, " error={:?}", e.to_string());
            }
            (eavesdrop(&job), record)
        }
    };
    Ok(Simulation {
        transcript: TranscriptFile { header, transcript },
        record,
    })
}

#[derive(Debug, Clone, Default)]
pub struct AttackRequest {
    pub strategy: Option<Strategy>,
    pub budgets: Vec<AttackBudget>,
    /// Adds `steps + 1` evenly spaced budgets from 0 to the full search cost.
    pub sweep: Option<u64>,
    pub k_max: Option<u64>,
    pub prior: Option<FiniteDistribution>,
}

fn header_num<T: std::str::FromStr>(file: &TranscriptFile, key: &str) -> CliResult<Option<T>> {
    file.get(key)
        .map(|v| {
            v.parse().map_err(|_| {
                CliError::Core(Error::Parse {
                    line: 1 + file.header.iter().position(|(k, _)| k == key).unwrap_or(0) + 1,
                    message: format!("header {key}={v:?} is not a number"),
                })
            })
        })
        .transpose()
}

/// A lone unannounced exchange is a Level-1 transcript; anything else is
/// attacked bit by bit.
pub fn default_strategy(t: &Transcript) -> Strategy {
    match t.exchanges().as_deref() {
        Ok([only]) if only.outcome == ExchangeOutcome::Unannounced => Strategy::Level1BruteForce,
        _ => Strategy::BitDistinguisher,
    }
}

fn budget_order(b: &AttackBudget) -> u128 {
    b.0.map_or(u128::MAX, u128::from)
}

pub fn attack_transcript(file: &TranscriptFile, req: &AttackRequest) -> CliResult<String> {
    let p: u64 = header_num(file, "p")?.ok_or_else(|| {
        CliError::Core(Error::Parse {
            line: 1,
            message: "transcript header has no p".into(),
        })
    })?;
    let group = GroupParams::new(p)?;
    let ctx = AttackContext {
        group,
        k_max: req.k_max,
    };
    let t = &file.transcript;
    let strategy = req.strategy.unwrap_or_else(|| default_strategy(t));
    let mut budgets = req.budgets.clone();
    if let Some(steps) = req.sweep {
        let steps = steps.max(1);
        let full = universal_decipher_k(t, AttackBudget::UNLIMITED, strategy, &ctx)?;
        let cost = full.candidates().spent();
        budgets.extend((0..=steps).map(|i| AttackBudget::limited(cost * i / steps)));
    }
    if budgets.is_empty() {
        budgets.push(AttackBudget::UNLIMITED);
    }
    budgets.sort_by_key(budget_order);
    budgets.dedup();

    let report = unbreakability_report(req.prior.as_ref(), t, strategy, &ctx, &budgets)?;
    let mut out = String::new();
    for pt in &report.points {
        let _ = writeln!(
            out,
            "point budget={} spent={} complete={} h_d={} i_k={}",
            pt.budget,
            pt.spent,
            u8::from(pt.complete),
            num(pt.h_d),
            num(pt.i_k)
        );
    }
    if report.points.len() > 1 {
        let _ = writeln!(
            out,
            "sweep strategy={strategy} h_m={} monotone={} best_i_k={}",
            num(report.h_m),
            u8::from(report.monotone()),
            num(report.best().map_or(0.0, |b| b.i_k))
        );
        let _ = writeln!(out, "# {}", report.caveat());
    }

    let last = *budgets.last().expect("at least one budget");
    let point = report.points.last().expect("one point per budget");
    let d = universal_decipher_k(t, last, strategy, &ctx)?;
    let c = d.candidates();
    let (broken, detail) = match &d {
        Decipherment::Level1(a) => match a.consistent.as_slice() {
            [only] if c.complete() => (
                true,
                Some(format!(
                    "recovered k={} sigma={}",
                    only.k,
                    only.sigma.index()
                )),
            ),
            many if c.complete() && many.len() <= MAX_LISTED => (
                false,
                Some(
                    many.iter()
                        .map(|h| format!("candidate k={} sigma={}", h.k, h.sigma.index()))
                        .collect::<Vec<_>>()
                        .join("\n"),
                ),
            ),
            _ => (false, None),
        },
        Decipherment::Bits(a) => {
            let pinned = a.surviving_keys.as_ref().is_some_and(|k| k.len() == 1);
            match a.reading() {
                Some(r) => {
                    let bits: Vec<bool> = (0..a.bits).map(|i| r >> i & 1 == 1).collect();
                    let shown: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    let w = header_num::<usize>(file, "w")?;
                    let reps = header_num::<usize>(file, "r")?.unwrap_or(1);
                    let text = w.map(|w| match decode_channel_bits(&bits, w, reps) {
                        Ok(s) => format!(" text={s:?}"),
                        Err(_) => " text=!".to_owned(),
                    });
                    (
                        pinned,
                        Some(format!("reading bits={shown}{}", text.unwrap_or_default())),
                    )
                }
                None => (false, None),
            }
        }
    };
    let _ = writeln!(
        out,
        "attack strategy={strategy} budget={last} spent={} complete={} space_bits={} candidates={} h_d={} i_k={} broken={}",
        c.spent(),
        u8::from(c.complete()),
        num(c.space_bits()),
        c.size(),
        num(c.entropy_bits()),
        num(point.i_k),
        u8::from(broken)
    );
    if let Some(detail) = detail {
        let _ = writeln!(out, "{detail}");
    }
    let summary = if broken {
        "the key is pinned: Eve reads exactly what Bob reads".to_owned()
    } else if c.complete() {
        format!("search complete, {} candidates remain", c.size())
    } else {
        format!(
            "budget exhausted after {} units; {} of 2^{} candidates remain",
            c.spent(),
            c.size(),
            num(c.space_bits())
        )
    };
    let _ = writeln!(out, "# {summary}");
    Ok(out)
}

pub fn attack_experiment(
    cfg: &SessionConfig,
    trials: u64,
    guess: GuessStrategy,
    budget: AttackBudget,
    k_max: Option<u64>,
) -> CliResult<String> {
    let (params, _) = cfg.validate()?;
    let ep = ExperimentParams {
        group: params.group,
        n: cfg.n,
        seed: cfg.seed,
        k_max,
    };
    let report = distinguisher_experiment(&ep, trials, guess, budget)?;
    let mut out = format_experiment(&report);
    let s = &report.summary;
    let _ = writeln!(
        out,
        "# advantage {} (95% interval {}..{}); blind guessing gives 0 +/- {}",
        num(s.advantage),
        num(s.ci_low),
        num(s.ci_high),
        num(s.null_sigma)
    );
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct EntropyRequest {
    pub dist: Option<FiniteDistribution>,
    pub joint: Option<JointDistribution>,
    /// Eve's `(X_E, M)` joint; pairs with `joint` as Bob's `(X_B, M)`.
    pub eve: Option<JointDistribution>,
    pub otp_bits: Option<u32>,
}

pub fn entropy_report(req: &EntropyRequest) -> CliResult<String> {
    let mut out = String::new();
    if let Some(d) = &req.dist {
        let _ = writeln!(
            out,
            "distribution outcomes={} entropy={}",
            d.len(),
            num(entropy(d))
        );
    }
    if let Some(j) = &req.joint {
        let _ = writeln!(
            out,
            "joint rows={} columns={} h_x={} h_y={} h_xy={} h_x_given_y={} mutual_information={} perfect_secrecy={}",
            j.row_labels().len(),
            j.col_labels().len(),
            num(entropy(&j.x_marginal())),
            num(entropy(&j.y_marginal())),
            num(joint_entropy(j)),
            num(conditional_entropy(j)),
            num(mutual_information(j)),
            u8::from(perfect_secrecy_check(j, SECRECY_TOLERANCE))
        );
    }
    if let (Some(bob), Some(eve)) = (&req.joint, &req.eve) {
        if bob.col_labels().len() != eve.col_labels().len() {
            return Err(CliError::Core(Error::InvalidDistribution(format!(
                "Bob's table has {} message columns, Eve's has {}",
                bob.col_labels().len(),
                eve.col_labels().len()
            ))));
        }
        let loss = mutual_information(eve);
        let _ = writeln!(
            out,
            "loss loss={} bob_information={} bob_information_with_loss={} eve_information_with_loss={}",
            num(loss),
            num(mutual_information(bob)),
            num(information_with_explicit_loss(bob, loss)),
            num(information_with_explicit_loss(eve, loss))
        );
    }
    if let Some(m) = req.otp_bits {
        let i = one_time_pad_information(m)?;
        let _ = writeln!(out, "one_time_pad bits={m} mutual_information={}", num(i));
    }
    if out.is_empty() {
        return Err(CliError::Config(
            "nothing to measure: give --dist, --joint or --otp".into(),
        ));
    }
    Ok(out)
}
