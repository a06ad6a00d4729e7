use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use doublekey::adversary::{AttackBudget, GuessStrategy, Strategy};
use doublekey::wire::{parse_distribution, parse_joint, KeyFile, TranscriptFile};

mod commands;
mod config;
mod demo;
mod error;

use commands::{AttackRequest, EntropyRequest, Level};
use config::{Overrides, SessionConfig};
use error::{CliError, CliResult};

/// Simulator for the double-key protocol: two commuting secret locks, a
/// shuffled framework per channel bit, and an eavesdropper with a budget.
#[derive(Debug, Parser)]
#[command(name = "doublekey", version)]
struct Cli {
    #[command(flatten)]
    session: SessionArgs,
    #[command(subcommand)]
    command: Command,
}

/// Session parameters. Flags override the config file, which overrides the
/// defaults.
#[derive(Debug, Args)]
struct SessionArgs {
    /// Flat key=value file with any of p, n, w, r, seed, max_retries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Prime modulus.
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Framework size, 2..=6.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Codeword width, at least 2.
    #[arg(long, global = true)]
    w: Option<usize>,
    /// Odd repetition factor per channel bit.
    #[arg(long, global = true)]
    r: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exchanges per channel bit before the session gives up.
    #[arg(long, global = true)]
    max_retries: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw Alice's and Bob's secret keys from the seed.
    Keygen {
        /// Write the key file here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Send a message end to end and record what Eve sees.
    Simulate {
        #[arg(short, long, default_value = "No")]
        message: String,
        /// Use these keys instead of drawing them from the seed.
        #[arg(long)]
        keys: Option<PathBuf>,
        /// 1 runs a single bare framework exchange.
        #[arg(long, value_enum, default_value = "2")]
        level: Level,
        /// Write the transcript here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Attack a recorded transcript, or run a bit-guessing experiment.
    #[command(group = clap::ArgGroup::new("target").required(true).args(["transcript", "experiment"]))]
    Attack {
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Fresh sessions from the configuration, one random bit each.
        #[arg(long)]
        experiment: bool,
        /// level1-brute-force, bit-distinguisher or exhaustive-plaintext.
        #[arg(long, value_parser = parse_strategy, conflicts_with = "experiment")]
        strategy: Option<Strategy>,
        /// Candidate evaluations allowed; a number or "unlimited". Repeat to sweep.
        #[arg(long)]
        budget: Vec<AttackBudget>,
        /// Also sweep evenly from 0 to the full search cost in this many steps.
        #[arg(long, conflicts_with = "experiment")]
        sweep: Option<u64>,
        /// Only try exponents up to this value.
        #[arg(long)]
        k_max: Option<u64>,
        /// Message distribution for H(M), in place of uniform.
        #[arg(long, conflicts_with = "experiment")]
        prior: Option<PathBuf>,
        #[arg(long, default_value_t = 200, requires = "experiment")]
        trials: u64,
        /// random, exhaustive or discrete-log.
        #[arg(long, default_value = "exhaustive", value_parser = parse_guess, requires = "experiment")]
        guess: GuessStrategy,
    },
    /// Information measures over distribution files.
    Entropy {
        /// `label probability` lines.
        #[arg(long)]
        dist: Option<PathBuf>,
        /// Joint table: a `columns` header, then one row per outcome.
        #[arg(long)]
        joint: Option<PathBuf>,
        /// Eve's joint over the same message columns as --joint.
        #[arg(long, requires = "joint")]
        eve: Option<PathBuf>,
        /// Exact one-time-pad leakage for messages of this many bits.
        #[arg(long)]
        otp: Option<u32>,
    },
    /// Narrated walkthrough of one message.
    Demo {
        #[arg(short, long, default_value = "No")]
        message: String,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: doublekey::Error| e.to_string())
}

fn parse_guess(s: &str) -> Result<GuessStrategy, String> {
    s.parse().map_err(|e: doublekey::Error| e.to_string())
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads and parses a file, attaching the path to content errors.
fn load<T>(path: &Path, parse: impl FnOnce(&str) -> doublekey::Result<T>) -> CliResult<T> {
    parse(&read(path)?).map_err(|source| CliError::File {
        path: path.to_owned(),
        source,
    })
}

fn session(args: &SessionArgs) -> CliResult<SessionConfig> {
    let base = match &args.config {
        Some(path) => SessionConfig::parse(&read(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => SessionConfig::default(),
    };
    let cfg = base.apply(&Overrides {
        p: args.p,
        n: args.n,
        w: args.w,
        r: args.r,
        seed: args.seed,
        max_retries: args.max_retries,
    });
    let (_, warnings) = cfg.validate()?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Keygen { out } => {
            let text = commands::keygen(&session(&cli.session)?)?.to_text();
            match out {
                Some(path) => write(&path, &text).map(|()| String::new()),
                None => Ok(text),
            }
        }
        Command::Simulate {
            message,
            keys,
            level,
            out,
        } => {
            let cfg = session(&cli.session)?;
            let keys = keys.map(|p| load(&p, KeyFile::parse)).transpose()?;
            let sim = commands::simulate(&cfg, &message, keys.as_ref(), level)?;
            if let Some(path) = out {
                write(&path, &sim.transcript.to_text())?;
            }
            Ok(format!("{}\n", sim.record))
        }
        Command::Attack {
            transcript,
            experiment,
            strategy,
            budget,
            sweep,
            k_max,
            prior,
            trials,
            guess,
        } => {
            if experiment {
                let cfg = session(&cli.session)?;
                let budget = match budget.as_slice() {
                    [] => AttackBudget::UNLIMITED,
                    [b] => *b,
                    _ => {
                        return Err(CliError::Config(
                            "an experiment takes a single --budget".into(),
                        ))
                    }
                };
                return commands::attack_experiment(&cfg, trials, guess, budget, k_max);
            }
            let path = transcript.expect("clap requires a target");
            let file = load(&path, TranscriptFile::parse)?;
            let prior = prior.map(|p| load(&p, parse_distribution)).transpose()?;
            commands::attack_transcript(
                &file,
                &AttackRequest {
                    strategy,
                    budgets: budget,
                    sweep,
                    k_max,
                    prior,
                },
            )
        }
        Command::Entropy {
            dist,
            joint,
            eve,
            otp,
        } => commands::entropy_report(&EntropyRequest {
            dist: dist.map(|p| load(&p, parse_distribution)).transpose()?,
            joint: joint.map(|p| load(&p, parse_joint)).transpose()?,
            eve: eve.map(|p| load(&p, parse_joint)).transpose()?,
            otp_bits: otp,
        }),
        Command::Demo { message } => demo::demo(&session(&cli.session)?, &message),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
