//! Session parameters: a flat `key=value` file, then flag overrides.

use doublekey::algebra::GroupParams;
use doublekey::level1::factorial;
use doublekey::level2::{ProtocolParams, DEFAULT_MAX_RETRIES};

use crate::error::{CliError, CliResult};

pub const MIN_N: usize = 2;
/// Recovery searches all (n+1)! orderings.
pub const MAX_N: usize = 6;
/// Below `(n+1)! * SAFETY_FACTOR` accidental matches become common.
pub const SAFETY_FACTOR: u64 = 100;

pub const KEYS: [&str; 6] = ["p", "n", "w", "r", "seed", "max_retries"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub p: u64,
    pub n: usize,
    pub w: usize,
    pub r: usize,
    pub seed: u64,
    pub max_retries: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            p: 1_000_003,
            n: 4,
            w: 4,
            r: 1,
            seed: 0,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

/// Values supplied on the command line; `None` keeps the file or default.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub p: Option<u64>,
    pub n: Option<usize>,
    pub w: Option<usize>,
    pub r: Option<usize>,
    pub seed: Option<u64>,
    pub max_retries: Option<usize>,
}

fn number<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::Config(format!("config line {line}: {key}={v:?} is not a number")))
}

impl SessionConfig {
    /// Reads `key=value` lines over the defaults. Blank lines and `#` comments
    /// are skipped; unknown keys are errors.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let Some((k, v)) = l.split_once('=') else {
                return Err(CliError::Config(format!(
                    "config line {line}: expected key=value, got {l:?}"
                )));
            };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "p" => c.p = number(line, k, v)?,
                "n" => c.n = number(line, k, v)?,
                "w" => c.w = number(line, k, v)?,
                "r" => c.r = number(line, k, v)?,
                "seed" => c.seed = number(line, k, v)?,
                "max_retries" => c.max_retries = number(line, k, v)?,
                _ => {
                    return Err(CliError::Config(format!(
                        "config line {line}: unknown key {k:?} (known: {})",
                        KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(c)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        self.p = o.p.unwrap_or(self.p);
        self.n = o.n.unwrap_or(self.n);
        self.w = o.w.unwrap_or(self.w);
        self.r = o.r.unwrap_or(self.r);
        self.seed = o.seed.unwrap_or(self.seed);
        self.max_retries = o.max_retries.unwrap_or(self.max_retries);
        self
    }

    /// Checks every invariant and returns the protocol parameters plus any
    /// advisory warnings.
    pub fn validate(&self) -> CliResult<(ProtocolParams, Vec<String>)> {
        if !(MIN_N..=MAX_N).contains(&self.n) {
            return Err(CliError::Config(format!(
                "n={} outside {MIN_N}..={MAX_N}",
                self.n
            )));
        }
        if self.max_retries == 0 {
            return Err(CliError::Config("max_retries must be at least 1".into()));
        }
        let group = GroupParams::new(self.p).map_err(|e| CliError::Config(e.to_string()))?;
        let params = ProtocolParams::new(group, self.n, self.w)
            .and_then(|p| p.with_repetition(self.r))
            .map_err(|e| CliError::Config(e.to_string()))?
            .with_max_retries(self.max_retries);
        let mut warnings = Vec::new();
        let floor = factorial(self.n + 1)
            .unwrap_or(u64::MAX)
            .saturating_mul(SAFETY_FACTOR);
        if self.p <= floor {
            warnings.push(format!(
                "p={} is at most (n+1)! * {SAFETY_FACTOR} = {floor}; expect frequent restarts and false bits",
                self.p
            ));
        }
        Ok((params, warnings))
    }
}
