//! Line-oriented text formats: transcripts, key material, distribution
//! tables and experiment records. Payload values are decimal. `#` starts a
//! comment line; blank lines are ignored. Parse errors carry 1-based line
//! numbers.

use std::fmt::Write as _;

use crate::adversary::{
    Direction, ExperimentReport, ExperimentSummary, StepLabel, Transcript, TranscriptEntry,
    TrialRecord,
};
use crate::algebra::{GroupParams, LockKeyF, LockKeyT};
use crate::entropy::{FiniteDistribution, JointDistribution};
use crate::error::{Error, Result};
use crate::level2::SessionKeys;

pub const TRANSCRIPT_MAGIC: &str = "# doublekey transcript v1";
pub const KEYS_MAGIC: &str = "# doublekey keys v1";
const SEPARATOR: &str = "---";

/// Numbered lines that carry content.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_num<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| Error::parse(line, format!("bad {what} {s:?}: {e}")))
}

fn split_kv(line: usize, l: &str) -> Result<(String, String)> {
    let (k, v) = l
        .split_once('=')
        .ok_or_else(|| Error::parse(line, format!("expected key=value, got {l:?}")))?;
    Ok((k.trim().to_owned(), v.trim().to_owned()))
}

/// A transcript with the session parameters it was recorded under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptFile {
    /// Ordered `key=value` echo of the public configuration.
    pub header: Vec<(String, String)>,
    pub transcript: Transcript,
}

impl TranscriptFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(TRANSCRIPT_MAGIC);
        out.push('\n');
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k}={v}");
        }
        out.push_str(SEPARATOR);
        out.push('\n');
        for e in self.transcript.entries() {
            let _ = write!(out, "{} {} {}", e.seq, e.direction, e.label);
            for v in &e.values {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, l)) if l == TRANSCRIPT_MAGIC => {}
            _ => return Err(Error::parse(1, format!("expected {TRANSCRIPT_MAGIC:?}"))),
        }
        let mut header = Vec::new();
        let mut in_body = false;
        let mut entries = Vec::new();
        for (n, l) in lines {
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if !in_body {
                if l == SEPARATOR {
                    in_body = true;
                } else {
                    header.push(split_kv(n, l)?);
                }
                continue;
            }
            let mut parts = l.split_whitespace();
            let seq: u64 = parse_num(n, parts.next().unwrap_or(""), "sequence number")?;
            if seq != entries.len() as u64 + 1 {
                return Err(Error::parse(
                    n,
                    format!("sequence number {seq}, expected {}", entries.len() + 1),
                ));
            }
            let direction: Direction = parts
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|e: String| Error::parse(n, e))?;
            let label: StepLabel = parts
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|e: String| Error::parse(n, e))?;
            let values = parts
                .map(|v| parse_num(n, v, "value"))
                .collect::<Result<Vec<u64>>>()?;
            entries.push(TranscriptEntry {
                seq,
                direction,
                label,
                values,
            });
        }
        if !in_body {
            return Err(Error::parse(
                text.lines().count().max(1),
                format!("missing {SEPARATOR:?} before the entries"),
            ));
        }
        Ok(Self {
            header,
            transcript: Transcript::from_entries(entries)?,
        })
    }
}

/// Private key material for one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFile {
    pub group: GroupParams,
    pub keys: SessionKeys,
}

impl KeyFile {
    pub fn to_text(&self) -> String {
        let a: Vec<String> = self
            .keys
            .alice
            .exponents()
            .iter()
            .map(u64::to_string)
            .collect();
        format!(
            "{KEYS_MAGIC}\np={}\nn={}\nalice_f={}\nbob_t={}\n",
            self.group.modulus(),
            a.len(),
            a.join(","),
            self.keys.bob.exponent()
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (mut p, mut n, mut alice, mut bob) = (None, None, None, None);
        for (line, l) in content_lines(text) {
            let (k, v) = split_kv(line, l)?;
            match k.as_str() {
                "p" => p = Some((line, parse_num::<u64>(line, &v, "modulus")?)),
                "n" => n = Some((line, parse_num::<usize>(line, &v, "framework size")?)),
                "alice_f" => {
                    let exps = v
                        .split(',')
                        .map(|e| parse_num::<u64>(line, e.trim(), "exponent"))
                        .collect::<Result<Vec<_>>>()?;
                    alice = Some((line, exps));
                }
                "bob_t" => bob = Some((line, parse_num::<u64>(line, &v, "exponent")?)),
                other => return Err(Error::parse(line, format!("unknown key {other:?}"))),
            }
        }
        let last = text.lines().count().max(1);
        let missing = |what: &str| Error::parse(last, format!("missing {what}"));
        let (pl, p) = p.ok_or_else(|| missing("p"))?;
        let (al, alice) = alice.ok_or_else(|| missing("alice_f"))?;
        let (bl, bob) = bob.ok_or_else(|| missing("bob_t"))?;
        let at = |line: usize| move |e: Error| Error::parse(line, e.to_string());
        let group = GroupParams::new(p).map_err(at(pl))?;
        if let Some((nl, n)) = n {
            if n != alice.len() {
                return Err(Error::parse(
                    nl,
                    format!("n={n} but alice_f has {} exponents", alice.len()),
                ));
            }
        }
        Ok(Self {
            group,
            keys: SessionKeys {
                alice: LockKeyF::new(group, alice).map_err(at(al))?,
                bob: LockKeyT::new(group, bob).map_err(at(bl))?,
            },
        })
    }
}

/// One `label probability` pair per line.
pub fn parse_distribution(text: &str) -> Result<FiniteDistribution> {
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    let mut last = 1;
    for (line, l) in content_lines(text) {
        let mut parts = l.split_whitespace();
        let (Some(label), Some(p), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(line, "expected `label probability`"));
        };
        labels.push(label.to_owned());
        probs.push(parse_num::<f64>(line, p, "probability")?);
        last = line;
    }
    FiniteDistribution::new(labels, probs).map_err(|e| Error::parse(last, e.to_string()))
}

pub fn format_distribution(d: &FiniteDistribution) -> String {
    d.labels()
        .iter()
        .zip(d.probs())
        .map(|(l, p)| format!("{l} {p}\n"))
        .collect()
}

/// A `columns c1 c2 ..` line, then one `row p1 p2 ..` line per row outcome.
pub fn parse_joint(text: &str) -> Result<JointDistribution> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return Err(Error::parse(1, "empty joint table"));
    };
    let mut head = header.split_whitespace();
    if head.next() != Some("columns") {
        return Err(Error::parse(hl, "expected `columns` header"));
    }
    let cols: Vec<String> = head.map(str::to_owned).collect();
    let mut rows = Vec::new();
    let mut matrix = Vec::new();
    let mut last = hl;
    for (line, l) in lines {
        let mut parts = l.split_whitespace();
        let label = parts.next().unwrap_or_default();
        let row = parts
            .map(|p| parse_num::<f64>(line, p, "probability"))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != cols.len() {
            return Err(Error::parse(
                line,
                format!("{} entries for {} columns", row.len(), cols.len()),
            ));
        }
        rows.push(label.to_owned());
        matrix.push(row);
        last = line;
    }
    JointDistribution::new(rows, cols, matrix).map_err(|e| Error::parse(last, e.to_string()))
}

pub fn format_joint(j: &JointDistribution) -> String {
    let mut out = format!("columns {}\n", j.col_labels().join(" "));
    for (label, row) in j.row_labels().iter().zip(j.matrix()) {
        out.push_str(label);
        for p in row {
            let _ = write!(out, " {p}");
        }
        out.push('\n');
    }
    out
}

pub fn format_trial(r: &TrialRecord) -> String {
    format!(
        "trial={} truth={} guess={} resolved={} spent={}",
        r.trial,
        u8::from(r.truth),
        u8::from(r.guess),
        u8::from(r.resolved),
        r.spent
    )
}

pub fn format_summary(s: &ExperimentSummary) -> String {
    format!(
        "summary trials={} correct={} resolved={} accuracy={:.6} advantage={:.6} ci_low={:.6} ci_high={:.6} null_sigma={:.6}",
        s.trials, s.correct, s.resolved, s.accuracy, s.advantage, s.ci_low, s.ci_high, s.null_sigma
    )
}

pub fn format_experiment(r: &ExperimentReport) -> String {
    let mut out = format!("# strategy={} budget={}\n", r.strategy, r.budget);
    for t in &r.records {
        out.push_str(&format_trial(t));
        out.push('\n');
    }
    out.push_str(&format_summary(&r.summary));
    out.push('\n');
    out
}
