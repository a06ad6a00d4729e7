//! Finite-distribution information measures, in bits.
//!
//! Conventions: in a [`JointDistribution`] rows are `X` and columns are the
//! conditioning variable `Y`. A conditional table `P(X | Y)` is one row of
//! probabilities over `X` per outcome of `Y`.

use crate::adversary::{universal_decipher_k, AttackBudget, AttackContext, Strategy, Transcript};
use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Tolerance when checking that a conditional table reproduces a marginal.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;
/// Largest one-time-pad message length that is enumerated.
pub const MAX_OTP_BITS: u32 = 12;

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn check_probs(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!(
            "{what} has no outcomes"
        )));
    }
    if let Some(&p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{what} has a bad probability {p}"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {total}, not 1"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        check_probs(&probs, "distribution")?;
        Ok(Self { labels, probs })
    }

    /// Outcomes labelled `0..len`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let labels = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::new(labels, probs)
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("uniform over nothing".into()));
        }
        Self::from_probs(vec![1.0 / size as f64; size])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// `P(X = row, Y = col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if matrix.len() != row_labels.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} rows for {} row labels",
                matrix.len(),
                row_labels.len()
            )));
        }
        if let Some(row) = matrix.iter().find(|r| r.len() != col_labels.len()) {
            return Err(Error::InvalidDistribution(format!(
                "row of width {} for {} columns",
                row.len(),
                col_labels.len()
            )));
        }
        let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
        check_probs(&flat, "joint distribution")?;
        Ok(Self {
            row_labels,
            col_labels,
            matrix,
        })
    }

    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let rows = (0..matrix.len()).map(|i| i.to_string()).collect();
        let cols = (0..matrix.first().map_or(0, Vec::len))
            .map(|i| i.to_string())
            .collect();
        Self::new(rows, cols, matrix)
    }

    /// `P(x, y) = P(y) P(x | y)`.
    pub fn from_conditional(
        x_labels: Vec<String>,
        given: &FiniteDistribution,
        conditional: &[Vec<f64>],
    ) -> Result<Self> {
        check_conditional(x_labels.len(), given, conditional)?;
        let matrix = (0..x_labels.len())
            .map(|x| {
                given
                    .probs
                    .iter()
                    .zip(conditional)
                    .map(|(py, row)| py * row[x])
                    .collect()
            })
            .collect();
        Self::new(x_labels, given.labels.clone(), matrix)
    }

    /// The independent coupling `P(x) P(y)`.
    pub fn product(x: &FiniteDistribution, y: &FiniteDistribution) -> Result<Self> {
        let matrix = x
            .probs
            .iter()
            .map(|px| y.probs.iter().map(|py| px * py).collect())
            .collect();
        Self::new(x.labels.clone(), y.labels.clone(), matrix)
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn x_marginal(&self) -> FiniteDistribution {
        FiniteDistribution {
            labels: self.row_labels.clone(),
            probs: self.matrix.iter().map(|r| r.iter().sum()).collect(),
        }
    }

    pub fn y_marginal(&self) -> FiniteDistribution {
        let mut probs = vec![0.0; self.col_labels.len()];
        for row in &self.matrix {
            for (acc, p) in probs.iter_mut().zip(row) {
                *acc += p;
            }
        }
        FiniteDistribution {
            labels: self.col_labels.clone(),
            probs,
        }
    }

    /// Rows and columns swapped.
    pub fn transpose(&self) -> JointDistribution {
        let matrix = (0..self.col_labels.len())
            .map(|c| self.matrix.iter().map(|r| r[c]).collect())
            .collect();
        JointDistribution {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            matrix,
        }
    }
}

fn check_conditional(
    x_len: usize,
    given: &FiniteDistribution,
    conditional: &[Vec<f64>],
) -> Result<()> {
    if conditional.len() != given.len() {
        return Err(Error::InconsistentMarginal(format!(
            "{} conditional rows for {} conditioning outcomes",
            conditional.len(),
            given.len()
        )));
    }
    for (row, label) in conditional.iter().zip(&given.labels) {
        if row.len() != x_len {
            return Err(Error::InconsistentMarginal(format!(
                "row for {label} has {} entries, expected {x_len}",
                row.len()
            )));
        }
        check_probs(row, &format!("conditional row for {label}"))?;
    }
    Ok(())
}

pub fn entropy(d: &FiniteDistribution) -> f64 {
    d.probs.iter().map(|&p| plogp(p)).sum()
}

pub fn joint_entropy(j: &JointDistribution) -> f64 {
    j.matrix.iter().flatten().map(|&p| plogp(p)).sum()
}

/// `H(X | Y) = H(X, Y) - H(Y)`.
pub fn conditional_entropy(j: &JointDistribution) -> f64 {
    (joint_entropy(j) - entropy(&j.y_marginal())).max(0.0)
}

/// `H(X) + H(Y) - H(X, Y)`; symmetric by construction.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    entropy(&j.x_marginal()) + entropy(&j.y_marginal()) - joint_entropy(j)
}

/// `H(X) - H(X | M)` from a marginal on `X`, a distribution on the
/// conditioning variable and the table `P(X | M)`. The table must reproduce
/// `x` as its marginal.
pub fn correspondent_information(
    x: &FiniteDistribution,
    given: &FiniteDistribution,
    conditional: &[Vec<f64>],
) -> Result<f64> {
    check_conditional(x.len(), given, conditional)?;
    for (i, &px) in x.probs.iter().enumerate() {
        let implied: f64 = given
            .probs
            .iter()
            .zip(conditional)
            .map(|(py, row)| py * row[i])
            .sum();
        if (implied - px).abs() > MARGINAL_TOLERANCE {
            return Err(Error::InconsistentMarginal(format!(
                "outcome {} has probability {px} but the conditional implies {implied}",
                x.labels[i]
            )));
        }
    }
    let h_given: f64 = given
        .probs
        .iter()
        .zip(conditional)
        .map(|(py, row)| py * row.iter().map(|&p| plogp(p)).sum::<f64>())
        .sum();
    Ok(entropy(x) - h_given)
}

/// Which side's information set is measured, and what it is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correspondent {
    /// `X_A` given the message.
    Alice,
    /// `X_B` given the message.
    Bob,
    /// `X_E` given the intercepted cipher.
    Eve,
}

impl Correspondent {
    pub fn symbol(self) -> &'static str {
        match self {
            Correspondent::Alice => "I_A",
            Correspondent::Bob => "I_B",
            Correspondent::Eve => "I_E",
        }
    }

    pub fn conditioned_on(self) -> &'static str {
        match self {
            Correspondent::Alice | Correspondent::Bob => "M",
            Correspondent::Eve => "C",
        }
    }
}

/// The loss `L` that zeroes Eve's information once subtracted from it:
/// `L = H(X_E) - H(X_E | C)`.
pub fn loss_for_perfect_secrecy(
    x_e: &FiniteDistribution,
    given_cipher: &FiniteDistribution,
    conditional: &[Vec<f64>],
) -> Result<f64> {
    correspondent_information(x_e, given_cipher, conditional)
}

/// `H(X) - H(X | Y) - L`, the lossy form used for both Bob and Eve.
pub fn information_with_explicit_loss(j: &JointDistribution, loss: f64) -> f64 {
    mutual_information(j) - loss
}

/// Bob's information as pure information minus unavoidable loss:
/// `(H(X_B) - H(X_B | M)) - (H(X_E) - H(X_E | M))`.
/// `bob` is the joint of `(X_B, M)`, `eve` the joint of `(X_E, M)`.
pub fn bob_information_with_loss(bob: &JointDistribution, eve: &JointDistribution) -> f64 {
    let pure = entropy(&bob.x_marginal()) - conditional_entropy(bob);
    let lost = entropy(&eve.x_marginal()) - conditional_entropy(eve);
    pure - lost
}

/// `I(M; C) <= tol`.
pub fn perfect_secrecy_check(j: &JointDistribution, tol: f64) -> bool {
    mutual_information(j) <= tol
}

/// Joint of `(M, C)` for a one-time pad on `m_bits`-bit messages with uniform
/// message and key. Dense, so limited to 8 bits.
pub fn one_time_pad_joint(m_bits: u32) -> Result<JointDistribution> {
    if m_bits == 0 || m_bits > 8 {
        return Err(Error::SpaceTooLarge(format!(
            "dense one-time-pad joint needs 1..=8 bits, got {m_bits}"
        )));
    }
    let size = 1usize << m_bits;
    let unit = 1.0 / (size * size) as f64;
    let mut matrix = vec![vec![0.0; size]; size];
    for (m, row) in matrix.iter_mut().enumerate() {
        for key in 0..size {
            row[m ^ key] += unit;
        }
    }
    let labels: Vec<String> = (0..size)
        .map(|v| format!("{v:0width$b}", width = m_bits as usize))
        .collect();
    JointDistribution::new(labels.clone(), labels, matrix)
}

/// `I(M; C)` for the one-time pad by exhaustive enumeration of every
/// (message, key) pair, one message row at a time.
pub fn one_time_pad_information(m_bits: u32) -> Result<f64> {
    if m_bits == 0 || m_bits > MAX_OTP_BITS {
        return Err(Error::SpaceTooLarge(format!(
            "one-time-pad enumeration needs 1..={MAX_OTP_BITS} bits, got {m_bits}"
        )));
    }
    let size = 1usize << m_bits;
    let p_m = 1.0 / size as f64;
    let p_k = 1.0 / size as f64;
    let mut c_marginal = vec![0.0; size];
    let mut h_joint = 0.0;
    let mut row = vec![0.0; size];
    for m in 0..size {
        row.iter_mut().for_each(|p| *p = 0.0);
        for key in 0..size {
            row[m ^ key] += p_m * p_k;
        }
        for (acc, &p) in c_marginal.iter_mut().zip(&row) {
            *acc += p;
            h_joint += plogp(p);
        }
    }
    let h_m = m_bits as f64;
    let h_c: f64 = c_marginal.iter().map(|&p| plogp(p)).sum();
    Ok(h_m + h_c - h_joint)
}

/// Printed with every budget sweep.
pub const LIMIT_CAVEAT: &str =
    "I_inf is not decidable: only the sampled budgets below are measured";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub budget: AttackBudget,
    pub spent: u64,
    /// `H(Δ_k(C))`.
    pub h_d: f64,
    pub i_k: f64,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnbreakabilityReport {
    pub strategy: Strategy,
    pub h_m: f64,
    pub points: Vec<SweepPoint>,
}

impl UnbreakabilityReport {
    /// Whether `I_k` never decreases along the sweep, in budget order.
    pub fn monotone(&self) -> bool {
        let mut pts: Vec<&SweepPoint> = self.points.iter().collect();
        pts.sort_by_key(|p| p.budget.0.unwrap_or(u64::MAX));
        pts.windows(2).all(|w| w[1].i_k >= w[0].i_k - 1e-12)
    }

    /// Largest measured `I_k`; a lower bound on what an unlimited attacker
    /// learns, never a certificate that nothing more can be learnt.
    pub fn best(&self) -> Option<&SweepPoint> {
        self.points.iter().max_by(|a, b| a.i_k.total_cmp(&b.i_k))
    }

    pub fn caveat(&self) -> &'static str {
        LIMIT_CAVEAT
    }
}

/// `I_k` at each budget on one fixed transcript. Without an explicit message
/// distribution the strategy's hypothesis space is taken as uniform.
pub fn unbreakability_report(
    message_space: Option<&FiniteDistribution>,
    t: &Transcript,
    strategy: Strategy,
    ctx: &AttackContext,
    budgets: &[AttackBudget],
) -> Result<UnbreakabilityReport> {
    let mut h_m = None;
    let mut points = Vec::with_capacity(budgets.len());
    for &budget in budgets {
        let d = universal_decipher_k(t, budget, strategy, ctx)?;
        let c = d.candidates();
        let hm = match (h_m, message_space) {
            (Some(h), _) => h,
            (None, Some(ms)) => {
                if ms.len() as u128 != c.space() {
                    return Err(Error::InvalidDistribution(format!(
                        "message space has {} outcomes but the strategy searches {}",
                        ms.len(),
                        c.space()
                    )));
                }
                entropy(ms)
            }
            (None, None) => c.space_bits(),
        };
        h_m = Some(hm);
        points.push(SweepPoint {
            budget,
            spent: c.spent(),
            h_d: c.entropy_bits(),
            i_k: hm - c.entropy_bits(),
            complete: c.complete(),
        });
    }
    Ok(UnbreakabilityReport {
        strategy,
        h_m: h_m.unwrap_or(0.0),
        points,
    })
}
