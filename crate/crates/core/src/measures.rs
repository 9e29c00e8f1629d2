//! Fitness-based interaction scores and their classification.
//!
//! Fitness values are growth rates relative to wild type (`lambda_00 = 1`):
//! `smf_query = lambda_01`, `smf_array = lambda_10`, `dmf = lambda_11`.
//!
//! * `M = lambda_11 - lambda_01 * lambda_10`, multiplicative on rates.
//! * `log J = (1 + lambda_11) - (lambda_01 + lambda_10)`, additive on rates;
//!   this is the log of the survival ratio `J` when each strain's
//!   non-duplication probability over one wild-type generation is
//!   `exp(-lambda)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::ScoredPair;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("invalid fitness value {0}: must be finite")]
    InvalidFitness(f64),
    #[error("rate and time must satisfy rate >= 0 and time > 0 (got rate {rate}, time {time})")]
    Domain { rate: f64, time: f64 },
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("cannot calibrate on an empty dataset")]
    EmptyDataset,
    #[error("unrecognised {kind} `{value}`")]
    Unrecognised { kind: &'static str, value: String },
}

fn check_finite(values: [f64; 3]) -> Result<(), MeasureError> {
    match values.into_iter().find(|v| !v.is_finite()) {
        Some(bad) => Err(MeasureError::InvalidFitness(bad)),
        None => Ok(()),
    }
}

/// Multiplicative-on-rate score `lambda_11 - lambda_01 * lambda_10`.
pub fn m_score(smf_query: f64, smf_array: f64, dmf: f64) -> Result<f64, MeasureError> {
    check_finite([smf_query, smf_array, dmf])?;
    Ok(dmf - smf_query * smf_array)
}

/// Additive-rate score `(1 + lambda_11) - (lambda_01 + lambda_10)`.
pub fn j_score(smf_query: f64, smf_array: f64, dmf: f64) -> Result<f64, MeasureError> {
    check_finite([smf_query, smf_array, dmf])?;
    Ok((1.0 + dmf) - (smf_query + smf_array))
}

/// Probability of at least one duplication (`effect`) and its complement
/// (`survival`) for a population growing at `rate` over `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOutcome {
    pub effect: f64,
    pub survival: f64,
}

pub fn survival_from_rate(rate: f64, time: f64) -> Result<RateOutcome, MeasureError> {
    if !(rate.is_finite() && rate >= 0.0 && time.is_finite() && time > 0.0) {
        return Err(MeasureError::Domain { rate, time });
    }
    let survival = (-rate * time).exp();
    Ok(RateOutcome {
        effect: -(-rate * time).exp_m1(),
        survival,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionScores {
    pub m: f64,
    pub log_j: f64,
}

impl InteractionScores {
    pub fn from_fitness(smf_query: f64, smf_array: f64, dmf: f64) -> Result<Self, MeasureError> {
        Ok(Self {
            m: m_score(smf_query, smf_array, dmf)?,
            log_j: j_score(smf_query, smf_array, dmf)?,
        })
    }

    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::M => self.m,
            Measure::J => self.log_j,
        }
    }
}

/// Classification thresholds. Comparisons are strict: `|M| > m`,
/// `|log J| > j`, `p < p_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    m: f64,
    j: f64,
    p_max: f64,
}

impl Thresholds {
    pub const DEFAULT_M: f64 = 0.08;
    pub const DEFAULT_J: f64 = 0.0886;
    pub const DEFAULT_P_MAX: f64 = 0.05;

    pub fn new(m: f64, j: f64, p_max: f64) -> Result<Self, MeasureError> {
        if !(m.is_finite() && m > 0.0) {
            return Err(MeasureError::InvalidThresholds(format!(
                "M threshold must be positive, got {m}"
            )));
        }
        if !(j.is_finite() && j > 0.0) {
            return Err(MeasureError::InvalidThresholds(format!(
                "J threshold must be positive, got {j}"
            )));
        }
        if !(p_max > 0.0 && p_max <= 1.0) {
            return Err(MeasureError::InvalidThresholds(format!(
                "p-value cutoff must be in (0, 1], got {p_max}"
            )));
        }
        Ok(Self { m, j, p_max })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn is_significant(&self, p_value: f64) -> bool {
        p_value < self.p_max
    }

    pub fn m_interacting(&self, scores: &InteractionScores, p_value: f64) -> bool {
        scores.m.abs() > self.m && self.is_significant(p_value)
    }

    pub fn j_interacting(&self, scores: &InteractionScores, p_value: f64) -> bool {
        scores.log_j.abs() > self.j && self.is_significant(p_value)
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            m: Self::DEFAULT_M,
            j: Self::DEFAULT_J,
            p_max: Self::DEFAULT_P_MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    M,
    J,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::M => "M",
            Measure::J => "J",
        })
    }
}

impl FromStr for Measure {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "M" | "m" => Ok(Measure::M),
            "J" | "j" => Ok(Measure::J),
            other => Err(MeasureError::Unrecognised {
                kind: "measure",
                value: other.to_string(),
            }),
        }
    }
}

/// Which measures call a pair interacting. The `bar` suffix marks the
/// measure that does *not*.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuadrantClass {
    MJ,
    MbarJ,
    MJbar,
    MbarJbar,
}

impl QuadrantClass {
    pub const ALL: [QuadrantClass; 4] = [
        QuadrantClass::MJ,
        QuadrantClass::MbarJ,
        QuadrantClass::MJbar,
        QuadrantClass::MbarJbar,
    ];

    pub fn from_calls(m_interacting: bool, j_interacting: bool) -> Self {
        match (m_interacting, j_interacting) {
            (true, true) => QuadrantClass::MJ,
            (false, true) => QuadrantClass::MbarJ,
            (true, false) => QuadrantClass::MJbar,
            (false, false) => QuadrantClass::MbarJbar,
        }
    }

    pub fn m_interacting(self) -> bool {
        matches!(self, QuadrantClass::MJ | QuadrantClass::MJbar)
    }

    pub fn j_interacting(self) -> bool {
        matches!(self, QuadrantClass::MJ | QuadrantClass::MbarJ)
    }

    pub fn interacting(self, measure: Measure) -> bool {
        match measure {
            Measure::M => self.m_interacting(),
            Measure::J => self.j_interacting(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QuadrantClass::MJ => "MJ",
            QuadrantClass::MbarJ => "MbarJ",
            QuadrantClass::MJbar => "MJbar",
            QuadrantClass::MbarJbar => "MbarJbar",
        }
    }
}

impl fmt::Display for QuadrantClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuadrantClass {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QuadrantClass::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| MeasureError::Unrecognised {
                kind: "quadrant",
                value: s.to_string(),
            })
    }
}

pub fn classify_quadrant(scores: &InteractionScores, p_value: f64, th: &Thresholds) -> QuadrantClass {
    QuadrantClass::from_calls(th.m_interacting(scores, p_value), th.j_interacting(scores, p_value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
    None,
}

impl Sign {
    /// Sign of a score that has been called interacting; `None` otherwise.
    pub fn of_call(interacting: bool, score: f64) -> Self {
        match (interacting, score > 0.0, score < 0.0) {
            (false, _, _) => Sign::None,
            (true, true, _) => Sign::Positive,
            (true, _, true) => Sign::Negative,
            _ => Sign::None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
            Sign::None => "none",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PositiveType {
    Masking,
    Suppressor,
    NotApplicable,
}

impl PositiveType {
    pub fn as_str(self) -> &'static str {
        match self {
            PositiveType::Masking => "masking",
            PositiveType::Suppressor => "suppressor",
            PositiveType::NotApplicable => "na",
        }
    }
}

impl fmt::Display for PositiveType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Subtype of a positive interaction: suppressor when the double mutant
/// is strictly fitter than the sicker single mutant, masking otherwise.
pub fn positive_type(f01: f64, f10: f64, f11: f64) -> PositiveType {
    if f11 > f01.min(f10) {
        PositiveType::Suppressor
    } else {
        PositiveType::Masking
    }
}

/// Outcome of matching the `J` cutoff to the number of `M` calls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Calibration {
    /// Smallest cutoff with no more `J` calls than `M` calls.
    pub tau: f64,
    /// Pairs with `|M| > m` and `p < p_max`.
    pub m_count: usize,
    /// Pairs with `|log J| > tau` and `p < p_max`.
    pub j_count: usize,
    /// Pairs with `p < p_max`.
    pub significant: usize,
    /// Set when several `|log J|` values sit on the cutoff, so the
    /// counts could not be matched exactly.
    pub tie_at_boundary: bool,
}

impl Calibration {
    pub fn exact(&self) -> bool {
        self.m_count == self.j_count
    }
}

/// Finds the `J` cutoff that calls as many significant pairs as `M` does.
///
/// With the significant `|log J|` values sorted descending as
/// `v_1 >= v_2 >= ...` and `k` the number of `M` calls, the smallest cutoff
/// admitting at most `k` pairs is `v_{k+1}` (or `0` when every significant
/// pair may be called). Ties at `v_{k+1}` leave fewer than `k` calls.
pub fn calibrate_j_threshold(pairs: &[ScoredPair], th: &Thresholds) -> Result<Calibration, MeasureError> {
    if pairs.is_empty() {
        return Err(MeasureError::EmptyDataset);
    }
    let mut abs_j: Vec<f64> = Vec::new();
    let mut m_count = 0;
    for pair in pairs.iter().filter(|p| th.is_significant(p.p_value)) {
        abs_j.push(pair.scores.log_j.abs());
        if pair.scores.m.abs() > th.m() {
            m_count += 1;
        }
    }
    abs_j.sort_by(|a, b| b.total_cmp(a));
    let significant = abs_j.len();
    let tau = if m_count >= significant {
        0.0
    } else {
        abs_j[m_count]
    };
    let j_count = abs_j.iter().take_while(|&&v| v > tau).count();
    let tie_at_boundary =
        m_count > 0 && m_count < significant && abs_j[m_count - 1] == abs_j[m_count];
    if tie_at_boundary {
        tracing::warn!(
            tau,
            m_count,
            j_count,
            "tied |log J| values at the calibrated cutoff; J calls fall short of M calls"
        );
    }
    Ok(Calibration {
        tau,
        m_count,
        j_count,
        significant,
        tie_at_boundary,
    })
}
