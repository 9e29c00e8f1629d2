//! Two-factor effect model and its observable face.
//!
//! A [`TwoFactorEffectModel`] describes two factors `A` and `B` (each with a
//! reference level at index 0), the probability that each level does *not*
//! trigger its share of the effect, an exposure-independent background
//! survival, and the joint distribution of factor levels in the population.
//! Under no interaction the joint survival factorises:
//!
//! ```text
//! Pr(not E | x y) = Pr(not E_A | x) * Pr(not E_B | y) * Pr(not E_Z)
//! ```
//!
//! An [`ObservableTable`] only carries what can be measured: the survival
//! for every level pair and, optionally, the joint factor distribution.
//! The neutrality function, the `J` ratio and the log-linear decomposition
//! are all evaluated on observable tables.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Tolerance used for analytic identities (exact up to float rounding).
pub const ANALYTIC_TOL: f64 = 1e-12;

/// Tolerance for "sums to one" checks on caller-supplied conditionals.
pub const CONDITIONAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    A,
    B,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::A => f.write_str("A"),
            Axis::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown level `{level}` for factor {axis}")]
    LevelNotFound { axis: Axis, level: String },
    #[error("factor {axis} needs at least two levels, got {count}")]
    TooFewLevels { axis: Axis, count: usize },
    #[error("duplicate level `{level}` for factor {axis}")]
    DuplicateLevel { axis: Axis, level: String },
    #[error("{what} = {value} is outside (0, 1]")]
    InvalidSurvival { what: String, value: f64 },
    #[error("{what} = {value} is outside [0, 1]")]
    InvalidProbability { what: String, value: f64 },
    #[error("joint factor distribution sums to {0}, expected 1")]
    NotNormalized(f64),
    #[error("missing entry for level pair ({a}, {b})")]
    MissingEntry { a: String, b: String },
    #[error("expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("observable table carries no joint factor distribution")]
    MissingDistribution,
    #[error("level `{level}` of factor {axis} has zero probability mass")]
    ZeroMass { axis: Axis, level: String },
    #[error("neutrality denominator vanishes at ({x}, {y})")]
    DegenerateDistribution { x: String, y: String },
    #[error("zero survival at ({a}, {b}); logarithm undefined")]
    ZeroSurvival { a: String, b: String },
    #[error("conditional distribution sums to {0}, expected 1")]
    ConditionalNotNormalized(f64),
    #[error("`{level}` is the reference level of factor {axis}")]
    ReferenceLevel { axis: Axis, level: String },
    #[error("invalid specification: {0}")]
    Spec(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Ordered level names of one factor. Index 0 is the reference level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorLevels {
    axis: Axis,
    names: Vec<String>,
}

impl FactorLevels {
    pub fn new(axis: Axis, names: Vec<String>) -> Result<Self> {
        if names.len() < 2 {
            return Err(ModelError::TooFewLevels {
                axis,
                count: names.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(ModelError::DuplicateLevel {
                    axis,
                    level: name.clone(),
                });
            }
        }
        Ok(Self { axis, names })
    }

    /// Levels named `{prefix}0`, `{prefix}1`, ...
    pub fn numbered(axis: Axis, prefix: &str, count: usize) -> Result<Self> {
        Self::new(axis, (0..count).map(|i| format!("{prefix}{i}")).collect())
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn reference(&self) -> &str {
        &self.names[0]
    }

    pub fn index_of(&self, level: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == level)
            .ok_or_else(|| ModelError::LevelNotFound {
                axis: self.axis,
                level: level.to_string(),
            })
    }
}

/// Joint distribution `Pr(a b)` over the level grid, row-major in `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != rows * cols {
            return Err(ModelError::ShapeMismatch {
                expected: rows * cols,
                actual: probs.len(),
            });
        }
        for &p in &probs {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(ModelError::InvalidProbability {
                    what: "Pr(ab)".into(),
                    value: p,
                });
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > ANALYTIC_TOL {
            return Err(ModelError::NotNormalized(total));
        }
        Ok(Self { rows, cols, probs })
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        let p = 1.0 / (rows * cols) as f64;
        Self {
            rows,
            cols,
            probs: vec![p; rows * cols],
        }
    }

    /// Independent product of two marginals.
    pub fn product(pa: &[f64], pb: &[f64]) -> Result<Self> {
        let probs = pa
            .iter()
            .flat_map(|&x| pb.iter().map(move |&y| x * y))
            .collect();
        Self::new(pa.len(), pb.len(), probs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.cols + b]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn marginal_a(&self, a: usize) -> f64 {
        self.probs[a * self.cols..(a + 1) * self.cols].iter().sum()
    }

    pub fn marginal_b(&self, b: usize) -> f64 {
        (0..self.rows).map(|a| self.get(a, b)).sum()
    }

    /// `Pr(b | a)` for every `b`, or `None` when `Pr(a) = 0`.
    pub fn b_given_a(&self, a: usize) -> Option<Vec<f64>> {
        let mass = self.marginal_a(a);
        (mass > 0.0).then(|| (0..self.cols).map(|b| self.get(a, b) / mass).collect())
    }

    /// `Pr(a | b)` for every `a`, or `None` when `Pr(b) = 0`.
    pub fn a_given_b(&self, b: usize) -> Option<Vec<f64>> {
        let mass = self.marginal_b(b);
        (mass > 0.0).then(|| (0..self.rows).map(|a| self.get(a, b) / mass).collect())
    }
}

/// Generative model behind a two-factor experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFactorEffectModel {
    levels_a: FactorLevels,
    levels_b: FactorLevels,
    survival_a: Vec<f64>,
    survival_b: Vec<f64>,
    survival_z: f64,
    joint: JointDistribution,
}

fn check_survival(what: impl Fn() -> String, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidSurvival {
            what: what(),
            value,
        })
    }
}

impl TwoFactorEffectModel {
    pub fn new(
        levels_a: FactorLevels,
        levels_b: FactorLevels,
        survival_a: Vec<f64>,
        survival_b: Vec<f64>,
        survival_z: f64,
        joint: JointDistribution,
    ) -> Result<Self> {
        for (levels, surv) in [(&levels_a, &survival_a), (&levels_b, &survival_b)] {
            if surv.len() != levels.len() {
                return Err(ModelError::ShapeMismatch {
                    expected: levels.len(),
                    actual: surv.len(),
                });
            }
            for (name, &s) in levels.names().iter().zip(surv.iter()) {
                check_survival(|| format!("survival{}({name})", levels.axis()), s)?;
            }
        }
        check_survival(|| "survivalZ".to_string(), survival_z)?;
        if joint.rows() != levels_a.len() || joint.cols() != levels_b.len() {
            return Err(ModelError::ShapeMismatch {
                expected: levels_a.len() * levels_b.len(),
                actual: joint.rows() * joint.cols(),
            });
        }
        Ok(Self {
            levels_a,
            levels_b,
            survival_a,
            survival_b,
            survival_z,
            joint,
        })
    }

    pub fn levels_a(&self) -> &FactorLevels {
        &self.levels_a
    }

    pub fn levels_b(&self) -> &FactorLevels {
        &self.levels_b
    }

    pub fn survival_a(&self) -> &[f64] {
        &self.survival_a
    }

    pub fn survival_b(&self) -> &[f64] {
        &self.survival_b
    }

    pub fn survival_z(&self) -> f64 {
        self.survival_z
    }

    pub fn joint(&self) -> &JointDistribution {
        &self.joint
    }

    /// Same survivals, different population structure.
    pub fn with_joint(&self, joint: JointDistribution) -> Result<Self> {
        Self::new(
            self.levels_a.clone(),
            self.levels_b.clone(),
            self.survival_a.clone(),
            self.survival_b.clone(),
            self.survival_z,
            joint,
        )
    }

    pub fn null_joint_survival_at(&self, a: usize, b: usize) -> f64 {
        self.survival_a[a] * self.survival_b[b] * self.survival_z
    }

    /// Joint survival under the no-interaction factorisation.
    pub fn null_joint_survival(&self, x: &str, y: &str) -> Result<f64> {
        let a = self.levels_a.index_of(x)?;
        let b = self.levels_b.index_of(y)?;
        Ok(self.null_joint_survival_at(a, b))
    }

    /// Materialises the factorised survival over the whole level grid.
    pub fn observables(&self) -> ObservableTable {
        let survival = (0..self.levels_a.len())
            .flat_map(|a| (0..self.levels_b.len()).map(move |b| (a, b)))
            .map(|(a, b)| self.null_joint_survival_at(a, b))
            .collect();
        ObservableTable {
            levels_a: self.levels_a.clone(),
            levels_b: self.levels_b.clone(),
            survival,
            joint: Some(self.joint.clone()),
        }
    }

    /// Risk of the `B`-borne effect among carriers of level `x` of `A`,
    /// propagated through population structure alone:
    /// `sum_b Pr(E_B | b) Pr(b | x)`.
    pub fn propagated_risk_b(&self, x: &str) -> Result<f64> {
        let a = self.levels_a.index_of(x)?;
        let cond = self.joint.b_given_a(a).ok_or_else(|| ModelError::ZeroMass {
            axis: Axis::A,
            level: x.to_string(),
        })?;
        let risk: Vec<f64> = self.survival_b.iter().map(|s| 1.0 - s).collect();
        spurious_risk(&risk, &cond)
    }

    /// Unconditional risk of the `B`-borne effect, `sum_b Pr(E_B | b) Pr(b)`.
    pub fn unconditional_risk_b(&self) -> f64 {
        (0..self.levels_b.len())
            .map(|b| (1.0 - self.survival_b[b]) * self.joint.marginal_b(b))
            .sum()
    }

    pub fn to_spec(&self) -> ModelSpec {
        let named = |levels: &FactorLevels, vals: &[f64]| -> BTreeMap<String, f64> {
            levels
                .names()
                .iter()
                .cloned()
                .zip(vals.iter().copied())
                .collect()
        };
        let mut joint = BTreeMap::new();
        for (a, na) in self.levels_a.names().iter().enumerate() {
            let row: BTreeMap<String, f64> = self
                .levels_b
                .names()
                .iter()
                .enumerate()
                .map(|(b, nb)| (nb.clone(), self.joint.get(a, b)))
                .collect();
            joint.insert(na.clone(), row);
        }
        ModelSpec {
            levels_a: self.levels_a.names().to_vec(),
            levels_b: self.levels_b.names().to_vec(),
            survival_a: named(&self.levels_a, &self.survival_a),
            survival_b: named(&self.levels_b, &self.survival_b),
            survival_z: self.survival_z,
            joint_factor_dist: joint,
        }
    }

    /// SHA-256 of the canonical JSON form of the model, hex encoded.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(&self.to_spec()).expect("model spec serialises");
        hex::encode(Sha256::digest(&json))
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        let spec: ModelSpec =
            serde_json::from_slice(bytes).map_err(|e| ModelError::Spec(e.to_string()))?;
        Self::try_from(spec)
    }
}

/// JSON model specification file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ModelSpec {
    pub levels_a: Vec<String>,
    pub levels_b: Vec<String>,
    pub survival_a: BTreeMap<String, f64>,
    pub survival_b: BTreeMap<String, f64>,
    pub survival_z: f64,
    pub joint_factor_dist: BTreeMap<String, BTreeMap<String, f64>>,
}

fn lookup_levels(
    levels: &FactorLevels,
    map: &BTreeMap<String, f64>,
) -> Result<Vec<f64>> {
    for key in map.keys() {
        levels.index_of(key)?;
    }
    levels
        .names()
        .iter()
        .map(|n| {
            map.get(n).copied().ok_or_else(|| ModelError::LevelNotFound {
                axis: levels.axis(),
                level: n.clone(),
            })
        })
        .collect()
}

fn grid_from_nested(
    levels_a: &FactorLevels,
    levels_b: &FactorLevels,
    nested: &BTreeMap<String, BTreeMap<String, f64>>,
) -> Result<Vec<f64>> {
    for (a, row) in nested {
        levels_a.index_of(a)?;
        for b in row.keys() {
            levels_b.index_of(b)?;
        }
    }
    let mut out = Vec::with_capacity(levels_a.len() * levels_b.len());
    for a in levels_a.names() {
        for b in levels_b.names() {
            let v = nested
                .get(a)
                .and_then(|row| row.get(b))
                .copied()
                .ok_or_else(|| ModelError::MissingEntry {
                    a: a.clone(),
                    b: b.clone(),
                })?;
            out.push(v);
        }
    }
    Ok(out)
}

impl TryFrom<ModelSpec> for TwoFactorEffectModel {
    type Error = ModelError;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let levels_a = FactorLevels::new(Axis::A, spec.levels_a)?;
        let levels_b = FactorLevels::new(Axis::B, spec.levels_b)?;
        let survival_a = lookup_levels(&levels_a, &spec.survival_a)?;
        let survival_b = lookup_levels(&levels_b, &spec.survival_b)?;
        let grid = grid_from_nested(&levels_a, &levels_b, &spec.joint_factor_dist)?;
        let joint = JointDistribution::new(levels_a.len(), levels_b.len(), grid)?;
        Self::new(
            levels_a,
            levels_b,
            survival_a,
            survival_b,
            spec.survival_z,
            joint,
        )
    }
}

/// Observable survival table `Pr(not E | a b)` over the level grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTable {
    levels_a: FactorLevels,
    levels_b: FactorLevels,
    survival: Vec<f64>,
    joint: Option<JointDistribution>,
}

/// Result of checking a table against the neutrality function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NeutralityCheck {
    pub neutral: bool,
    pub max_deviation: f64,
    /// Level indices `(a, b)` of the worst cell.
    pub worst_cell: (usize, usize),
}

/// `log Pr(not E | x y) = mu + alpha_x + beta_y - delta_xy`, gauge fixed at
/// the reference levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearDecomposition {
    pub mu: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Row-major in `a`; zero on the reference row and column.
    pub delta: Vec<f64>,
}

impl LogLinearDecomposition {
    pub fn delta_at(&self, a: usize, b: usize) -> f64 {
        self.delta[a * self.beta.len() + b]
    }

    /// `exp(mu + alpha_a + beta_b - delta_ab)`.
    pub fn reconstruct(&self, a: usize, b: usize) -> f64 {
        (self.mu + self.alpha[a] + self.beta[b] - self.delta_at(a, b)).exp()
    }
}

impl ObservableTable {
    /// Builds a table from row-major survival values. Survival entries must
    /// lie in `[0, 1]`; zero cells are accepted here and rejected by the
    /// log-scale operations.
    pub fn new(
        levels_a: FactorLevels,
        levels_b: FactorLevels,
        survival: Vec<f64>,
        joint: Option<JointDistribution>,
    ) -> Result<Self> {
        let n = levels_a.len() * levels_b.len();
        if survival.len() != n {
            return Err(ModelError::ShapeMismatch {
                expected: n,
                actual: survival.len(),
            });
        }
        for (i, &s) in survival.iter().enumerate() {
            if !(s.is_finite() && (0.0..=1.0).contains(&s)) {
                return Err(ModelError::InvalidProbability {
                    what: format!(
                        "survival({}, {})",
                        levels_a.name(i / levels_b.len()),
                        levels_b.name(i % levels_b.len())
                    ),
                    value: s,
                });
            }
        }
        if let Some(j) = &joint {
            if j.rows() != levels_a.len() || j.cols() != levels_b.len() {
                return Err(ModelError::ShapeMismatch {
                    expected: n,
                    actual: j.rows() * j.cols(),
                });
            }
        }
        Ok(Self {
            levels_a,
            levels_b,
            survival,
            joint,
        })
    }

    /// 2x2 table with levels `abar, a` and `bbar, b`; cells given in the
    /// order `(abar,bbar), (a,bbar), (abar,b), (a,b)`.
    pub fn binary(cells: [f64; 4], joint: Option<JointDistribution>) -> Result<Self> {
        let la = FactorLevels::new(Axis::A, vec!["abar".into(), "a".into()])?;
        let lb = FactorLevels::new(Axis::B, vec!["bbar".into(), "b".into()])?;
        let [s00, s10, s01, s11] = cells;
        Self::new(la, lb, vec![s00, s01, s10, s11], joint)
    }

    pub fn levels_a(&self) -> &FactorLevels {
        &self.levels_a
    }

    pub fn levels_b(&self) -> &FactorLevels {
        &self.levels_b
    }

    pub fn joint(&self) -> Option<&JointDistribution> {
        self.joint.as_ref()
    }

    pub fn with_joint(mut self, joint: Option<JointDistribution>) -> Result<Self> {
        if let Some(j) = &joint {
            if j.rows() != self.levels_a.len() || j.cols() != self.levels_b.len() {
                return Err(ModelError::ShapeMismatch {
                    expected: self.survival.len(),
                    actual: j.rows() * j.cols(),
                });
            }
        }
        self.joint = joint;
        Ok(self)
    }

    pub fn survival_at(&self, a: usize, b: usize) -> f64 {
        self.survival[a * self.levels_b.len() + b]
    }

    pub fn survival(&self, x: &str, y: &str) -> Result<f64> {
        Ok(self.survival_at(self.levels_a.index_of(x)?, self.levels_b.index_of(y)?))
    }

    pub fn cells(&self) -> &[f64] {
        &self.survival
    }

    fn require_joint(&self) -> Result<&JointDistribution> {
        self.joint.as_ref().ok_or(ModelError::MissingDistribution)
    }

    fn b_given_a(&self, a: usize) -> Result<Vec<f64>> {
        self.require_joint()?
            .b_given_a(a)
            .ok_or_else(|| ModelError::ZeroMass {
                axis: Axis::A,
                level: self.levels_a.name(a).to_string(),
            })
    }

    fn a_given_b(&self, b: usize) -> Result<Vec<f64>> {
        self.require_joint()?
            .a_given_b(b)
            .ok_or_else(|| ModelError::ZeroMass {
                axis: Axis::B,
                level: self.levels_b.name(b).to_string(),
            })
    }

    /// Marginal survival of one level, `Pr(not E | x)`, weighting the row
    /// (or column) of the table by the conditional factor distribution.
    pub fn marginal_survival_at(&self, index: usize, axis: Axis) -> Result<f64> {
        Ok(match axis {
            Axis::A => {
                let cond = self.b_given_a(index)?;
                cond.iter()
                    .enumerate()
                    .map(|(b, p)| self.survival_at(index, b) * p)
                    .sum()
            }
            Axis::B => {
                let cond = self.a_given_b(index)?;
                cond.iter()
                    .enumerate()
                    .map(|(a, p)| self.survival_at(a, index) * p)
                    .sum()
            }
        })
    }

    pub fn marginal_survival(&self, level: &str, axis: Axis) -> Result<f64> {
        let index = match axis {
            Axis::A => self.levels_a.index_of(level)?,
            Axis::B => self.levels_b.index_of(level)?,
        };
        self.marginal_survival_at(index, axis)
    }

    /// Neutrality function `N(x, y)` at level indices.
    pub fn neutrality_at(&self, x: usize, y: usize) -> Result<f64> {
        let b_given_x = self.b_given_a(x)?;
        let a_given_y = self.a_given_b(y)?;
        let surv_x: f64 = b_given_x
            .iter()
            .enumerate()
            .map(|(b, p)| self.survival_at(x, b) * p)
            .sum();
        let surv_y: f64 = a_given_y
            .iter()
            .enumerate()
            .map(|(a, p)| self.survival_at(a, y) * p)
            .sum();
        let mut denom = 0.0;
        for (a, pa) in a_given_y.iter().enumerate() {
            for (b, pb) in b_given_x.iter().enumerate() {
                denom += self.survival_at(a, b) * pa * pb;
            }
        }
        if denom.is_nan() || denom <= 0.0 {
            return Err(ModelError::DegenerateDistribution {
                x: self.levels_a.name(x).to_string(),
                y: self.levels_b.name(y).to_string(),
            });
        }
        Ok(surv_x * surv_y / denom)
    }

    pub fn neutrality(&self, x: &str, y: &str) -> Result<f64> {
        self.neutrality_at(self.levels_a.index_of(x)?, self.levels_b.index_of(y)?)
    }

    /// Compares every cell with the neutrality function.
    pub fn is_neutral(&self, tol: f64) -> Result<NeutralityCheck> {
        let mut worst = (0, 0);
        let mut max_dev = 0.0f64;
        for a in 0..self.levels_a.len() {
            for b in 0..self.levels_b.len() {
                let dev = (self.survival_at(a, b) - self.neutrality_at(a, b)?).abs();
                if dev > max_dev {
                    max_dev = dev;
                    worst = (a, b);
                }
            }
        }
        Ok(NeutralityCheck {
            neutral: max_dev <= tol,
            max_deviation: max_dev,
            worst_cell: worst,
        })
    }

    fn positive_cell(&self, a: usize, b: usize) -> Result<f64> {
        let s = self.survival_at(a, b);
        if s > 0.0 {
            Ok(s)
        } else {
            Err(ModelError::ZeroSurvival {
                a: self.levels_a.name(a).to_string(),
                b: self.levels_b.name(b).to_string(),
            })
        }
    }

    /// `J_ab` at level indices; both must be non-reference.
    pub fn j_ratio_at(&self, a: usize, b: usize) -> Result<f64> {
        if a == 0 {
            return Err(ModelError::ReferenceLevel {
                axis: Axis::A,
                level: self.levels_a.reference().to_string(),
            });
        }
        if b == 0 {
            return Err(ModelError::ReferenceLevel {
                axis: Axis::B,
                level: self.levels_b.reference().to_string(),
            });
        }
        let s00 = self.positive_cell(0, 0)?;
        let s10 = self.positive_cell(a, 0)?;
        let s01 = self.positive_cell(0, b)?;
        let s11 = self.positive_cell(a, b)?;
        Ok(s10 * s01 / (s00 * s11))
    }

    pub fn j_ratio(&self, a: &str, b: &str) -> Result<f64> {
        self.j_ratio_at(self.levels_a.index_of(a)?, self.levels_b.index_of(b)?)
    }

    pub fn loglinear_decompose(&self) -> Result<LogLinearDecomposition> {
        let (na, nb) = (self.levels_a.len(), self.levels_b.len());
        let mut logs = Vec::with_capacity(na * nb);
        for a in 0..na {
            for b in 0..nb {
                logs.push(self.positive_cell(a, b)?.ln());
            }
        }
        let mu = logs[0];
        let alpha: Vec<f64> = (0..na).map(|a| logs[a * nb] - mu).collect();
        let beta: Vec<f64> = (0..nb).map(|b| logs[b] - mu).collect();
        let mut delta = vec![0.0; na * nb];
        for a in 1..na {
            for b in 1..nb {
                delta[a * nb + b] = alpha[a] + beta[b] - (logs[a * nb + b] - mu);
            }
        }
        Ok(LogLinearDecomposition {
            mu,
            alpha,
            beta,
            delta,
        })
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        let spec: TableSpec =
            serde_json::from_slice(bytes).map_err(|e| ModelError::Spec(e.to_string()))?;
        Self::try_from(spec)
    }
}

/// JSON form of an observable table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TableSpec {
    pub levels_a: Vec<String>,
    pub levels_b: Vec<String>,
    pub survival: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_factor_dist: Option<BTreeMap<String, BTreeMap<String, f64>>>,
}

impl TryFrom<TableSpec> for ObservableTable {
    type Error = ModelError;

    fn try_from(spec: TableSpec) -> Result<Self> {
        let levels_a = FactorLevels::new(Axis::A, spec.levels_a)?;
        let levels_b = FactorLevels::new(Axis::B, spec.levels_b)?;
        let survival = grid_from_nested(&levels_a, &levels_b, &spec.survival)?;
        let joint = match spec.joint_factor_dist {
            Some(nested) => Some(JointDistribution::new(
                levels_a.len(),
                levels_b.len(),
                grid_from_nested(&levels_a, &levels_b, &nested)?,
            )?),
            None => None,
        };
        Self::new(levels_a, levels_b, survival, joint)
    }
}

/// Effect spread from a causal factor `B` onto a correlated but inert
/// factor: `sum_b risk(b) * Pr(b | x)`.
pub fn spurious_risk(risk_b: &[f64], cond_dist: &[f64]) -> Result<f64> {
    if risk_b.len() != cond_dist.len() {
        return Err(ModelError::ShapeMismatch {
            expected: risk_b.len(),
            actual: cond_dist.len(),
        });
    }
    let total: f64 = cond_dist.iter().sum();
    if (total - 1.0).abs() > CONDITIONAL_TOL {
        return Err(ModelError::ConditionalNotNormalized(total));
    }
    Ok(risk_b.iter().zip(cond_dist).map(|(r, p)| r * p).sum())
}
