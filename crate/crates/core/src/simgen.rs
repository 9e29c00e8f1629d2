//! Synthetic populations drawn from a [`TwoFactorEffectModel`], empirical
//! survival tables, and a Monte-Carlo check of `log J` and neutrality.
//!
//! # Random stream discipline
//!
//! Samples are generated in fixed shards of [`SHARD_SIZE`] draws. Shard `i`
//! uses a `ChaCha8` generator seeded with `seed_from_u64(seed)` and switched
//! to stream `i`. Each sample consumes two `f64` draws in order: the first
//! picks the level pair by inverse CDF over the row-major joint
//! distribution, the second decides the effect (`effect` iff
//! `u >= survival`). Output is therefore independent of the number of
//! worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::probmodel::{
    Axis, FactorLevels, JointDistribution, ModelError, ObservableTable, TwoFactorEffectModel,
};

pub const SHARD_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("sample size must be at least 1")]
    EmptySample,
    #[error("perturbed survival {value} at ({a}, {b}) is outside (0, 1]")]
    Perturbation { a: String, b: String, value: f64 },
    #[error("perturbation multiplier at reference pair ({a}, {b}) must be 1, got {value}")]
    ReferenceMultiplier { a: String, b: String, value: f64 },
    #[error("level pair ({a}, {b}) was never sampled")]
    AbsentCell { a: String, b: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Multipliers on the null joint survival, one per level pair.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionPerturbation {
    rows: usize,
    cols: usize,
    multipliers: Vec<f64>,
}

impl InteractionPerturbation {
    pub fn identity(model: &TwoFactorEffectModel) -> Self {
        let (rows, cols) = (model.levels_a().len(), model.levels_b().len());
        Self {
            rows,
            cols,
            multipliers: vec![1.0; rows * cols],
        }
    }

    /// Identity perturbation with the given `(a, b, multiplier)` overrides.
    /// Pairs involving a reference level must keep multiplier 1.
    pub fn new(
        model: &TwoFactorEffectModel,
        entries: &[(&str, &str, f64)],
    ) -> Result<Self, SimError> {
        let mut p = Self::identity(model);
        for &(a, b, m) in entries {
            let ia = model.levels_a().index_of(a)?;
            let ib = model.levels_b().index_of(b)?;
            if (ia == 0 || ib == 0) && m != 1.0 {
                return Err(SimError::ReferenceMultiplier {
                    a: a.into(),
                    b: b.into(),
                    value: m,
                });
            }
            p.multipliers[ia * p.cols + ib] = m;
        }
        Ok(p)
    }

    /// Parses `{"a": {"b": multiplier}}`; missing pairs default to 1.
    pub fn from_json_slice(model: &TwoFactorEffectModel, bytes: &[u8]) -> Result<Self, SimError> {
        let nested: std::collections::BTreeMap<String, std::collections::BTreeMap<String, f64>> =
            serde_json::from_slice(bytes).map_err(|e| ModelError::Spec(e.to_string()))?;
        let entries: Vec<(&str, &str, f64)> = nested
            .iter()
            .flat_map(|(a, row)| row.iter().map(move |(b, &m)| (a.as_str(), b.as_str(), m)))
            .collect();
        Self::new(model, &entries)
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.multipliers[a * self.cols + b]
    }
}

/// Survival grid of a model, optionally perturbed, validated into (0, 1].
pub fn perturbed_survival(
    model: &TwoFactorEffectModel,
    perturbation: Option<&InteractionPerturbation>,
) -> Result<Vec<f64>, SimError> {
    let (rows, cols) = (model.levels_a().len(), model.levels_b().len());
    let mut out = Vec::with_capacity(rows * cols);
    for a in 0..rows {
        for b in 0..cols {
            let m = perturbation.map_or(1.0, |p| p.get(a, b));
            let s = model.null_joint_survival_at(a, b) * m;
            if !(s.is_finite() && s > 0.0 && s <= 1.0) {
                return Err(SimError::Perturbation {
                    a: model.levels_a().name(a).into(),
                    b: model.levels_b().name(b).into(),
                    value: s,
                });
            }
            out.push(s);
        }
    }
    Ok(out)
}

/// Observable table of a (perturbed) model.
pub fn perturbed_observables(
    model: &TwoFactorEffectModel,
    perturbation: Option<&InteractionPerturbation>,
) -> Result<ObservableTable, SimError> {
    let survival = perturbed_survival(model, perturbation)?;
    Ok(ObservableTable::new(
        model.levels_a().clone(),
        model.levels_b().clone(),
        survival,
        Some(model.joint().clone()),
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sample {
    pub level_a: u32,
    pub level_b: u32,
    pub effect: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub levels_a: FactorLevels,
    pub levels_b: FactorLevels,
    pub samples: Vec<Sample>,
    pub seed: u64,
    pub model_digest: String,
}

fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

pub fn sample_population(
    model: &TwoFactorEffectModel,
    perturbation: Option<&InteractionPerturbation>,
    n: usize,
    seed: u64,
) -> Result<SampleBatch, SimError> {
    if n == 0 {
        return Err(SimError::EmptySample);
    }
    let survival = perturbed_survival(model, perturbation)?;
    let cols = model.levels_b().len();
    let mut cdf = Vec::with_capacity(survival.len());
    let mut acc = 0.0;
    for &p in model.joint().probs() {
        acc += p;
        cdf.push(acc);
    }
    let last_live = model
        .joint()
        .probs()
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("joint distribution has positive mass");

    let shards = n.div_ceil(SHARD_SIZE);
    let samples: Vec<Sample> = (0..shards)
        .into_par_iter()
        .flat_map_iter(|shard| {
            let mut rng = shard_rng(seed, shard);
            let len = SHARD_SIZE.min(n - shard * SHARD_SIZE);
            let (cdf, survival) = (&cdf, &survival);
            (0..len).map(move |_| {
                let u: f64 = rng.random();
                let cell = cdf.partition_point(|&c| c <= u).min(last_live);
                let v: f64 = rng.random();
                Sample {
                    level_a: (cell / cols) as u32,
                    level_b: (cell % cols) as u32,
                    effect: v >= survival[cell],
                }
            })
        })
        .collect();
    Ok(SampleBatch {
        levels_a: model.levels_a().clone(),
        levels_b: model.levels_b().clone(),
        samples,
        seed,
        model_digest: model.digest(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CellEstimate {
    pub count: u64,
    pub effects: u64,
    pub survival: f64,
    /// Binomial standard error of `survival`.
    pub std_error: f64,
}

/// Survival estimates per level pair; unsampled pairs are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTable {
    pub levels_a: FactorLevels,
    pub levels_b: FactorLevels,
    pub cells: Vec<Option<CellEstimate>>,
    pub total: u64,
}

impl EmpiricalTable {
    pub fn cell(&self, a: usize, b: usize) -> Option<&CellEstimate> {
        self.cells[a * self.levels_b.len() + b].as_ref()
    }

    /// Pair frequencies as a joint distribution.
    pub fn joint_frequencies(&self) -> Result<JointDistribution, ModelError> {
        let probs = self
            .cells
            .iter()
            .map(|c| c.map_or(0.0, |c| c.count as f64 / self.total as f64))
            .collect();
        // frequencies may miss 1 by a few ulps
        let probs = renormalise(probs);
        JointDistribution::new(self.levels_a.len(), self.levels_b.len(), probs)
    }

    /// Observable table; fails if any cell is absent.
    pub fn to_observable(&self) -> Result<ObservableTable, SimError> {
        let mut survival = Vec::with_capacity(self.cells.len());
        for (i, c) in self.cells.iter().enumerate() {
            match c {
                Some(c) => survival.push(c.survival),
                None => {
                    return Err(SimError::AbsentCell {
                        a: self.levels_a.name(i / self.levels_b.len()).into(),
                        b: self.levels_b.name(i % self.levels_b.len()).into(),
                    })
                }
            }
        }
        Ok(ObservableTable::new(
            self.levels_a.clone(),
            self.levels_b.clone(),
            survival,
            Some(self.joint_frequencies()?),
        )?)
    }
}

fn renormalise(mut probs: Vec<f64>) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        for p in &mut probs {
            *p /= total;
        }
    }
    probs
}

pub fn empirical_table(batch: &SampleBatch) -> EmpiricalTable {
    let cols = batch.levels_b.len();
    let n_cells = batch.levels_a.len() * cols;
    let mut counts = vec![(0u64, 0u64); n_cells];
    for s in &batch.samples {
        let c = &mut counts[s.level_a as usize * cols + s.level_b as usize];
        c.0 += 1;
        c.1 += u64::from(s.effect);
    }
    let cells = counts
        .into_iter()
        .map(|(count, effects)| {
            (count > 0).then(|| {
                let survival = 1.0 - effects as f64 / count as f64;
                CellEstimate {
                    count,
                    effects,
                    survival,
                    std_error: (survival * (1.0 - survival) / count as f64).sqrt(),
                }
            })
        })
        .collect();
    EmpiricalTable {
        levels_a: batch.levels_a.clone(),
        levels_b: batch.levels_b.clone(),
        cells,
        total: batch.samples.len() as u64,
    }
}

/// Monte-Carlo versus analytic `log J` for one non-reference level pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairLogJ {
    pub level_a: String,
    pub level_b: String,
    pub empirical_log_j: f64,
    /// Delta-method standard error of `empirical_log_j`.
    pub standard_error: f64,
    pub analytic_log_j: f64,
    /// `(empirical - analytic) / standard_error`.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleReport {
    pub model_digest: String,
    pub seed: u64,
    pub n: u64,
    pub pairs: Vec<PairLogJ>,
    /// `max |Pr(not E | xy) - N(x, y)|` on the empirical table.
    pub empirical_neutrality_deviation: f64,
    /// Same on the analytic (perturbed) table.
    pub analytic_neutrality_deviation: f64,
    pub cells: Vec<CellReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CellReport {
    pub level_a: String,
    pub level_b: String,
    pub analytic_survival: f64,
    #[serde(flatten)]
    pub estimate: CellEstimate,
}

/// `Var(log S_hat) ~ (1 - S) / (n S)` for a binomial survival estimate.
fn log_variance(c: &CellEstimate) -> f64 {
    (1.0 - c.survival) / (c.count as f64 * c.survival)
}

pub fn oracle_report(
    model: &TwoFactorEffectModel,
    perturbation: Option<&InteractionPerturbation>,
    n: usize,
    seed: u64,
) -> Result<OracleReport, SimError> {
    let analytic = perturbed_observables(model, perturbation)?;
    let batch = sample_population(model, perturbation, n, seed)?;
    let emp = empirical_table(&batch);
    let observed = emp.to_observable()?;
    let (rows, cols) = (model.levels_a().len(), model.levels_b().len());

    let mut pairs = Vec::new();
    for a in 1..rows {
        for b in 1..cols {
            let empirical_log_j = observed.j_ratio_at(a, b)?.ln();
            let analytic_log_j = analytic.j_ratio_at(a, b)?.ln();
            let var: f64 = [(0, 0), (a, 0), (0, b), (a, b)]
                .into_iter()
                .map(|(x, y)| log_variance(emp.cell(x, y).expect("full grid checked")))
                .sum();
            let standard_error = var.sqrt();
            pairs.push(PairLogJ {
                level_a: model.levels_a().name(a).into(),
                level_b: model.levels_b().name(b).into(),
                empirical_log_j,
                standard_error,
                analytic_log_j,
                z_score: (empirical_log_j - analytic_log_j) / standard_error,
            });
        }
    }
    let cells = (0..rows)
        .flat_map(|a| (0..cols).map(move |b| (a, b)))
        .map(|(a, b)| CellReport {
            level_a: model.levels_a().name(a).into(),
            level_b: model.levels_b().name(b).into(),
            analytic_survival: analytic.survival_at(a, b),
            estimate: *emp.cell(a, b).expect("full grid checked"),
        })
        .collect();
    Ok(OracleReport {
        model_digest: batch.model_digest,
        seed,
        n: n as u64,
        pairs,
        empirical_neutrality_deviation: observed.is_neutral(0.0)?.max_deviation,
        analytic_neutrality_deviation: analytic.is_neutral(0.0)?.max_deviation,
        cells,
    })
}

/// 2x2 model with levels `abar, a` / `bbar, b`, reference survivals 1.
pub fn binary_model(
    survival_a: f64,
    survival_b: f64,
    survival_z: f64,
    joint: JointDistribution,
) -> Result<TwoFactorEffectModel, ModelError> {
    TwoFactorEffectModel::new(
        FactorLevels::new(Axis::A, vec!["abar".into(), "a".into()])?,
        FactorLevels::new(Axis::B, vec!["bbar".into(), "b".into()])?,
        vec![1.0, survival_a],
        vec![1.0, survival_b],
        survival_z,
        joint,
    )
}
