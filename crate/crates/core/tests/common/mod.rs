#![allow(dead_code)]

use epistasis_core::probmodel::{Axis, FactorLevels, JointDistribution, ObservableTable, TwoFactorEffectModel};
use rand::Rng;

pub fn levels(axis: Axis, prefix: &str, n: usize) -> FactorLevels {
    FactorLevels::new(axis, (0..n).map(|i| format!("{prefix}{i}")).collect()).unwrap()
}

/// Positive weights with a diagonal bump, so factors are correlated.
pub fn random_joint<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> JointDistribution {
    let strength: f64 = rng.random_range(0.0..5.0);
    let mut w: Vec<f64> = (0..rows * cols)
        .map(|i| {
            let (a, b) = (i / cols, i % cols);
            let base: f64 = rng.random_range(0.01..1.0);
            if a % cols == b % rows.max(1) {
                base * (1.0 + strength)
            } else {
                base
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    JointDistribution::new(rows, cols, w).unwrap()
}

pub fn random_survivals<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.05..=1.0)).collect()
}

pub fn random_model<R: Rng>(rng: &mut R) -> TwoFactorEffectModel {
    let (ra, rb) = (rng.random_range(2..=4), rng.random_range(2..=4));
    TwoFactorEffectModel::new(
        levels(Axis::A, "a", ra),
        levels(Axis::B, "b", rb),
        random_survivals(rng, ra),
        random_survivals(rng, rb),
        rng.random_range(0.05..=1.0),
        random_joint(rng, ra, rb),
    )
    .unwrap()
}

/// Arbitrary (generally non-factorised) table with positive cells.
pub fn random_table<R: Rng>(rng: &mut R) -> ObservableTable {
    let (ra, rb) = (rng.random_range(2..=4), rng.random_range(2..=4));
    ObservableTable::new(
        levels(Axis::A, "a", ra),
        levels(Axis::B, "b", rb),
        random_survivals(rng, ra * rb),
        None,
    )
    .unwrap()
}

/// Neutrality function evaluated straight from the joint distribution and
/// the survival grid, with no use of library helpers.
pub fn neutrality_oracle(survival: &[f64], joint: &[f64], rows: usize, cols: usize, x: usize, y: usize) -> f64 {
    let row_mass: f64 = (0..cols).map(|b| joint[x * cols + b]).sum();
    let col_mass: f64 = (0..rows).map(|a| joint[a * cols + y]).sum();
    // Pr(not E | x) and Pr(not E | y)
    let s_x: f64 = (0..cols).map(|b| survival[x * cols + b] * joint[x * cols + b]).sum::<f64>() / row_mass;
    let s_y: f64 = (0..rows).map(|a| survival[a * cols + y] * joint[a * cols + y]).sum::<f64>() / col_mass;
    let mut denom = 0.0;
    for a in 0..rows {
        for b in 0..cols {
            let pa_given_y = joint[a * cols + y] / col_mass;
            let pb_given_x = joint[x * cols + b] / row_mass;
            denom += survival[a * cols + b] * pa_given_y * pb_given_x;
        }
    }
    s_x * s_y / denom
}

/// `P(X >= k)` by enumerating every `draws`-subset of a population of `n`
/// whose first `successes` members are the category.
pub fn hypergeom_enumerated(n: u32, successes: u32, draws: u32, k: u32) -> (u64, u64) {
    let category: u32 = (1u32 << successes) - 1;
    let (mut hits, mut total) = (0u64, 0u64);
    for subset in 0u32..(1u32 << n) {
        if subset.count_ones() != draws {
            continue;
        }
        total += 1;
        if (subset & category).count_ones() >= k {
            hits += 1;
        }
    }
    (hits, total)
}
