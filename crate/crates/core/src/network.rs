//! Gene-level views of scored pairs: quadrant tallies, hubs, degrees and
//! interaction-profile similarity.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::StrainPairRecord;
use crate::measures::{
    classify_quadrant, positive_type, InteractionScores, Measure, MeasureError, PositiveType,
    QuadrantClass, Sign, Thresholds,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("gene `{0}` has no scored pairs")]
    EmptyProfile(String),
    #[error("profiles share {0} positions; at least 3 are needed")]
    InsufficientOverlap(usize),
    #[error("a profile is constant over the shared positions")]
    UndefinedCorrelation,
    #[error("profiles have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Single and double mutant fitness of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitnessTriple {
    pub smf_query: f64,
    pub smf_array: f64,
    pub dmf: f64,
}

impl FitnessTriple {
    pub fn new(smf_query: f64, smf_array: f64, dmf: f64) -> Self {
        Self {
            smf_query,
            smf_array,
            dmf,
        }
    }
}

/// A gene pair with both scores and every derived call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredPair {
    pub gene_a: String,
    pub gene_b: String,
    pub fitness: FitnessTriple,
    pub scores: InteractionScores,
    pub p_value: f64,
    pub quadrant: QuadrantClass,
    pub sign_m: Sign,
    pub sign_j: Sign,
    pub pos_type_m: PositiveType,
    pub pos_type_j: PositiveType,
}

impl ScoredPair {
    /// Derives quadrant, signs and positive subtypes from precomputed scores.
    pub fn from_scores(
        gene_a: String,
        gene_b: String,
        fitness: FitnessTriple,
        scores: InteractionScores,
        p_value: f64,
        th: &Thresholds,
    ) -> Self {
        let quadrant = classify_quadrant(&scores, p_value, th);
        let sign_m = Sign::of_call(quadrant.m_interacting(), scores.m);
        let sign_j = Sign::of_call(quadrant.j_interacting(), scores.log_j);
        let typed = |sign: Sign| {
            if sign == Sign::Positive {
                positive_type(fitness.smf_query, fitness.smf_array, fitness.dmf)
            } else {
                PositiveType::NotApplicable
            }
        };
        Self {
            gene_a,
            gene_b,
            fitness,
            scores,
            p_value,
            quadrant,
            sign_m,
            sign_j,
            pos_type_m: typed(sign_m),
            pos_type_j: typed(sign_j),
        }
    }

    pub fn from_fitness(
        gene_a: String,
        gene_b: String,
        fitness: FitnessTriple,
        p_value: f64,
        th: &Thresholds,
    ) -> Result<Self, MeasureError> {
        let scores = InteractionScores::from_fitness(fitness.smf_query, fitness.smf_array, fitness.dmf)?;
        Ok(Self::from_scores(gene_a, gene_b, fitness, scores, p_value, th))
    }

    pub fn from_record(rec: &StrainPairRecord, th: &Thresholds) -> Result<Self, MeasureError> {
        Self::from_fitness(
            rec.query_gene.clone(),
            rec.array_gene.clone(),
            FitnessTriple::new(rec.smf_query, rec.smf_array, rec.dmf),
            rec.p_value,
            th,
        )
    }

    /// Re-derives every call under new thresholds, keeping the scores.
    pub fn reclassify(&self, th: &Thresholds) -> Self {
        Self::from_scores(
            self.gene_a.clone(),
            self.gene_b.clone(),
            self.fitness,
            self.scores,
            self.p_value,
            th,
        )
    }

    pub fn is_self_pair(&self) -> bool {
        self.gene_a == self.gene_b
    }

    pub fn interacting(&self, measure: Measure) -> bool {
        self.quadrant.interacting(measure)
    }

    pub fn sign(&self, measure: Measure) -> Sign {
        match measure {
            Measure::M => self.sign_m,
            Measure::J => self.sign_j,
        }
    }

    pub fn partner_of(&self, gene: &str) -> Option<&str> {
        if self.gene_a == gene {
            Some(&self.gene_b)
        } else if self.gene_b == gene {
            Some(&self.gene_a)
        } else {
            None
        }
    }
}

/// Per-gene tallies of incident pairs by quadrant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GeneQuadrantCounts {
    pub gene: String,
    pub n_mj: u64,
    pub n_mbarj: u64,
    pub n_mjbar: u64,
    pub n_mbarjbar: u64,
}

impl GeneQuadrantCounts {
    pub fn new(gene: impl Into<String>, n_mbarj: u64, n_mjbar: u64, n_mj: u64) -> Self {
        Self {
            gene: gene.into(),
            n_mj,
            n_mbarj,
            n_mjbar,
            n_mbarjbar: 0,
        }
    }

    fn bump(&mut self, q: QuadrantClass) {
        match q {
            QuadrantClass::MJ => self.n_mj += 1,
            QuadrantClass::MbarJ => self.n_mbarj += 1,
            QuadrantClass::MJbar => self.n_mjbar += 1,
            QuadrantClass::MbarJbar => self.n_mbarjbar += 1,
        }
    }

    pub fn get(&self, q: QuadrantClass) -> u64 {
        match q {
            QuadrantClass::MJ => self.n_mj,
            QuadrantClass::MbarJ => self.n_mbarj,
            QuadrantClass::MJbar => self.n_mjbar,
            QuadrantClass::MbarJbar => self.n_mbarjbar,
        }
    }

    /// Pairs called by `M`.
    pub fn m_total(&self) -> u64 {
        self.n_mj + self.n_mjbar
    }

    /// Pairs called by `J`.
    pub fn j_total(&self) -> u64 {
        self.n_mj + self.n_mbarj
    }

    pub fn discordant(&self) -> u64 {
        self.n_mbarj + self.n_mjbar
    }
}

pub type CountTable = BTreeMap<String, GeneQuadrantCounts>;

/// Tallies each pair into both incident genes. Self pairs are skipped.
pub fn quadrant_counts(pairs: &[ScoredPair]) -> CountTable {
    let mut counts = CountTable::new();
    for pair in pairs.iter().filter(|p| !p.is_self_pair()) {
        for gene in [&pair.gene_a, &pair.gene_b] {
            counts
                .entry(gene.clone())
                .or_insert_with(|| GeneQuadrantCounts {
                    gene: gene.clone(),
                    ..Default::default()
                })
                .bump(pair.quadrant);
        }
    }
    counts
}

/// Genes whose `J`-only calls dwarf everything `M` sees:
/// `MJ + MJbar < ratio * MbarJ`. Sorted by `MbarJ` descending.
pub fn exclusive_hubs(counts: &CountTable, ratio: f64) -> Vec<GeneQuadrantCounts> {
    let mut hubs: Vec<_> = counts
        .values()
        .filter(|c| ((c.n_mj + c.n_mjbar) as f64) < ratio * c.n_mbarj as f64)
        .cloned()
        .collect();
    hubs.sort_by(|a, b| b.n_mbarj.cmp(&a.n_mbarj).then_with(|| a.gene.cmp(&b.gene)));
    hubs
}

/// Hubs the two measures agree on: `MJ > min_common - 1` and
/// `MbarJ + MJbar < max_discord * MJ`. Sorted by `MJ` descending.
pub fn shared_hubs(counts: &CountTable, min_common: u64, max_discord: f64) -> Vec<GeneQuadrantCounts> {
    let mut hubs: Vec<_> = counts
        .values()
        .filter(|c| c.n_mj + 1 > min_common && (c.discordant() as f64) < max_discord * c.n_mj as f64)
        .cloned()
        .collect();
    hubs.sort_by(|a, b| b.n_mj.cmp(&a.n_mj).then_with(|| a.gene.cmp(&b.gene)));
    hubs
}

/// Mirror of [`exclusive_hubs`] for `M`: `MJbar > min_exclusive` and
/// `MJ + MbarJ < ratio * MJbar`. Sorted by `MJbar` descending.
pub fn symmetric_exclusive_hubs(
    counts: &CountTable,
    min_exclusive: u64,
    ratio: f64,
) -> Vec<GeneQuadrantCounts> {
    let mut hubs: Vec<_> = counts
        .values()
        .filter(|c| {
            c.n_mjbar > min_exclusive && ((c.n_mj + c.n_mbarj) as f64) < ratio * c.n_mjbar as f64
        })
        .cloned()
        .collect();
    hubs.sort_by(|a, b| b.n_mjbar.cmp(&a.n_mjbar).then_with(|| a.gene.cmp(&b.gene)));
    hubs
}

/// Non-hub genes interacting (under `measure`) with at least two distinct
/// hubs.
pub fn intermediary_connectors(
    hubs: &BTreeSet<String>,
    pairs: &[ScoredPair],
    measure: Measure,
) -> BTreeSet<String> {
    let mut touched: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for pair in pairs.iter().filter(|p| p.interacting(measure) && !p.is_self_pair()) {
        let (a, b) = (pair.gene_a.as_str(), pair.gene_b.as_str());
        match (hubs.contains(a), hubs.contains(b)) {
            (true, false) => {
                touched.entry(b).or_default().insert(a);
            }
            (false, true) => {
                touched.entry(a).or_default().insert(b);
            }
            _ => {}
        }
    }
    touched
        .into_iter()
        .filter(|(_, hs)| hs.len() >= 2)
        .map(|(g, _)| g.to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneDegree {
    pub gene: String,
    pub degree_m: u64,
    pub degree_j: u64,
}

/// Number of distinct interacting partners per gene under each measure.
pub fn degrees(pairs: &[ScoredPair]) -> Vec<GeneDegree> {
    let mut partners: BTreeMap<&str, [BTreeSet<&str>; 2]> = BTreeMap::new();
    for pair in pairs.iter().filter(|p| !p.is_self_pair()) {
        for (gene, other) in [(&pair.gene_a, &pair.gene_b), (&pair.gene_b, &pair.gene_a)] {
            let entry = partners.entry(gene).or_default();
            if pair.interacting(Measure::M) {
                entry[0].insert(other);
            }
            if pair.interacting(Measure::J) {
                entry[1].insert(other);
            }
        }
    }
    partners
        .into_iter()
        .map(|(gene, [m, j])| GeneDegree {
            gene: gene.to_string(),
            degree_m: m.len() as u64,
            degree_j: j.len() as u64,
        })
        .collect()
}

/// What goes into a profile entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileValues {
    /// Every scored partner contributes its raw score.
    #[default]
    Raw,
    /// Partners not called interacting under the measure contribute 0.
    Significant,
}

fn profile_value(pair: &ScoredPair, measure: Measure, mode: ProfileValues) -> f64 {
    match mode {
        ProfileValues::Raw => pair.scores.get(measure),
        ProfileValues::Significant if pair.interacting(measure) => pair.scores.get(measure),
        ProfileValues::Significant => 0.0,
    }
}

/// Picks the pair to use when a gene has several with the same partner.
fn prefer(new: &ScoredPair, old: &ScoredPair) -> bool {
    new.p_value < old.p_value
}

/// Dense profile of `gene` over `universe`; `None` marks partners without
/// a score and the gene's own position.
pub fn interaction_profile(
    gene: &str,
    pairs: &[ScoredPair],
    measure: Measure,
    universe: &[String],
) -> Result<Vec<Option<f64>>, NetworkError> {
    interaction_profile_with(gene, pairs, measure, universe, ProfileValues::Raw)
}

pub fn interaction_profile_with(
    gene: &str,
    pairs: &[ScoredPair],
    measure: Measure,
    universe: &[String],
    mode: ProfileValues,
) -> Result<Vec<Option<f64>>, NetworkError> {
    let mut chosen: HashMap<&str, &ScoredPair> = HashMap::new();
    let mut seen = false;
    for pair in pairs.iter().filter(|p| !p.is_self_pair()) {
        if let Some(partner) = pair.partner_of(gene) {
            seen = true;
            match chosen.get(partner) {
                Some(old) if !prefer(pair, old) => {}
                _ => {
                    chosen.insert(partner, pair);
                }
            }
        }
    }
    if !seen {
        return Err(NetworkError::EmptyProfile(gene.to_string()));
    }
    Ok(universe
        .iter()
        .map(|g| {
            if g == gene {
                None
            } else {
                chosen.get(g.as_str()).map(|p| profile_value(p, measure, mode))
            }
        })
        .collect())
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, NetworkError> {
    let n = xs.len();
    if n < 3 {
        return Err(NetworkError::InsufficientOverlap(n));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(NetworkError::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation over positions present in both profiles.
pub fn profile_pcc(p1: &[Option<f64>], p2: &[Option<f64>]) -> Result<f64, NetworkError> {
    if p1.len() != p2.len() {
        return Err(NetworkError::LengthMismatch(p1.len(), p2.len()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = p1
        .iter()
        .zip(p2)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    pearson(&xs, &ys)
}

/// Sparse profiles for every gene, keyed by position in a sorted universe.
pub struct ProfileSet {
    genes: Vec<String>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl ProfileSet {
    pub fn build(pairs: &[ScoredPair], measure: Measure, mode: ProfileValues) -> Self {
        let genes: Vec<String> = pairs
            .iter()
            .filter(|p| !p.is_self_pair())
            .flat_map(|p| [p.gene_a.clone(), p.gene_b.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, usize> =
            genes.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
        let mut chosen: Vec<HashMap<usize, &ScoredPair>> = vec![HashMap::new(); genes.len()];
        for pair in pairs.iter().filter(|p| !p.is_self_pair()) {
            let (ia, ib) = (index[pair.gene_a.as_str()], index[pair.gene_b.as_str()]);
            for (me, other) in [(ia, ib), (ib, ia)] {
                match chosen[me].get(&other) {
                    Some(old) if !prefer(pair, old) => {}
                    _ => {
                        chosen[me].insert(other, pair);
                    }
                }
            }
        }
        let rows = chosen
            .into_iter()
            .map(|m| {
                let mut row: Vec<(usize, f64)> = m
                    .into_iter()
                    .map(|(i, p)| (i, profile_value(p, measure, mode)))
                    .collect();
                row.sort_by_key(|(i, _)| *i);
                row
            })
            .collect();
        Self { genes, rows }
    }

    pub fn genes(&self) -> &[String] {
        &self.genes
    }

    pub fn pcc(&self, i: usize, j: usize) -> Result<f64, NetworkError> {
        let (a, b) = (&self.rows[i], &self.rows[j]);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        let (mut p, mut q) = (0, 0);
        while p < a.len() && q < b.len() {
            match a[p].0.cmp(&b[q].0) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    xs.push(a[p].1);
                    ys.push(b[q].1);
                    p += 1;
                    q += 1;
                }
            }
        }
        pearson(&xs, &ys)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarPair {
    pub gene_a: String,
    pub gene_b: String,
    pub pcc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityResult {
    pub pairs: Vec<SimilarPair>,
    /// Gene pairs whose correlation is undefined.
    pub skipped: u64,
}

type Correlations = Vec<(usize, usize, f64)>;

fn all_pccs(set: &ProfileSet) -> (Correlations, u64) {
    let n = set.genes.len();
    let per_row: Vec<(Correlations, u64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut found = Vec::new();
            let mut skipped = 0;
            for j in i + 1..n {
                match set.pcc(i, j) {
                    Ok(r) => found.push((i, j, r)),
                    Err(_) => skipped += 1,
                }
            }
            (found, skipped)
        })
        .collect();
    let skipped = per_row.iter().map(|(_, s)| s).sum();
    (per_row.into_iter().flat_map(|(f, _)| f).collect(), skipped)
}

/// All gene pairs with profile correlation strictly above `threshold`,
/// sorted by correlation descending then gene names.
pub fn similarity_pairs(
    pairs: &[ScoredPair],
    measure: Measure,
    threshold: f64,
    mode: ProfileValues,
) -> SimilarityResult {
    let set = ProfileSet::build(pairs, measure, mode);
    let (all, skipped) = all_pccs(&set);
    let mut out: Vec<SimilarPair> = all
        .into_iter()
        .filter(|(_, _, r)| *r > threshold)
        .map(|(i, j, pcc)| SimilarPair {
            gene_a: set.genes[i].clone(),
            gene_b: set.genes[j].clone(),
            pcc,
        })
        .collect();
    out.sort_by(|x, y| {
        y.pcc
            .total_cmp(&x.pcc)
            .then_with(|| x.gene_a.cmp(&y.gene_a))
            .then_with(|| x.gene_b.cmp(&y.gene_b))
    });
    SimilarityResult { pairs: out, skipped }
}

/// Both correlations for a gene pair; `None` where undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityRow {
    pub gene_a: String,
    pub gene_b: String,
    pub pcc_m: Option<f64>,
    pub pcc_j: Option<f64>,
}

/// Gene pairs above `threshold` under either measure, with both
/// correlations reported.
pub fn similarity_table(pairs: &[ScoredPair], threshold: f64, mode: ProfileValues) -> Vec<SimilarityRow> {
    let m = ProfileSet::build(pairs, Measure::M, mode);
    let j = ProfileSet::build(pairs, Measure::J, mode);
    debug_assert_eq!(m.genes, j.genes);
    let n = m.genes.len();
    let mut rows: Vec<SimilarityRow> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (m, j) = (&m, &j);
            (i + 1..n).filter_map(move |k| {
                let pm = m.pcc(i, k).ok();
                let pj = j.pcc(i, k).ok();
                let hit = pm.is_some_and(|r| r > threshold) || pj.is_some_and(|r| r > threshold);
                hit.then(|| SimilarityRow {
                    gene_a: m.genes[i].clone(),
                    gene_b: m.genes[k].clone(),
                    pcc_m: pm,
                    pcc_j: pj,
                })
            })
        })
        .collect();
    rows.sort_by(|x, y| {
        let key = |r: &SimilarityRow| r.pcc_m.unwrap_or(f64::NEG_INFINITY).max(r.pcc_j.unwrap_or(f64::NEG_INFINITY));
        key(y)
            .total_cmp(&key(x))
            .then_with(|| x.gene_a.cmp(&y.gene_a))
            .then_with(|| x.gene_b.cmp(&y.gene_b))
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sp(a: &str, b: &str, q: QuadrantClass) -> ScoredPair {
        let (m, log_j) = match q {
            QuadrantClass::MJ => (-0.2, -0.3),
            QuadrantClass::MbarJ => (0.05, 0.3),
            QuadrantClass::MJbar => (-0.2, -0.05),
            QuadrantClass::MbarJbar => (0.0, 0.0),
        };
        scored(a, b, m, log_j)
    }

    fn scored(a: &str, b: &str, m: f64, log_j: f64) -> ScoredPair {
        ScoredPair::from_scores(
            a.into(),
            b.into(),
            FitnessTriple::new(0.5, 0.5, 0.5),
            InteractionScores { m, log_j },
            0.001,
            &Thresholds::default(),
        )
    }

    #[test]
    fn scored_pair_calls() {
        let th = Thresholds::default();
        // positive under J only; f11 = 0.25 <= min(0.5, 0.6): masking
        let p = ScoredPair::from_fitness("A".into(), "B".into(), FitnessTriple::new(0.5, 0.6, 0.25), 0.01, &th)
            .unwrap();
        assert_eq!(p.quadrant, QuadrantClass::MbarJ);
        assert_eq!(p.sign_m, Sign::None);
        assert_eq!(p.sign_j, Sign::Positive);
        assert_eq!(p.pos_type_j, PositiveType::Masking);
        assert_eq!(p.pos_type_m, PositiveType::NotApplicable);
        // both positive, suppressor
        let p = ScoredPair::from_fitness("A".into(), "B".into(), FitnessTriple::new(0.5, 0.6, 0.9), 0.01, &th)
            .unwrap();
        assert_eq!(p.quadrant, QuadrantClass::MJ);
        assert_eq!(p.pos_type_m, PositiveType::Suppressor);
        assert_eq!(p.pos_type_j, PositiveType::Suppressor);
    }

    #[test]
    fn quadrant_count_examples() {
        let c = quadrant_counts(&[sp("g1", "g2", QuadrantClass::MJ)]);
        assert_eq!(c["g1"].n_mj, 1);
        assert_eq!(c["g2"].n_mj, 1);
        assert!(quadrant_counts(&[]).is_empty());
        let star = [
            sp("g1", "x", QuadrantClass::MJ),
            sp("y", "g1", QuadrantClass::MbarJ),
            sp("g1", "z", QuadrantClass::MJbar),
        ];
        let c = quadrant_counts(&star);
        let g1 = &c["g1"];
        assert_eq!((g1.n_mj, g1.n_mbarj, g1.n_mjbar, g1.n_mbarjbar), (1, 1, 1, 0));
        assert!(quadrant_counts(&[sp("g1", "g1", QuadrantClass::MJ)]).is_empty());
    }

    fn table(rows: &[GeneQuadrantCounts]) -> CountTable {
        rows.iter().map(|c| (c.gene.clone(), c.clone())).collect()
    }

    #[test]
    fn exclusive_hub_examples() {
        let t = table(&[
            GeneQuadrantCounts::new("trm112", 169, 5, 2),
            GeneQuadrantCounts::new("rpb4", 117, 6, 2),
            GeneQuadrantCounts::new("other", 50, 4, 2),
        ]);
        let hubs: Vec<_> = exclusive_hubs(&t, 0.1).into_iter().map(|c| c.gene).collect();
        assert_eq!(hubs, vec!["trm112", "rpb4"]);
    }

    #[test]
    fn shared_hub_examples() {
        let mut mcm3 = GeneQuadrantCounts::new("mcm3", 0, 1, 129);
        mcm3.n_mbarjbar = 40;
        let t = table(&[
            mcm3,
            GeneQuadrantCounts::new("edge", 0, 0, 99),
            GeneQuadrantCounts::new("noisy", 10, 5, 200),
            GeneQuadrantCounts::new("hundred", 0, 0, 100),
        ]);
        let hubs: Vec<_> = shared_hubs(&t, 100, 0.05).into_iter().map(|c| c.gene).collect();
        assert_eq!(hubs, vec!["mcm3", "hundred"]);
    }

    #[test]
    fn symmetric_hub_examples() {
        let t = table(&[
            GeneQuadrantCounts::new("a", 0, 20, 1),
            GeneQuadrantCounts::new("b", 0, 10, 0),
            GeneQuadrantCounts::new("c", 5, 30, 0),
        ]);
        let hubs: Vec<_> = symmetric_exclusive_hubs(&t, 10, 0.1).into_iter().map(|c| c.gene).collect();
        assert_eq!(hubs, vec!["a"]);
    }

    #[test]
    fn connector_examples() {
        let hubs: BTreeSet<String> = ["h1", "h2"].iter().map(|s| s.to_string()).collect();
        let pairs = [sp("h1", "c", QuadrantClass::MbarJ), sp("c", "h2", QuadrantClass::MJ)];
        assert_eq!(
            intermediary_connectors(&hubs, &pairs, Measure::J),
            BTreeSet::from(["c".to_string()])
        );
        // c interacts with h1 only under M
        assert!(intermediary_connectors(&hubs, &pairs, Measure::M).is_empty());
        assert!(intermediary_connectors(&hubs, &pairs[..1], Measure::J).is_empty());

        let hubs3: BTreeSet<String> = ["h1", "h2", "h3"].iter().map(|s| s.to_string()).collect();
        let pairs = [
            sp("h1", "c1", QuadrantClass::MJ),
            sp("c1", "h2", QuadrantClass::MJ),
            sp("h2", "c2", QuadrantClass::MJ),
            sp("c2", "h3", QuadrantClass::MbarJ),
            sp("h1", "h2", QuadrantClass::MJ),
        ];
        let got = intermediary_connectors(&hubs3, &pairs, Measure::J);
        assert_eq!(got, BTreeSet::from(["c1".to_string(), "c2".to_string()]));
        assert!(got.is_disjoint(&hubs3));
    }

    #[test]
    fn degree_counts_distinct_partners() {
        let pairs = [
            sp("a", "b", QuadrantClass::MJ),
            sp("b", "a", QuadrantClass::MbarJ),
            sp("a", "c", QuadrantClass::MJbar),
            sp("a", "a", QuadrantClass::MJ),
        ];
        let d = degrees(&pairs);
        let a = d.iter().find(|g| g.gene == "a").unwrap();
        assert_eq!((a.degree_m, a.degree_j), (2, 1));
    }

    #[test]
    fn profile_examples() {
        let universe: Vec<String> = ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
        let pairs = [scored("a", "b", 0.1, 0.2), scored("c", "a", 0.3, 0.4), scored("a", "e", -0.1, 0.5)];
        let prof = interaction_profile("a", &pairs, Measure::J, &universe).unwrap();
        assert_eq!(prof, vec![None, Some(0.2), Some(0.4), None, Some(0.5)]);
        let prof_m = interaction_profile("a", &pairs, Measure::M, &universe).unwrap();
        assert_eq!(prof_m[2], Some(0.3));
        assert_eq!(
            interaction_profile("zz", &pairs, Measure::M, &universe),
            Err(NetworkError::EmptyProfile("zz".into()))
        );
    }

    #[test]
    fn pcc_examples() {
        let p = |v: &[f64]| v.iter().map(|&x| Some(x)).collect::<Vec<_>>();
        let p1 = p(&[1.0, 2.0, 3.0, 4.0]);
        assert_abs_diff_eq!(profile_pcc(&p1, &p1).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(profile_pcc(&p1, &p(&[-1.0, -2.0, -3.0, -4.0])).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(profile_pcc(&p1, &p(&[2.0, 1.0, 4.0, 3.0])).unwrap(), 0.6, epsilon = 1e-15);
        let sparse = vec![Some(1.0), None, Some(3.0), Some(4.0)];
        assert!(profile_pcc(&sparse, &p(&[1.0, 2.0, 3.0, 9.0])).is_ok());
        let two = vec![Some(1.0), None, None, Some(4.0)];
        assert_eq!(profile_pcc(&two, &p1), Err(NetworkError::InsufficientOverlap(2)));
        assert_eq!(
            profile_pcc(&p(&[1.0, 1.0, 1.0, 1.0]), &p1),
            Err(NetworkError::UndefinedCorrelation)
        );
    }

    #[test]
    fn similarity_threshold_is_strict() {
        // g1 and g2 have identical profiles over x1..x3
        let mut pairs = Vec::new();
        for (x, v) in [("x1", 0.1), ("x2", 0.5), ("x3", -0.3)] {
            pairs.push(scored("g1", x, v, v));
            pairs.push(scored("g2", x, v, v));
        }
        let res = similarity_pairs(&pairs, Measure::J, 0.2, ProfileValues::Raw);
        let top = &res.pairs[0];
        assert_eq!((top.gene_a.as_str(), top.gene_b.as_str()), ("g1", "g2"));
        assert_abs_diff_eq!(top.pcc, 1.0, epsilon = 1e-12);
        let none = similarity_pairs(&pairs, Measure::J, 1.0, ProfileValues::Raw);
        assert!(none.pairs.is_empty());
    }
}
