//! Functional categories: catalog loading, co-annotation segregation of
//! interaction calls, and hypergeometric enrichment with Holm-Bonferroni
//! correction.
//!
//! The catalog interchange format is a two-column TSV, `gene<TAB>category`,
//! UTF-8, with `#` comment lines. Gene names are uppercased on load so they
//! match the ids produced by [`crate::ingest::extract_gene`]. A GO
//! association file can be reduced to this layout with e.g.
//! `awk -F'\t' '!/^!/ && $9=="P" {print toupper($3)"\t"$5}' genes.gaf`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::measures::{QuadrantClass, Sign};
use crate::network::ScoredPair;

pub mod hypergeom;

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("I/O error near line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: io::Error,
    },
    #[error("selected gene `{0}` is not in the universe")]
    NotInUniverse(String),
    #[error("the gene universe is empty")]
    EmptyUniverse,
    #[error("unknown annotation kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AnnotationKind {
    #[serde(rename = "GO_BP")]
    GoBp,
    #[serde(rename = "KEGG")]
    Kegg,
    #[serde(rename = "complex")]
    Complex,
}

impl AnnotationKind {
    /// Default minimum number of jointly called co-annotated pairs for a
    /// category to be reported.
    pub fn default_min_pairs(self) -> u64 {
        match self {
            AnnotationKind::GoBp => 500,
            AnnotationKind::Kegg | AnnotationKind::Complex => 10,
        }
    }
}

impl fmt::Display for AnnotationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnnotationKind::GoBp => "GO_BP",
            AnnotationKind::Kegg => "KEGG",
            AnnotationKind::Complex => "complex",
        })
    }
}

impl FromStr for AnnotationKind {
    type Err = AnnotateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "go_bp" | "go" | "bp" => Ok(AnnotationKind::GoBp),
            "kegg" => Ok(AnnotationKind::Kegg),
            "complex" | "complexes" => Ok(AnnotationKind::Complex),
            _ => Err(AnnotateError::UnknownKind(s.to_string())),
        }
    }
}

/// Gene/category membership in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationCatalog {
    kind: AnnotationKind,
    by_category: BTreeMap<String, BTreeSet<String>>,
    by_gene: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnnotationLoadReport {
    pub lines: u64,
    pub memberships: u64,
    pub duplicates: u64,
    pub malformed: u64,
}

impl AnnotationCatalog {
    pub fn new(kind: AnnotationKind) -> Self {
        Self {
            kind,
            by_category: BTreeMap::new(),
            by_gene: BTreeMap::new(),
        }
    }

    /// Adds a membership; returns `false` if it was already present.
    pub fn insert(&mut self, gene: &str, category: &str) -> bool {
        let gene = gene.to_ascii_uppercase();
        let fresh = self
            .by_category
            .entry(category.to_string())
            .or_default()
            .insert(gene.clone());
        self.by_gene.entry(gene).or_default().insert(category.to_string());
        fresh
    }

    pub fn kind(&self) -> AnnotationKind {
        self.kind
    }

    pub fn is_empty(&self) -> bool {
        self.by_category.is_empty()
    }

    pub fn categories(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.by_category.iter()
    }

    pub fn genes_of(&self, category: &str) -> Option<&BTreeSet<String>> {
        self.by_category.get(category)
    }

    pub fn categories_of(&self, gene: &str) -> Option<&BTreeSet<String>> {
        self.by_gene.get(gene)
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (cat, genes) in &self.by_category {
            for g in genes {
                writeln!(out, "{g}\t{cat}")?;
            }
        }
        Ok(())
    }
}

/// Reads a `gene<TAB>category` file. Malformed lines are counted and
/// skipped; an empty catalog only logs a warning.
pub fn load_annotations<R: BufRead>(
    mut reader: R,
    kind: AnnotationKind,
) -> Result<(AnnotationCatalog, AnnotationLoadReport), AnnotateError> {
    let mut catalog = AnnotationCatalog::new(kind);
    let mut report = AnnotationLoadReport::default();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|source| AnnotateError::Io { line: line_no + 1, source })?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let Ok(text) = std::str::from_utf8(&buf) else {
            report.lines += 1;
            report.malformed += 1;
            continue;
        };
        let line = text.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        report.lines += 1;
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        match fields.as_slice() {
            [gene, category] if !gene.is_empty() && !category.is_empty() => {
                if catalog.insert(gene, category) {
                    report.memberships += 1;
                } else {
                    report.duplicates += 1;
                }
            }
            _ => report.malformed += 1,
        }
    }
    if catalog.is_empty() {
        tracing::warn!(kind = %kind, "annotation catalog is empty");
    }
    Ok((catalog, report))
}

pub fn parse_annotations_bytes(
    data: &[u8],
    kind: AnnotationKind,
) -> Result<(AnnotationCatalog, AnnotationLoadReport), AnnotateError> {
    load_annotations(data, kind)
}

/// Which co-annotated pairs count toward a category's size filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairFilter {
    /// Pairs called by both measures (quadrant `MJ`), sign ignored.
    #[default]
    BothMeasures,
    /// Pairs called by at least one measure.
    EitherMeasure,
}

impl PairFilter {
    fn admits(self, q: QuadrantClass) -> bool {
        match self {
            PairFilter::BothMeasures => q == QuadrantClass::MJ,
            PairFilter::EitherMeasure => q != QuadrantClass::MbarJbar,
        }
    }
}

/// Counts for one category and one interaction sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorySegregation {
    pub category: String,
    pub sign: Sign,
    /// Same sign under both measures.
    pub n_mj: u64,
    /// This sign under `J` only.
    pub n_mbarj: u64,
    /// This sign under `M` only.
    pub n_mjbar: u64,
    /// Pairs that entered this table with the opposite sign under the
    /// other measure.
    pub n_sign_conflict: u64,
    /// Pairs passing the size filter, shared by both sign rows.
    pub n_filter_pairs: u64,
}

impl CategorySegregation {
    /// Share of `J` calls that `M` misses: `MbarJ / (MJ + MbarJ)`.
    pub fn miss_rate_m(&self) -> Option<f64> {
        let d = self.n_mj + self.n_mbarj;
        (d > 0).then(|| self.n_mbarj as f64 / d as f64)
    }

    /// Share of `M` calls that `J` misses: `MJbar / (MJ + MJbar)`.
    pub fn miss_rate_j(&self) -> Option<f64> {
        let d = self.n_mj + self.n_mjbar;
        (d > 0).then(|| self.n_mjbar as f64 / d as f64)
    }
}

#[derive(Default)]
struct SignTally {
    mj: u64,
    mbarj: u64,
    mjbar: u64,
    conflict: u64,
}

#[derive(Default)]
struct CategoryTally {
    filter_pairs: u64,
    positive: SignTally,
    negative: SignTally,
}

/// Bucket of a pair in the table for `sign`, if it enters it at all.
fn sign_bucket(pair: &ScoredPair, sign: Sign) -> Option<(QuadrantClass, bool)> {
    let in_m = pair.sign_m == sign;
    let in_j = pair.sign_j == sign;
    let q = match (in_m, in_j) {
        (true, true) => QuadrantClass::MJ,
        (false, true) => QuadrantClass::MbarJ,
        (true, false) => QuadrantClass::MJbar,
        (false, false) => return None,
    };
    let conflict = (in_m && pair.sign_j != Sign::None && !in_j)
        || (in_j && pair.sign_m != Sign::None && !in_m);
    Some((q, conflict))
}

/// Per-category, per-sign counts of co-annotated pairs (both genes in the
/// category). Categories with fewer than `min_pairs` pairs admitted by
/// `filter` are dropped. Rows are sorted by category then sign
/// (positive first).
pub fn segregation_table(
    pairs: &[ScoredPair],
    catalog: &AnnotationCatalog,
    min_pairs: u64,
    filter: PairFilter,
) -> Vec<CategorySegregation> {
    let mut tallies: BTreeMap<&str, CategoryTally> = BTreeMap::new();
    for pair in pairs.iter().filter(|p| !p.is_self_pair()) {
        let (Some(ca), Some(cb)) = (
            catalog.categories_of(&pair.gene_a),
            catalog.categories_of(&pair.gene_b),
        ) else {
            continue;
        };
        for cat in ca.intersection(cb) {
            let t = tallies.entry(cat.as_str()).or_default();
            if filter.admits(pair.quadrant) {
                t.filter_pairs += 1;
            }
            for (sign, st) in [(Sign::Positive, &mut t.positive), (Sign::Negative, &mut t.negative)] {
                if let Some((q, conflict)) = sign_bucket(pair, sign) {
                    match q {
                        QuadrantClass::MJ => st.mj += 1,
                        QuadrantClass::MbarJ => st.mbarj += 1,
                        QuadrantClass::MJbar => st.mjbar += 1,
                        QuadrantClass::MbarJbar => unreachable!("sign_bucket never yields MbarJbar"),
                    }
                    if conflict {
                        st.conflict += 1;
                    }
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (cat, t) in tallies {
        if t.filter_pairs < min_pairs {
            continue;
        }
        for (sign, st) in [(Sign::Positive, &t.positive), (Sign::Negative, &t.negative)] {
            rows.push(CategorySegregation {
                category: cat.to_string(),
                sign,
                n_mj: st.mj,
                n_mbarj: st.mbarj,
                n_mjbar: st.mjbar,
                n_sign_conflict: st.conflict,
                n_filter_pairs: t.filter_pairs,
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnrichmentResult {
    pub category: String,
    /// `|category ∩ selected|`
    pub overlap: u64,
    /// `|category ∩ universe|`
    pub category_size: u64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub significant: bool,
}

/// Hypergeometric upper-tail test of every category touching the universe,
/// Holm-Bonferroni adjusted. Sorted by raw p-value then category.
pub fn enrichment(
    selected: &BTreeSet<String>,
    universe: &BTreeSet<String>,
    catalog: &AnnotationCatalog,
    alpha: f64,
) -> Result<Vec<EnrichmentResult>, AnnotateError> {
    if universe.is_empty() {
        return Err(AnnotateError::EmptyUniverse);
    }
    if let Some(g) = selected.iter().find(|g| !universe.contains(*g)) {
        return Err(AnnotateError::NotInUniverse(g.clone()));
    }
    let tail = hypergeom::UpperTail::new(universe.len() as u64);
    let mut results: Vec<EnrichmentResult> = catalog
        .categories()
        .filter_map(|(cat, genes)| {
            let size = genes.iter().filter(|g| universe.contains(*g)).count() as u64;
            (size > 0).then(|| {
                let overlap = genes.iter().filter(|g| selected.contains(*g)).count() as u64;
                EnrichmentResult {
                    category: cat.clone(),
                    overlap,
                    category_size: size,
                    p_raw: tail.p_value(size, selected.len() as u64, overlap),
                    p_adjusted: f64::NAN,
                    significant: false,
                }
            })
        })
        .collect();
    results.sort_by(|a, b| a.p_raw.total_cmp(&b.p_raw).then_with(|| a.category.cmp(&b.category)));
    let raw: Vec<f64> = results.iter().map(|r| r.p_raw).collect();
    for (r, adj) in results.iter_mut().zip(hypergeom::holm_bonferroni(&raw)) {
        r.p_adjusted = adj;
        r.significant = adj < alpha;
    }
    Ok(results)
}
