//! Tab-separated interchange formats. Every writer emits a header row and
//! formats numbers with [`format_number`].

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::annotate::{CategorySegregation, EnrichmentResult};
use crate::measures::{InteractionScores, Thresholds};
use crate::network::{
    CountTable, FitnessTriple, GeneDegree, GeneQuadrantCounts, ScoredPair, SimilarityRow,
};
use crate::numfmt::{format_number, format_optional};
use crate::simgen::SampleBatch;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: {source}")]
    Io {
        line: u64,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: u64, message: String },
}

pub const SCORED_PAIRS_HEADER: [&str; 13] = [
    "gene_a",
    "gene_b",
    "smf_query",
    "smf_array",
    "dmf",
    "p_value",
    "m",
    "log_j",
    "quadrant",
    "sign_m",
    "sign_j",
    "pos_type_m",
    "pos_type_j",
];

fn header<W: Write>(out: &mut W, cols: &[&str]) -> io::Result<()> {
    writeln!(out, "{}", cols.join("\t"))
}

pub fn write_scored_pairs<W: Write>(mut out: W, pairs: &[ScoredPair]) -> io::Result<()> {
    header(&mut out, &SCORED_PAIRS_HEADER)?;
    for p in pairs {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.gene_a,
            p.gene_b,
            format_number(p.fitness.smf_query),
            format_number(p.fitness.smf_array),
            format_number(p.fitness.dmf),
            format_number(p.p_value),
            format_number(p.scores.m),
            format_number(p.scores.log_j),
            p.quadrant,
            p.sign_m,
            p.sign_j,
            p.pos_type_m.as_str(),
            p.pos_type_j.as_str(),
        )?;
    }
    Ok(())
}

/// Reads a scored-pairs file. Scores are taken as written; quadrant, sign
/// and subtype columns are ignored and re-derived under `th`.
pub fn read_scored_pairs<R: BufRead>(input: R, th: &Thresholds) -> Result<Vec<ScoredPair>, TableError> {
    let mut lines = input.split(b'\n');
    let mut line_no = 0u64;
    let header = loop {
        line_no += 1;
        match lines.next() {
            None => {
                return Err(TableError::Schema {
                    line: line_no,
                    message: "missing header".into(),
                })
            }
            Some(r) => {
                let raw = r.map_err(|source| TableError::Io { line: line_no, source })?;
                let text = decode(&raw, line_no)?;
                if !text.trim().is_empty() {
                    break text.trim_start_matches('\u{feff}').to_string();
                }
            }
        }
    };
    let index: HashMap<&str, usize> = header.split('\t').enumerate().map(|(i, c)| (c.trim(), i)).collect();
    let col = |name: &str| {
        index.get(name).copied().ok_or_else(|| TableError::Schema {
            line: 1,
            message: format!("missing column {name}"),
        })
    };
    let cols = [
        col("gene_a")?,
        col("gene_b")?,
        col("smf_query")?,
        col("smf_array")?,
        col("dmf")?,
        col("p_value")?,
        col("m")?,
        col("log_j")?,
    ];
    let width = cols.iter().max().copied().unwrap_or(0) + 1;

    let mut pairs = Vec::new();
    for raw in lines {
        line_no += 1;
        let raw = raw.map_err(|source| TableError::Io { line: line_no, source })?;
        let text = decode(&raw, line_no)?;
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() < width {
            return Err(TableError::Schema {
                line: line_no,
                message: format!("expected at least {width} fields, found {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64, TableError> {
            let f = fields[cols[i]].trim();
            f.parse::<f64>().map_err(|_| TableError::Schema {
                line: line_no,
                message: format!("column {} is not a number: {f:?}", SCORED_PAIRS_HEADER[i]),
            })
        };
        let gene = |i: usize| -> Result<String, TableError> {
            let g = fields[cols[i]].trim();
            if g.is_empty() {
                Err(TableError::Schema {
                    line: line_no,
                    message: format!("empty {}", SCORED_PAIRS_HEADER[i]),
                })
            } else {
                Ok(g.to_string())
            }
        };
        let p_value = num(5)?;
        if !(0.0..=1.0).contains(&p_value) {
            return Err(TableError::Schema {
                line: line_no,
                message: format!("p_value {p_value} outside [0, 1]"),
            });
        }
        pairs.push(ScoredPair::from_scores(
            gene(0)?,
            gene(1)?,
            FitnessTriple::new(num(2)?, num(3)?, num(4)?),
            InteractionScores {
                m: num(6)?,
                log_j: num(7)?,
            },
            p_value,
            th,
        ));
    }
    Ok(pairs)
}

pub fn parse_scored_pairs_bytes(bytes: &[u8], th: &Thresholds) -> Result<Vec<ScoredPair>, TableError> {
    read_scored_pairs(bytes, th)
}

fn decode(raw: &[u8], line: u64) -> Result<String, TableError> {
    let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
    String::from_utf8(raw.to_vec()).map_err(|_| TableError::Schema {
        line,
        message: "invalid UTF-8".into(),
    })
}

/// Which hub rule a list was produced by, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HubCriterion {
    /// `MJ + MJbar < ratio * MbarJ`
    Exclusive { ratio: f64 },
    /// `MJ >= min_common` and `MbarJ + MJbar < max_discord * MJ`
    Shared { min_common: u64, max_discord: f64 },
    /// `MJbar > min_exclusive` and `MJ + MbarJ < ratio * MJbar`
    Symmetric { min_exclusive: u64, ratio: f64 },
}

impl HubCriterion {
    fn columns(&self) -> [&'static str; 2] {
        match self {
            HubCriterion::Exclusive { .. } => ["m_calls", "bound"],
            HubCriterion::Shared { .. } => ["discordant", "bound"],
            HubCriterion::Symmetric { .. } => ["j_calls", "bound"],
        }
    }

    /// Left- and right-hand side of the strict inequality.
    pub fn sides(&self, c: &GeneQuadrantCounts) -> (u64, f64) {
        match *self {
            HubCriterion::Exclusive { ratio } => (c.n_mj + c.n_mjbar, ratio * c.n_mbarj as f64),
            HubCriterion::Shared { max_discord, .. } => (c.discordant(), max_discord * c.n_mj as f64),
            HubCriterion::Symmetric { ratio, .. } => (c.n_mj + c.n_mbarj, ratio * c.n_mjbar as f64),
        }
    }
}

pub fn write_hubs<W: Write>(
    mut out: W,
    hubs: &[GeneQuadrantCounts],
    criterion: HubCriterion,
) -> io::Result<()> {
    let [lhs, rhs] = criterion.columns();
    header(&mut out, &["gene", "nMbarJ", "nMJbar", "nMJ", lhs, rhs])?;
    for h in hubs {
        let (l, r) = criterion.sides(h);
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            h.gene,
            h.n_mbarj,
            h.n_mjbar,
            h.n_mj,
            l,
            format_number(r)
        )?;
    }
    Ok(())
}

pub fn write_gene_counts<'a, W: Write>(
    mut out: W,
    counts: impl IntoIterator<Item = &'a GeneQuadrantCounts>,
) -> io::Result<()> {
    header(&mut out, &["gene", "nMbarJ", "nMJbar", "nMJ", "nMbarJbar"])?;
    for c in counts {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", c.gene, c.n_mbarj, c.n_mjbar, c.n_mj, c.n_mbarjbar)?;
    }
    Ok(())
}

/// Reads per-gene quadrant counts (`gene`, `nMbarJ`, `nMJbar`, `nMJ`, and
/// optionally `nMbarJbar`), sorted by gene. Duplicate genes are an error.
pub fn read_gene_counts<R: BufRead>(input: R) -> Result<CountTable, TableError> {
    let mut lines = input.split(b'\n');
    let mut line_no = 0u64;
    let header = loop {
        line_no += 1;
        let Some(r) = lines.next() else {
            return Err(TableError::Schema {
                line: line_no,
                message: "missing header".into(),
            });
        };
        let raw = r.map_err(|source| TableError::Io { line: line_no, source })?;
        let text = decode(&raw, line_no)?;
        if !text.trim().is_empty() {
            break text.trim_start_matches('\u{feff}').to_string();
        }
    };
    let names: Vec<&str> = header.split('\t').map(str::trim).collect();
    let find = |name: &str| names.iter().position(|c| *c == name);
    let required = ["gene", "nMbarJ", "nMJbar", "nMJ"];
    let mut cols = Vec::with_capacity(5);
    for name in required {
        cols.push(find(name).ok_or_else(|| TableError::Schema {
            line: line_no,
            message: format!("missing column {name}"),
        })?);
    }
    let rest = find("nMbarJbar");

    let mut table = CountTable::new();
    for raw in lines {
        line_no += 1;
        let raw = raw.map_err(|source| TableError::Io { line: line_no, source })?;
        let text = decode(&raw, line_no)?;
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').map(str::trim).collect();
        let field = |i: usize| {
            fields.get(i).copied().ok_or_else(|| TableError::Schema {
                line: line_no,
                message: format!("expected at least {} fields, found {}", i + 1, fields.len()),
            })
        };
        let count = |i: usize| -> Result<u64, TableError> {
            let f = field(i)?;
            f.parse().map_err(|_| TableError::Schema {
                line: line_no,
                message: format!("not a count: {f:?}"),
            })
        };
        let gene = field(cols[0])?;
        if gene.is_empty() {
            return Err(TableError::Schema {
                line: line_no,
                message: "empty gene".into(),
            });
        }
        let mut c = GeneQuadrantCounts::new(gene, count(cols[1])?, count(cols[2])?, count(cols[3])?);
        if let Some(i) = rest {
            c.n_mbarjbar = count(i)?;
        }
        if table.insert(gene.to_string(), c).is_some() {
            return Err(TableError::Schema {
                line: line_no,
                message: format!("duplicate gene {gene}"),
            });
        }
    }
    Ok(table)
}

pub fn write_degrees<W: Write>(mut out: W, degrees: &[GeneDegree]) -> io::Result<()> {
    header(&mut out, &["gene", "degree_m", "degree_j"])?;
    for d in degrees {
        writeln!(out, "{}\t{}\t{}", d.gene, d.degree_m, d.degree_j)?;
    }
    Ok(())
}

pub fn write_similarity<W: Write>(mut out: W, rows: &[SimilarityRow]) -> io::Result<()> {
    header(&mut out, &["gene_a", "gene_b", "pcc_m", "pcc_j"])?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.gene_a,
            r.gene_b,
            format_optional(r.pcc_m),
            format_optional(r.pcc_j)
        )?;
    }
    Ok(())
}

pub fn write_segregation<W: Write>(mut out: W, rows: &[CategorySegregation]) -> io::Result<()> {
    header(
        &mut out,
        &[
            "category",
            "sign",
            "nMJ",
            "nMbarJ",
            "nMJbar",
            "miss_rate_m",
            "miss_rate_j",
            "n_sign_conflict",
            "n_filter_pairs",
        ],
    )?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.category,
            r.sign,
            r.n_mj,
            r.n_mbarj,
            r.n_mjbar,
            format_optional(r.miss_rate_m()),
            format_optional(r.miss_rate_j()),
            r.n_sign_conflict,
            r.n_filter_pairs
        )?;
    }
    Ok(())
}

pub fn write_enrichment<W: Write>(mut out: W, rows: &[EnrichmentResult]) -> io::Result<()> {
    header(
        &mut out,
        &["category", "overlap", "category_size", "p_raw", "p_adjusted", "significant"],
    )?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.category,
            r.overlap,
            r.category_size,
            format_number(r.p_raw),
            format_number(r.p_adjusted),
            r.significant
        )?;
    }
    Ok(())
}

/// One row per sample; `effect` is `1` or `0`.
pub fn write_samples<W: Write>(mut out: W, batch: &SampleBatch) -> io::Result<()> {
    header(&mut out, &["level_a", "level_b", "effect"])?;
    for s in &batch.samples {
        writeln!(
            out,
            "{}\t{}\t{}",
            batch.levels_a.name(s.level_a as usize),
            batch.levels_b.name(s.level_b as usize),
            u8::from(s.effect)
        )?;
    }
    Ok(())
}
