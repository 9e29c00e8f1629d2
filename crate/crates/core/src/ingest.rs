//! Streaming reader for SGA-style tab-separated fitness files.
//!
//! The input is UTF-8, tab separated, unquoted, with a header row naming
//! the columns (the published `SGA_ExE` / `SGA_NxN` layout). Only six
//! columns are read: query and array strain ids, query and array single
//! mutant fitness, double mutant fitness, and the p-value. Anything else
//! on a row is ignored.
//!
//! Row filtering:
//!
//! * a row with too few fields, an empty strain id, a field that is not a
//!   decimal number, an infinite value, or a p-value outside `[0, 1]` is
//!   *malformed*;
//! * otherwise a row with an empty, `NaN` or `NA` numeric field is dropped
//!   as *NaN*;
//! * otherwise a row with any negative fitness is dropped as *negative*.
//!
//! Blank lines are skipped and not counted.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::measures::m_score;
use crate::numfmt::format_number;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error near line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid strain identifier `{0}`")]
    InvalidIdentifier(String),
}

/// Zero-based positions of the columns the reader needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SgaColumnMap {
    pub query_strain: usize,
    pub array_strain: usize,
    pub smf_query: usize,
    pub smf_array: usize,
    pub dmf: usize,
    pub p_value: usize,
}

struct ColumnRule {
    role: &'static str,
    exact: &'static [&'static str],
    substrings: &'static [&'static str],
}

const COLUMN_RULES: [ColumnRule; 6] = [
    ColumnRule {
        role: "query strain id",
        exact: &["Query Strain ID", "gene_a"],
        substrings: &["query strain", "query_strain"],
    },
    ColumnRule {
        role: "array strain id",
        exact: &["Array Strain ID", "gene_b"],
        substrings: &["array strain", "array_strain"],
    },
    ColumnRule {
        role: "query single mutant fitness",
        exact: &["Query single mutant fitness (SMF)", "smf_query"],
        substrings: &["query single mutant fitness", "query smf"],
    },
    ColumnRule {
        role: "array single mutant fitness",
        exact: &["Array SMF", "smf_array"],
        substrings: &["array smf", "array single mutant fitness"],
    },
    ColumnRule {
        role: "double mutant fitness",
        exact: &["Double mutant fitness", "dmf"],
        substrings: &["double mutant fitness"],
    },
    ColumnRule {
        role: "p-value",
        exact: &["P-value", "p_value"],
        substrings: &["p-value", "pvalue", "p_value", "p value"],
    },
];

fn resolve_column(header: &[&str], rule: &ColumnRule) -> Option<usize> {
    let find = |pred: &dyn Fn(&str) -> bool| header.iter().position(|h| pred(h.trim()));
    find(&|h| rule.exact.contains(&h))
        .or_else(|| find(&|h| rule.exact.iter().any(|e| e.eq_ignore_ascii_case(h))))
        .or_else(|| {
            find(&|h| {
                let lower = h.to_ascii_lowercase();
                rule.substrings.iter().any(|s| lower.contains(s))
            })
        })
}

impl SgaColumnMap {
    pub fn new(
        query_strain: usize,
        array_strain: usize,
        smf_query: usize,
        smf_array: usize,
        dmf: usize,
        p_value: usize,
    ) -> Result<Self, IngestError> {
        let map = Self {
            query_strain,
            array_strain,
            smf_query,
            smf_array,
            dmf,
            p_value,
        };
        let idx = map.indices();
        for i in 0..idx.len() {
            if idx[i + 1..].contains(&idx[i]) {
                return Err(IngestError::Schema(format!(
                    "column {} is mapped to more than one role",
                    idx[i]
                )));
            }
        }
        Ok(map)
    }

    /// Resolves the column map from a header row: exact name, then
    /// case-insensitive name, then case-insensitive substring.
    pub fn from_header(header: &str) -> Result<Self, IngestError> {
        let fields: Vec<&str> = header.trim_end_matches(['\r', '\n']).split('\t').collect();
        let mut found = [0usize; 6];
        for (slot, rule) in found.iter_mut().zip(COLUMN_RULES.iter()) {
            *slot = resolve_column(&fields, rule).ok_or_else(|| {
                IngestError::Schema(format!(
                    "missing required column for {} (expected e.g. `{}`)",
                    rule.role, rule.exact[0]
                ))
            })?;
        }
        let [q, a, sq, sa, d, p] = found;
        Self::new(q, a, sq, sa, d, p)
    }

    fn indices(&self) -> [usize; 6] {
        [
            self.query_strain,
            self.array_strain,
            self.smf_query,
            self.smf_array,
            self.dmf,
            self.p_value,
        ]
    }

    fn max_index(&self) -> usize {
        self.indices().into_iter().max().unwrap_or(0)
    }
}

/// Row accounting for one ingest pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestReport {
    pub rows_read: u64,
    pub rows_kept: u64,
    pub rows_dropped_nan: u64,
    pub rows_dropped_negative: u64,
    pub rows_dropped_malformed: u64,
}

impl IngestReport {
    pub fn dropped(&self) -> u64 {
        self.rows_dropped_nan + self.rows_dropped_negative + self.rows_dropped_malformed
    }
}

/// One strain pair from an SGA file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrainPairRecord {
    pub query_strain: String,
    pub array_strain: String,
    pub query_gene: String,
    pub array_gene: String,
    pub smf_query: f64,
    pub smf_array: f64,
    pub dmf: f64,
    pub p_value: f64,
}

impl StrainPairRecord {
    /// Unordered gene pair key, `(min, max)`.
    pub fn gene_key(&self) -> (&str, &str) {
        if self.query_gene <= self.array_gene {
            (&self.query_gene, &self.array_gene)
        } else {
            (&self.array_gene, &self.query_gene)
        }
    }

    pub fn is_self_pair(&self) -> bool {
        self.query_gene == self.array_gene
    }

    pub fn m_score(&self) -> f64 {
        m_score(self.smf_query, self.smf_array, self.dmf).unwrap_or(f64::NAN)
    }
}

/// Systematic gene name of a strain id: the text before the first `_`,
/// uppercased.
pub fn extract_gene(strain_id: &str) -> Result<String, IngestError> {
    let gene = strain_id.split('_').next().unwrap_or("").trim();
    if gene.is_empty() {
        return Err(IngestError::InvalidIdentifier(strain_id.to_string()));
    }
    Ok(gene.to_ascii_uppercase())
}

enum Field {
    Value(f64),
    Missing,
    Bad,
}

fn parse_field(raw: &str) -> Field {
    let s = raw.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("nan") || s.eq_ignore_ascii_case("na") {
        return Field::Missing;
    }
    if !s.bytes().all(|c| c.is_ascii_digit() || matches!(c, b'+' | b'-' | b'.' | b'e' | b'E')) {
        return Field::Bad;
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Field::Value(v),
        _ => Field::Bad,
    }
}

enum RowOutcome {
    Kept(StrainPairRecord),
    Malformed,
    Nan,
    Negative,
}

fn classify_row(line: &str, map: &SgaColumnMap) -> RowOutcome {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() <= map.max_index() {
        return RowOutcome::Malformed;
    }
    let query_strain = fields[map.query_strain].trim();
    let array_strain = fields[map.array_strain].trim();
    let (Ok(query_gene), Ok(array_gene)) = (extract_gene(query_strain), extract_gene(array_strain))
    else {
        return RowOutcome::Malformed;
    };
    let raw = [
        fields[map.smf_query],
        fields[map.smf_array],
        fields[map.dmf],
        fields[map.p_value],
    ];
    let mut values = [0.0; 4];
    let mut missing = false;
    for (slot, r) in values.iter_mut().zip(raw) {
        match parse_field(r) {
            Field::Value(v) => *slot = v,
            Field::Missing => missing = true,
            Field::Bad => return RowOutcome::Malformed,
        }
    }
    let [smf_query, smf_array, dmf, p_value] = values;
    if !missing && !(0.0..=1.0).contains(&p_value) {
        return RowOutcome::Malformed;
    }
    if missing {
        return RowOutcome::Nan;
    }
    if smf_query < 0.0 || smf_array < 0.0 || dmf < 0.0 {
        return RowOutcome::Negative;
    }
    RowOutcome::Kept(StrainPairRecord {
        query_strain: query_strain.to_string(),
        array_strain: array_strain.to_string(),
        query_gene,
        array_gene,
        smf_query,
        smf_array,
        dmf,
        p_value,
    })
}

/// Streaming iterator over the kept records of an SGA file. Dropped rows
/// are tallied in [`SgaReader::report`]; only I/O failures are yielded as
/// errors.
pub struct SgaReader<R> {
    reader: R,
    map: SgaColumnMap,
    report: IngestReport,
    line_no: usize,
    buf: Vec<u8>,
    done: bool,
}

impl<R: BufRead> SgaReader<R> {
    /// Reads the header (unless `map` is supplied, in which case the first
    /// line is data) and prepares to stream rows.
    pub fn new(mut reader: R, map: Option<SgaColumnMap>) -> Result<Self, IngestError> {
        let mut line_no = 0;
        let map = match map {
            Some(m) => m,
            None => {
                let mut header = Vec::new();
                loop {
                    header.clear();
                    let n = reader
                        .read_until(b'\n', &mut header)
                        .map_err(|source| IngestError::Io { line: line_no + 1, source })?;
                    if n == 0 {
                        return Err(IngestError::Schema("input has no header row".into()));
                    }
                    line_no += 1;
                    if !header.iter().all(|b| b.is_ascii_whitespace()) {
                        break;
                    }
                }
                let text = std::str::from_utf8(&header)
                    .map_err(|_| IngestError::Schema("header row is not valid UTF-8".into()))?;
                SgaColumnMap::from_header(text.trim_start_matches('\u{feff}'))?
            }
        };
        Ok(Self {
            reader,
            map,
            report: IngestReport::default(),
            line_no,
            buf: Vec::new(),
            done: false,
        })
    }

    pub fn column_map(&self) -> &SgaColumnMap {
        &self.map
    }

    pub fn report(&self) -> IngestReport {
        self.report
    }

    /// Drains the reader, returning every kept record and the final report.
    pub fn read_all(mut self) -> Result<(Vec<StrainPairRecord>, IngestReport), IngestError> {
        let mut out = Vec::new();
        for rec in &mut self {
            out.push(rec?);
        }
        Ok((out, self.report))
    }
}

impl<R: BufRead> Iterator for SgaReader<R> {
    type Item = Result<StrainPairRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) => {}
                Err(source) => {
                    self.done = true;
                    return Some(Err(IngestError::Io {
                        line: self.line_no + 1,
                        source,
                    }));
                }
            }
            self.line_no += 1;
            let Ok(text) = std::str::from_utf8(&self.buf) else {
                self.report.rows_read += 1;
                self.report.rows_dropped_malformed += 1;
                tracing::debug!(line = self.line_no, "row is not valid UTF-8");
                continue;
            };
            let line = text.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                continue;
            }
            self.report.rows_read += 1;
            match classify_row(line, &self.map) {
                RowOutcome::Kept(rec) => {
                    self.report.rows_kept += 1;
                    return Some(Ok(rec));
                }
                RowOutcome::Malformed => {
                    tracing::debug!(line = self.line_no, "malformed row skipped");
                    self.report.rows_dropped_malformed += 1;
                }
                RowOutcome::Nan => self.report.rows_dropped_nan += 1,
                RowOutcome::Negative => self.report.rows_dropped_negative += 1,
            }
        }
        None
    }
}

/// Opens an SGA stream; see [`SgaReader::new`].
pub fn parse_sga<R: BufRead>(
    reader: R,
    map: Option<SgaColumnMap>,
) -> Result<SgaReader<R>, IngestError> {
    SgaReader::new(reader, map)
}

/// Parses a whole in-memory SGA file (header included).
pub fn parse_sga_bytes(data: &[u8]) -> Result<(Vec<StrainPairRecord>, IngestReport), IngestError> {
    SgaReader::new(data, None)?.read_all()
}

fn aggregation_order(a: &StrainPairRecord, b: &StrainPairRecord) -> std::cmp::Ordering {
    a.p_value
        .total_cmp(&b.p_value)
        .then_with(|| a.m_score().abs().total_cmp(&b.m_score().abs()))
        .then_with(|| a.query_strain.cmp(&b.query_strain))
        .then_with(|| a.array_strain.cmp(&b.array_strain))
}

/// Collapses strain pairs to one record per unordered gene pair, keeping
/// the smallest p-value (ties: smaller `|M|`, then strain ids). Output is
/// sorted by gene pair key. Self pairs are kept; see
/// [`StrainPairRecord::is_self_pair`].
pub fn aggregate_gene_pairs<I>(records: I) -> Vec<StrainPairRecord>
where
    I: IntoIterator<Item = StrainPairRecord>,
{
    let mut best: BTreeMap<(String, String), StrainPairRecord> = BTreeMap::new();
    for rec in records {
        let (g1, g2) = rec.gene_key();
        let key = (g1.to_string(), g2.to_string());
        match best.get_mut(&key) {
            Some(current) => {
                if aggregation_order(&rec, current).is_lt() {
                    *current = rec;
                }
            }
            None => {
                best.insert(key, rec);
            }
        }
    }
    best.into_values().collect()
}

pub const CANONICAL_HEADER: &str = "gene_a\tgene_b\tsmf_query\tsmf_array\tdmf\tp_value";

/// Writes records in the canonical six-column TSV layout.
pub fn write_canonical<W: Write>(mut out: W, records: &[StrainPairRecord]) -> io::Result<()> {
    writeln!(out, "{CANONICAL_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.query_gene,
            r.array_gene,
            format_number(r.smf_query),
            format_number(r.smf_array),
            format_number(r.dmf),
            format_number(r.p_value)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Query Strain ID\tQuery allele name\tArray Strain ID\tArray allele name\tArraytype/Temp\tGenetic interaction score (ε)\tP-value\tQuery single mutant fitness (SMF)\tArray SMF\tDouble mutant fitness\tDouble mutant fitness standard deviation";

    fn row(q: &str, a: &str, smf_q: &str, smf_a: &str, dmf: &str, p: &str) -> String {
        format!("{q}\tx\t{a}\ty\tDMA30\t0.0\t{p}\t{smf_q}\t{smf_a}\t{dmf}\t0.01")
    }

    fn parse(rows: &[String]) -> (Vec<StrainPairRecord>, IngestReport) {
        let mut text = String::from(HEADER);
        text.push('\n');
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        parse_sga_bytes(text.as_bytes()).unwrap()
    }

    #[test]
    fn header_resolution_prefers_exact_names() {
        let map = SgaColumnMap::from_header(HEADER).unwrap();
        assert_eq!(map, SgaColumnMap::new(0, 2, 7, 8, 9, 6).unwrap());
    }

    #[test]
    fn header_resolution_falls_back_to_substrings() {
        let header = "query strain id (v2)\tARRAY STRAIN\tquery smf\tarray smf\tdouble mutant fitness\tpvalue";
        let map = SgaColumnMap::from_header(header).unwrap();
        assert_eq!(map, SgaColumnMap::new(0, 1, 2, 3, 4, 5).unwrap());
        let canonical = SgaColumnMap::from_header(CANONICAL_HEADER).unwrap();
        assert_eq!(canonical, SgaColumnMap::new(0, 1, 2, 3, 4, 5).unwrap());
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let err = SgaColumnMap::from_header("Query Strain ID\tArray Strain ID\tArray SMF").unwrap_err();
        assert!(matches!(err, IngestError::Schema(_)));
        assert!(matches!(parse_sga_bytes(b""), Err(IngestError::Schema(_))));
        assert!(SgaColumnMap::new(0, 0, 1, 2, 3, 4).is_err());
    }

    #[test]
    fn pass_through_row() {
        let (recs, rep) = parse(&[row("YDL064W_tsq1", "YGR120C_dma2", "0.8", "0.9", "0.5", "0.01")]);
        assert_eq!(rep.rows_kept, 1);
        let r = &recs[0];
        assert_eq!(r.query_strain, "YDL064W_tsq1");
        assert_eq!(r.array_gene, "YGR120C");
        assert_eq!((r.smf_query, r.smf_array, r.dmf, r.p_value), (0.8, 0.9, 0.5, 0.01));
    }

    #[test]
    fn nan_negative_and_malformed_rows_are_counted() {
        let (recs, rep) = parse(&[
            row("A_1", "B_1", "0.8", "0.9", "NaN", "0.01"),
            row("A_1", "B_2", "0.8", "-0.1", "0.5", "0.01"),
            row("A_1", "B_3", "0.8", "0.9", "", "0.01"),
            row("A_1", "B_4", "0.8", "abc", "0.5", "0.01"),
            row("A_1", "B_5", "0.8", "0.9", "0.5", "1.5"),
            "A_1\tB_6".to_string(),
            row("", "B_7", "0.8", "0.9", "0.5", "0.01"),
            row("A_1", "B_8", "inf", "0.9", "0.5", "0.01"),
            row("A_1", "B_9", "8e-1", "0.9", "0.5", "1E-3"),
        ]);
        assert_eq!(
            rep,
            IngestReport {
                rows_read: 9,
                rows_kept: 1,
                rows_dropped_nan: 2,
                rows_dropped_negative: 1,
                rows_dropped_malformed: 5,
            }
        );
        assert_eq!(recs[0].smf_query, 0.8);
        assert_eq!(recs[0].p_value, 0.001);
        assert_eq!(rep.rows_read, rep.rows_kept + rep.dropped());
    }

    #[test]
    fn nan_wins_over_negative() {
        let (_, rep) = parse(&[row("A", "B", "-0.5", "0.9", "NaN", "0.01")]);
        assert_eq!(rep.rows_dropped_nan, 1);
    }

    #[test]
    fn blank_lines_and_crlf() {
        let text = format!("{HEADER}\r\n\r\n{}\r\n\n", row("a_1", "b_1", "1", "1", "1", "0.5"));
        let (recs, rep) = parse_sga_bytes(text.as_bytes()).unwrap();
        assert_eq!(rep.rows_read, 1);
        assert_eq!(recs[0].query_gene, "A");
        assert_eq!(recs[0].p_value, 0.5);
    }

    #[test]
    fn supplied_column_map_reads_first_line_as_data() {
        let map = SgaColumnMap::new(0, 1, 2, 3, 4, 5).unwrap();
        let data = b"q_1\ta_1\t0.5\t0.5\t0.25\t0.01\n";
        let (recs, _) = SgaReader::new(&data[..], Some(map)).unwrap().read_all().unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn invalid_utf8_row_is_malformed() {
        let mut data = format!("{CANONICAL_HEADER}\n").into_bytes();
        data.extend_from_slice(b"A\t\xff\xfe\t1\t1\t1\t0.1\n");
        let (_, rep) = parse_sga_bytes(&data).unwrap();
        assert_eq!(rep.rows_dropped_malformed, 1);
    }

    #[test]
    fn extract_gene_examples() {
        assert_eq!(extract_gene("YDL064W_tsq1").unwrap(), "YDL064W");
        assert_eq!(extract_gene("YGR120C").unwrap(), "YGR120C");
        assert_eq!(extract_gene("trm112_damp").unwrap(), "TRM112");
        assert!(matches!(extract_gene(""), Err(IngestError::InvalidIdentifier(_))));
        assert!(extract_gene("_x").is_err());
    }

    fn rec(q: &str, a: &str, smf: (f64, f64), dmf: f64, p: f64) -> StrainPairRecord {
        StrainPairRecord {
            query_strain: q.into(),
            array_strain: a.into(),
            query_gene: extract_gene(q).unwrap(),
            array_gene: extract_gene(a).unwrap(),
            smf_query: smf.0,
            smf_array: smf.1,
            dmf,
            p_value: p,
        }
    }

    #[test]
    fn aggregation_keeps_min_p() {
        let out = aggregate_gene_pairs(vec![
            rec("G1_a", "G2_a", (0.5, 0.5), 0.25, 0.2),
            rec("G2_b", "G1_b", (0.5, 0.5), 0.25, 0.01),
        ]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].p_value, 0.01);
        let single = rec("G1_a", "G2_a", (0.5, 0.5), 0.25, 0.2);
        assert_eq!(aggregate_gene_pairs(vec![single.clone()]), vec![single]);
    }

    #[test]
    fn aggregation_breaks_ties_on_abs_m() {
        // |M| = 0.1 and 0.05 at equal p
        let out = aggregate_gene_pairs(vec![
            rec("G1_a", "G2_a", (0.5, 0.5), 0.35, 0.01),
            rec("G1_b", "G2_b", (0.5, 0.5), 0.30, 0.01),
        ]);
        assert_eq!(out[0].query_strain, "G1_b");
    }

    #[test]
    fn self_pairs_are_kept() {
        let out = aggregate_gene_pairs(vec![rec("G1_a", "G1_b", (0.5, 0.5), 0.2, 0.01)]);
        assert!(out[0].is_self_pair());
    }

    #[test]
    fn canonical_output() {
        let mut buf = Vec::new();
        write_canonical(&mut buf, &[rec("g1_a", "G2_a", (0.5, 1.0 / 3.0), 0.25, 0.01)]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "gene_a\tgene_b\tsmf_query\tsmf_array\tdmf\tp_value\nG1\tG2\t0.5\t0.333333\t0.25\t0.01\n"
        );
    }
}
