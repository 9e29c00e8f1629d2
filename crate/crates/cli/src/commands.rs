use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};

use epistasis_core::annotate::{self, AnnotationCatalog, AnnotationKind, PairFilter};
use epistasis_core::ingest::{self, IngestReport, StrainPairRecord};
use epistasis_core::measures::{calibrate_j_threshold, Measure, PositiveType, QuadrantClass, Sign, Thresholds};
use epistasis_core::network::{self, CountTable, GeneQuadrantCounts, ProfileValues, ScoredPair};
use epistasis_core::probmodel::{ObservableTable, TwoFactorEffectModel};
use epistasis_core::simgen::{self, InteractionPerturbation};
use epistasis_core::tables::{self, HubCriterion};

use crate::output::{emit_summary, prepare_out_dir, write_file};
use crate::{Failure, GlobalArgs};

fn thresholds(g: &GlobalArgs) -> Result<Thresholds, Failure> {
    Thresholds::new(g.m_threshold, g.j_threshold, g.p_max).map_err(Failure::config)
}

fn input_path(g: &GlobalArgs) -> Result<&Path, Failure> {
    g.input
        .as_deref()
        .ok_or_else(|| Failure::config("--input is required for this command"))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    Ok(fs::read(path).with_context(|| format!("reading {}", path.display()))?)
}

fn first_line(path: &Path) -> Result<String, Failure> {
    let mut reader = open(path)?;
    let mut line = String::new();
    while line.trim().is_empty() {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .with_context(|| format!("reading {}", path.display()))?;
        if n == 0 {
            break;
        }
    }
    Ok(line.trim_start_matches('\u{feff}').trim_end().to_string())
}

fn has_columns(header: &str, names: &[&str]) -> bool {
    let cols: BTreeSet<&str> = header.split('\t').map(str::trim).collect();
    names.iter().all(|n| cols.contains(n))
}

fn load_records(g: &GlobalArgs) -> Result<(Vec<StrainPairRecord>, IngestReport), Failure> {
    let path = input_path(g)?;
    let (records, report) = ingest::parse_sga(open(path)?, None)
        .and_then(|r| r.read_all())
        .with_context(|| format!("ingesting {}", path.display()))?;
    let records = if g.no_aggregate {
        records
    } else {
        ingest::aggregate_gene_pairs(records)
    };
    Ok((records, report))
}

fn score_records(records: &[StrainPairRecord], th: &Thresholds) -> Result<Vec<ScoredPair>, Failure> {
    records
        .iter()
        .map(|r| {
            ScoredPair::from_record(r, th)
                .with_context(|| format!("scoring {} x {}", r.query_strain, r.array_strain))
                .map_err(Failure::from)
        })
        .collect()
}

/// Scored pairs from either a scored-pairs TSV or a raw SGA file.
fn load_pairs(g: &GlobalArgs, th: &Thresholds) -> Result<(Vec<ScoredPair>, Option<IngestReport>), Failure> {
    let path = input_path(g)?;
    if has_columns(&first_line(path)?, &["m", "log_j"]) {
        let pairs = tables::read_scored_pairs(open(path)?, th)
            .with_context(|| format!("reading {}", path.display()))?;
        return Ok((pairs, None));
    }
    let (records, report) = load_records(g)?;
    Ok((score_records(&records, th)?, Some(report)))
}

fn insert(map: &mut Map<String, Value>, key: &str, v: impl serde::Serialize) {
    map.insert(key.to_string(), serde_json::to_value(v).expect("summary values serialise"));
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn threshold_json(th: &Thresholds) -> Value {
    json!({"m": th.m(), "j": th.j(), "pMax": th.p_max()})
}

pub fn ingest(g: &GlobalArgs) -> Result<(), Failure> {
    let dir = prepare_out_dir(g)?;
    let (records, report) = load_records(g)?;
    write_file(dir, "canonical.tsv", |w| ingest::write_canonical(w, &records))?;
    let mut s = Map::new();
    insert(&mut s, "ingest", report);
    insert(&mut s, "aggregated", !g.no_aggregate);
    insert(&mut s, "records", records.len());
    emit_summary(g, "ingest_summary", s)
}

fn score_summary(pairs: &[ScoredPair], th: &Thresholds) -> Map<String, Value> {
    let count = |f: &dyn Fn(&ScoredPair) -> bool| pairs.iter().filter(|p| f(p)).count() as u64;
    let q = |c: QuadrantClass| count(&|p| p.quadrant == c);
    let (mj, mbarj, mjbar, mbarjbar) = (
        q(QuadrantClass::MJ),
        q(QuadrantClass::MbarJ),
        q(QuadrantClass::MJbar),
        q(QuadrantClass::MbarJbar),
    );
    let signs = |m: Measure| {
        json!({
            "positive": count(&|p| p.sign(m) == Sign::Positive),
            "negative": count(&|p| p.sign(m) == Sign::Negative),
        })
    };
    let types = |pick: fn(&ScoredPair) -> PositiveType| {
        json!({
            "masking": count(&|p| pick(p) == PositiveType::Masking),
            "suppressor": count(&|p| pick(p) == PositiveType::Suppressor),
        })
    };
    let only_j = |s: Sign| count(&|p| p.quadrant == QuadrantClass::MbarJ && p.sign_j == s);

    let mut s = Map::new();
    insert(&mut s, "pairs", pairs.len());
    insert(&mut s, "thresholds", threshold_json(th));
    insert(
        &mut s,
        "quadrants",
        json!({"MJ": mj, "MbarJ": mbarj, "MJbar": mjbar, "MbarJbar": mbarjbar}),
    );
    insert(&mut s, "signs", json!({"M": signs(Measure::M), "J": signs(Measure::J)}));
    insert(&mut s, "discordance", ratio(mbarj + mjbar, mbarj + mjbar + mj));
    insert(&mut s, "missedByM", ratio(mbarj, mbarj + mj));
    insert(&mut s, "missedByJ", ratio(mjbar, mjbar + mj));
    insert(
        &mut s,
        "onlyJ",
        json!({"positive": only_j(Sign::Positive), "negative": only_j(Sign::Negative)}),
    );
    insert(
        &mut s,
        "positiveTypes",
        json!({"M": types(|p| p.pos_type_m), "J": types(|p| p.pos_type_j)}),
    );
    s
}

pub fn score(g: &GlobalArgs) -> Result<(), Failure> {
    let th = thresholds(g)?;
    let dir = prepare_out_dir(g)?;
    let (records, report) = load_records(g)?;
    let pairs = score_records(&records, &th)?;
    if pairs.is_empty() {
        tracing::warn!("no pairs left after filtering; writing empty outputs");
    }
    write_file(dir, "scored_pairs.tsv", |w| tables::write_scored_pairs(w, &pairs))?;
    let mut s = score_summary(&pairs, &th);
    insert(&mut s, "ingest", report);
    insert(&mut s, "aggregated", !g.no_aggregate);
    emit_summary(g, "score_summary", s)
}

pub fn calibrate(g: &GlobalArgs) -> Result<(), Failure> {
    let th = thresholds(g)?;
    let (pairs, _) = load_pairs(g, &th)?;
    let cal = calibrate_j_threshold(&pairs, &th).context("calibrating the J threshold")?;
    let mut s = Map::new();
    insert(&mut s, "tau", cal.tau);
    insert(&mut s, "mCount", cal.m_count);
    insert(&mut s, "jCount", cal.j_count);
    insert(&mut s, "significant", cal.significant);
    insert(&mut s, "tieAtBoundary", cal.tie_at_boundary);
    insert(&mut s, "exact", cal.exact());
    insert(&mut s, "mThreshold", th.m());
    insert(&mut s, "pMax", th.p_max());
    emit_summary(g, "calibration", s)
}

#[derive(Debug, Args)]
pub struct HubArgs {
    /// Exclusive rule: `MJ + MJbar < ratio * MbarJ`.
    #[arg(long, default_value_t = 0.1)]
    exclusive_ratio: f64,
    /// Shared rule: `MJ >= min-common`.
    #[arg(long, default_value_t = 100)]
    shared_min_common: u64,
    /// Shared rule: `MbarJ + MJbar < max-discord * MJ`.
    #[arg(long, default_value_t = 0.05)]
    shared_max_discord: f64,
    /// Symmetric rule: `MJbar > min-exclusive`.
    #[arg(long, default_value_t = 10)]
    symmetric_min_exclusive: u64,
    /// Symmetric rule: `MJ + MbarJ < ratio * MJbar`.
    #[arg(long, default_value_t = 0.1)]
    symmetric_ratio: f64,
    /// Drop candidates with fewer interacting pairs (any measure).
    #[arg(long, default_value_t = 0)]
    min_hub_degree: u64,
    /// Measure used to find intermediary connectors between exclusive hubs.
    #[arg(long, default_value = "J")]
    connector_measure: Measure,
}

fn names(list: &[GeneQuadrantCounts]) -> Vec<&str> {
    list.iter().map(|c| c.gene.as_str()).collect()
}

pub fn hubs(g: &GlobalArgs, a: &HubArgs) -> Result<(), Failure> {
    for (name, v) in [
        ("--exclusive-ratio", a.exclusive_ratio),
        ("--shared-max-discord", a.shared_max_discord),
        ("--symmetric-ratio", a.symmetric_ratio),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Failure::config(format!("{name} must be positive, got {v}")));
        }
    }
    let th = thresholds(g)?;
    let path = input_path(g)?;
    let dir = prepare_out_dir(g)?;

    let (counts, pairs): (CountTable, Option<Vec<ScoredPair>>) =
        if has_columns(&first_line(path)?, &["gene", "nMbarJ", "nMJbar", "nMJ"]) {
            let counts = tables::read_gene_counts(open(path)?)
                .with_context(|| format!("reading {}", path.display()))?;
            (counts, None)
        } else {
            let (pairs, _) = load_pairs(g, &th)?;
            (network::quadrant_counts(&pairs), Some(pairs))
        };

    let keep = |mut v: Vec<GeneQuadrantCounts>| {
        v.retain(|c| c.n_mj + c.n_mbarj + c.n_mjbar >= a.min_hub_degree);
        v
    };
    let exclusive = keep(network::exclusive_hubs(&counts, a.exclusive_ratio));
    let shared = keep(network::shared_hubs(&counts, a.shared_min_common, a.shared_max_discord));
    let symmetric = keep(network::symmetric_exclusive_hubs(
        &counts,
        a.symmetric_min_exclusive,
        a.symmetric_ratio,
    ));

    write_file(dir, "hubs_exclusive.tsv", |w| {
        tables::write_hubs(w, &exclusive, HubCriterion::Exclusive { ratio: a.exclusive_ratio })
    })?;
    write_file(dir, "hubs_shared.tsv", |w| {
        tables::write_hubs(
            w,
            &shared,
            HubCriterion::Shared {
                min_common: a.shared_min_common,
                max_discord: a.shared_max_discord,
            },
        )
    })?;
    write_file(dir, "hubs_symmetric.tsv", |w| {
        tables::write_hubs(
            w,
            &symmetric,
            HubCriterion::Symmetric {
                min_exclusive: a.symmetric_min_exclusive,
                ratio: a.symmetric_ratio,
            },
        )
    })?;
    write_file(dir, "gene_counts.tsv", |w| tables::write_gene_counts(w, counts.values()))?;

    let mut s = Map::new();
    insert(&mut s, "genes", counts.len());
    insert(&mut s, "exclusive", names(&exclusive));
    insert(&mut s, "shared", names(&shared));
    insert(&mut s, "symmetric", names(&symmetric));
    if let Some(pairs) = pairs {
        let hub_set: BTreeSet<String> = exclusive.iter().map(|c| c.gene.clone()).collect();
        let connectors = network::intermediary_connectors(&hub_set, &pairs, a.connector_measure);
        write_file(dir, "connectors.tsv", |w| {
            use std::io::Write;
            writeln!(w, "gene")?;
            connectors.iter().try_for_each(|c| writeln!(w, "{c}"))
        })?;
        insert(&mut s, "connectors", connectors.len());
    }
    emit_summary(g, "hubs_summary", s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileMode {
    Raw,
    Significant,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    /// Gene pairs are reported when either correlation exceeds this.
    #[arg(long, default_value_t = 0.2)]
    pcc_threshold: f64,
    /// Whether profiles hold every score or only interacting ones.
    #[arg(long, value_enum, default_value_t = ProfileMode::Raw)]
    profile: ProfileMode,
}

pub fn similarity(g: &GlobalArgs, a: &SimilarityArgs) -> Result<(), Failure> {
    if !(-1.0..=1.0).contains(&a.pcc_threshold) {
        return Err(Failure::config("--pcc-threshold must lie in [-1, 1]"));
    }
    let th = thresholds(g)?;
    let dir = prepare_out_dir(g)?;
    let (pairs, _) = load_pairs(g, &th)?;
    let mode = match a.profile {
        ProfileMode::Raw => ProfileValues::Raw,
        ProfileMode::Significant => ProfileValues::Significant,
    };
    let rows = network::similarity_table(&pairs, a.pcc_threshold, mode);
    let degrees = network::degrees(&pairs);
    write_file(dir, "similarity.tsv", |w| tables::write_similarity(w, &rows))?;
    write_file(dir, "degree.tsv", |w| tables::write_degrees(w, &degrees))?;

    let above = |x: Option<f64>| x.is_some_and(|r| r > a.pcc_threshold);
    let m = rows.iter().filter(|r| above(r.pcc_m)).count() as u64;
    let j = rows.iter().filter(|r| above(r.pcc_j)).count() as u64;
    let both = rows.iter().filter(|r| above(r.pcc_m) && above(r.pcc_j)).count() as u64;
    let mut s = Map::new();
    insert(&mut s, "pccThreshold", a.pcc_threshold);
    insert(&mut s, "profile", format!("{:?}", a.profile).to_lowercase());
    insert(&mut s, "similarM", m);
    insert(&mut s, "similarJ", j);
    insert(&mut s, "similarBoth", both);
    insert(&mut s, "missedByM", ratio(j - both, j));
    insert(&mut s, "missedByJ", ratio(m - both, m));
    insert(&mut s, "genes", degrees.len());
    emit_summary(g, "similarity_summary", s)
}

fn load_catalog(path: &Path, kind: &str) -> Result<(AnnotationCatalog, annotate::AnnotationLoadReport), Failure> {
    let kind: AnnotationKind = kind.parse().map_err(Failure::config)?;
    Ok(annotate::load_annotations(open(path)?, kind)
        .with_context(|| format!("reading {}", path.display()))?)
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Two-column `gene<TAB>category` file.
    #[arg(long)]
    annotations: PathBuf,
    /// GO_BP, KEGG or complex; sets the default size filter.
    #[arg(long, default_value = "GO_BP")]
    kind: String,
    /// Minimum admitted pairs per category (500 for GO_BP, 10 otherwise).
    #[arg(long)]
    min_pairs: Option<u64>,
    /// Count pairs called by either measure toward the size filter,
    /// instead of pairs called by both.
    #[arg(long)]
    either_measure: bool,
}

pub fn annotate(g: &GlobalArgs, a: &AnnotateArgs) -> Result<(), Failure> {
    let th = thresholds(g)?;
    let (catalog, load) = load_catalog(&a.annotations, &a.kind)?;
    let dir = prepare_out_dir(g)?;
    let (pairs, _) = load_pairs(g, &th)?;
    let min_pairs = a.min_pairs.unwrap_or(catalog.kind().default_min_pairs());
    let filter = if a.either_measure {
        PairFilter::EitherMeasure
    } else {
        PairFilter::BothMeasures
    };
    let rows = annotate::segregation_table(&pairs, &catalog, min_pairs, filter);
    write_file(dir, "segregation.tsv", |w| tables::write_segregation(w, &rows))?;

    let mut s = Map::new();
    insert(&mut s, "kind", catalog.kind());
    insert(&mut s, "annotations", load);
    insert(&mut s, "minPairs", min_pairs);
    insert(
        &mut s,
        "filter",
        if a.either_measure { "either" } else { "both" },
    );
    insert(&mut s, "categories", rows.len() / 2);
    emit_summary(g, "annotate_summary", s)
}

#[derive(Debug, Args)]
pub struct EnrichArgs {
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long, default_value = "GO_BP")]
    kind: String,
    /// Genes to test, one per line. Defaults to the intermediary
    /// connectors of the exclusive hubs found in `--input`.
    #[arg(long)]
    genes: Option<PathBuf>,
    /// Background genes, one per line. Defaults to every gene in `--input`.
    #[arg(long)]
    universe: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    exclusive_ratio: f64,
    #[arg(long, default_value = "J")]
    connector_measure: Measure,
}

fn read_gene_list(path: &Path) -> Result<BTreeSet<String>, Failure> {
    let mut genes = BTreeSet::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.with_context(|| format!("{}:{}", path.display(), i + 1))?;
        let g = line.trim();
        if !g.is_empty() && !g.starts_with('#') {
            genes.insert(g.to_ascii_uppercase());
        }
    }
    Ok(genes)
}

pub fn enrich(g: &GlobalArgs, a: &EnrichArgs) -> Result<(), Failure> {
    if !(a.alpha > 0.0 && a.alpha <= 1.0) {
        return Err(Failure::config("--alpha must lie in (0, 1]"));
    }
    let th = thresholds(g)?;
    let (catalog, _) = load_catalog(&a.annotations, &a.kind)?;
    let dir = prepare_out_dir(g)?;

    let pairs = if a.genes.is_none() || a.universe.is_none() {
        Some(load_pairs(g, &th)?.0)
    } else {
        None
    };
    let selected = match (&a.genes, &pairs) {
        (Some(path), _) => read_gene_list(path)?,
        (None, Some(pairs)) => {
            let hubs: BTreeSet<String> =
                network::exclusive_hubs(&network::quadrant_counts(pairs), a.exclusive_ratio)
                    .into_iter()
                    .map(|c| c.gene)
                    .collect();
            network::intermediary_connectors(&hubs, pairs, a.connector_measure)
        }
        (None, None) => unreachable!("pairs are loaded when no gene list is given"),
    };
    let universe = match (&a.universe, &pairs) {
        (Some(path), _) => read_gene_list(path)?,
        (None, Some(pairs)) => pairs
            .iter()
            .flat_map(|p| [p.gene_a.clone(), p.gene_b.clone()])
            .collect(),
        (None, None) => unreachable!("pairs are loaded when no universe is given"),
    };
    let results = annotate::enrichment(&selected, &universe, &catalog, a.alpha)
        .map_err(|e| anyhow!(e).context("enrichment"))?;
    write_file(dir, "enrichment.tsv", |w| tables::write_enrichment(w, &results))?;

    let mut s = Map::new();
    insert(&mut s, "selected", selected.len());
    insert(&mut s, "universe", universe.len());
    insert(&mut s, "tested", results.len());
    insert(&mut s, "significant", results.iter().filter(|r| r.significant).count());
    insert(&mut s, "alpha", a.alpha);
    emit_summary(g, "enrich_summary", s)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `{"a": {"b": multiplier}}` applied to the null survival grid.
    #[arg(long)]
    perturbation: Option<PathBuf>,
    /// Population size.
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    /// Skip writing the per-sample TSV.
    #[arg(long)]
    no_samples: bool,
}

pub fn simulate(g: &GlobalArgs, a: &SimulateArgs) -> Result<(), Failure> {
    if a.n == 0 {
        return Err(Failure::config("--n must be at least 1"));
    }
    let path = input_path(g)?;
    let model = TwoFactorEffectModel::from_json_slice(&read_bytes(path)?)
        .with_context(|| format!("model {}", path.display()))?;
    let pert = match &a.perturbation {
        Some(p) => Some(
            InteractionPerturbation::from_json_slice(&model, &read_bytes(p)?)
                .with_context(|| format!("perturbation {}", p.display()))?,
        ),
        None => None,
    };
    let dir = prepare_out_dir(g)?;
    if !a.no_samples {
        let batch = simgen::sample_population(&model, pert.as_ref(), a.n, g.seed)?;
        write_file(dir, "samples.tsv", |w| tables::write_samples(w, &batch))?;
    }
    let report = simgen::oracle_report(&model, pert.as_ref(), a.n, g.seed)?;
    let mut s = Map::new();
    insert(&mut s, "report", report);
    emit_summary(g, "simulation", s)
}

#[derive(Debug, Args)]
pub struct NeutralityArgs {
    /// Largest tolerated `|Pr(not E | xy) - N(x, y)|`.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

pub fn neutrality(g: &GlobalArgs, a: &NeutralityArgs) -> Result<(), Failure> {
    if !(a.tolerance >= 0.0 && a.tolerance.is_finite()) {
        return Err(Failure::config("--tolerance must be a finite non-negative number"));
    }
    let path = input_path(g)?;
    let bytes = read_bytes(path)?;
    let mut s = Map::new();
    let table = match TwoFactorEffectModel::from_json_slice(&bytes) {
        Ok(model) => {
            insert(&mut s, "source", "model");
            insert(&mut s, "modelDigest", model.digest());
            model.observables()
        }
        Err(model_err) => match ObservableTable::from_json_slice(&bytes) {
            Ok(t) => {
                insert(&mut s, "source", "table");
                t
            }
            Err(table_err) => {
                return Err(anyhow!(
                    "{} is neither a model ({model_err}) nor a survival table ({table_err})",
                    path.display()
                )
                .into())
            }
        },
    };
    let check = table.is_neutral(a.tolerance).context("evaluating neutrality")?;
    let (wa, wb) = check.worst_cell;
    insert(&mut s, "neutral", check.neutral);
    insert(&mut s, "maxDeviation", check.max_deviation);
    insert(&mut s, "tolerance", a.tolerance);
    insert(
        &mut s,
        "worstCell",
        json!({"a": table.levels_a().name(wa), "b": table.levels_b().name(wb)}),
    );
    let mut log_j = Map::new();
    for ia in 1..table.levels_a().len() {
        let mut row = Map::new();
        for ib in 1..table.levels_b().len() {
            let v = table.j_ratio_at(ia, ib).map(f64::ln).ok();
            insert(&mut row, table.levels_b().name(ib), v);
        }
        log_j.insert(table.levels_a().name(ia).to_string(), Value::Object(row));
    }
    insert(&mut s, "logJ", log_j);
    emit_summary(g, "neutrality", s)
}
