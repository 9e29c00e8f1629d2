//! Replays the checked-in fuzz seeds through the parsers with the same
//! assertions the fuzz targets make.

use std::path::PathBuf;

use epistasis_core::annotate::{parse_annotations_bytes, AnnotationKind};
use epistasis_core::probmodel::JointDistribution;
use epistasis_core::simgen::{self, InteractionPerturbation};
use epistasis_core::{ingest, network, tables, ObservableTable, Thresholds, TwoFactorEffectModel};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (path.display().to_string(), std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn sga_seeds() {
    let mut parsed = 0;
    for (name, data) in seeds("parse_sga") {
        if let Ok((records, report)) = ingest::parse_sga_bytes(&data) {
            parsed += 1;
            assert_eq!(report.rows_read, report.rows_kept + report.dropped(), "{name}");
            assert_eq!(records.len() as u64, report.rows_kept, "{name}");
            let mut out = Vec::new();
            ingest::write_canonical(&mut out, &ingest::aggregate_gene_pairs(records)).unwrap();
        }
    }
    assert!(parsed >= 3);
}

#[test]
fn annotation_seeds() {
    for (name, data) in seeds("parse_annotations") {
        let (catalog, report) = parse_annotations_bytes(&data, AnnotationKind::Complex).unwrap();
        assert!(report.memberships + report.duplicates + report.malformed <= report.lines, "{name}");
        let total: usize = catalog.categories().map(|(_, g)| g.len()).sum();
        assert_eq!(total as u64, report.memberships, "{name}");
    }
}

#[test]
fn model_spec_seeds() {
    let mut parsed = 0;
    for (name, data) in seeds("parse_model_spec") {
        if let Ok(model) = TwoFactorEffectModel::from_json_slice(&data) {
            parsed += 1;
            let check = model.observables().is_neutral(1e-9).unwrap();
            assert!(check.neutral, "{name}: {check:?}");
        }
    }
    assert_eq!(parsed, 2);
}

#[test]
fn table_spec_seeds() {
    for (name, data) in seeds("parse_table_spec") {
        let table = ObservableTable::from_json_slice(&data).unwrap_or_else(|e| panic!("{name}: {e}"));
        let d = table.loglinear_decompose().unwrap();
        for a in 0..table.levels_a().len() {
            for b in 0..table.levels_b().len() {
                assert!((d.reconstruct(a, b) - table.survival_at(a, b)).abs() <= 1e-12, "{name}");
            }
        }
    }
}

#[test]
fn scored_pair_seeds() {
    let th = Thresholds::default();
    for (_, data) in seeds("parse_scored_pairs") {
        if let Ok(pairs) = tables::parse_scored_pairs_bytes(&data, &th) {
            let mut first = Vec::new();
            tables::write_scored_pairs(&mut first, &pairs).unwrap();
            let again = tables::parse_scored_pairs_bytes(&first, &th).unwrap();
            let mut second = Vec::new();
            tables::write_scored_pairs(&mut second, &again).unwrap();
            assert_eq!(first, second);
        }
    }
}

#[test]
fn gene_count_seeds() {
    for (name, data) in seeds("parse_gene_counts") {
        match tables::read_gene_counts(data.as_slice()) {
            Ok(counts) => {
                assert_eq!(network::exclusive_hubs(&counts, 0.1).len(), 9, "{name}");
                assert!(network::symmetric_exclusive_hubs(&counts, 10, 0.1).is_empty());
            }
            Err(e) => assert!(name.ends_with("duplicate"), "{name}: {e}"),
        }
    }
}

#[test]
fn perturbation_seeds() {
    let model = simgen::binary_model(0.8, 0.5, 0.9, JointDistribution::uniform(2, 2)).unwrap();
    let mut accepted = Vec::new();
    for (name, data) in seeds("parse_perturbation") {
        if let Ok(p) = InteractionPerturbation::from_json_slice(&model, &data) {
            if simgen::perturbed_observables(&model, Some(&p)).is_ok() {
                accepted.push(name.rsplit('/').next().unwrap().to_string());
            }
        }
    }
    assert_eq!(accepted, ["half"]);
}
