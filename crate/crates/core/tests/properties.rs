mod common;

use std::collections::BTreeSet;

use epistasis_core::annotate::hypergeom::{holm_bonferroni, UpperTail};
use epistasis_core::ingest;
use epistasis_core::measures::{
    calibrate_j_threshold, j_score, m_score, positive_type, InteractionScores, QuadrantClass, Thresholds,
};
use epistasis_core::network::{self, profile_pcc, FitnessTriple, ScoredPair};
use epistasis_core::numfmt::format_number;
use epistasis_core::probmodel::ObservableTable;
use epistasis_core::simgen::{self, InteractionPerturbation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn rate() -> impl Strategy<Value = f64> {
    0.001f64..=2.0
}

fn fitness() -> impl Strategy<Value = f64> {
    0.0f64..=1.5
}

fn scored(gene_a: String, gene_b: String, m: f64, log_j: f64, p: f64, th: &Thresholds) -> ScoredPair {
    ScoredPair::from_scores(
        gene_a,
        gene_b,
        FitnessTriple::new(0.5, 0.5, 0.5),
        InteractionScores { m, log_j },
        p,
        th,
    )
}

fn pair_set() -> impl Strategy<Value = Vec<(u8, u8, f64, f64, f64)>> {
    prop::collection::vec((0u8..8, 0u8..8, -0.5f64..0.5, -0.5f64..0.5, 0.0f64..0.1), 1..60)
}

fn build_pairs(raw: &[(u8, u8, f64, f64, f64)], th: &Thresholds) -> Vec<ScoredPair> {
    raw.iter()
        .map(|&(a, b, m, j, p)| scored(format!("G{a}"), format!("G{b}"), m, j, p, th))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn factorised_models_are_neutral(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_model(&mut rng);
        let t = m.observables();
        prop_assert!(t.is_neutral(TOL).unwrap().neutral);
        let (ra, rb) = (m.levels_a().len(), m.levels_b().len());
        for x in 0..ra {
            for y in 0..rb {
                let o = common::neutrality_oracle(t.cells(), m.joint().probs(), ra, rb, x, y);
                prop_assert!((o - t.neutrality_at(x, y).unwrap()).abs() <= TOL);
            }
        }
        for a in 1..ra {
            for b in 1..rb {
                prop_assert!((t.j_ratio_at(a, b).unwrap() - 1.0).abs() <= TOL);
            }
        }
    }

    #[test]
    fn neutrality_ignores_population_structure(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m1 = common::random_model(&mut rng);
        let (ra, rb) = (m1.levels_a().len(), m1.levels_b().len());
        let m2 = m1.with_joint(common::random_joint(&mut rng, ra, rb)).unwrap();
        let (t1, t2) = (m1.observables(), m2.observables());
        for x in 0..ra {
            for y in 0..rb {
                prop_assert!((t1.neutrality_at(x, y).unwrap() - t2.neutrality_at(x, y).unwrap()).abs() <= TOL);
            }
        }
    }

    #[test]
    fn decomposition_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = common::random_table(&mut rng);
        let d = t.loglinear_decompose().unwrap();
        for a in 0..t.levels_a().len() {
            for b in 0..t.levels_b().len() {
                prop_assert!((d.reconstruct(a, b) - t.survival_at(a, b)).abs() <= TOL);
                if a > 0 && b > 0 {
                    let log_j = t.j_ratio_at(a, b).unwrap().ln();
                    prop_assert!((d.delta_at(a, b) - log_j).abs() <= TOL);
                }
            }
        }
    }

    #[test]
    fn delta_sign_matches_neutral_prediction(seed in any::<u64>()) {
        // positive delta means the cell survives less than the reference
        // row and column predict
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = common::random_table(&mut rng);
        let d = t.loglinear_decompose().unwrap();
        for a in 1..t.levels_a().len() {
            for b in 1..t.levels_b().len() {
                let predicted = t.survival_at(a, 0) * t.survival_at(0, b) / t.survival_at(0, 0);
                let s = t.survival_at(a, b);
                if (s - predicted).abs() > 1e-9 {
                    prop_assert_eq!(d.delta_at(a, b) > 0.0, s < predicted);
                }
            }
        }
    }

    #[test]
    fn bridge_identity(l01 in rate(), l10 in rate(), l11 in rate()) {
        let s = |l: f64| (-l).exp();
        let t = ObservableTable::binary([s(1.0), s(l10), s(l01), s(l11)], None).unwrap();
        let via_table = t.j_ratio("a", "b").unwrap().ln();
        prop_assert!((j_score(l01, l10, l11).unwrap() - via_table).abs() <= TOL);
    }

    #[test]
    fn scores_symmetric(f01 in fitness(), f10 in fitness(), f11 in fitness()) {
        prop_assert_eq!(m_score(f01, f10, f11).unwrap(), m_score(f10, f01, f11).unwrap());
        prop_assert_eq!(j_score(f01, f10, f11).unwrap(), j_score(f10, f01, f11).unwrap());
        prop_assert_eq!(positive_type(f01, f10, f11), positive_type(f10, f01, f11));
    }

    #[test]
    fn raising_j_threshold_never_adds_j_calls(
        m in -0.5f64..0.5, log_j in -0.5f64..0.5, p in 0.0f64..0.1,
        j1 in 0.001f64..0.5, bump in 0.0f64..0.5,
    ) {
        let s = InteractionScores { m, log_j };
        let low = Thresholds::new(0.08, j1, 0.05).unwrap();
        let high = Thresholds::new(0.08, j1 + bump, 0.05).unwrap();
        let before = epistasis_core::measures::classify_quadrant(&s, p, &low);
        let after = epistasis_core::measures::classify_quadrant(&s, p, &high);
        if !before.j_interacting() {
            prop_assert!(!after.j_interacting());
        }
        prop_assert_eq!(before.m_interacting(), after.m_interacting());
    }

    #[test]
    fn calibration_matches_brute_force(raw in pair_set()) {
        let th = Thresholds::default();
        let pairs = build_pairs(&raw, &th);
        let cal = calibrate_j_threshold(&pairs, &th).unwrap();
        let sig: Vec<&ScoredPair> = pairs.iter().filter(|p| p.p_value < th.p_max()).collect();
        let m_count = sig.iter().filter(|p| p.scores.m.abs() > th.m()).count();
        let calls = |tau: f64| sig.iter().filter(|p| p.scores.log_j.abs() > tau).count();
        prop_assert_eq!(cal.m_count, m_count);
        prop_assert_eq!(cal.j_count, calls(cal.tau));
        prop_assert!(cal.j_count <= m_count);
        // no smaller candidate cutoff admits at most m_count calls
        let mut candidates: Vec<f64> = sig.iter().map(|p| p.scores.log_j.abs()).collect();
        candidates.push(0.0);
        for c in candidates {
            if c < cal.tau {
                prop_assert!(calls(c) > m_count);
            }
        }
        if !cal.tie_at_boundary {
            prop_assert_eq!(cal.j_count, m_count.min(sig.len()));
        }
    }

    #[test]
    fn quadrant_counts_conserve_pairs(raw in pair_set()) {
        let pairs = build_pairs(&raw, &Thresholds::default());
        let counts = network::quadrant_counts(&pairs);
        for q in QuadrantClass::ALL {
            let total: u64 = counts.values().map(|c| c.get(q)).sum();
            let n = pairs.iter().filter(|p| p.quadrant == q && !p.is_self_pair()).count() as u64;
            prop_assert_eq!(total, 2 * n);
        }
    }

    #[test]
    fn connectors_exclude_hubs(raw in pair_set(), hub_mask in 0u8..=255) {
        let pairs = build_pairs(&raw, &Thresholds::default());
        let hubs: BTreeSet<String> = (0..8).filter(|i| hub_mask & (1 << i) != 0).map(|i| format!("G{i}")).collect();
        let connectors = network::intermediary_connectors(&hubs, &pairs, epistasis_core::Measure::J);
        prop_assert!(connectors.is_disjoint(&hubs));
    }

    #[test]
    fn pcc_symmetry_and_affine_invariance(
        xs in prop::collection::vec(prop::option::weighted(0.8, -1.0f64..1.0), 3..20),
        ys in prop::collection::vec(prop::option::weighted(0.8, -1.0f64..1.0), 3..20),
        scale in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        shift in -3.0f64..3.0,
    ) {
        let n = xs.len().min(ys.len());
        let (xs, ys) = (&xs[..n], &ys[..n]);
        let r = profile_pcc(xs, ys);
        let r_swapped = profile_pcc(ys, xs);
        match (&r, &r_swapped) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a - b).abs() <= 1e-12);
                prop_assert!((-1.0..=1.0).contains(a));
                let moved: Vec<Option<f64>> = xs.iter().map(|x| x.map(|v| scale * v + shift)).collect();
                if let Ok(c) = profile_pcc(&moved, ys) {
                    prop_assert!((c - scale.signum() * a).abs() <= 1e-9);
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "asymmetric failure"),
        }
    }

    #[test]
    fn holm_is_monotone_and_conservative(ps in prop::collection::vec(0.0f64..=1.0, 1..30)) {
        let adj = holm_bonferroni(&ps);
        let mut order: Vec<usize> = (0..ps.len()).collect();
        order.sort_by(|&a, &b| ps[a].total_cmp(&ps[b]));
        for w in order.windows(2) {
            prop_assert!(adj[w[0]] <= adj[w[1]]);
        }
        for (p, q) in ps.iter().zip(&adj) {
            prop_assert!(q >= p && *q <= 1.0);
        }
    }

    #[test]
    fn hypergeometric_matches_enumeration(n in 1u32..=15, k in 0u32..=15, d in 0u32..=15, x in 0u32..=16) {
        let (k, d) = (k.min(n), d.min(n));
        let (hits, total) = common::hypergeom_enumerated(n, k, d, x);
        let p = UpperTail::new(n as u64).p_value(k as u64, d as u64, x as u64);
        prop_assert_eq!(p, hits as f64 / total as f64);
        if x <= k.min(d) && x + n >= k + d {
            prop_assert!(p > 0.0);
        }
    }

    #[test]
    fn log_path_agrees_with_exact_path(n in 40u64..=60, k in 0u64..=60, d in 0u64..=60, x in 0u64..=60) {
        // N = 60 exceeds the exact range for mid-sized draws, so compare
        // against a direct u128 sum
        let (k, d) = (k.min(n), d.min(n));
        let c = |n: u64, r: u64| -> f64 {
            if r > n { return 0.0; }
            (0..r).fold(1.0f64, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        };
        let direct: f64 = (x..=k.min(d)).map(|i| c(k, i) * c(n - k, d - i)).sum::<f64>() / c(n, d);
        let p = UpperTail::new(n).p_value(k, d, x);
        prop_assert!((p - direct.min(1.0)).abs() <= 1e-9 * direct.max(1e-300) + 1e-15);
    }

    #[test]
    fn large_population_tail_matches_reference(
        n in 100u64..=5000, k_frac in 0.0f64..=1.0, d_frac in 0.0f64..=1.0, x_frac in 0.0f64..=1.0,
    ) {
        use statrs::distribution::{DiscreteCDF, Hypergeometric};
        let k = (k_frac * n as f64) as u64;
        let d = (d_frac * n as f64) as u64;
        let lo = (k + d).saturating_sub(n);
        let x = lo + (x_frac * (k.min(d) - lo) as f64) as u64;
        let reference = if x == 0 {
            1.0
        } else {
            Hypergeometric::new(n, k, d).unwrap().sf(x - 1)
        };
        let p = UpperTail::new(n).p_value(k, d, x);
        prop_assert!((p - reference).abs() <= 1e-8 * reference + 1e-14, "p {p} reference {reference}");
    }

    #[test]
    fn number_format_is_short_and_close(x in prop::num::f64::NORMAL) {
        let s = format_number(x);
        let back: f64 = s.parse().unwrap();
        let digits = s.trim_start_matches('-').split(['e', 'E']).next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').trim_end_matches('0').len() <= 6);
        prop_assert!(((back - x) / x).abs() <= 5e-6);
        prop_assert_eq!(format_number(back), s);
    }

    #[test]
    fn ingest_accounts_for_every_row(lines in prop::collection::vec("[A-Z0-9_\\t.\\-naN]{0,60}", 0..20)) {
        let mut text = String::from("Query Strain ID\tArray Strain ID\tQuery single mutant fitness (SMF)\tArray SMF\tDouble mutant fitness\tP-value\n");
        for l in &lines {
            text.push_str(l);
            text.push('\n');
        }
        let (records, report) = ingest::parse_sga_bytes(text.as_bytes()).unwrap();
        prop_assert_eq!(report.rows_read, report.rows_kept + report.dropped());
        prop_assert_eq!(records.len() as u64, report.rows_kept);
        for r in &records {
            prop_assert!(r.smf_query >= 0.0 && r.smf_array >= 0.0 && r.dmf >= 0.0);
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn perturbation_identity(
        sa in 0.3f64..1.0, sb in 0.3f64..1.0, sz in 0.3f64..1.0,
        m_ab in 0.2f64..1.0, m_a2b in 0.2f64..1.0, seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = epistasis_core::TwoFactorEffectModel::new(
            common::levels(epistasis_core::probmodel::Axis::A, "a", 3),
            common::levels(epistasis_core::probmodel::Axis::B, "b", 2),
            vec![1.0, sa, sa * 0.9],
            vec![1.0, sb],
            sz,
            common::random_joint(&mut rng, 3, 2),
        ).unwrap();
        let pert = InteractionPerturbation::new(&model, &[("a1", "b1", m_ab), ("a2", "b1", m_a2b)]).unwrap();
        let t = simgen::perturbed_observables(&model, Some(&pert)).unwrap();
        prop_assert!((t.j_ratio("a1", "b1").unwrap().ln() + m_ab.ln()).abs() <= TOL);
        prop_assert!((t.j_ratio("a2", "b1").unwrap().ln() + m_a2b.ln()).abs() <= TOL);
    }

    #[test]
    fn sampling_independent_of_worker_count(seed in any::<u64>(), n in 1usize..150_000) {
        let model = simgen::binary_model(
            0.7, 0.6, 0.9,
            epistasis_core::probmodel::JointDistribution::new(2, 2, vec![0.3, 0.2, 0.1, 0.4]).unwrap(),
        ).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| simgen::sample_population(&model, None, n, seed).unwrap());
        let b = three.install(|| simgen::sample_population(&model, None, n, seed).unwrap());
        prop_assert_eq!(a, b);
    }
}
