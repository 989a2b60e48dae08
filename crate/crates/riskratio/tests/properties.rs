//! Property tests for the estimator and interval invariants, plus
//! calibration checks of the simulation protocol at benign parameters.

mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riskratio::data::{GroupData, Method, TwoGroupStudy, VarianceKind};
use riskratio::estimators::{
    anova_icc, effective_size, group_summary, pooled_proportion, variance_equal_weights,
    variance_inflation, variance_optimal_weights, variance_ratio_estimator,
};
use riskratio::methods::compute_all;
use riskratio::simulation::{run_scenario, SimOptions};
use riskratio::ScenarioSpec;

fn group_strategy() -> impl Strategy<Value = GroupData> {
    prop::collection::vec((1u32..=40, 0.0f64..=1.0), 2..=25).prop_map(|raw| {
        let pairs: Vec<(u32, u32)> = raw
            .into_iter()
            .map(|(n, frac)| (n, (frac * f64::from(n)).round() as u32))
            .collect();
        GroupData::from_pairs(&pairs).unwrap()
    })
}

fn shuffled(g: &GroupData, seed: u64) -> GroupData {
    let mut clusters = g.clusters().to_vec();
    clusters.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    GroupData::new(clusters).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn estimators_are_permutation_invariant(g in group_strategy(), seed in any::<u64>()) {
        let p = shuffled(&g, seed);
        prop_assert_eq!(pooled_proportion(&g), pooled_proportion(&p));
        match (anova_icc(&g), anova_icc(&p)) {
            (Ok(a), Ok(b)) => {
                prop_assert!(close(a.raw, b.raw, 1e-11));
                prop_assert!(close(a.truncated, b.truncated, 1e-11));
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "degeneracy differs under permutation: {:?}", other),
        }
        prop_assert!(close(variance_inflation(&g, 0.3), variance_inflation(&p, 0.3), 1e-12));
        let (veq, gz) = variance_equal_weights(&g);
        let (veq_p, gz_p) = variance_equal_weights(&p);
        prop_assert!(close(veq, veq_p, 1e-11) && close(gz, gz_p, 1e-12));
        let (vop, gx) = variance_optimal_weights(&g, 0.2);
        let (vop_p, gx_p) = variance_optimal_weights(&p, 0.2);
        prop_assert!(close(vop, vop_p, 1e-11) && close(gx, gx_p, 1e-12));
        prop_assert!(close(
            variance_ratio_estimator(&g),
            variance_ratio_estimator(&p),
            1e-11
        ));
    }

    #[test]
    fn variance_inflation_is_one_at_zero_icc(g in group_strategy()) {
        prop_assert_eq!(variance_inflation(&g, 0.0), 1.0);
    }

    #[test]
    fn equal_cluster_sizes_make_weights_irrelevant(
        size in 1u32..=50,
        fracs in prop::collection::vec(0.0f64..=1.0, 2..=20),
        theta in 0.0f64..=1.0,
    ) {
        let pairs: Vec<(u32, u32)> = fracs
            .into_iter()
            .map(|f| (size, (f * f64::from(size)).round() as u32))
            .collect();
        let g = GroupData::from_pairs(&pairs).unwrap();
        let (veq, gz) = variance_equal_weights(&g);
        let (vop, gx) = variance_optimal_weights(&g, theta);
        prop_assert!(close(veq, vop, 1e-11));
        prop_assert!(close(gz, gx, 1e-12));
    }

    #[test]
    fn group_summary_recomputation_is_bit_stable(g in group_strategy()) {
        prop_assert_eq!(group_summary(&g), group_summary(&g));
        let icc = anova_icc(&g).map(|a| a.truncated).unwrap_or(0.0);
        prop_assert!((0.0..=1.0).contains(&icc));
    }

    #[test]
    fn interval_results_are_permutation_invariant(
        g1 in group_strategy(),
        g2 in group_strategy(),
        seed in any::<u64>(),
    ) {
        let study = TwoGroupStudy::new(g1.clone(), g2.clone());
        let permuted = TwoGroupStudy::new(shuffled(&g1, seed), shuffled(&g2, seed ^ 1));
        let a = compute_all(&study, 0.05);
        let b = compute_all(&permuted, 0.05);
        for (ra, rb) in a.iter().zip(&b) {
            match (ra.limits(), rb.limits()) {
                (Some((la, ua)), Some((lb, ub))) => {
                    let rel = if matches!(ra.method, Method::KA1 | Method::KA2 | Method::KA3) {
                        1e-8
                    } else {
                        1e-10
                    };
                    prop_assert!(close(la, lb, rel), "{}: {la} vs {lb}", ra.method);
                    prop_assert!(close(ua, ub, rel), "{}: {ua} vs {ub}", ra.method);
                }
                (None, None) => {}
                other => prop_assert!(false, "{}: existence differs: {:?}", ra.method, other),
            }
        }
    }

    #[test]
    fn existing_intervals_contain_their_point_estimates(
        g1 in group_strategy(),
        g2 in group_strategy(),
    ) {
        let study = TwoGroupStudy::new(g1, g2);
        let results = compute_all(&study, 0.05);
        let pooled_ratio = study.eta_hat();
        for r in &results {
            let Some((l, u)) = r.limits() else { continue };
            prop_assert!(l <= u && l >= 0.0, "{}: bad limits ({l}, {u})", r.method);
            let estimate = match r.method {
                Method::HB1 | Method::MR3 => pooled_ratio,
                Method::MK1 | Method::MK2 | Method::MK3 => {
                    let kind = VarianceKind::ALL[r.method.index() - 1];
                    let e1 = effective_size(&study.treatment, kind, 0.05).unwrap();
                    let e2 = effective_size(&study.control, kind, 0.05).unwrap();
                    ((e1.y_eff + 0.5) * (e2.n_eff + 0.5))
                        / ((e2.y_eff + 0.5) * (e1.n_eff + 0.5))
                }
                m => {
                    let kind = VarianceKind::ALL[(m.index() - 1) % 3];
                    let e1 = effective_size(&study.treatment, kind, 0.05).unwrap();
                    let e2 = effective_size(&study.control, kind, 0.05).unwrap();
                    e1.gamma_used / e2.gamma_used
                }
            };
            let slack = 1e-9 * estimate.max(1.0);
            prop_assert!(
                l - slack <= estimate && estimate <= u + slack,
                "{}: estimate {estimate} outside ({l}, {u})",
                r.method
            );
        }
    }

    #[test]
    fn wider_alpha_gives_nested_intervals(
        g1 in group_strategy(),
        g2 in group_strategy(),
    ) {
        let study = TwoGroupStudy::new(g1, g2);
        let narrow = compute_all(&study, 0.05);
        let wide = compute_all(&study, 0.01);
        for (n, w) in narrow.iter().zip(&wide) {
            // The df-adjusted effective size moves the modified-Katz center
            // with alpha, so MK1/MK2 nesting can break on degenerate
            // two-cluster groups; they are checked on realistic designs in
            // `katz_families_nest_on_realistic_designs`.
            if matches!(n.method, Method::MK1 | Method::MK2) {
                continue;
            }
            if let (Some((nl, nu)), Some((wl, wu))) = (n.limits(), w.limits()) {
                let slack = 1e-8 * nu.abs().max(1.0);
                prop_assert!(
                    wl <= nl + slack && nu <= wu + slack,
                    "{}: 95% interval ({nl}, {nu}) not inside 99% ({wl}, {wu})",
                    n.method
                );
            }
        }
    }

    #[test]
    fn study_csv_round_trip(g1 in group_strategy(), g2 in group_strategy()) {
        let study = TwoGroupStudy::new(g1, g2);
        let mut buf = Vec::new();
        riskratio::io::write_study_csv(&study, &mut buf).unwrap();
        let back = riskratio::io::parse_study_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(study, back);
    }
}

#[test]
fn katz_families_nest_on_realistic_designs() {
    use riskratio::simulation::beta_binomial_group;
    let mut rng = common::seeded_rng(17);
    for _ in 0..50 {
        let (study, _) = {
            let t = beta_binomial_group(20, 10, 0.4, 0.15, &mut rng);
            let c = beta_binomial_group(20, 10, 0.25, 0.15, &mut rng);
            (TwoGroupStudy::new(t, c), ())
        };
        let narrow = compute_all(&study, 0.05);
        let wide = compute_all(&study, 0.01);
        for m in [Method::MK1, Method::MK2, Method::MK3] {
            if let (Some((nl, nu)), Some((wl, wu))) =
                (narrow[m.index()].limits(), wide[m.index()].limits())
            {
                assert!(
                    wl <= nl && nu <= wu,
                    "{m}: ({nl}, {nu}) not inside ({wl}, {wu})"
                );
            }
        }
    }
}

#[test]
fn independent_data_covers_near_nominal_rate() {
    // No clustering, no effect: every method's coverage should sit within
    // Monte Carlo noise of the nominal level.
    let spec = ScenarioSpec {
        clusters_per_group: 50,
        cluster_size: 100,
        gamma1: 0.2,
        eta: 1.0,
        theta1: 0.0,
        theta2: 0.0,
        alpha: 0.05,
        replications: 2000,
        seed: 20,
    };
    let metrics = run_scenario(&spec).unwrap();
    for m in &metrics.per_method {
        assert!(
            (m.cp - 0.95).abs() <= 0.02,
            "{}: CP {} strays from 0.95",
            m.method,
            m.cp
        );
    }
}

#[test]
fn hybrid_interval_tracks_fitted_trial_parameters() {
    // Simulated studies at the pooled antidepressant-trial parameters:
    // the hybrid interval should cover the fitted ratio at roughly the
    // nominal rate, so well over 85% of good replications straddle it.
    let spec = riskratio::AppropriatenessSpec {
        treatment: riskratio::simulation::GroupParams {
            gamma: 0.604,
            icc: 0.169,
            clusters: 16,
            mean_size: 41.68,
        },
        control: riskratio::simulation::GroupParams {
            gamma: 0.604 / 1.545,
            icc: 0.164,
            clusters: 16,
            mean_size: 36.93,
        },
        alpha: 0.05,
        replications: 400,
        seed: 5,
    };
    let rows = riskratio::appropriateness_check(&spec, &SimOptions::default()).unwrap();
    let hb1 = rows.iter().find(|r| r.method == Method::HB1).unwrap();
    assert!(hb1.cp > 0.85, "HB1 coverage {} too low", hb1.cp);
    assert!(hb1.ew > 0.0);
}
