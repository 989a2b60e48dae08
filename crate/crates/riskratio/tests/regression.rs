//! Regression pins for the two bundled demonstration datasets: estimator
//! values and all 17 interval limits, frozen after cross-checking at least
//! three methods against an independent scripting oracle.

mod common;

use approx::assert_relative_eq;
use sha2::{Digest, Sha256};

use common::data_path;
use riskratio::data::{Method, NonexistenceReason, VarianceKind};
use riskratio::estimators::{anova_icc, effective_size, pooled_proportion, variance_inflation};
use riskratio::io::read_study_csv;
use riskratio::methods::compute_all;

fn sha256_hex(path: &std::path::Path) -> String {
    let bytes = std::fs::read(path).unwrap();
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[test]
fn bundled_datasets_are_untouched() {
    assert_eq!(
        sha256_hex(&data_path("width_anomaly.csv")),
        "88e5ff985b0706a52ec5d6abd59ba92daddeaa2b6f7215ccc5c9007294440fe8"
    );
    assert_eq!(
        sha256_hex(&data_path("fieller_nonexistent.csv")),
        "7c4c50c30ea88f815c2f4822c8e42ac621c5ee1fc3e8e60043784066ee714d34"
    );
}

#[test]
fn width_anomaly_estimators() {
    let study = read_study_csv(&data_path("width_anomaly.csv")).unwrap();

    assert_eq!(study.treatment.total_successes(), 421);
    assert_eq!(study.treatment.total_size(), 2000);
    assert_relative_eq!(pooled_proportion(&study.treatment), 0.2105, max_relative = 1e-14);
    assert_relative_eq!(pooled_proportion(&study.control), 0.026, max_relative = 1e-14);

    let icc_t = anova_icc(&study.treatment).unwrap();
    assert_relative_eq!(icc_t.raw, 0.3492529367345451, max_relative = 1e-12);
    assert_relative_eq!(icc_t.bms, 6.019447368421051, max_relative = 1e-12);
    assert_relative_eq!(icc_t.wms, 0.11010606060606061, max_relative = 1e-12);
    assert_eq!(icc_t.n_star, 100.0);
    let icc_c = anova_icc(&study.control).unwrap();
    assert_relative_eq!(icc_c.raw, 0.11648757969417213, max_relative = 1e-12);

    assert_relative_eq!(
        variance_inflation(&study.treatment, icc_t.truncated),
        35.576040736719975,
        max_relative = 1e-12
    );

    let eff = |kind| effective_size(&study.treatment, kind, 0.05).unwrap();
    assert_relative_eq!(
        eff(VarianceKind::EqualWeights).n_eff,
        48.47875109721065,
        max_relative = 1e-10
    );
    assert_relative_eq!(
        eff(VarianceKind::EqualWeights).y_eff,
        10.20477710596284,
        max_relative = 1e-10
    );
    assert_relative_eq!(
        eff(VarianceKind::RatioEstimator).n_eff,
        55.217610464328345,
        max_relative = 1e-12
    );
    let eff_c = effective_size(&study.control, VarianceKind::RatioEstimator, 0.05).unwrap();
    assert_relative_eq!(eff_c.n_eff, 158.58800263678313, max_relative = 1e-12);
    assert_relative_eq!(eff_c.y_eff, 4.123288068556361, max_relative = 1e-12);
}

// (method, lower, upper) frozen from the scripting oracle.
const WIDTH_ANOMALY_TABLE: [(Method, f64, f64); 17] = [
    (Method::HB1, 2.8148464936303497, 22.429450481320124),
    (Method::MK1, 2.3386731950316055, 23.494276477164803),
    (Method::MK2, 2.338673195031606, 23.494276477164806),
    (Method::MK3, 2.540296982693367, 22.067122103489027),
    (Method::IH1, 2.7013231105058555, 24.265037694182794),
    (Method::IH2, 2.7013231105058564, 24.265037694182798),
    (Method::IH3, 2.87828372832352, 22.77319169600091),
    (Method::KA1, 2.703520875996633, 24.29935892042785),
    (Method::KA2, 2.703520875996633, 24.29935892042787),
    (Method::KA3, 2.8805540004215793, 22.802438680573186),
    (Method::DK1, 2.5543622282774088, 25.6610853288397),
    (Method::DK2, 2.554362228277409, 25.661085328839704),
    (Method::DK3, 2.7469335224410623, 23.862138113317997),
    (Method::FB1, 2.7880554467002363, 30.650771469455346),
    (Method::FB2, 2.788055446700239, 30.65077146945532),
    (Method::FB3, 2.971359972192354, 27.78039508838556),
    (Method::MR3, 3.044828751030205, 171.86817550472574),
];

#[test]
fn width_anomaly_full_method_table() {
    let study = read_study_csv(&data_path("width_anomaly.csv")).unwrap();
    let results = compute_all(&study, 0.05);
    for (method, lower, upper) in WIDTH_ANOMALY_TABLE {
        let r = &results[method.index()];
        let (l, u) = r
            .limits()
            .unwrap_or_else(|| panic!("{method} unexpectedly nonexistent"));
        let tol = if matches!(method, Method::KA1 | Method::KA2 | Method::KA3) {
            1e-8
        } else {
            1e-10
        };
        assert_relative_eq!(l, lower, max_relative = tol);
        assert_relative_eq!(u, upper, max_relative = tol);
    }
}

#[test]
fn width_anomaly_baseline_has_strictly_widest_interval() {
    let study = read_study_csv(&data_path("width_anomaly.csv")).unwrap();
    let results = compute_all(&study, 0.05);
    let mr3_width = results[Method::MR3.index()].width().unwrap();
    for r in &results {
        if r.method != Method::MR3 {
            assert!(
                r.width().unwrap() < mr3_width,
                "{} width {} not below the baseline's {}",
                r.method,
                r.width().unwrap(),
                mr3_width
            );
        }
    }
}

const FIELLER_NONEXISTENT_TABLE: [(Method, f64, f64); 16] = [
    (Method::HB1, 1.6744817846602795, 28.602079344530598),
    (Method::MK1, 1.2281359461323447, 30.378414372513774),
    (Method::MK2, 1.2875453433069133, 27.098161682016986),
    (Method::MK3, 1.3878291875753739, 26.889534099634282),
    (Method::IH1, 1.6891105151629089, 31.858433717014552),
    (Method::IH2, 1.6985515034123904, 28.209038640671306),
    (Method::IH3, 1.7964305797676943, 27.925081126953863),
    (Method::KA1, 1.6989748955072201, 31.944769710484586),
    (Method::KA2, 1.7067317516331948, 28.278681893784732),
    (Method::KA3, 1.8036330581864481, 27.985379326868774),
    (Method::DK1, 1.4749656745705908, 36.483842516332686),
    (Method::DK2, 1.5088457860392595, 31.75573371133354),
    (Method::DK3, 1.609084350678837, 31.17640766177977),
    (Method::FB1, 1.7695791205149707, 57.71722774469484),
    (Method::FB2, 1.7622962651256566, 46.56253392882454),
    (Method::FB3, 1.8584587355403748, 44.242575523305355),
];

#[test]
fn fieller_nonexistent_full_method_table() {
    let study = read_study_csv(&data_path("fieller_nonexistent.csv")).unwrap();

    let icc_t = anova_icc(&study.treatment).unwrap();
    assert_relative_eq!(icc_t.raw, 0.05459307570124202, max_relative = 1e-12);
    let icc_c = anova_icc(&study.control).unwrap();
    // negative raw estimate is retained, truncated value is used downstream
    assert_relative_eq!(icc_c.raw, -0.01826970139007377, max_relative = 1e-12);
    assert_eq!(icc_c.truncated, 0.0);

    // the ratio-estimator variance that sinks the baseline here
    assert_relative_eq!(
        riskratio::estimators::variance_ratio_estimator(&study.control),
        7.288645518691818e-5,
        max_relative = 1e-12
    );
    let eff_t = effective_size(&study.treatment, VarianceKind::EqualWeights, 0.05).unwrap();
    assert_relative_eq!(eff_t.n_eff, 89.84234716692963, max_relative = 1e-10);
    assert_relative_eq!(eff_t.y_eff, 7.55168358221306, max_relative = 1e-10);
    let eff_c = effective_size(&study.control, VarianceKind::OptimalWeights, 0.05).unwrap();
    assert_relative_eq!(eff_c.n_eff, 160.9728246854982, max_relative = 1e-10);
    assert_relative_eq!(eff_c.gamma_used, 0.012658227848101267, max_relative = 1e-12);

    let results = compute_all(&study, 0.05);
    assert_eq!(
        results[Method::MR3.index()].reason(),
        Some(NonexistenceReason::ANonpositive)
    );
    for (method, lower, upper) in FIELLER_NONEXISTENT_TABLE {
        let r = &results[method.index()];
        let (l, u) = r
            .limits()
            .unwrap_or_else(|| panic!("{method} unexpectedly nonexistent"));
        let tol = if matches!(method, Method::KA1 | Method::KA2 | Method::KA3) {
            1e-8
        } else {
            1e-10
        };
        assert_relative_eq!(l, lower, max_relative = tol);
        assert_relative_eq!(u, upper, max_relative = tol);
    }
}
