//! Shared helpers for the integration suites: independent oracles for the
//! score-interval roots and the hybrid ratio limits, plus a deterministic
//! generator of random studies spanning the evaluation grid.

#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riskratio::data::{EffectiveSize, TwoGroupStudy};
use riskratio::simulation::beta_binomial_group;

/// Score statistic evaluated through the plain quadratic-formula route for
/// the constrained estimate (the production code uses the conjugate form).
pub fn score_statistic_oracle(eta: f64, e1: &EffectiveSize, e2: &EffectiveSize) -> f64 {
    let (n1, y1) = (e1.n_eff, e1.y_eff);
    let (n2, y2) = (e2.n_eff, e2.y_eff);
    let total = n1 + n2;
    let successes = y1 + y2;
    let s = eta * (n1 + y2) + y1 + n2;
    let disc = (s * s - 4.0 * eta * total * successes).max(0.0);
    let lambda = (s - disc.sqrt()) / (2.0 * total);
    let dev = y1 - n1 * lambda;
    dev * dev / (n1 * lambda * (1.0 - lambda))
        * (1.0 + n1 * (eta - lambda) / (n2 * (1.0 - lambda)))
}

/// Brute-force root location: multiplicative grid scan away from the point
/// estimate until the level is crossed, then plain interval halving.
pub fn score_roots_oracle(e1: &EffectiveSize, e2: &EffectiveSize, chi2: f64) -> (f64, f64) {
    let eta_hat = e1.gamma_used / e2.gamma_used;
    let f = |eta: f64| score_statistic_oracle(eta, e1, e2) - chi2;

    let locate = |going_up: bool| -> f64 {
        let step = if going_up { 1.01 } else { 1.0 / 1.01 };
        let mut inside = eta_hat;
        let mut outside = eta_hat * step;
        let mut guard = 0;
        while f(outside) < 0.0 {
            inside = outside;
            outside *= step;
            guard += 1;
            assert!(guard < 100_000, "oracle scan failed to cross the level");
        }
        let (mut neg, mut pos) = (inside, outside);
        for _ in 0..200 {
            let mid = 0.5 * (neg + pos);
            if mid <= neg.min(pos) || mid >= neg.max(pos) {
                break;
            }
            if f(mid) < 0.0 {
                neg = mid;
            } else {
                pos = mid;
            }
        }
        0.5 * (neg + pos)
    };

    (locate(false), locate(true))
}

/// Hybrid ratio limits through expanded quadratic coefficients (the
/// production code evaluates the factored forms).
pub fn mover_limits_oracle(
    l1: f64,
    u1: f64,
    l2: f64,
    u2: f64,
    g1: f64,
    g2: f64,
) -> Option<(f64, f64)> {
    let upper_den = g2 * g2 - (g2 - l2) * (g2 - l2);
    if upper_den <= 0.0 {
        return None;
    }
    let lower_den = g2 * g2 - (u2 - g2) * (u2 - g2);
    let c_lower = g1 * g1 - (g1 - l1) * (g1 - l1);
    let c_upper = g1 * g1 - (u1 - g1) * (u1 - g1);
    let b = g1 * g2;
    let rad_lower = b * b - lower_den * c_lower;
    let rad_upper = b * b - upper_den * c_upper;
    if rad_lower < 0.0 || rad_upper < 0.0 {
        return None;
    }
    let lower = if c_lower <= 0.0 {
        0.0
    } else if lower_den == 0.0 {
        c_lower / (2.0 * b)
    } else {
        (b - rad_lower.sqrt()) / lower_den
    };
    let upper = (b + rad_upper.sqrt()) / upper_den;
    (lower >= 0.0 && lower <= upper).then_some((lower, upper))
}

/// The grid axes: cluster counts, cluster sizes, risk ratios, and
/// intraclass-correlation pairs.
pub const GRID_CLUSTERS: [u32; 3] = [20, 30, 50];
pub const GRID_SIZES: [u32; 3] = [5, 50, 100];
pub const GRID_ETAS: [f64; 4] = [1.0, 1.25, 1.5, 2.0];
pub const GRID_THETAS: [(f64, f64); 4] = [(0.1, 0.1), (0.1, 0.25), (0.2, 0.2), (0.2, 0.25)];
pub const GRID_GAMMA1: f64 = 0.2;

/// Draws one study from a uniformly random grid cell. Returns the study and
/// its true risk ratio.
pub fn random_grid_study<R: Rng>(rng: &mut R) -> (TwoGroupStudy, f64) {
    let clusters = *GRID_CLUSTERS.choose(rng).unwrap();
    let size = *GRID_SIZES.choose(rng).unwrap();
    let eta = *GRID_ETAS.choose(rng).unwrap();
    let (theta1, theta2) = *GRID_THETAS.choose(rng).unwrap();
    let treatment = beta_binomial_group(clusters, size, GRID_GAMMA1, theta1, rng);
    let control = beta_binomial_group(clusters, size, GRID_GAMMA1 / eta, theta2, rng);
    (TwoGroupStudy::new(treatment, control), eta)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Manifest-relative path to a bundled data file.
pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}
