//! Point estimators and variance machinery: pooled proportions, the ANOVA
//! intraclass correlation, variance inflation, the three variance
//! estimators, and effective sample sizes with adjusted success counts.

use thiserror::Error;

use crate::data::{EffectiveSize, GroupData, GroupSummary, IccAnova, VarianceKind};
use crate::dist::t_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EstimatorError {
    /// Within-cluster mean square (or the ANOVA denominator) is undefined;
    /// the caller should treat the ICC as 0 and flag the result.
    #[error("degenerate design: ANOVA intraclass correlation undefined")]
    DegenerateDesign,
    /// Zero variance estimate makes the effective sample size unbounded.
    #[error("variance estimate is zero")]
    ZeroVariance,
    /// Proportion estimate of 0 or 1 leaves no information for the ratio.
    #[error("group proportion {0} is at the boundary")]
    BoundaryProportion(f64),
}

/// Overall sample proportion of the group.
pub fn pooled_proportion(g: &GroupData) -> f64 {
    g.total_successes() as f64 / g.total_size() as f64
}

/// One-way ANOVA moment estimate of the intraclass correlation.
pub fn anova_icc(g: &GroupData) -> Result<IccAnova, EstimatorError> {
    let m = g.num_clusters() as f64;
    let sum_y = g.total_successes() as f64;
    let sum_n = g.total_size() as f64;
    let sum_n2: f64 = g
        .clusters()
        .iter()
        .map(|c| u64::from(c.size) * u64::from(c.size))
        .sum::<u64>() as f64;
    let sum_y2_over_n: f64 = g
        .clusters()
        .iter()
        .map(|c| {
            let y = f64::from(c.successes);
            y * y / f64::from(c.size)
        })
        .sum();
    let wms_den: u64 = g.clusters().iter().map(|c| u64::from(c.size) - 1).sum();
    if wms_den == 0 {
        return Err(EstimatorError::DegenerateDesign);
    }
    let bms = (sum_y2_over_n - sum_y * sum_y / sum_n) / (m - 1.0);
    let wms = (sum_y - sum_y2_over_n) / wms_den as f64;
    let n_star = (sum_n * sum_n - sum_n2) / ((m - 1.0) * sum_n);
    let den = bms + (n_star - 1.0) * wms;
    if den <= 0.0 {
        return Err(EstimatorError::DegenerateDesign);
    }
    let raw = (bms - wms) / den;
    Ok(IccAnova {
        raw,
        truncated: raw.clamp(0.0, 1.0),
        bms,
        wms,
        n_star,
    })
}

/// Cluster-size-weighted design effect at intraclass correlation `theta`.
pub fn variance_inflation(g: &GroupData, theta: f64) -> f64 {
    let num: f64 = g
        .clusters()
        .iter()
        .map(|c| {
            let n = f64::from(c.size);
            n * (1.0 + (n - 1.0) * theta)
        })
        .sum();
    num / g.total_size() as f64
}

/// Equal-weight between-cluster variance estimate.
///
/// Returns `(v_eq, gamma_zeta)` where `gamma_zeta` is the unweighted mean of
/// the per-cluster proportions.
pub fn variance_equal_weights(g: &GroupData) -> (f64, f64) {
    let m = g.num_clusters() as f64;
    let gamma_zeta: f64 = g.clusters().iter().map(|c| c.proportion()).sum::<f64>() / m;
    let ss: f64 = g
        .clusters()
        .iter()
        .map(|c| {
            let d = c.proportion() - gamma_zeta;
            d * d
        })
        .sum();
    (ss / (m * (m - 1.0)), gamma_zeta)
}

/// Optimal-weight between-cluster variance estimate.
///
/// Weights are proportional to `n / (1 + (n - 1) * theta)` and normalized to
/// sum to one. Returns `(v_op, gamma_xi)`.
pub fn variance_optimal_weights(g: &GroupData, theta: f64) -> (f64, f64) {
    let m = g.num_clusters() as f64;
    let raw_weights: Vec<f64> = g
        .clusters()
        .iter()
        .map(|c| {
            let n = f64::from(c.size);
            n / (1.0 + (n - 1.0) * theta)
        })
        .collect();
    let total: f64 = raw_weights.iter().sum();
    let gamma_xi: f64 = g
        .clusters()
        .iter()
        .zip(&raw_weights)
        .map(|(c, w)| w / total * c.proportion())
        .sum();
    let ss: f64 = g
        .clusters()
        .iter()
        .zip(&raw_weights)
        .map(|(c, w)| {
            let d = c.proportion() - gamma_xi;
            w / total * d * d
        })
        .sum();
    (ss / (m - 1.0), gamma_xi)
}

/// Variance of the combined ratio estimator.
pub fn variance_ratio_estimator(g: &GroupData) -> f64 {
    let m = g.num_clusters() as f64;
    let n_dot = g.total_size() as f64;
    let gamma = pooled_proportion(g);
    let ss: f64 = g
        .clusters()
        .iter()
        .map(|c| {
            let r = f64::from(c.successes) - f64::from(c.size) * gamma;
            r * r
        })
        .sum();
    m / (m - 1.0) * ss / (n_dot * n_dot)
}

/// Full per-group summary. A degenerate ANOVA design falls back to an ICC
/// of 0 with the detail left as `None`.
pub fn group_summary(g: &GroupData) -> GroupSummary {
    let anova = anova_icc(g).ok();
    let icc = anova.map_or(0.0, |a| a.truncated);
    GroupSummary {
        gamma_hat: pooled_proportion(g),
        anova,
        icc,
        xi_hat: variance_inflation(g, icc),
    }
}

/// Effective sample size and adjusted success count for one variance kind.
///
/// The equal- and optimal-weight kinds carry a degrees-of-freedom correction
/// (a squared ratio of t quantiles at `n. - 1` versus `m - 1` degrees of
/// freedom); the ratio-estimator kind is used as defined, without it.
pub fn effective_size(
    g: &GroupData,
    kind: VarianceKind,
    alpha: f64,
) -> Result<EffectiveSize, EstimatorError> {
    let (variance, gamma_used) = match kind {
        VarianceKind::EqualWeights => variance_equal_weights(g),
        VarianceKind::OptimalWeights => {
            let theta = anova_icc(g).map_or(0.0, |a| a.truncated);
            variance_optimal_weights(g, theta)
        }
        VarianceKind::RatioEstimator => (variance_ratio_estimator(g), pooled_proportion(g)),
    };
    if !(gamma_used > 0.0 && gamma_used < 1.0) {
        return Err(EstimatorError::BoundaryProportion(gamma_used));
    }
    if variance <= 0.0 {
        return Err(EstimatorError::ZeroVariance);
    }
    let mut n_eff = gamma_used * (1.0 - gamma_used) / variance;
    if kind != VarianceKind::RatioEstimator {
        let p = 1.0 - alpha / 2.0;
        let ratio = t_quantile(p, g.total_size() as f64 - 1.0)
            / t_quantile(p, g.num_clusters() as f64 - 1.0);
        n_eff *= ratio * ratio;
    }
    Ok(EffectiveSize {
        kind,
        n_eff,
        y_eff: gamma_used * n_eff,
        gamma_used,
        variance,
    })
}
