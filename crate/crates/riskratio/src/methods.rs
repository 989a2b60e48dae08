//! The 17 confidence-interval procedures for the risk ratio of two
//! cluster-correlated proportions.
//!
//! One hybrid interval recovers the ratio limits from per-group Wilson score
//! intervals. Five method families (modified Katz log, inverse hyperbolic
//! sine, Koopman-type score, delta-Katz, Fieller-Bailey) are each evaluated
//! at the three effective sample sizes, and a Fieller interval on the raw
//! ratio-estimator variances serves as the baseline.

use crate::data::{
    EffectiveSize, GroupData, IntervalResult, Method, NonexistenceReason, TwoGroupStudy,
    VarianceKind,
};
use crate::dist::z_two_sided;
use crate::estimators::{
    effective_size, group_summary, pooled_proportion, variance_ratio_estimator, EstimatorError,
};
use crate::root::bisect;

/// Shared numeric parameters for the interval methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodParams {
    pub alpha: f64,
    /// Upper `alpha/2` standard normal quantile.
    pub z: f64,
    /// Chi-square critical value; equals `z * z` by construction.
    pub chi2: f64,
    /// Relative tolerance for the score-interval root search.
    pub root_tolerance: f64,
    /// Geometric growth factor when expanding a root bracket.
    pub bracket_growth: f64,
}

impl MethodParams {
    pub fn new(alpha: f64) -> Self {
        let z = z_two_sided(alpha);
        Self {
            alpha,
            z,
            chi2: z * z,
            root_tolerance: 1e-10,
            bracket_growth: 2.0,
        }
    }
}

impl Default for MethodParams {
    fn default() -> Self {
        Self::new(0.05)
    }
}

/// Which count scales the correction factor inside the score statistic.
///
/// The score derivation yields the first group's trial count; a circulating
/// rendering of the statistic uses its success count instead, which distorts
/// the upper limit badly whenever the success rate is far from 1. Trial
/// count is the default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum KoopmanWeighting {
    #[default]
    TrialCount,
    SuccessCount,
}

/// Switches for the handful of defensible formula variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOptions {
    pub params: MethodParams,
    pub koopman_weighting: KoopmanWeighting,
    /// Evaluate the Fieller-Bailey coefficients at the pooled proportion
    /// instead of the kind-matched weighted mean.
    pub fieller_bailey_pooled_gamma: bool,
}

impl MethodOptions {
    pub fn new(alpha: f64) -> Self {
        Self {
            params: MethodParams::new(alpha),
            koopman_weighting: KoopmanWeighting::default(),
            fieller_bailey_pooled_gamma: false,
        }
    }
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self::new(0.05)
    }
}

/// Wilson score limits for one proportion with a design-effect correction.
pub fn wilson_limits(y: f64, n: f64, xi: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let gamma = y / n;
    let n_tilde = n + xi * z2;
    let center = (y + 0.5 * xi * z2) / n_tilde;
    let half = z / n_tilde * (n * gamma * (1.0 - gamma) * xi + xi * xi * z2 / 4.0).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Wilson score interval for a group's success rate, with the ANOVA ICC
/// plugged into the variance inflation factor.
pub fn wilson_single(g: &GroupData, alpha: f64) -> (f64, f64) {
    let s = group_summary(g);
    wilson_limits(
        g.total_successes() as f64,
        g.total_size() as f64,
        s.xi_hat,
        z_two_sided(alpha),
    )
}

/// Ratio interval recovered from two per-group intervals (the hybrid
/// square-and-add construction). Tagged `HB1`, its role when fed Wilson
/// inputs.
///
/// The limits are roots of quadratics whose leading coefficients are
/// `u2*(2*g2 - u2)` (lower) and `l2*(2*g2 - l2)` (upper). A negative lower
/// coefficient still yields the valid positive root, so nonexistence is
/// declared only when the evaluation genuinely fails: a vanishing upper
/// denominator (`l2 = 0`) or a negative radicand.
pub fn mover_ratio(l1: f64, u1: f64, l2: f64, u2: f64, g1: f64, g2: f64) -> IntervalResult {
    let method = Method::HB1;
    let b = g1 * g2;
    let upper_den = l2 * (2.0 * g2 - l2);
    if upper_den <= 0.0 {
        return IntervalResult::nonexistent(method, NonexistenceReason::MoverUpperDenominator);
    }
    let lower_den = u2 * (2.0 * g2 - u2);
    let c_lower = l1 * (2.0 * g1 - l1);
    let c_upper = u1 * (2.0 * g1 - u1);
    let rad_lower = b * b - lower_den * c_lower;
    let rad_upper = b * b - upper_den * c_upper;
    if rad_lower < 0.0 {
        return IntervalResult::nonexistent(method, NonexistenceReason::MoverLowerRadicand);
    }
    if rad_upper < 0.0 {
        return IntervalResult::nonexistent(method, NonexistenceReason::MoverUpperRadicand);
    }
    let lower = if c_lower <= 0.0 {
        0.0
    } else if lower_den == 0.0 {
        // Leading coefficient vanished: the quadratic degenerates to linear.
        c_lower / (2.0 * b)
    } else {
        (b - rad_lower.sqrt()) / lower_den
    };
    let upper = (b + rad_upper.sqrt()) / upper_den;
    if !(lower.is_finite() && upper.is_finite() && lower >= 0.0 && lower <= upper) {
        return IntervalResult::nonexistent(method, NonexistenceReason::MoverLowerDenominator);
    }
    IntervalResult::interval(method, lower, upper)
}

fn check_kinds(es1: &EffectiveSize, es2: &EffectiveSize) -> VarianceKind {
    debug_assert_eq!(es1.kind, es2.kind, "mismatched effective-size kinds");
    es1.kind
}

/// Modified Katz log interval on effective quantities (`MK1`/`MK2`/`MK3`
/// by kind): the 0.5 continuity shifts debias the point estimate, and the
/// log-scale variance is the Katz form `1/Y - 1/n` summed over groups.
pub fn katz_modified(
    es1: &EffectiveSize,
    es2: &EffectiveSize,
    params: &MethodParams,
) -> IntervalResult {
    let method = Method::mk(check_kinds(es1, es2));
    if es1.y_eff <= 0.0 || es2.y_eff <= 0.0 || es1.y_eff >= es1.n_eff || es2.y_eff >= es2.n_eff {
        return IntervalResult::nonexistent(method, NonexistenceReason::DegenerateGroup);
    }
    let eta = ((es1.y_eff + 0.5) * (es2.n_eff + 0.5)) / ((es2.y_eff + 0.5) * (es1.n_eff + 0.5));
    let half = params.z
        * (1.0 / es1.y_eff - 1.0 / es1.n_eff + 1.0 / es2.y_eff - 1.0 / es2.n_eff).sqrt();
    IntervalResult::interval(method, eta * (-half).exp(), eta * half.exp())
}

/// Inverse-hyperbolic-sine transformed interval on effective quantities
/// (`IH1`/`IH2`/`IH3` by kind).
pub fn inverse_sinh(
    es1: &EffectiveSize,
    es2: &EffectiveSize,
    params: &MethodParams,
) -> IntervalResult {
    let method = Method::ih(check_kinds(es1, es2));
    if es1.y_eff <= 0.0 || es2.y_eff <= 0.0 || es1.y_eff >= es1.n_eff || es2.y_eff >= es2.n_eff {
        return IntervalResult::nonexistent(method, NonexistenceReason::DegenerateGroup);
    }
    let eta = es1.gamma_used / es2.gamma_used;
    let var_log =
        1.0 / es1.y_eff - 1.0 / es1.n_eff + 1.0 / es2.y_eff - 1.0 / es2.n_eff;
    let half = 2.0 * (params.z / 2.0 * var_log.sqrt()).asinh();
    IntervalResult::interval(method, eta * (-half).exp(), eta * half.exp())
}

/// The score statistic whose level set defines the Koopman-type interval.
pub fn koopman_statistic(
    eta: f64,
    es1: &EffectiveSize,
    es2: &EffectiveSize,
    weighting: KoopmanWeighting,
) -> f64 {
    let (n1, y1) = (es1.n_eff, es1.y_eff);
    let (n2, y2) = (es2.n_eff, es2.y_eff);
    let total = n1 + n2;
    let successes = y1 + y2;
    let s = eta * (n1 + y2) + y1 + n2;
    let disc = (s * s - 4.0 * eta * total * successes).max(0.0);
    // Smaller root of the constrained-likelihood quadratic, in the
    // cancellation-free form.
    let lambda = 2.0 * eta * successes / (s + disc.sqrt());
    let resid = y1 - n1 * lambda;
    let lead = resid * resid / (n1 * lambda * (1.0 - lambda));
    let scale = match weighting {
        KoopmanWeighting::TrialCount => n1,
        KoopmanWeighting::SuccessCount => y1,
    };
    lead * (1.0 + scale * (eta - lambda) / (n2 * (1.0 - lambda)))
}

/// Score interval solved from the two roots of the statistic's level set
/// (`KA1`/`KA2`/`KA3` by kind).
pub fn koopman_score(
    es1: &EffectiveSize,
    es2: &EffectiveSize,
    params: &MethodParams,
    weighting: KoopmanWeighting,
) -> IntervalResult {
    let method = Method::ka(check_kinds(es1, es2));
    if es1.y_eff <= 0.0
        || es2.y_eff <= 0.0
        || es1.y_eff >= es1.n_eff
        || es2.y_eff >= es2.n_eff
    {
        return IntervalResult::nonexistent(method, NonexistenceReason::DegenerateGroup);
    }
    let eta_hat = es1.gamma_used / es2.gamma_used;
    let f = |eta: f64| koopman_statistic(eta, es1, es2, weighting) - params.chi2;
    let mut expanded = false;

    // The statistic is zero at eta_hat and grows toward both ends of the
    // positive axis, so each root is bracketed by geometric expansion away
    // from eta_hat.
    let mut lo = eta_hat / params.bracket_growth;
    let mut hi = eta_hat;
    let mut steps = 0;
    while f(lo) < 0.0 {
        hi = lo;
        lo /= params.bracket_growth;
        expanded = true;
        steps += 1;
        if steps > 60 {
            return IntervalResult::nonexistent(method, NonexistenceReason::RootNotBracketed);
        }
    }
    let lower = bisect(f, lo, hi, params.root_tolerance);

    let mut lo = eta_hat;
    let mut hi = eta_hat * params.bracket_growth;
    let mut steps = 0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= params.bracket_growth;
        expanded = true;
        steps += 1;
        if steps > 60 {
            return IntervalResult::nonexistent(method, NonexistenceReason::RootNotBracketed);
        }
    }
    let upper = bisect(f, lo, hi, params.root_tolerance);

    let mut result = IntervalResult::interval(method, lower, upper);
    result.flags.root_bracket_expanded = expanded;
    result
}

/// Katz log-transformed delta-method interval on effective quantities
/// (`DK1`/`DK2`/`DK3` by kind).
pub fn delta_katz(
    es1: &EffectiveSize,
    es2: &EffectiveSize,
    params: &MethodParams,
) -> IntervalResult {
    let method = Method::dk(check_kinds(es1, es2));
    let (g1, g2) = (es1.gamma_used, es2.gamma_used);
    if !(g1 > 0.0 && g1 < 1.0 && g2 > 0.0 && g2 < 1.0) {
        return IntervalResult::nonexistent(method, NonexistenceReason::BoundaryProportion);
    }
    let eta = g1 / g2;
    let var_log = (1.0 - g1) / (es1.n_eff * g1) + (1.0 - g2) / (es2.n_eff * g2);
    let half = params.z * var_log.sqrt();
    IntervalResult::interval(method, eta * (-half).exp(), eta * half.exp())
}

fn fieller_bailey_parts(
    method: Method,
    g1: f64,
    n1: f64,
    g2: f64,
    n2: f64,
    params: &MethodParams,
) -> IntervalResult {
    if !(g1 > 0.0 && g1 < 1.0 && g2 > 0.0 && g2 < 1.0) {
        return IntervalResult::nonexistent(method, NonexistenceReason::BoundaryProportion);
    }
    let z2 = params.chi2;
    let cbrt1 = g1.cbrt();
    let cbrt2 = g2.cbrt();
    let a = cbrt2 * cbrt2 - z2 * (1.0 - g2) / (9.0 * n2 * cbrt2);
    let b = cbrt1 * cbrt2;
    let c = cbrt1 * cbrt1 - z2 * (1.0 - g1) / (9.0 * n1 * cbrt1);
    if a <= 0.0 {
        return IntervalResult::nonexistent(method, NonexistenceReason::ANonpositive);
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return IntervalResult::nonexistent(method, NonexistenceReason::DiscriminantNegative);
    }
    let root = disc.sqrt();
    let t_lower = (b - root) / a;
    let t_upper = (b + root) / a;
    let lower_raw = t_lower * t_lower * t_lower;
    let upper = t_upper * t_upper * t_upper;
    let mut result = IntervalResult::interval(method, lower_raw.max(0.0), upper);
    result.flags.lower_clamped_at_zero = lower_raw < 0.0;
    result
}

/// Cube-root Fieller interval with Bailey's skewness reduction, on effective
/// quantities (`FB1`/`FB2`/`FB3` by kind).
pub fn fieller_bailey(
    es1: &EffectiveSize,
    es2: &EffectiveSize,
    params: &MethodParams,
) -> IntervalResult {
    let method = Method::fb(check_kinds(es1, es2));
    fieller_bailey_parts(
        method,
        es1.gamma_used,
        es1.n_eff,
        es2.gamma_used,
        es2.n_eff,
        params,
    )
}

/// Fieller interval on the raw study using the ratio-estimator variances.
/// This is the baseline method and its documented failure mode: `a <= 0` or
/// a negative discriminant means the interval does not exist.
pub fn mr3(study: &TwoGroupStudy, params: &MethodParams) -> IntervalResult {
    let method = Method::MR3;
    let g1 = pooled_proportion(&study.treatment);
    let g2 = pooled_proportion(&study.control);
    let v1 = variance_ratio_estimator(&study.treatment);
    let v2 = variance_ratio_estimator(&study.control);
    let a = g2 * g2 - params.chi2 * v2;
    let b = g1 * g2;
    let c = g1 * g1 - params.chi2 * v1;
    if a <= 0.0 {
        return IntervalResult::nonexistent(method, NonexistenceReason::ANonpositive);
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return IntervalResult::nonexistent(method, NonexistenceReason::DiscriminantNegative);
    }
    let root = disc.sqrt();
    let lower_raw = (b - root) / a;
    let mut result = IntervalResult::interval(method, lower_raw.max(0.0), (b + root) / a);
    result.flags.lower_clamped_at_zero = lower_raw < 0.0;
    result
}

fn reason_from(err: EstimatorError) -> NonexistenceReason {
    match err {
        EstimatorError::ZeroVariance => NonexistenceReason::ZeroVariance,
        EstimatorError::BoundaryProportion(_) => NonexistenceReason::BoundaryProportion,
        EstimatorError::DegenerateDesign => NonexistenceReason::DegenerateGroup,
    }
}

/// Runs all 17 methods on a study at level `alpha`, in reporting order.
/// Individual method failures are captured as nonexistent results; the
/// batch never aborts.
pub fn compute_all(study: &TwoGroupStudy, alpha: f64) -> Vec<IntervalResult> {
    compute_all_with(study, &MethodOptions::new(alpha))
}

/// [`compute_all`] with explicit formula options.
pub fn compute_all_with(study: &TwoGroupStudy, opts: &MethodOptions) -> Vec<IntervalResult> {
    let params = &opts.params;
    let s1 = group_summary(&study.treatment);
    let s2 = group_summary(&study.control);
    let icc_flag = s1.icc_adjusted() || s2.icc_adjusted();

    let eff1: Vec<Result<EffectiveSize, EstimatorError>> = VarianceKind::ALL
        .iter()
        .map(|&k| effective_size(&study.treatment, k, params.alpha))
        .collect();
    let eff2: Vec<Result<EffectiveSize, EstimatorError>> = VarianceKind::ALL
        .iter()
        .map(|&k| effective_size(&study.control, k, params.alpha))
        .collect();

    let mut results = Vec::with_capacity(Method::COUNT);

    let (l1, u1) = wilson_limits(
        study.treatment.total_successes() as f64,
        study.treatment.total_size() as f64,
        s1.xi_hat,
        params.z,
    );
    let (l2, u2) = wilson_limits(
        study.control.total_successes() as f64,
        study.control.total_size() as f64,
        s2.xi_hat,
        params.z,
    );
    let mut hb = mover_ratio(l1, u1, l2, u2, s1.gamma_hat, s2.gamma_hat);
    hb.flags.icc_truncated = icc_flag;
    results.push(hb);

    let push_family =
        |results: &mut Vec<IntervalResult>,
         tag: fn(VarianceKind) -> Method,
         dispatch: &dyn Fn(&EffectiveSize, &EffectiveSize) -> IntervalResult| {
            for kind in VarianceKind::ALL {
                let mut result = match (&eff1[kind.index()], &eff2[kind.index()]) {
                    (Ok(a), Ok(b)) => dispatch(a, b),
                    (Err(e), _) | (_, Err(e)) => {
                        IntervalResult::nonexistent(tag(kind), reason_from(*e))
                    }
                };
                if kind == VarianceKind::OptimalWeights {
                    result.flags.icc_truncated = icc_flag;
                }
                results.push(result);
            }
        };

    push_family(&mut results, Method::mk, &|a, b| katz_modified(a, b, params));
    push_family(&mut results, Method::ih, &|a, b| inverse_sinh(a, b, params));
    push_family(&mut results, Method::ka, &|a, b| {
        koopman_score(a, b, params, opts.koopman_weighting)
    });
    push_family(&mut results, Method::dk, &|a, b| delta_katz(a, b, params));
    push_family(&mut results, Method::fb, &|a, b| {
        if opts.fieller_bailey_pooled_gamma {
            // Compatibility variant: coefficients at the pooled proportions,
            // effective sizes kept.
            fieller_bailey_parts(
                Method::fb(a.kind),
                s1.gamma_hat,
                a.n_eff,
                s2.gamma_hat,
                b.n_eff,
                params,
            )
        } else {
            fieller_bailey(a, b, params)
        }
    });

    results.push(mr3(study, params));
    debug_assert_eq!(results.len(), Method::COUNT);
    debug_assert!(results
        .iter()
        .zip(Method::ALL)
        .all(|(r, m)| r.method == m));
    results
}
