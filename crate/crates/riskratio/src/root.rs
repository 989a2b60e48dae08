//! Bracketed bisection for the score-interval root searches.

/// Bisect `f` on `[lo, hi]`, where `f(lo)` and `f(hi)` have opposite signs
/// (zero counts as either). Runs until the bracket's relative width falls
/// below `rel_tol` or the midpoint stops moving.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(
        f_lo.signum() != f_hi.signum(),
        "no sign change on [{lo}, {hi}]"
    );
    // 200 iterations is far beyond what f64 resolution can use; the loop
    // exits earlier once the bracket stops shrinking.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root_of_two() {
        let root = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((root - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn handles_decreasing_functions() {
        let root = bisect(|x| 1.0 - x, 0.0, 5.0, 1e-14);
        assert!((root - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_zero_endpoint_returned() {
        assert_eq!(bisect(|x| x, 0.0, 1.0, 1e-14), 0.0);
    }
}
