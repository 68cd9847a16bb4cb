//! Special functions not covered by the dependency set.

/// Exponentially scaled modified Bessel function `e^{-x} I_1(x)` for `x >= 0`.
///
/// Below the overflow region this defers to `puruspe`; above it the Hankel
/// asymptotic expansion is used, which is accurate to rounding there.
pub fn i1e(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 600.0 {
        puruspe::In(1, x) * (-x).exp()
    } else {
        // e^{-x} I_1(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k prod_{j<=k} (4 - (2j-1)^2) / (k! (8x)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            let odd = (2 * k - 1) as f64;
            term *= -(4.0 - odd * odd) / (k as f64 * 8.0 * x);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

/// Natural log of `n!`.
pub fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_matches_series() {
        // I_1(x) = x/2 + x^3/16 + ...
        let x: f64 = 1e-3;
        let want = (x / 2.0 + x.powi(3) / 16.0) * (-x).exp();
        assert!((i1e(x) - want).abs() < 1e-13 * want);
    }

    #[test]
    fn known_value_at_two() {
        // I_1(2) = 1.590636854637329...
        assert!((i1e(2.0) * 2f64.exp() - 1.590_636_854_637_329).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_branch_is_continuous() {
        let below = i1e(599.999_999);
        let above = i1e(600.0);
        assert!((below - above).abs() / above < 1e-9);
    }

    #[test]
    fn large_argument_does_not_overflow() {
        let v = i1e(1e5);
        assert!(v.is_finite() && v > 0.0);
        assert!((v * (2.0 * std::f64::consts::PI * 1e5).sqrt() - 1.0).abs() < 1e-5);
    }
}
