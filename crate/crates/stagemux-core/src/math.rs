//! Log-domain helpers shared by the forward, backward and Viterbi passes.

/// Emission floor for probabilities that were never observed in training.
/// Applied when matrices are built, never at query time.
pub const PROB_FLOOR: f64 = 1e-12;

/// Tolerance for row-stochasticity checks.
pub const ROW_SUM_TOL: f64 = 1e-9;

#[cfg(feature = "std")]
#[inline]
pub fn ln(x: f64) -> f64 {
    x.ln()
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[cfg(feature = "std")]
#[inline]
pub fn exp(x: f64) -> f64 {
    x.exp()
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(feature = "std")]
#[inline]
pub fn round(x: f64) -> f64 {
    x.round()
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Natural log that maps zero to negative infinity instead of NaN territory.
#[inline]
pub fn ln_prob(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else {
        ln(p)
    }
}

/// `ln(exp(a) + exp(b))` without leaving the log domain.
#[inline]
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + ln(1.0 + exp(lo - hi))
}

/// Log-sum-exp over a slice; empty input yields negative infinity.
pub fn log_sum_exp_slice(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| exp(x - hi)).sum();
    hi + ln(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_linear_domain() {
        let a: f64 = 0.3;
        let b: f64 = 0.45;
        let got = log_sum_exp(a.ln(), b.ln());
        assert!((got - (a + b).ln()).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_handles_neg_infinity() {
        assert_eq!(log_sum_exp(f64::NEG_INFINITY, -1.5), -1.5);
        assert_eq!(log_sum_exp(-1.5, f64::NEG_INFINITY), -1.5);
        assert_eq!(
            log_sum_exp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn slice_variant_matches_pairwise() {
        let xs = [-2.0_f64, -0.7, -4.2, -1.1];
        let pairwise = xs.iter().copied().fold(f64::NEG_INFINITY, log_sum_exp);
        assert!((log_sum_exp_slice(&xs) - pairwise).abs() < 1e-12);
        assert_eq!(log_sum_exp_slice(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_prob_saturates_at_zero() {
        assert_eq!(ln_prob(0.0), f64::NEG_INFINITY);
        assert_eq!(ln_prob(-0.5), f64::NEG_INFINITY);
        assert!((ln_prob(1.0)).abs() < 1e-15);
    }
}
