//! Floating-point helpers that work without `std`, plus the few special
//! functions the statistical tests need.

use alloc::vec::Vec;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln(sum(exp(v)))`, shifted by the maximum so it never overflows.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + ln(values.iter().map(|&v| exp(v - max)).sum::<f64>())
}

/// Writes the logit choice probabilities `exp(lambda*v) / sum exp(lambda*v)`.
pub fn softmax_into(lambda: f64, values: &[f64], out: &mut [f64]) {
    debug_assert_eq!(values.len(), out.len());
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &v) in out.iter_mut().zip(values) {
        *o = exp(lambda * (v - max));
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

pub fn softmax(lambda: f64, values: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; values.len()];
    softmax_into(lambda, values, &mut out);
    out
}

/// Log of the logit probabilities, computed without forming the ratios.
pub fn log_softmax_into(lambda: f64, values: &[f64], out: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = values.iter().map(|&v| exp(lambda * (v - max))).sum();
    let lse = ln(total);
    for (o, &v) in out.iter_mut().zip(values) {
        *o = lambda * (v - max) - lse;
    }
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..10_000 {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if abs(term) < abs(sum) * 1e-16 {
            break;
        }
    }
    sum * exp(-x + a * ln(x) - ln_gamma(a))
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if abs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if abs(delta - 1.0) < 1e-16 {
            break;
        }
    }
    exp(-x + a * ln(x) - ln_gamma(a)) * h
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    gamma_q(df / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Standard normal upper tail `P(Z > z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

pub fn normal_cdf(z: f64) -> f64 {
    normal_sf(-z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn chi_square_tail_matches_statrs() {
        for &df in &[1.0, 2.0, 3.0, 7.5, 40.0] {
            let reference = ChiSquared::new(df).unwrap();
            for &x in &[0.01, 0.5, 1.0, 3.84, 10.0, 25.0, 90.0] {
                let expected = 1.0 - reference.cdf(x);
                let got = chi_square_sf(x, df);
                assert!(
                    (got - expected).abs() < 1e-12,
                    "df {df} x {x}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn normal_cdf_reference_values() {
        // 30-digit reference values
        let cases = [
            (-8.0, 6.220_960_574_271_784e-16),
            (-3.0, 0.001_349_898_031_630_094_5),
            (-1.0, 0.158_655_253_931_457_05),
            (0.0, 0.5),
            (0.5, 0.691_462_461_274_013_1),
            (1.96, 0.975_002_104_851_779_6),
            (4.347, 0.999_993_099_389_033_1),
        ];
        for (z, want) in cases {
            let got = normal_cdf(z);
            assert!((got - want).abs() <= 1e-15 + 1e-13 * want, "{z}: {got} vs {want}");
            assert!((normal_sf(-z) - want).abs() <= 1e-15 + 1e-13 * want);
        }
    }

    #[test]
    fn softmax_survives_huge_arguments() {
        let p = softmax(50.0, &[1000.0, 990.0, -1e6]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p[0] > 0.999_999);
        assert_eq!(p[2], 0.0);
        let mut lp = [0.0; 3];
        log_softmax_into(50.0, &[1000.0, 990.0, -1e6], &mut lp);
        assert!((lp[1] + 500.0).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_is_shift_stable() {
        let v = [1000.0, 1000.0];
        assert!((log_sum_exp(&v) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
