//! Nested and non-nested likelihood comparisons.

use crate::error::{invalid, Error, Result};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LrtResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Likelihood-ratio test of a restricted model nested in a full one.
pub fn lrt(ll_restricted: f64, ll_full: f64, df: usize) -> Result<LrtResult> {
    if df == 0 {
        return Err(invalid!("likelihood-ratio test needs df >= 1"));
    }
    if !(ll_restricted.is_finite() && ll_full.is_finite()) {
        return Err(invalid!("log-likelihoods must be finite"));
    }
    if ll_full < ll_restricted - 1e-9 {
        return Err(invalid!(
            "full model log-likelihood {ll_full} is below the restricted {ll_restricted}"
        ));
    }
    let statistic = (2.0 * (ll_full - ll_restricted)).max(0.0);
    Ok(LrtResult { statistic, df, p_value: math::chi_square_sf(statistic, df as f64) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VuongResult {
    /// Positive values favour model `a`.
    pub statistic: f64,
    pub n: usize,
    pub p_value: f64,
}

/// Vuong test on aligned per-unit log-likelihoods of two non-nested models.
pub fn vuong(ll_a: &[f64], ll_b: &[f64]) -> Result<VuongResult> {
    if ll_a.len() != ll_b.len() {
        return Err(invalid!("per-unit log-likelihoods have lengths {} and {}", ll_a.len(), ll_b.len()));
    }
    let n = ll_a.len();
    if n < 2 {
        return Err(invalid!("Vuong test needs at least 2 units"));
    }
    let diffs: alloc::vec::Vec<f64> = ll_a.iter().zip(ll_b).map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = math::sqrt(var);
    if !(sd > 1e-14 * (1.0 + mean.abs())) {
        return Err(Error::Degenerate("log-likelihood differences have zero variance".into()));
    }
    let statistic = diffs.iter().sum::<f64>() / (math::sqrt(n as f64) * sd);
    Ok(VuongResult { statistic, n, p_value: p_from_z(statistic) })
}

/// Two-sided normal p-value.
pub(crate) fn p_from_z(z: f64) -> f64 {
    (2.0 * math::normal_sf(z.abs())).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lrt_cases() {
        let r = lrt(-50.0, -50.0, 1).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = lrt(-10.0, -8.08, 1).unwrap();
        assert!((r.statistic - 3.84).abs() < 1e-12 && (r.p_value - 0.05).abs() < 1e-3);
        let r = lrt(-1000.0, -1000.0 + 686.1 / 2.0, 1).unwrap();
        assert!(r.p_value < 0.001);
        assert!(lrt(-5.0, -6.0, 1).is_err());
        assert!(lrt(-5.0, -5.0 - 1e-12, 1).is_ok());
    }

    #[test]
    fn vuong_cases() {
        assert!(matches!(vuong(&[-1.0, -2.0, -3.0], &[-1.0, -2.0, -3.0]), Err(Error::Degenerate(_))));
        assert!(vuong(&[-1.0], &[-2.0]).is_err());
        // m = (1, 2, 3, 4): mean 2.5, sd sqrt(5/3), V = 10 / (2 sqrt(5/3))
        let r = vuong(&[0.0, 0.0, 0.0, 0.0], &[-1.0, -2.0, -3.0, -4.0]).unwrap();
        let expected = 10.0 / (2.0 * (5.0f64 / 3.0).sqrt());
        assert!((r.statistic - expected).abs() < 1e-12);
        assert!((p_from_z(4.347) - 1.38e-5).abs() < 1e-6);
    }
}
