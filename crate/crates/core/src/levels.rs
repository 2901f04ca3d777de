//! Level-of-sophistication priors, truncated beliefs and posteriors.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;

/// Distribution over levels `0..=k_max`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelPrior {
    /// Poisson mean when the prior came from [`LevelPrior::poisson`].
    pub tau: Option<f64>,
    pub k_max: usize,
    pub probs: Vec<f64>,
}

impl LevelPrior {
    /// Poisson(`tau`) truncated at `k_max` and renormalized over `0..=k_max`.
    pub fn poisson(tau: f64, k_max: usize) -> Result<LevelPrior> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid!("Poisson mean tau must be positive, got {tau}"));
        }
        if k_max < 1 {
            return Err(invalid!("level cap k_max must be at least 1"));
        }
        let mut probs = Vec::with_capacity(k_max + 1);
        let mut term = math::exp(-tau);
        probs.push(term);
        for k in 1..=k_max {
            term *= tau / k as f64;
            probs.push(term);
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(LevelPrior { tau: Some(tau), k_max, probs })
    }

    /// An explicit prior. Level 0 must carry positive mass so that every
    /// higher level has a well-defined belief.
    pub fn from_probs(probs: Vec<f64>) -> Result<LevelPrior> {
        if probs.len() < 2 {
            return Err(invalid!("a level prior needs at least levels 0 and 1"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid!("level probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid!("level probabilities sum to {total}, not 1"));
        }
        if probs[0] <= 0.0 {
            return Err(invalid!("level 0 must have positive prior mass"));
        }
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        Ok(LevelPrior { tau: None, k_max: probs.len() - 1, probs })
    }

    /// Point mass on level 0 (with an inert level 1 slot).
    pub fn level_zero() -> LevelPrior {
        LevelPrior { tau: None, k_max: 1, probs: alloc::vec![1.0, 0.0] }
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn prob(&self, k: usize) -> f64 {
        self.probs[k]
    }

    /// Belief of a level-`k` player over opponent levels `0..k`.
    pub fn truncated_belief(&self, k: usize) -> Result<Vec<f64>> {
        if k == 0 {
            return Err(invalid!("level 0 holds no belief about opponents"));
        }
        if k > self.k_max {
            return Err(invalid!("level {k} exceeds the cap k_max = {}", self.k_max));
        }
        let lower = &self.probs[..k];
        let mass: f64 = lower.iter().sum();
        if mass <= 0.0 {
            return Err(invalid!("levels below {k} carry no prior mass"));
        }
        Ok(lower.iter().map(|p| p / mass).collect())
    }

    /// Posterior over levels given the per-level probability of the
    /// conditioning event.
    pub fn posterior(&self, reach: &[f64]) -> Result<Vec<f64>> {
        posterior_levels(&self.probs, reach)
    }
}

/// `posterior(k) ∝ weights(k) * reach(k)`.
pub fn posterior_levels(weights: &[f64], reach: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != reach.len() {
        return Err(invalid!(
            "reach vector has {} entries for {} levels",
            reach.len(),
            weights.len()
        ));
    }
    if reach.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(invalid!("reach probabilities must be nonnegative"));
    }
    let mut post: Vec<f64> = weights.iter().zip(reach).map(|(w, r)| w * r).collect();
    let total: f64 = post.iter().sum();
    if total <= 0.0 {
        return Err(Error::Invalid("conditioning event has zero probability at every level".into()));
    }
    post.iter_mut().for_each(|p| *p /= total);
    Ok(post)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn poisson_ratio_and_mass() {
        let prior = LevelPrior::poisson(1.25, 10).unwrap();
        assert!((prior.prob(1) / prior.prob(0) - 1.25).abs() < 1e-14);
        assert!((prior.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // e^{-1.25} = 0.28650479686019010...; truncation above 10 shifts it by < 1e-7
        assert!((prior.prob(0) - 0.286_504_796_860_190_1).abs() < 1e-7);
        assert!((prior.prob(0) - 0.2865).abs() < 5e-5);
    }

    #[test]
    fn poisson_near_zero_is_degenerate() {
        let prior = LevelPrior::poisson(1e-12, 10).unwrap();
        assert!((prior.prob(0) - 1.0).abs() < 1e-11);
        assert!(prior.probs[1..].iter().all(|&p| p < 1e-11));
    }

    #[test]
    fn poisson_rejects_bad_arguments() {
        assert!(LevelPrior::poisson(0.0, 10).is_err());
        assert!(LevelPrior::poisson(-1.0, 10).is_err());
        assert!(LevelPrior::poisson(f64::NAN, 10).is_err());
        assert!(LevelPrior::poisson(1.0, 0).is_err());
    }

    #[test]
    fn truncated_beliefs() {
        let prior = LevelPrior::poisson(1.25, 10).unwrap();
        assert_eq!(prior.truncated_belief(1).unwrap(), [1.0]);
        let b2 = prior.truncated_belief(2).unwrap();
        assert!((b2[0] - 1.0 / 2.25).abs() < 1e-14);
        assert!((b2[1] - 1.25 / 2.25).abs() < 1e-14);
        assert!(prior.truncated_belief(0).is_err());
        assert!(prior.truncated_belief(11).is_err());
    }

    #[test]
    fn posterior_cases() {
        let prior = LevelPrior::poisson(1.25, 10).unwrap();
        assert_eq!(prior.posterior(&[1.0; 11]).unwrap(), prior.probs);
        let p = posterior_levels(&[0.5, 0.5], &[0.5, 1.0]).unwrap();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15 && (p[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!(posterior_levels(&[0.5, 0.5], &[0.0, 0.0]).is_err());
        assert!(posterior_levels(&[0.5, 0.5], &[1.0]).is_err());
    }

    #[test]
    fn explicit_priors_need_level_zero_mass() {
        assert!(LevelPrior::from_probs(alloc::vec![0.0, 1.0]).is_err());
        assert!(LevelPrior::from_probs(alloc::vec![0.3, 0.3]).is_err());
        assert!(LevelPrior::from_probs(alloc::vec![0.4, 0.6]).is_ok());
    }

    proptest! {
        #[test]
        fn beliefs_are_distributions(tau in 0.01f64..12.0, k_max in 1usize..60) {
            let prior = LevelPrior::poisson(tau, k_max).unwrap();
            prop_assert!((prior.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for k in 1..=k_max {
                let b = prior.truncated_belief(k).unwrap();
                prop_assert_eq!(b.len(), k);
                prop_assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn posterior_ignores_reach_scale(
            reach in proptest::collection::vec(0.01f64..1.0, 11),
            scale in 0.001f64..1000.0,
        ) {
            let prior = LevelPrior::poisson(2.0, 10).unwrap();
            let a = prior.posterior(&reach).unwrap();
            let scaled: Vec<f64> = reach.iter().map(|r| r * scale).collect();
            let b = prior.posterior(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
