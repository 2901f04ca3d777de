//! Cognitive hierarchy (best-response and quantal) and logit agent QRE
//! solutions of a centipede game under each elicitation form.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::games::{CentipedeGame, ElicitationForm, Player};
use crate::levels::LevelPrior;

mod aqre;
mod hierarchy;
mod linalg;

pub use aqre::{aqre_solve, logit_residual};
pub use hierarchy::{dch_solve, qdch_solve};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SolutionKind {
    Dch,
    Qdch,
    Aqre,
}

impl SolutionKind {
    pub fn code(self) -> &'static str {
        match self {
            SolutionKind::Dch => "dch",
            SolutionKind::Qdch => "qdch",
            SolutionKind::Aqre => "aqre",
        }
    }
}

impl core::str::FromStr for SolutionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dch" => Ok(SolutionKind::Dch),
            "qdch" => Ok(SolutionKind::Qdch),
            "aqre" | "qre" => Ok(SolutionKind::Aqre),
            _ => Err(invalid!("unknown model '{s}' (expected dch, qdch or aqre)")),
        }
    }
}

impl core::fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.code())
    }
}

/// How a best response resolves exact indifference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TieRule {
    /// Mix uniformly over the argmax set (take/pass 1/2 at a node).
    Uniform,
    /// Keep only the tied options that take latest (pass at a node), then
    /// mix uniformly over what remains.
    #[default]
    Later,
}

impl TieRule {
    pub fn code(self) -> &'static str {
        match self {
            TieRule::Uniform => "uniform",
            TieRule::Later => "later",
        }
    }
}

impl core::str::FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(TieRule::Uniform),
            "later" | "pass" => Ok(TieRule::Later),
            _ => Err(invalid!("unknown tie rule '{s}' (expected uniform or later)")),
        }
    }
}

/// Numerical settings shared by all solvers.
///
/// Homotopy steps are measured on the scale `s = ln(1 + lambda * span)`,
/// where `span` is the spread between the largest and smallest payoff of the
/// game, so the same settings work for games in any payoff unit.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    /// Relative tolerance under which two best-response values tie.
    pub tie_tolerance: f64,
    pub tie_rule: TieRule,
    /// Maximum absolute logit fixed-point residual accepted.
    pub fixed_point_tolerance: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Factor applied to the step after a failed corrector.
    pub step_shrink: f64,
    /// Corrector iterations allowed per homotopy step.
    pub max_iterations: usize,
    /// Total homotopy steps (accepted or rejected) allowed per solve.
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tie_tolerance: 1e-12,
            tie_rule: TieRule::Later,
            fixed_point_tolerance: 1e-12,
            initial_step: 0.05,
            max_step: 0.5,
            step_shrink: 0.5,
            max_iterations: 50,
            max_steps: 100_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tie_tolerance", self.tie_tolerance),
            ("fixed_point_tolerance", self.fixed_point_tolerance),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid!("{name} must be positive, got {v}"));
            }
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(invalid!("step_shrink must lie in (0, 1), got {}", self.step_shrink));
        }
        if self.max_iterations == 0 || self.max_steps == 0 {
            return Err(invalid!("iteration budgets must be positive"));
        }
        Ok(())
    }
}

/// Behaviour of both players at one level (or the level-free AQRE profile).
///
/// Direct response stores the take probability at each own node, conditional
/// on reaching it. The strategy methods store a mixture over the form's
/// strategy set in its canonical order.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Profile {
    pub players: [Vec<f64>; 2],
}

impl Profile {
    #[inline]
    pub fn of(&self, player: Player) -> &[f64] {
        &self.players[player.index()]
    }

    /// Profile of uniform play under `form`.
    pub fn uniform(form: ElicitationForm, depth: usize) -> Profile {
        let v = match form {
            ElicitationForm::DirectResponse => alloc::vec![0.5; depth],
            _ => {
                let n = form.strategy_count(depth);
                alloc::vec![1.0 / n as f64; n]
            }
        };
        Profile { players: [v.clone(), v] }
    }
}

/// One accepted homotopy step.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HomotopyStep {
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Solution {
    pub form: ElicitationForm,
    pub kind: SolutionKind,
    pub depth: usize,
    pub tau: Option<f64>,
    pub lambda: Option<f64>,
    /// One profile per level `0..=k_max`; a single entry for AQRE.
    pub levels: Vec<Profile>,
    /// Final logit fixed-point residual (AQRE only).
    pub residual: Option<f64>,
    pub homotopy: Vec<HomotopyStep>,
}

impl Solution {
    pub fn is_level_free(&self) -> bool {
        self.kind == SolutionKind::Aqre
    }

    pub fn level(&self, k: usize) -> &Profile {
        &self.levels[k]
    }

    /// Probability that `player` at `level` takes at own node `pos` (0-based),
    /// conditional on reaching it. Only defined for direct response.
    pub fn take_prob(&self, level: usize, player: Player, pos: usize) -> f64 {
        debug_assert_eq!(self.form, ElicitationForm::DirectResponse);
        self.levels[level].players[player.index()][pos]
    }
}

/// Which history the level posterior conditions on when aggregating.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PosteriorRule {
    /// Condition on the acting player's own earlier passes.
    #[default]
    OwnActions,
    /// Use the prior at every history.
    Prior,
}

/// Population choice probabilities: `sum_k posterior(k | h) * sigma^k(a | h)`.
///
/// For the strategy methods the only history is the empty one, so the
/// posterior is the prior. AQRE solutions pass through unchanged.
pub fn aggregate_choice_probs(
    solution: &Solution,
    prior: &LevelPrior,
    rule: PosteriorRule,
) -> Result<Profile> {
    if solution.is_level_free() {
        return Ok(solution.levels[0].clone());
    }
    if solution.levels.len() != prior.levels() {
        return Err(invalid!(
            "solution has {} levels but the prior has {}",
            solution.levels.len(),
            prior.levels()
        ));
    }
    let mut players: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for p in Player::BOTH {
        let n = solution.levels[0].of(p).len();
        let out = &mut players[p.index()];
        out.resize(n, 0.0);
        match (solution.form, rule) {
            (ElicitationForm::DirectResponse, PosteriorRule::OwnActions) => {
                let mut reach: Vec<f64> = alloc::vec![1.0; prior.levels()];
                for (pos, slot) in out.iter_mut().enumerate() {
                    let post = prior.posterior(&reach)?;
                    *slot = post
                        .iter()
                        .zip(&solution.levels)
                        .map(|(w, lvl)| w * lvl.of(p)[pos])
                        .sum();
                    for (r, lvl) in reach.iter_mut().zip(&solution.levels) {
                        *r *= 1.0 - lvl.of(p)[pos];
                    }
                }
            }
            _ => {
                for (w, lvl) in prior.probs.iter().zip(&solution.levels) {
                    for (slot, v) in out.iter_mut().zip(lvl.of(p)) {
                        *slot += w * v;
                    }
                }
            }
        }
    }
    Ok(Profile { players })
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid!("precision lambda must be finite and nonnegative, got {lambda}"));
    }
    Ok(())
}

/// Solves with the model named by `kind`.
pub fn solve(
    kind: SolutionKind,
    game: &CentipedeGame,
    form: ElicitationForm,
    prior: Option<&LevelPrior>,
    lambda: Option<f64>,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let need_prior = || prior.ok_or_else(|| invalid!("{kind} needs a level prior (tau)"));
    let need_lambda = || lambda.ok_or_else(|| invalid!("{kind} needs a precision lambda"));
    match kind {
        SolutionKind::Dch => dch_solve(game, form, need_prior()?, cfg),
        SolutionKind::Qdch => qdch_solve(game, form, need_prior()?, need_lambda()?, cfg),
        SolutionKind::Aqre => aqre_solve(game, form, need_lambda()?, cfg),
    }
}
