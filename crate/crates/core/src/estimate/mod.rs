//! Likelihoods of observed choices under the DCH, QDCH and AQRE models,
//! maximum-likelihood fitting with bootstrap standard errors, and the
//! likelihood-ratio and Vuong model comparisons.
//!
//! Direct-response rows contribute the population probability of the chosen
//! action at the reached node, aggregated over levels with the posterior given
//! the actor's own earlier passes. Strategy-method rows contribute the
//! prior-weighted mixture probability of the submitted strategy.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::games::{Action, ElicitationForm, Player};
use crate::levels::LevelPrior;
use crate::math;
use crate::predict::Model;
use crate::solvers::{aggregate_choice_probs, PosteriorRule, Profile, SolutionKind, SolverConfig};

mod compare;
mod data;
mod fit;
pub mod optimize;

pub use compare::{lrt, vuong, LrtResult, VuongResult};
pub use data::{Dataset, Observation, Path, PathKey, Record};
pub use fit::{
    bootstrap_replicate, bootstrap_se, fit, refine, summarize_bootstrap, BootstrapResult, FitResult,
    SearchConfig,
};

/// Parameter values of a model; unused entries are `None`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Params {
    pub tau: Option<f64>,
    pub lambda: Option<f64>,
}

impl Params {
    pub fn dch(tau: f64) -> Params {
        Params { tau: Some(tau), lambda: None }
    }

    pub fn qdch(tau: f64, lambda: f64) -> Params {
        Params { tau: Some(tau), lambda: Some(lambda) }
    }

    pub fn aqre(lambda: f64) -> Params {
        Params { tau: None, lambda: Some(lambda) }
    }

    /// The model these parameters describe under `kind`.
    pub fn model(&self, kind: SolutionKind, k_max: usize) -> Result<Model> {
        let tau = || self.tau.ok_or_else(|| invalid!("{kind} needs tau"));
        let lambda = || self.lambda.ok_or_else(|| invalid!("{kind} needs lambda"));
        Ok(match kind {
            SolutionKind::Dch => Model::Dch { prior: LevelPrior::poisson(tau()?, k_max)? },
            SolutionKind::Qdch => Model::Qdch { prior: LevelPrior::poisson(tau()?, k_max)?, lambda: lambda()? },
            SolutionKind::Aqre => Model::Aqre { lambda: lambda()? },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Choice {
    Take(usize),
    Pass(usize),
    Strategy(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cell {
    target: usize,
    player: Player,
    choice: Choice,
    weight: f64,
}

/// A dataset compiled for repeated likelihood evaluation: identical choices
/// are merged into weighted cells and every `(game, form)` is solved once per
/// parameter point.
#[derive(Clone, Debug)]
pub struct Problem<'a> {
    pub kind: SolutionKind,
    pub k_max: usize,
    pub cfg: SolverConfig,
    data: &'a Dataset,
    targets: Vec<(String, ElicitationForm)>,
    /// Cell of every row, before merging.
    row_cells: Vec<Cell>,
    cells: Vec<Cell>,
    weight_total: f64,
}

impl<'a> Problem<'a> {
    pub fn new(kind: SolutionKind, data: &'a Dataset, k_max: usize, cfg: &SolverConfig) -> Result<Problem<'a>> {
        if data.is_empty() {
            return Err(invalid!("the dataset has no observations"));
        }
        cfg.validate()?;
        let mut target_index: BTreeMap<(String, ElicitationForm), usize> = BTreeMap::new();
        let mut targets = Vec::new();
        let mut row_cells = Vec::with_capacity(data.len());
        for obs in &data.observations {
            let key = (obs.game_id.clone(), obs.form);
            let target = *target_index.entry(key.clone()).or_insert_with(|| {
                targets.push(key);
                targets.len() - 1
            });
            let choice = match obs.record {
                Record::Node { node, action: Action::Take } => Choice::Take((node - 1) / 2),
                Record::Node { node, action: Action::Pass } => Choice::Pass((node - 1) / 2),
                Record::Strategy(s) => Choice::Strategy(s),
            };
            row_cells.push(Cell { target, player: obs.role, choice, weight: 1.0 });
        }
        let mut problem = Problem {
            kind,
            k_max,
            cfg: cfg.clone(),
            data,
            targets,
            row_cells,
            cells: Vec::new(),
            weight_total: 0.0,
        };
        let ones = alloc::vec![1.0; problem.row_cells.len()];
        problem.set_row_weights(&ones);
        Ok(problem)
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    /// Re-weights rows (bootstrap multiplicities); zero weights drop a row.
    pub fn set_row_weights(&mut self, weights: &[f64]) {
        let mut merged: Vec<Cell> = Vec::new();
        let mut index: BTreeMap<(usize, usize, u8, usize), usize> = BTreeMap::new();
        for (cell, &w) in self.row_cells.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            let (tag, i) = match cell.choice {
                Choice::Take(p) => (0, p),
                Choice::Pass(p) => (1, p),
                Choice::Strategy(s) => (2, s),
            };
            let key = (cell.target, cell.player.index(), tag, i);
            match index.get(&key) {
                Some(&slot) => merged[slot].weight += w,
                None => {
                    index.insert(key, merged.len());
                    merged.push(Cell { weight: w, ..*cell });
                }
            }
        }
        self.weight_total = weights.iter().sum();
        self.cells = merged;
    }

    /// Population choice probabilities for every `(game, form)` in the data.
    fn profiles(&self, params: &Params) -> Result<Vec<Profile>> {
        let model = params.model(self.kind, self.k_max)?;
        self.targets
            .iter()
            .map(|(game_id, form)| {
                let game = self.data.game(game_id)?;
                let solution = model.solve(game, *form, &self.cfg)?;
                match model.prior() {
                    Some(prior) => aggregate_choice_probs(&solution, prior, PosteriorRule::OwnActions),
                    None => Ok(solution.levels[0].clone()),
                }
            })
            .collect()
    }

    fn cell_prob(profiles: &[Profile], cell: &Cell) -> f64 {
        let probs = profiles[cell.target].of(cell.player);
        match cell.choice {
            Choice::Take(pos) => probs[pos],
            Choice::Pass(pos) => 1.0 - probs[pos],
            Choice::Strategy(s) => probs[s],
        }
    }

    fn log_prob(&self, profiles: &[Profile], cell: &Cell) -> Result<f64> {
        let p = Self::cell_prob(profiles, cell);
        if p > 0.0 {
            Ok(math::ln(p))
        } else if self.kind == SolutionKind::Aqre {
            Err(Error::Convergence {
                residual: f64::NAN,
                lambda: f64::NAN,
                reason: String::from("AQRE assigned probability zero to an observed choice"),
            })
        } else {
            Err(Error::ZeroProbability(alloc::format!(
                "{} assigns probability {p} to an observed choice in game '{}'",
                self.kind,
                self.targets[cell.target].0
            )))
        }
    }

    /// Weighted log-likelihood.
    pub fn loglik(&self, params: &Params) -> Result<f64> {
        let profiles = self.profiles(params)?;
        let mut total = 0.0;
        for cell in &self.cells {
            total += cell.weight * self.log_prob(&profiles, cell)?;
        }
        Ok(total)
    }

    /// Number of (weighted) observations.
    pub fn n_obs(&self) -> f64 {
        self.weight_total
    }

    /// Log-likelihood of every unit of observation, in [`Dataset::units`]
    /// order: a direct-response path sums its node choices.
    pub fn unit_logliks(&self, params: &Params) -> Result<Vec<f64>> {
        let profiles = self.profiles(params)?;
        let (units, count) = self.data.units();
        let mut out = alloc::vec![0.0; count];
        for (cell, unit) in self.row_cells.iter().zip(units) {
            out[unit] += self.log_prob(&profiles, cell)?;
        }
        Ok(out)
    }
}

/// Log-likelihood of `data` under `kind` at `params`.
pub fn loglik(
    kind: SolutionKind,
    params: &Params,
    data: &Dataset,
    k_max: usize,
    cfg: &SolverConfig,
) -> Result<f64> {
    Problem::new(kind, data, k_max, cfg)?.loglik(params)
}

/// Per-unit log-likelihoods (paths for direct response, rows otherwise),
/// aligned across models for the Vuong test.
pub fn unit_logliks(
    kind: SolutionKind,
    params: &Params,
    data: &Dataset,
    k_max: usize,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    Problem::new(kind, data, k_max, cfg)?.unit_logliks(params)
}
