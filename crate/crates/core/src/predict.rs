//! Terminal-node distributions implied by a solution, CDF comparisons and the
//! sup-norm design scan over a family's payoff parameter.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::games::{
    terminal_node, CentipedeGame, ElicitationForm, Family, GameSpec, Player, ReducedStrategy,
    Rescale,
};
use crate::levels::LevelPrior;
use crate::solvers::{self, Profile, Solution, SolutionKind, SolverConfig};

/// Probability that play ends at each node `1..=2D+1`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TerminalDistribution {
    pub probs: Vec<f64>,
}

impl TerminalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<TerminalDistribution> {
        if probs.len() < 5 || probs.len().is_multiple_of(2) {
            return Err(invalid!("a terminal distribution needs 2D + 1 >= 5 nodes, got {}", probs.len()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid!("terminal probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid!("terminal probabilities sum to {total}, not 1"));
        }
        Ok(TerminalDistribution { probs })
    }

    pub fn point_mass(node: usize, depth: usize) -> TerminalDistribution {
        let mut probs = alloc::vec![0.0; 2 * depth + 1];
        probs[node - 1] = 1.0;
        TerminalDistribution { probs }
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        self.probs.len()
    }

    /// Probability of ending at `node` (1-based).
    #[inline]
    pub fn prob(&self, node: usize) -> f64 {
        self.probs[node - 1]
    }

    /// `F(j) = P(terminal node <= j)`; the last entry is forced to 1.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    }
}

/// `max_j |F_a(j) - F_b(j)|`.
pub fn supnorm(a: &TerminalDistribution, b: &TerminalDistribution) -> Result<f64> {
    if a.nodes() != b.nodes() {
        return Err(invalid!("distributions over {} and {} nodes cannot be compared", a.nodes(), b.nodes()));
    }
    Ok(a.cdf()
        .iter()
        .zip(b.cdf())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Distribution over reduced strategies (`D + 1` entries) induced by one
/// player's profile entry under `form`.
pub fn reduced_mixture(form: ElicitationForm, probs: &[f64], depth: usize) -> Result<Vec<f64>> {
    let mut out = alloc::vec![0.0; depth + 1];
    match form {
        ElicitationForm::DirectResponse => {
            if probs.len() != depth {
                return Err(invalid!("direct response profile needs {depth} take probabilities"));
            }
            let mut survive = 1.0;
            for (slot, t) in out.iter_mut().zip(probs) {
                *slot = survive * t;
                survive *= 1.0 - t;
            }
            out[depth] = survive;
        }
        ElicitationForm::ReducedStrategy => {
            if probs.len() != depth + 1 {
                return Err(invalid!("reduced strategy mixture needs {} entries", depth + 1));
            }
            out.copy_from_slice(probs);
        }
        ElicitationForm::FullStrategy => {
            if probs.len() != 1 << depth {
                return Err(invalid!("full strategy mixture needs {} entries", 1usize << depth));
            }
            for (i, p) in probs.iter().enumerate() {
                let r = crate::games::FullStrategy::from_index(i, depth)?.reduce(depth);
                out[r.index()] += p;
            }
        }
    }
    Ok(out)
}

/// Terminal distribution of two independent reduced-strategy mixtures.
pub fn terminal_from_reduced(r1: &[f64], r2: &[f64], depth: usize) -> TerminalDistribution {
    let mut probs = alloc::vec![0.0; 2 * depth + 1];
    for (i, p1) in r1.iter().enumerate() {
        for (j, p2) in r2.iter().enumerate() {
            let s1 = ReducedStrategy::from_index(i, depth).expect("index in range");
            let s2 = ReducedStrategy::from_index(j, depth).expect("index in range");
            probs[terminal_node(s1, s2, depth) - 1] += p1 * p2;
        }
    }
    TerminalDistribution { probs }
}

/// Terminal distribution of a single (level-pair or equilibrium) profile.
pub fn profile_terminal_distribution(
    form: ElicitationForm,
    profile: &Profile,
    depth: usize,
) -> Result<TerminalDistribution> {
    let r1 = reduced_mixture(form, profile.of(Player::One), depth)?;
    let r2 = reduced_mixture(form, profile.of(Player::Two), depth)?;
    Ok(terminal_from_reduced(&r1, &r2, depth))
}

/// Population terminal distribution of a solution.
///
/// Levels of the two players are drawn independently from `prior`, so the
/// sum over level pairs `(k1, k2)` weighted by `prior(k1) prior(k2)` factors
/// through each player's prior-weighted mixture over reduced strategies
/// (the terminal node is bilinear in the two mixtures). AQRE solutions carry
/// no levels and `prior` is ignored.
pub fn terminal_distribution(
    game: &CentipedeGame,
    form: ElicitationForm,
    solution: &Solution,
    prior: Option<&LevelPrior>,
) -> Result<TerminalDistribution> {
    let depth = game.depth();
    if solution.form != form || solution.depth != depth {
        return Err(invalid!(
            "solution for {} with D = {} does not match {} with D = {depth}",
            solution.form,
            solution.depth,
            form
        ));
    }
    if solution.is_level_free() {
        return profile_terminal_distribution(form, &solution.levels[0], depth);
    }
    let prior = prior.ok_or_else(|| invalid!("a level prior is needed for {}", solution.kind))?;
    if prior.levels() != solution.levels.len() {
        return Err(invalid!(
            "solution has {} levels but the prior has {}",
            solution.levels.len(),
            prior.levels()
        ));
    }
    let mut mixed = [alloc::vec![0.0; depth + 1], alloc::vec![0.0; depth + 1]];
    for (w, profile) in prior.probs.iter().zip(&solution.levels) {
        for p in Player::BOTH {
            let r = reduced_mixture(form, profile.of(p), depth)?;
            for (slot, v) in mixed[p.index()].iter_mut().zip(r) {
                *slot += w * v;
            }
        }
    }
    Ok(terminal_from_reduced(&mixed[0], &mixed[1], depth))
}

/// A behavioural model with its parameters.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Model {
    Dch { prior: LevelPrior },
    Qdch { prior: LevelPrior, lambda: f64 },
    Aqre { lambda: f64 },
}

impl Model {
    pub fn kind(&self) -> SolutionKind {
        match self {
            Model::Dch { .. } => SolutionKind::Dch,
            Model::Qdch { .. } => SolutionKind::Qdch,
            Model::Aqre { .. } => SolutionKind::Aqre,
        }
    }

    pub fn prior(&self) -> Option<&LevelPrior> {
        match self {
            Model::Dch { prior } | Model::Qdch { prior, .. } => Some(prior),
            Model::Aqre { .. } => None,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Model::Dch { .. } => None,
            Model::Qdch { lambda, .. } | Model::Aqre { lambda } => Some(*lambda),
        }
    }

    pub fn solve(&self, game: &CentipedeGame, form: ElicitationForm, cfg: &SolverConfig) -> Result<Solution> {
        solvers::solve(self.kind(), game, form, self.prior(), self.lambda(), cfg)
    }

    /// Solve and return the population terminal distribution.
    pub fn predict(&self, game: &CentipedeGame, form: ElicitationForm, cfg: &SolverConfig) -> Result<TerminalDistribution> {
        let solution = self.solve(game, form, cfg)?;
        terminal_distribution(game, form, &solution, self.prior())
    }
}

/// Sup-norm between the predictions for two forms of one game.
pub fn form_supnorm(
    game: &CentipedeGame,
    model: &Model,
    forms: [ElicitationForm; 2],
    cfg: &SolverConfig,
) -> Result<f64> {
    let a = model.predict(game, forms[0], cfg)?;
    let b = model.predict(game, forms[1], cfg)?;
    supnorm(&a, &b)
}

/// One grid point of a design scan. `supnorm` is `None` when the point failed.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanPoint {
    pub c: f64,
    pub supnorm: Option<f64>,
    /// `"ok"` or the error message for this point.
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignScan {
    pub family: Family,
    pub pi: Option<f64>,
    pub stages: usize,
    pub rescale: Rescale,
    pub model: Model,
    pub forms: [ElicitationForm; 2],
    pub points: Vec<ScanPoint>,
}

/// Parameters shared by every point of a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSetup {
    pub family: Family,
    /// Growth factor for exponential games (default 2).
    pub pi: Option<f64>,
    pub stages: usize,
    pub rescale: Rescale,
    pub model: Model,
    pub forms: [ElicitationForm; 2],
}

impl ScanSetup {
    pub fn game_spec(&self, c: f64) -> Result<GameSpec> {
        let spec = match self.family {
            Family::Linear => GameSpec::linear(c, self.stages),
            Family::Constant => GameSpec::constant(c, self.stages),
            Family::Exponential => GameSpec::exponential(c, self.pi.unwrap_or(2.0), self.stages),
            Family::Custom => return Err(invalid!("custom games have no scan parameter")),
        };
        Ok(spec.with_rescale(self.rescale))
    }

    /// Evaluates one grid point; failures are captured in the point's status.
    pub fn point(&self, c: f64, cfg: &SolverConfig) -> ScanPoint {
        let run = || -> Result<f64> {
            let game = CentipedeGame::new(self.game_spec(c)?)?;
            form_supnorm(&game, &self.model, self.forms, cfg)
        };
        match run() {
            Ok(s) => ScanPoint { c, supnorm: Some(s), status: "ok".to_string() },
            Err(e) => ScanPoint { c, supnorm: None, status: e.to_string() },
        }
    }

    pub fn collect(self, points: Vec<ScanPoint>) -> DesignScan {
        DesignScan {
            family: self.family,
            pi: self.pi,
            stages: self.stages,
            rescale: self.rescale,
            model: self.model,
            forms: self.forms,
            points,
        }
    }
}

/// Sup-norm `S(c)` at every grid value, in grid order. Points outside the
/// family's admissible range are reported individually.
pub fn design_scan(setup: ScanSetup, grid: &[f64], cfg: &SolverConfig) -> Result<DesignScan> {
    cfg.validate()?;
    if setup.forms[0] == setup.forms[1] {
        return Err(invalid!("a design scan compares two different forms"));
    }
    if setup.family == Family::Custom {
        return Err(Error::Invalid("custom games have no scan parameter".into()));
    }
    let points = grid.iter().map(|&c| setup.point(c, cfg)).collect();
    Ok(setup.collect(points))
}

/// Default grid for a family, step 0.01: `(0, 1)` for linear and constant
/// games, `(2, 8]` for exponential games with `pi = 2`.
pub fn default_grid(family: Family) -> Vec<f64> {
    let (lo, hi) = match family {
        Family::Linear | Family::Constant => (1, 99),
        Family::Exponential => (201, 800),
        Family::Custom => return Vec::new(),
    };
    (lo..=hi).map(|i| i as f64 / 100.0).collect()
}
