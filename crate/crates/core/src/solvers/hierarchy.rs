//! Level-by-level recursion shared by the best-response and quantal
//! cognitive hierarchy solutions.

use alloc::vec::Vec;

use super::{check_lambda, Profile, Solution, SolutionKind, SolverConfig, TieRule};
use crate::error::Result;
use crate::games::{reduced_of, strategy_payoff_matrix, CentipedeGame, ElicitationForm, PayoffMatrix, Player};
use crate::levels::LevelPrior;
use crate::math;

#[derive(Clone, Copy, Debug)]
enum Response {
    Best { tie_tolerance: f64, rule: TieRule },
    Logit { lambda: f64 },
}

impl Response {
    /// Take probability and resulting node value for a binary take/pass choice.
    fn binary(self, take: f64, pass: f64) -> (f64, f64) {
        match self {
            Response::Best { tie_tolerance, rule } => {
                if ties(take, pass, tie_tolerance) {
                    let sigma = match rule {
                        TieRule::Uniform => 0.5,
                        TieRule::Later => 0.0,
                    };
                    (sigma, take.max(pass))
                } else if take > pass {
                    (1.0, take)
                } else {
                    (0.0, pass)
                }
            }
            Response::Logit { lambda } => {
                let sigma = logistic(lambda * (take - pass));
                (sigma, sigma * take + (1.0 - sigma) * pass)
            }
        }
    }

    /// Response over a strategy set; `reduction[s]` is the reduced strategy
    /// of `s`, whose order is the order of the take node.
    fn mixture(self, values: &[f64], reduction: &[usize], out: &mut [f64]) {
        match self {
            Response::Best { tie_tolerance, rule } => {
                let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for (o, &v) in out.iter_mut().zip(values) {
                    *o = if ties(v, best, tie_tolerance) { 1.0 } else { 0.0 };
                }
                if rule == TieRule::Later {
                    let latest = out
                        .iter()
                        .zip(reduction)
                        .filter(|(o, _)| **o > 0.0)
                        .map(|(_, r)| *r)
                        .max()
                        .unwrap_or(0);
                    for (o, r) in out.iter_mut().zip(reduction) {
                        if *r != latest {
                            *o = 0.0;
                        }
                    }
                }
                let count = out.iter().filter(|o| **o > 0.0).count();
                let share = 1.0 / count as f64;
                out.iter_mut().for_each(|o| *o *= share);
            }
            Response::Logit { lambda } => math::softmax_into(lambda, values, out),
        }
    }
}

#[inline]
fn ties(a: f64, b: f64, tolerance: f64) -> bool {
    math::abs(a - b) <= tolerance * math::abs(a).max(math::abs(b))
}

#[inline]
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + math::exp(-x))
    } else {
        let e = math::exp(x);
        e / (1.0 + e)
    }
}

/// Dynamic cognitive hierarchy solution: level 0 randomizes uniformly, every
/// higher level best responds to its truncated, Bayes-updated belief.
pub fn dch_solve(
    game: &CentipedeGame,
    form: ElicitationForm,
    prior: &LevelPrior,
    cfg: &SolverConfig,
) -> Result<Solution> {
    cfg.validate()?;
    let levels = solve_levels(
        game,
        form,
        prior,
        Response::Best { tie_tolerance: cfg.tie_tolerance, rule: cfg.tie_rule },
    )?;
    Ok(Solution {
        form,
        kind: SolutionKind::Dch,
        depth: game.depth(),
        tau: prior.tau,
        lambda: None,
        levels,
        residual: None,
        homotopy: Vec::new(),
    })
}

/// Quantal variant: every level above 0 makes logit responses with a shared
/// precision `lambda`, and its own future choices enter its continuation
/// values at their logit probabilities.
pub fn qdch_solve(
    game: &CentipedeGame,
    form: ElicitationForm,
    prior: &LevelPrior,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<Solution> {
    cfg.validate()?;
    check_lambda(lambda)?;
    let levels = solve_levels(game, form, prior, Response::Logit { lambda })?;
    Ok(Solution {
        form,
        kind: SolutionKind::Qdch,
        depth: game.depth(),
        tau: prior.tau,
        lambda: Some(lambda),
        levels,
        residual: None,
        homotopy: Vec::new(),
    })
}

fn solve_levels(
    game: &CentipedeGame,
    form: ElicitationForm,
    prior: &LevelPrior,
    response: Response,
) -> Result<Vec<Profile>> {
    let depth = game.depth();
    let mut levels = Vec::with_capacity(prior.levels());
    levels.push(Profile::uniform(form, depth));
    let strategic = if form.is_strategic() {
        Some(StrategicForm::new(game, form)?)
    } else {
        None
    };
    for k in 1..prior.levels() {
        let belief = prior.truncated_belief(k)?;
        let mut players: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for p in Player::BOTH {
            players[p.index()] = match &strategic {
                None => sequential_response(game, p, &belief, &levels, response),
                Some(sf) => sf.response(p, &belief, &levels, response),
            };
        }
        levels.push(Profile { players });
    }
    Ok(levels)
}

/// Direct response: backward induction against the belief-weighted mixture of
/// lower levels, updated at each opponent node by the opponent's passes.
fn sequential_response(
    game: &CentipedeGame,
    player: Player,
    belief: &[f64],
    lower: &[Profile],
    response: Response,
) -> Vec<f64> {
    let depth = game.depth();
    let stages = game.stages();
    let opp = player.opponent();

    // Conditional take probability at each opponent node, given it is reached.
    let mut survive: Vec<f64> = belief.to_vec();
    let mut opp_take = Vec::with_capacity(depth);
    for pos in 0..depth {
        let mut num = 0.0;
        let mut den = 0.0;
        for (s, lvl) in survive.iter_mut().zip(lower) {
            let t = lvl.of(opp)[pos];
            num += *s * t;
            den += *s;
            *s *= 1.0 - t;
        }
        opp_take.push(num / den);
    }

    let mut take = alloc::vec![0.0; depth];
    let mut value = game.payoff(stages + 1, player);
    for node in (1..=stages).rev() {
        let pos = (node - 1) / 2;
        let here = game.payoff(node, player);
        if Player::mover(node) == player {
            let (sigma, v) = response.binary(here, value);
            take[pos] = sigma;
            value = v;
        } else {
            let q = opp_take[pos];
            value = q * here + (1.0 - q) * value;
        }
    }
    take
}

struct StrategicForm {
    form: ElicitationForm,
    depth: usize,
    /// Reduced-normal-form payoffs for each player.
    reduced: [PayoffMatrix; 2],
    /// Reduced strategy index of every strategy of the form.
    reduction: Vec<usize>,
}

impl StrategicForm {
    fn new(game: &CentipedeGame, form: ElicitationForm) -> Result<StrategicForm> {
        let depth = game.depth();
        let reduced = strategy_payoff_matrix(game, ElicitationForm::ReducedStrategy)?;
        let reduction = (0..form.strategy_count(depth))
            .map(|s| reduced_of(form, s, depth).map(|r| r.index()))
            .collect::<Result<Vec<_>>>()?;
        Ok(StrategicForm { form, depth, reduced, reduction })
    }

    /// Ex-ante response to the belief-weighted mixture of lower levels.
    /// Expected payoffs depend on a strategy only through its reduction.
    fn response(
        &self,
        player: Player,
        belief: &[f64],
        lower: &[Profile],
        response: Response,
    ) -> Vec<f64> {
        let opp = player.opponent();
        let nr = self.depth + 1;
        let mut opp_reduced = alloc::vec![0.0; nr];
        for (w, lvl) in belief.iter().zip(lower) {
            for (s, &prob) in lvl.of(opp).iter().enumerate() {
                opp_reduced[self.reduction[s]] += w * prob;
            }
        }
        let matrix = &self.reduced[player.index()];
        let reduced_value: Vec<f64> = (0..nr)
            .map(|own| {
                (0..nr)
                    .map(|other| {
                        let payoff = match player {
                            Player::One => matrix.get(own, other),
                            Player::Two => matrix.get(other, own),
                        };
                        opp_reduced[other] * payoff
                    })
                    .sum()
            })
            .collect();
        let values: Vec<f64> = self.reduction.iter().map(|&r| reduced_value[r]).collect();
        let mut out = alloc::vec![0.0; self.form.strategy_count(self.depth)];
        response.mixture(&values, &self.reduction, &mut out);
        out
    }
}
