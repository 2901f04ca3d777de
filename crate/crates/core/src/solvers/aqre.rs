//! Logit agent quantal response equilibrium by homotopy continuation.
//!
//! The equilibrium conditions are written as `p = logit(lambda * v(p))` block
//! by block, where a block is one choice set: a take/pass pair at every
//! decision node for direct response (`2 * 2D` unknowns), or a player's whole
//! strategy set for the strategy methods. The branch starting at the uniform
//! profile at `lambda = 0` is followed by a predictor step and a damped Newton
//! corrector in log-probability coordinates.

use alloc::string::String;
use alloc::vec::Vec;

use super::linalg::solve_dense;
use super::{check_lambda, HomotopyStep, Profile, Solution, SolutionKind, SolverConfig};
use crate::error::{Error, Result};
use crate::games::{strategy_payoff_matrix, CentipedeGame, ElicitationForm, PayoffMatrix, Player};
use crate::math;

trait LogitSystem {
    fn dim(&self) -> usize;
    /// `(start, len)` of every choice set.
    fn blocks(&self) -> &[(usize, usize)];
    /// Value of every action given the (possibly unnormalized) profile.
    /// Values are affine in each coordinate of `probs` separately.
    fn values(&self, probs: &[f64], out: &mut [f64]);
}

/// Direct response: take/pass at node `j` sit at `2(j-1)` and `2(j-1)+1`.
struct Sequential<'a> {
    game: &'a CentipedeGame,
    blocks: Vec<(usize, usize)>,
}

impl<'a> Sequential<'a> {
    fn new(game: &'a CentipedeGame) -> Self {
        let blocks = (0..game.stages()).map(|j| (2 * j, 2)).collect();
        Sequential { game, blocks }
    }
}

impl LogitSystem for Sequential<'_> {
    fn dim(&self) -> usize {
        2 * self.game.stages()
    }

    fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    fn values(&self, probs: &[f64], out: &mut [f64]) {
        let stages = self.game.stages();
        let mut cont = [
            self.game.payoff(stages + 1, Player::One),
            self.game.payoff(stages + 1, Player::Two),
        ];
        for node in (1..=stages).rev() {
            let i = 2 * (node - 1);
            let mover = Player::mover(node).index();
            out[i] = self.game.payoffs()[node - 1][mover];
            out[i + 1] = cont[mover];
            let (take, pass) = (probs[i], probs[i + 1]);
            for (p, c) in cont.iter_mut().enumerate() {
                *c = take * self.game.payoffs()[node - 1][p] + pass * *c;
            }
        }
    }
}

/// Strategy methods: a bimatrix game, Player One's mixture first.
struct Static {
    n: usize,
    mats: [PayoffMatrix; 2],
    blocks: [(usize, usize); 2],
}

impl Static {
    fn new(game: &CentipedeGame, form: ElicitationForm) -> Result<Self> {
        let mats = strategy_payoff_matrix(game, form)?;
        let n = mats[0].rows;
        Ok(Static { n, mats, blocks: [(0, n), (n, n)] })
    }
}

impl LogitSystem for Static {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    fn values(&self, probs: &[f64], out: &mut [f64]) {
        let n = self.n;
        let (p1, p2) = probs.split_at(n);
        for s in 0..n {
            out[s] = (0..n).map(|t| p2[t] * self.mats[0].get(s, t)).sum();
        }
        for t in 0..n {
            out[n + t] = (0..n).map(|s| p1[s] * self.mats[1].get(s, t)).sum();
        }
    }
}

/// Log-probabilities are clamped here so that `exp` never underflows; the
/// clamped mass is below `1e-304` and invisible to the residual.
const LOG_FLOOR: f64 = -700.0;

fn log_clamped(p: f64) -> f64 {
    math::ln(p).max(LOG_FLOOR)
}

fn normalize_blocks(sys: &dyn LogitSystem, probs: &mut [f64]) {
    for &(start, len) in sys.blocks() {
        let block = &mut probs[start..start + len];
        let total: f64 = block.iter().sum();
        block.iter_mut().for_each(|p| *p /= total);
    }
}

fn respond(sys: &dyn LogitSystem, lambda: f64, values: &[f64], out: &mut [f64]) {
    for &(start, len) in sys.blocks() {
        math::softmax_into(lambda, &values[start..start + len], &mut out[start..start + len]);
    }
}

/// `max |p - logit(lambda * v(p))|` over all actions.
fn residual(sys: &dyn LogitSystem, lambda: f64, probs: &[f64]) -> f64 {
    let n = sys.dim();
    let mut v = alloc::vec![0.0; n];
    let mut r = alloc::vec![0.0; n];
    sys.values(probs, &mut v);
    respond(sys, lambda, &v, &mut r);
    let mut worst = 0.0f64;
    for (a, b) in probs.iter().zip(&r) {
        let d = math::abs(a - b);
        if !d.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(d);
    }
    worst
}

/// Log-space equation `G(y) = y - max(log logit(lambda * v(exp y)), LOG_FLOOR)`.
fn equations(sys: &dyn LogitSystem, lambda: f64, y: &[f64], g: &mut [f64]) {
    let n = sys.dim();
    let p: Vec<f64> = y.iter().map(|&v| math::exp(v)).collect();
    let mut v = alloc::vec![0.0; n];
    sys.values(&p, &mut v);
    for &(start, len) in sys.blocks() {
        math::log_softmax_into(lambda, &v[start..start + len], &mut g[start..start + len]);
    }
    for (gi, yi) in g.iter_mut().zip(y) {
        *gi = yi - gi.max(LOG_FLOOR);
    }
}

fn max_abs(v: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for x in v {
        if !x.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(math::abs(*x));
    }
    worst
}

struct Corrected {
    converged: bool,
    residual: f64,
    iterations: usize,
}

/// Newton iterations on `G(y) = 0` with backtracking; the convergence test is
/// the probability-space residual of the block-normalized profile, accepted at
/// `tol`.
fn correct(sys: &dyn LogitSystem, lambda: f64, y: &mut [f64], cfg: &SolverConfig, tol: f64) -> Corrected {
    let n = sys.dim();
    let mut g = alloc::vec![0.0; n];
    let mut best = f64::INFINITY;
    for it in 0..=cfg.max_iterations {
        let mut p: Vec<f64> = y.iter().map(|&v| math::exp(v)).collect();
        normalize_blocks(sys, &mut p);
        let res = residual(sys, lambda, &p);
        best = best.min(res);
        if res <= tol {
            for (yi, pi) in y.iter_mut().zip(&p) {
                *yi = log_clamped(*pi);
            }
            return Corrected { converged: true, residual: res, iterations: it };
        }
        if it == cfg.max_iterations {
            break;
        }

        equations(sys, lambda, y, &mut g);
        let merit = max_abs(&g);
        let step = newton_step(sys, lambda, y, &g);
        let mut accepted = false;
        if let Some(step) = step {
            let mut alpha = 1.0;
            let mut trial = alloc::vec![0.0; n];
            let mut g_trial = alloc::vec![0.0; n];
            for _ in 0..30 {
                for i in 0..n {
                    trial[i] = y[i] + alpha * step[i];
                }
                equations(sys, lambda, &trial, &mut g_trial);
                let m = max_abs(&g_trial);
                if m.is_finite() && m < (1.0 - 1e-4 * alpha) * merit {
                    y.copy_from_slice(&trial);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if !accepted {
            // damped fixed-point step on the normalized profile
            let mut v = alloc::vec![0.0; n];
            let mut r = alloc::vec![0.0; n];
            sys.values(&p, &mut v);
            respond(sys, lambda, &v, &mut r);
            for i in 0..n {
                y[i] = log_clamped(0.5 * p[i] + 0.5 * r[i]);
            }
        }
    }
    Corrected { converged: false, residual: best, iterations: cfg.max_iterations }
}

fn newton_step(sys: &dyn LogitSystem, lambda: f64, y: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let n = sys.dim();
    let p: Vec<f64> = y.iter().map(|&v| math::exp(v)).collect();
    let mut v0 = alloc::vec![0.0; n];
    sys.values(&p, &mut v0);
    // dv/dp is exact as a unit difference because v is affine in each coordinate
    let mut dvdp = alloc::vec![0.0; n * n];
    let mut shifted = p.clone();
    let mut v1 = alloc::vec![0.0; n];
    for j in 0..n {
        shifted[j] += 1.0;
        sys.values(&shifted, &mut v1);
        shifted[j] = p[j];
        for i in 0..n {
            dvdp[i * n + j] = v1[i] - v0[i];
        }
    }
    let mut sigma = alloc::vec![0.0; n];
    respond(sys, lambda, &v0, &mut sigma);
    let mut log_sigma = alloc::vec![0.0; n];
    for &(start, len) in sys.blocks() {
        math::log_softmax_into(lambda, &v0[start..start + len], &mut log_sigma[start..start + len]);
    }
    let mut jac = alloc::vec![0.0; n * n];
    for &(start, len) in sys.blocks() {
        for j in 0..n {
            let mean: f64 = (start..start + len).map(|l| sigma[l] * dvdp[l * n + j]).sum();
            for i in start..start + len {
                // clamped rows do not depend on y
                if log_sigma[i] < LOG_FLOOR {
                    continue;
                }
                jac[i * n + j] = -lambda * (dvdp[i * n + j] - mean) * p[j];
            }
        }
    }
    for i in 0..n {
        jac[i * n + i] += 1.0;
    }
    let mut rhs: Vec<f64> = g.iter().map(|x| -x).collect();
    let step = solve_dense(&mut jac, &mut rhs, n)?;
    step.iter().all(|s| s.is_finite()).then_some(step)
}

fn system<'a>(game: &'a CentipedeGame, form: ElicitationForm) -> Result<alloc::boxed::Box<dyn LogitSystem + 'a>> {
    Ok(match form {
        ElicitationForm::DirectResponse => alloc::boxed::Box::new(Sequential::new(game)),
        _ => alloc::boxed::Box::new(Static::new(game, form)?),
    })
}

fn to_profile(game: &CentipedeGame, form: ElicitationForm, probs: &[f64]) -> Profile {
    let d = game.depth();
    match form {
        ElicitationForm::DirectResponse => {
            let take = |node: usize| {
                let i = 2 * (node - 1);
                probs[i] / (probs[i] + probs[i + 1])
            };
            Profile {
                players: [
                    (1..=d).map(|i| take(Player::One.own_node(i))).collect(),
                    (1..=d).map(|i| take(Player::Two.own_node(i))).collect(),
                ],
            }
        }
        _ => {
            let n = probs.len() / 2;
            Profile { players: [probs[..n].to_vec(), probs[n..].to_vec()] }
        }
    }
}

fn from_profile(game: &CentipedeGame, form: ElicitationForm, profile: &Profile) -> Vec<f64> {
    match form {
        ElicitationForm::DirectResponse => {
            let mut probs = alloc::vec![0.0; 2 * game.stages()];
            for node in 1..=game.stages() {
                let t = profile.of(Player::mover(node))[(node - 1) / 2];
                probs[2 * (node - 1)] = t;
                probs[2 * (node - 1) + 1] = 1.0 - t;
            }
            probs
        }
        _ => profile.players.concat(),
    }
}

/// Maximum logit fixed-point residual of a level-free profile.
pub fn logit_residual(
    game: &CentipedeGame,
    form: ElicitationForm,
    profile: &Profile,
    lambda: f64,
) -> Result<f64> {
    let sys = system(game, form)?;
    Ok(residual(sys.as_ref(), lambda, &from_profile(game, form, profile)))
}

/// Logit AQRE at precision `lambda`, traced from the uniform profile at
/// `lambda = 0` along the principal branch.
pub fn aqre_solve(
    game: &CentipedeGame,
    form: ElicitationForm,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<Solution> {
    cfg.validate()?;
    check_lambda(lambda)?;
    let sys = system(game, form)?;
    let sys = sys.as_ref();
    let n = sys.dim();

    let mut probs = alloc::vec![0.0; n];
    for &(start, len) in sys.blocks() {
        probs[start..start + len].iter_mut().for_each(|p| *p = 1.0 / len as f64);
    }
    let mut y: Vec<f64> = probs.iter().map(|p| log_clamped(*p)).collect();
    let mut trace = alloc::vec![HomotopyStep { lambda: 0.0, residual: residual(sys, 0.0, &probs), iterations: 0 }];

    let (lo, hi) = game.payoff_range();
    let span = hi - lo;
    let target = libm::log1p(lambda * span);
    let lambda_at = |s: f64| if s >= target { lambda } else { libm::expm1(s) / span };
    // rounding in lambda * v is amplified by the logit map, so the residual
    // cannot be resolved below a few ulps of lambda * span
    let tol_at = |lam: f64| cfg.fixed_point_tolerance.max(4.0 * f64::EPSILON * lam * span);

    let mut s = 0.0;
    let mut h = cfg.initial_step;
    let mut previous: Option<(Vec<f64>, f64)> = None;
    let mut attempts = 0usize;
    let mut last_residual = trace[0].residual;
    while s < target {
        attempts += 1;
        if attempts > cfg.max_steps {
            let reason = alloc::format!("homotopy step budget exhausted before reaching lambda {lambda}");
            return Err(convergence(last_residual, lambda_at(s), &reason));
        }
        let s_next = (s + h).min(target);
        let mut trial = y.clone();
        if let Some((y_prev, h_prev)) = &previous {
            let ratio = (s_next - s) / h_prev;
            for i in 0..n {
                let extrapolated = y[i] + ratio * (y[i] - y_prev[i]);
                if extrapolated.is_finite() {
                    trial[i] = extrapolated.max(LOG_FLOOR);
                }
            }
        }
        let lam = lambda_at(s_next);
        let out = correct(sys, lam, &mut trial, cfg, tol_at(lam));
        if !out.converged {
            // retry from the unextrapolated point before shrinking
            let mut plain = y.clone();
            let retry = correct(sys, lam, &mut plain, cfg, tol_at(lam));
            if retry.converged {
                trial = plain;
                accept(&mut trace, lam, retry.residual, retry.iterations);
                previous = Some((core::mem::replace(&mut y, trial), s_next - s));
                s = s_next;
                continue;
            }
            last_residual = out.residual.min(retry.residual);
            h *= cfg.step_shrink;
            if h < 1e-13 {
                return Err(convergence(last_residual, lambda_at(s), "corrector failed at the minimum step"));
            }
            continue;
        }
        accept(&mut trace, lam, out.residual, out.iterations);
        previous = Some((core::mem::replace(&mut y, trial), s_next - s));
        s = s_next;
        if out.iterations <= 4 {
            h = (h * 1.5).min(cfg.max_step);
        }
    }

    let mut final_probs: Vec<f64> = y.iter().map(|v| math::exp(*v)).collect();
    normalize_blocks(sys, &mut final_probs);
    let res = residual(sys, lambda, &final_probs);
    Ok(Solution {
        form,
        kind: SolutionKind::Aqre,
        depth: game.depth(),
        tau: None,
        lambda: Some(lambda),
        levels: alloc::vec![to_profile(game, form, &final_probs)],
        residual: Some(res),
        homotopy: trace,
    })
}

fn accept(trace: &mut Vec<HomotopyStep>, lambda: f64, residual: f64, iterations: usize) {
    trace.push(HomotopyStep { lambda, residual, iterations });
}

fn convergence(residual: f64, lambda: f64, reason: &str) -> Error {
    Error::Convergence { residual, lambda, reason: String::from(reason) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::GameSpec;

    fn lab(spec: GameSpec) -> CentipedeGame {
        CentipedeGame::new(spec.with_lab_rescale()).unwrap()
    }

    // Perfect information makes the agent QRE of the sequential game unique:
    // fold back from the last node.
    fn backward_induction(game: &CentipedeGame, lambda: f64) -> Vec<f64> {
        let stages = game.stages();
        let mut cont = [game.payoff(stages + 1, Player::One), game.payoff(stages + 1, Player::Two)];
        let mut take = alloc::vec![0.0; stages];
        for node in (1..=stages).rev() {
            let m = Player::mover(node);
            let diff = game.payoff(node, m) - cont[m.index()];
            let t = 1.0 / (1.0 + (-lambda * diff).exp());
            take[node - 1] = t;
            for p in Player::BOTH {
                cont[p.index()] = t * game.payoff(node, p) + (1.0 - t) * cont[p.index()];
            }
        }
        take
    }

    #[test]
    fn sequential_matches_backward_induction() {
        for spec in [GameSpec::linear(0.8, 6), GameSpec::constant(0.4, 6), GameSpec::exponential(2.5, 2.0, 6)] {
            let game = lab(spec);
            for lambda in [0.001, 0.015, 0.05, 0.5] {
                let sol = aqre_solve(&game, ElicitationForm::DirectResponse, lambda, &SolverConfig::default()).unwrap();
                let oracle = backward_induction(&game, lambda);
                for node in 1..=6 {
                    let got = sol.levels[0].of(Player::mover(node))[(node - 1) / 2];
                    assert!((got - oracle[node - 1]).abs() < 1e-10, "node {node} lambda {lambda}");
                }
            }
        }
    }

    #[test]
    fn lambda_zero_is_uniform() {
        let game = lab(GameSpec::linear(0.5, 6));
        for form in ElicitationForm::ALL {
            let sol = aqre_solve(&game, form, 0.0, &SolverConfig::default()).unwrap();
            assert_eq!(sol.levels[0], Profile::uniform(form, 3));
            assert_eq!(sol.residual, Some(0.0));
        }
    }

    // Plain damped iteration from a non-uniform start, run to its own fixed point.
    fn dense_iteration(game: &CentipedeGame, lambda: f64) -> Vec<f64> {
        let [u1, u2] = strategy_payoff_matrix(game, ElicitationForm::ReducedStrategy).unwrap();
        let mut p1 = alloc::vec![0.1, 0.2, 0.3, 0.4];
        let mut p2 = alloc::vec![0.4, 0.3, 0.2, 0.1];
        for _ in 0..200_000 {
            let v1: Vec<f64> = (0..4).map(|s| (0..4).map(|t| p2[t] * u1.get(s, t)).sum()).collect();
            let v2: Vec<f64> = (0..4).map(|t| (0..4).map(|s| p1[s] * u2.get(s, t)).sum()).collect();
            let r1 = math::softmax(lambda, &v1);
            let r2 = math::softmax(lambda, &v2);
            for i in 0..4 {
                p1[i] = 0.7 * p1[i] + 0.3 * r1[i];
                p2[i] = 0.7 * p2[i] + 0.3 * r2[i];
            }
        }
        [p1, p2].concat()
    }

    #[test]
    fn reduced_strategy_fixed_point_agrees_with_plain_iteration() {
        let game = lab(GameSpec::linear(0.5, 6));
        let sol = aqre_solve(&game, ElicitationForm::ReducedStrategy, 0.015, &SolverConfig::default()).unwrap();
        let oracle = dense_iteration(&game, 0.015);
        let got = sol.levels[0].players.concat();
        for (a, b) in got.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{got:?} vs {oracle:?}");
        }
        assert!(sol.residual.unwrap() < 1e-12);
    }

    #[test]
    fn high_precision_sequential_takes_immediately() {
        let game = lab(GameSpec::linear(0.8, 6));
        let sol = aqre_solve(&game, ElicitationForm::DirectResponse, 10.0, &SolverConfig::default()).unwrap();
        assert!(sol.levels[0].of(Player::One)[0] > 0.99);
        assert!(sol.homotopy.iter().all(|s| s.residual < 1e-10));
    }

    // dominated strategies reach probabilities below the smallest f64 here
    #[test]
    fn strategy_forms_survive_underflow() {
        let specs = [
            GameSpec::linear(0.5, 6),
            GameSpec::linear(0.8, 6),
            GameSpec::exponential(2.5, 2.0, 6),
            GameSpec::exponential(4.0, 2.0, 6),
            GameSpec::constant(0.4, 6),
            GameSpec::constant(0.8, 6),
        ];
        for spec in specs {
            let game = lab(spec);
            for form in [ElicitationForm::ReducedStrategy, ElicitationForm::FullStrategy] {
                for lambda in [10.0, 200.0] {
                    let sol = aqre_solve(&game, form, lambda, &SolverConfig::default()).unwrap();
                    assert!(sol.homotopy.iter().all(|s| s.residual < 1e-10));
                    assert!(sol.levels[0].players.iter().flatten().all(|p| p.is_finite() && *p >= 0.0));
                }
            }
        }
    }

    #[test]
    fn tiny_budget_reports_convergence_failure() {
        let game = lab(GameSpec::constant(0.8, 6));
        let cfg = SolverConfig { max_iterations: 1, max_steps: 5, ..SolverConfig::default() };
        let err = aqre_solve(&game, ElicitationForm::FullStrategy, 10.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }

    #[test]
    fn negative_lambda_rejected() {
        let game = lab(GameSpec::linear(0.5, 6));
        assert!(aqre_solve(&game, ElicitationForm::DirectResponse, -0.1, &SolverConfig::default()).is_err());
    }
}
