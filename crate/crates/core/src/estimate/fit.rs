//! Maximum-likelihood fitting and bootstrap standard errors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::optimize::{golden_section, nelder_mead};
use super::{Dataset, Params, Problem};
use crate::error::{invalid, Error, Result};
use crate::games::ElicitationForm;
use crate::math;
use crate::solvers::SolutionKind;

/// Global search settings: a log-spaced grid over the parameter box, then
/// local refinement from the best grid points.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchConfig {
    pub tau_bounds: (f64, f64),
    pub lambda_bounds: (f64, f64),
    pub tau_grid: usize,
    pub lambda_grid: usize,
    /// Number of best grid points refined locally.
    pub starts: usize,
    /// Relative tolerance of the local refinement (on log-parameters and
    /// on the log-likelihood).
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            tau_bounds: (0.05, 12.0),
            lambda_bounds: (1e-4, 1.0),
            tau_grid: 30,
            lambda_grid: 25,
            starts: 3,
            rel_tol: 1e-6,
            max_iter: 5000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("tau", self.tau_bounds), ("lambda", self.lambda_bounds)] {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(invalid!("{name} bounds must satisfy 0 < lo < hi, got ({lo}, {hi})"));
            }
        }
        if self.tau_grid < 2 || self.lambda_grid < 2 || self.starts == 0 {
            return Err(invalid!("grids need at least 2 points and at least one start"));
        }
        if !(self.rel_tol > 0.0) || self.max_iter == 0 {
            return Err(invalid!("tolerance and iteration budget must be positive"));
        }
        Ok(())
    }

    /// Log-parameter box of the model's free parameters.
    fn log_box(&self, kind: SolutionKind) -> Vec<(f64, f64)> {
        let ln = |(lo, hi): (f64, f64)| (math::ln(lo), math::ln(hi));
        match kind {
            SolutionKind::Dch => alloc::vec![ln(self.tau_bounds)],
            SolutionKind::Qdch => alloc::vec![ln(self.tau_bounds), ln(self.lambda_bounds)],
            SolutionKind::Aqre => alloc::vec![ln(self.lambda_bounds)],
        }
    }

    fn grid_sizes(&self, kind: SolutionKind) -> Vec<usize> {
        match kind {
            SolutionKind::Dch => alloc::vec![self.tau_grid],
            SolutionKind::Qdch => alloc::vec![self.tau_grid, self.lambda_grid],
            SolutionKind::Aqre => alloc::vec![self.lambda_grid],
        }
    }
}

fn params_of(kind: SolutionKind, x: &[f64]) -> Params {
    match kind {
        SolutionKind::Dch => Params::dch(math::exp(x[0])),
        SolutionKind::Qdch => Params::qdch(math::exp(x[0]), math::exp(x[1])),
        SolutionKind::Aqre => Params::aqre(math::exp(x[0])),
    }
}

fn log_params(kind: SolutionKind, p: &Params) -> Result<Vec<f64>> {
    let tau = || p.tau.map(math::ln).ok_or_else(|| invalid!("{kind} needs tau"));
    let lambda = || p.lambda.map(math::ln).ok_or_else(|| invalid!("{kind} needs lambda"));
    Ok(match kind {
        SolutionKind::Dch => alloc::vec![tau()?],
        SolutionKind::Qdch => alloc::vec![tau()?, lambda()?],
        SolutionKind::Aqre => alloc::vec![lambda()?],
    })
}

/// Log-likelihood as an objective: solver failures at a trial point count as
/// minus infinity so the search moves away from them.
fn objective(problem: &Problem<'_>, x: &[f64]) -> Result<f64> {
    match problem.loglik(&params_of(problem.kind, x)) {
        Ok(v) => Ok(v),
        Err(Error::Convergence { .. }) | Err(Error::ZeroProbability(_)) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// Bootstrap summary.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapResult {
    pub replicates: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub seed: u64,
    pub se_tau: Option<f64>,
    pub se_lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub model: SolutionKind,
    pub tau: Option<f64>,
    pub lambda: Option<f64>,
    pub log_likelihood: f64,
    pub n_obs: usize,
    pub k_max: usize,
    /// Some estimate sits within 1e-3 (in log terms) of the search box.
    pub at_boundary: bool,
    pub evaluations: usize,
    pub bootstrap: Option<BootstrapResult>,
}

impl FitResult {
    pub fn params(&self) -> Params {
        Params { tau: self.tau, lambda: self.lambda }
    }
}

fn at_boundary(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.iter().zip(bounds).any(|(v, (lo, hi))| v - lo < 1e-3 || hi - v < 1e-3)
}

fn grid_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Maximum-likelihood estimate by grid search plus local refinement.
pub fn fit(problem: &Problem<'_>, search: &SearchConfig) -> Result<FitResult> {
    search.validate()?;
    let kind = problem.kind;
    let bounds = search.log_box(kind);
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .zip(search.grid_sizes(kind))
        .map(|((lo, hi), n)| grid_axis(*lo, *hi, n))
        .collect();

    let mut grid: Vec<(Vec<f64>, f64)> = Vec::new();
    match axes.len() {
        1 => {
            for &a in &axes[0] {
                let x = alloc::vec![a];
                let v = objective(problem, &x)?;
                grid.push((x, v));
            }
        }
        _ => {
            for &a in &axes[0] {
                for &b in &axes[1] {
                    let x = alloc::vec![a, b];
                    let v = objective(problem, &x)?;
                    grid.push((x, v));
                }
            }
        }
    }
    let mut evaluations = grid.len();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| grid[j].1.total_cmp(&grid[i].1).then(i.cmp(&j)));
    if !grid[order[0]].1.is_finite() {
        return Err(invalid!("the likelihood is not finite anywhere on the search grid"));
    }

    let mut best = grid[order[0]].clone();
    let spacing: Vec<f64> = axes.iter().map(|a| a[1] - a[0]).collect();
    for &start in order.iter().take(search.starts) {
        let x0 = &grid[start].0;
        if !grid[start].1.is_finite() {
            continue;
        }
        let opt = if x0.len() == 1 {
            let lo = (x0[0] - spacing[0]).max(bounds[0].0);
            let hi = (x0[0] + spacing[0]).min(bounds[0].1);
            golden_section(|t| objective(problem, &[t]), lo, hi, search.rel_tol, search.max_iter)?
        } else {
            let step = spacing[0].min(spacing[1]);
            nelder_mead(|x| objective(problem, x), x0, step, &bounds, search.rel_tol, search.max_iter)?
        };
        evaluations += opt.evaluations;
        if opt.value > best.1 {
            best = (opt.x, opt.value);
        }
    }

    let params = params_of(kind, &best.0);
    Ok(FitResult {
        model: kind,
        tau: params.tau,
        lambda: params.lambda,
        log_likelihood: best.1,
        n_obs: problem.data().len(),
        k_max: problem.k_max,
        at_boundary: at_boundary(&best.0, &bounds),
        evaluations,
        bootstrap: None,
    })
}

/// Local refinement only, warm-started at `start` (used by bootstrap
/// replicates).
pub fn refine(problem: &Problem<'_>, start: &Params, search: &SearchConfig) -> Result<(Params, f64)> {
    let kind = problem.kind;
    let bounds = search.log_box(kind);
    let mut x0 = log_params(kind, start)?;
    for (v, (lo, hi)) in x0.iter_mut().zip(&bounds) {
        *v = v.clamp(*lo, *hi);
    }
    let opt = if x0.len() == 1 {
        let lo = (x0[0] - 0.5).max(bounds[0].0);
        let hi = (x0[0] + 0.5).min(bounds[0].1);
        golden_section(|t| objective(problem, &[t]), lo, hi, search.rel_tol, search.max_iter)?
    } else {
        nelder_mead(|x| objective(problem, x), &x0, 0.1, &bounds, search.rel_tol, search.max_iter)?
    };
    if !opt.value.is_finite() {
        return Err(invalid!("replicate likelihood is not finite near the start point"));
    }
    Ok((params_of(kind, &opt.x), opt.value))
}

/// Resampling strata: units grouped by `(form, game)`. Direct-response units
/// are whole paths, strategy-method units single rows.
struct Strata {
    row_unit: Vec<usize>,
    groups: Vec<Vec<usize>>,
    unit_count: usize,
}

impl Strata {
    fn new(data: &Dataset) -> Strata {
        let (row_unit, unit_count) = data.units();
        let mut unit_key: Vec<Option<(ElicitationForm, String)>> = alloc::vec![None; unit_count];
        for (obs, &u) in data.observations.iter().zip(&row_unit) {
            unit_key[u].get_or_insert_with(|| (obs.form, obs.game_id.clone()));
        }
        let mut index: BTreeMap<(ElicitationForm, String), usize> = BTreeMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (u, key) in unit_key.into_iter().enumerate() {
            let key = key.expect("every unit has a row");
            let g = *index.entry(key).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(u);
        }
        Strata { row_unit, groups, unit_count }
    }

    fn resample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut draws = alloc::vec![0.0; self.unit_count];
        for group in &self.groups {
            for _ in 0..group.len() {
                draws[group[rng.random_range(0..group.len())]] += 1.0;
            }
        }
        self.row_unit.iter().map(|&u| draws[u]).collect()
    }
}

/// The random stream of replicate `index` under `seed`.
fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One bootstrap replicate: resample units within each `(form, game)`
/// stratum and re-maximize locally from the original estimate. The result
/// depends only on `(seed, index)`.
pub fn bootstrap_replicate(
    problem: &Problem<'_>,
    fit: &FitResult,
    search: &SearchConfig,
    seed: u64,
    index: usize,
) -> Result<Params> {
    let strata = Strata::new(problem.data());
    let weights = strata.resample(&mut replicate_rng(seed, index));
    let mut replicate = problem.clone();
    replicate.set_row_weights(&weights);
    refine(&replicate, &fit.params(), search).map(|(p, _)| p)
}

/// Summarizes replicate outcomes (in replicate order) into standard errors:
/// the sample standard deviation of the successful replicates.
pub fn summarize_bootstrap(seed: u64, outcomes: &[Result<Params>]) -> Result<BootstrapResult> {
    let ok: Vec<&Params> = outcomes.iter().filter_map(|r| r.as_ref().ok()).collect();
    if ok.len() < 2 {
        return Err(Error::Degenerate(alloc::format!(
            "only {} of {} bootstrap replicates succeeded",
            ok.len(),
            outcomes.len()
        )));
    }
    let sd = |values: Vec<f64>| -> Option<f64> {
        if values.len() < 2 {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        Some(math::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)))
    };
    Ok(BootstrapResult {
        replicates: outcomes.len(),
        succeeded: ok.len(),
        failed: outcomes.len() - ok.len(),
        seed,
        se_tau: sd(ok.iter().filter_map(|p| p.tau).collect()),
        se_lambda: sd(ok.iter().filter_map(|p| p.lambda).collect()),
    })
}

/// Bootstrap standard errors with `replicates` warm-started replicates.
pub fn bootstrap_se(
    problem: &Problem<'_>,
    fit: &FitResult,
    search: &SearchConfig,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if replicates == 0 {
        return Err(invalid!("the bootstrap needs at least one replicate"));
    }
    let strata = Strata::new(problem.data());
    let mut replicate = problem.clone();
    let outcomes: Vec<Result<Params>> = (0..replicates)
        .map(|index| {
            let weights = strata.resample(&mut replicate_rng(seed, index));
            replicate.set_row_weights(&weights);
            refine(&replicate, &fit.params(), search).map(|(p, _)| p)
        })
        .collect();
    summarize_bootstrap(seed, &outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{CentipedeGame, GameSpec, Player};
    use crate::estimate::{Observation, Record};
    use crate::solvers::SolverConfig;

    fn rs_data(counts: [usize; 4]) -> Dataset {
        let mut games = BTreeMap::new();
        games.insert(String::from("g"), CentipedeGame::new(GameSpec::linear(0.8, 6).with_lab_rescale()).unwrap());
        let mut rows = Vec::new();
        for (s, &n) in counts.iter().enumerate() {
            for i in 0..n {
                for role in Player::BOTH {
                    rows.push(Observation {
                        session_id: "1".into(),
                        subject_id: alloc::format!("{s}-{i}-{}", role.role()),
                        pair_id: alloc::format!("{s}-{i}"),
                        role,
                        game_id: "g".into(),
                        form: ElicitationForm::ReducedStrategy,
                        record: Record::Strategy(s),
                    });
                }
            }
        }
        Dataset::new(games, rows).unwrap()
    }

    #[test]
    fn uniform_choices_push_lambda_to_the_boundary() {
        let data = rs_data([5, 5, 5, 5]);
        let problem = Problem::new(SolutionKind::Qdch, &data, 10, &SolverConfig::default()).unwrap();
        let fit = fit(&problem, &SearchConfig::default()).unwrap();
        assert!(fit.at_boundary);
        assert!(fit.lambda.unwrap() < 2e-4, "{fit:?}");
        assert!((fit.log_likelihood - 40.0 * 0.25f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn fit_beats_every_grid_point() {
        let data = rs_data([3, 9, 6, 2]);
        let search = SearchConfig { tau_grid: 12, lambda_grid: 10, ..SearchConfig::default() };
        let problem = Problem::new(SolutionKind::Qdch, &data, 10, &SolverConfig::default()).unwrap();
        let result = fit(&problem, &search).unwrap();
        let bounds = search.log_box(SolutionKind::Qdch);
        for a in grid_axis(bounds[0].0, bounds[0].1, 12) {
            for b in grid_axis(bounds[1].0, bounds[1].1, 10) {
                assert!(result.log_likelihood >= objective(&problem, &[a, b]).unwrap() - 1e-12);
            }
        }
    }

    #[test]
    fn bootstrap_is_reproducible_and_rejects_zero_replicates() {
        let data = rs_data([3, 9, 6, 2]);
        let problem = Problem::new(SolutionKind::Dch, &data, 10, &SolverConfig::default()).unwrap();
        let search = SearchConfig::default();
        let result = fit(&problem, &search).unwrap();
        assert!(bootstrap_se(&problem, &result, &search, 0, 1).is_err());
        let a = bootstrap_se(&problem, &result, &search, 20, 7).unwrap();
        let b = bootstrap_se(&problem, &result, &search, 20, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.replicates, 20);
        // replicate-by-replicate entry point agrees with the batch
        let outcomes: Vec<Result<Params>> =
            (0..20).map(|i| bootstrap_replicate(&problem, &result, &search, 7, i)).collect();
        assert_eq!(summarize_bootstrap(7, &outcomes).unwrap(), a);
    }
}
