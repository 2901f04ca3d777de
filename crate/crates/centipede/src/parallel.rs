//! Rayon drivers. Work items are independent and results are collected in
//! input order, so output does not depend on the thread count.

use centipede_core::estimate::{bootstrap_replicate, summarize_bootstrap, BootstrapResult, FitResult, Problem, SearchConfig};
use centipede_core::predict::{DesignScan, ScanSetup};
use centipede_core::SolverConfig;
use rayon::prelude::*;

use crate::error::{AppError, AppResult};

/// Runs `f` on a pool with `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> AppResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(AppError::validation("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| AppError::validation(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn design_scan(setup: ScanSetup, grid: &[f64], cfg: &SolverConfig) -> AppResult<DesignScan> {
    cfg.validate()?;
    if setup.forms[0] == setup.forms[1] {
        return Err(AppError::validation("a design scan compares two different forms"));
    }
    let points = grid.par_iter().map(|&c| setup.point(c, cfg)).collect();
    Ok(setup.collect(points))
}

/// Bootstrap standard errors; replicate `i` always uses stream `(seed, i)`.
pub fn bootstrap_se(
    problem: &Problem<'_>,
    fit: &FitResult,
    search: &SearchConfig,
    replicates: usize,
    seed: u64,
) -> AppResult<BootstrapResult> {
    if replicates == 0 {
        return Err(AppError::validation("the bootstrap needs at least one replicate"));
    }
    let outcomes: Vec<_> = (0..replicates)
        .into_par_iter()
        .map(|i| bootstrap_replicate(problem, fit, search, seed, i))
        .collect();
    for (i, o) in outcomes.iter().enumerate() {
        if let Err(e) = o {
            log::warn!("bootstrap replicate {i} failed: {e}");
        }
    }
    Ok(summarize_bootstrap(seed, &outcomes)?)
}
