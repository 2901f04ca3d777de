//! Solvers, estimators and design tools for two-player centipede games played
//! under three elicitation methods: sequential direct response, the full
//! strategy method and the reduced strategy method.
//!
//! The crate covers
//!
//!  - parameterized linear, exponential and constant centipede games
//!    ([`games`]),
//!  - Poisson level-of-sophistication priors and truncated beliefs
//!    ([`levels`]),
//!  - the dynamic cognitive hierarchy solution, its quantal variant and the
//!    logit agent quantal response equilibrium ([`solvers`]),
//!  - terminal-node distributions and sup-norm design scans ([`predict`]),
//!  - likelihoods, maximum-likelihood fitting, bootstrap standard errors and
//!    model comparison tests ([`estimate`]),
//!  - the rank-based tests and the two-sample KS p-value series used to
//!    analyse matched terminal-node panels ([`stats`]),
//!  - a seeded Monte Carlo data generator ([`simulate`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and parallel drivers live in the `centipede` crate.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

mod error;
pub mod math;

pub mod estimate;
pub mod games;
pub mod levels;
pub mod predict;
pub mod simulate;
pub mod solvers;
pub mod stats;

pub use error::{Error, Result};
pub use games::{
    CentipedeGame, ElicitationForm, Family, FullStrategy, GameSpec, Player, ReducedStrategy,
    Rescale,
};
pub use levels::LevelPrior;
pub use predict::TerminalDistribution;
pub use solvers::{Solution, SolutionKind, SolverConfig};
