//! File formats, parallel drivers and the `centipede` command line for
//! [`centipede_core`].
//!
//!  - [`games`]: the game-spec JSON schema and the six laboratory games,
//!  - [`dataset`]: the long-format choice CSV,
//!  - [`report`]: solution JSON, scan and CDF CSV, test-result JSON,
//!  - [`parallel`]: thread-count independent scan and bootstrap drivers,
//!  - [`batch`]: the matched-panel test battery,
//!  - [`cli`]: argument parsing and the exit-code contract.

pub mod batch;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod games;
pub mod parallel;
pub mod report;

pub use error::{AppError, AppResult};
