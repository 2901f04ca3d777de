use alloc::string::String;

/// Errors reported by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The requested operation is not defined for this elicitation form.
    #[error("unsupported elicitation form: {0}")]
    UnsupportedForm(String),

    /// A fixed-point or homotopy solve stopped before reaching tolerance.
    #[error("no convergence: {reason} (last accepted lambda {lambda}, residual {residual:e})")]
    Convergence {
        residual: f64,
        lambda: f64,
        reason: String,
    },

    /// An observation received probability zero under the model.
    #[error("zero-probability observation: {0}")]
    ZeroProbability(String),

    /// A statistical test has no variation to work with.
    #[error("degenerate sample: {0}")]
    Degenerate(String),

    /// Local optimization stopped at its iteration budget.
    #[error("optimizer did not converge; best point {best:?} with value {value}")]
    NotConverged { best: alloc::vec::Vec<f64>, value: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::Invalid(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
