use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A shape or index argument is inconsistent with the data.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Input values violate a precondition (non-finite entries, asymmetry, bad parameter).
    #[error("invalid input: {0}")]
    Input(String),

    /// The median squared distance is zero, so the automatic bandwidth would be zero.
    #[error("degenerate bandwidth: all squared distances are zero")]
    DegenerateBandwidth,

    /// Direct evaluation of the Gaussian kernel underflowed; use the log-domain path.
    #[error("kernel underflow at ({row}, {col}): exp(-{exponent}) is zero in double precision")]
    KernelUnderflow {
        row: usize,
        col: usize,
        exponent: f64,
    },

    /// Sinkhorn exhausted its iteration budget.
    #[error("sinkhorn did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A dual variable became non-finite, usually because the bandwidth is too
    /// small for the scale of the data.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The transport plan is not accurate enough for the spectral identities to hold.
    #[error("transport plan not converged: {0}")]
    PlanNotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
