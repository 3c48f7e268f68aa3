use thiserror::Error;

/// Errors raised by the shift-operator toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("basis columns are not orthonormal (max |UᵀU - I| entry = {max_deviation:.3e})")]
    NotOrthonormal { max_deviation: f64 },

    #[error("orthonormal complement is empty: subspace spans all of R^{0}")]
    EmptyComplement(usize),

    #[error("non-finite value in matrix power {power}; normalize the matrix (e.g. to unit spectral radius) first")]
    NumericOverflow { power: usize },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("matrix is not symmetric (‖S - Sᵀ‖_F = {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("eigen-grouping condition fails: {0}")]
    InfeasibleGrouping(String),

    #[error("design is infeasible: {0}")]
    Infeasible(crate::design::Infeasible),

    #[error("shift entry ({row}, {col}) = {value:.3e} is not allowed by the topology")]
    LocalityViolation { row: usize, col: usize, value: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
