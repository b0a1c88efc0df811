use thiserror::Error;

/// Failures raised by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("eigensolver did not converge after {iterations} sweeps (active window {lo}..={hi})")]
    NonConvergence {
        iterations: usize,
        lo: usize,
        hi: usize,
    },

    #[error("spectral radius below tolerance ({radius:e})")]
    QuasiNilpotentInput { radius: f64 },

    #[error(
        "peripheral band not separated: grouped modulus {grouped:e}, excluded modulus {excluded:e}"
    )]
    BandSeparationFailure { grouped: f64, excluded: f64 },

    #[error("no convergent power subsequence detected: {0}")]
    DichotomyUndetected(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("LP solver failure: {0}")]
    SolverFailure(String),

    #[error("quotient block on coordinates {coords:?} is not zero (max entry {magnitude:e})")]
    QuotientNotScalarZero { coords: Vec<usize>, magnitude: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
