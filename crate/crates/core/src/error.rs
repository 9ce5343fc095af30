use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("operator is not a valid Hermitian input: {0}")]
    InvalidOperator(String),
    #[error("operator is not a valid effect: {0}")]
    InvalidEffect(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector role mismatch: {0}")]
    RoleMismatch(String),
    #[error("invalid fragment: {0}")]
    InvalidFragment(String),
    #[error("vectors span only the zero subspace")]
    DegenerateSpan,
    #[error("generators span dimension {rank}, ambient dimension is {dim}")]
    NotFullDimensional { rank: usize, dim: usize },
    #[error("invalid noise definition: {0}")]
    InvalidNoiseDefinition(String),
    #[error("dephasing effects are not self-dual compatible: {0}")]
    NotSelfDualCompatible(String),
    #[error("no noise strength in [0, 1] makes the fragment simplex-embeddable")]
    NoFiniteRobustness,
    #[error("LP solver failure: {0}")]
    SolverError(String),
    #[error("ontic state {0:?} has zero response to the unit effect")]
    DegenerateModel((usize, usize)),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Whether the failure comes from the numerical backend rather than from
    /// the caller's input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverError(_) | Error::NoFiniteRobustness | Error::DegenerateModel(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
