use thiserror::Error;

use crate::pqd::DecouplingOutcome;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("subsystem label `{0}` used more than once")]
    LabelCollision(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not skew-Hermitian (max deviation {0:e})")]
    NotSkewHermitian(f64),

    #[error("trace is {0} instead of 1")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("not an isometry: max entry of V^dag V - I is {0:e}")]
    NotIsometry(f64),

    #[error("not unitary: max entry of U^dag U - I is {0:e}")]
    NotUnitary(f64),

    #[error("vectors do not resolve the identity (max residual {0:e})")]
    IncompletePovm(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no restart satisfied I(R:E) <= eps within slack (best I(R:E) = {:e})", .0.i_re)]
    Infeasible(Box<DecouplingOutcome>),

    #[error("internal bound ordering violated: {0}")]
    BoundViolation(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
