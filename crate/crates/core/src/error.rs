use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("column {0} has zero variance and cannot be scaled")]
    ZeroVarianceColumn(usize),

    #[error("{what} is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { what: String, min_eigenvalue: f64 },

    #[error("covariance matrix is singular")]
    SingularSigma,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    DivergedTraining { epoch: usize, loss: f64 },

    #[error("repetition {rep} failed: {source}")]
    Repetition {
        rep: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by malformed or inconsistent input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::DimensionMismatch(_)
            | Error::InvalidInput(_)
            | Error::ZeroVarianceColumn(_)
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Io(_) => true,
            Error::Repetition { source, .. } => source.is_input_error(),
            _ => false,
        }
    }

    pub fn is_divergence(&self) -> bool {
        match self {
            Error::DivergedTraining { .. } => true,
            Error::Repetition { source, .. } => source.is_divergence(),
            _ => false,
        }
    }
}
