use thiserror::Error;

/// Errors raised by the `nlslab` operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("linear change of variables is singular (det = {det:e})")]
    SingularChange { det: f64 },
    #[error("subspace basis is degenerate (Gram determinant {gram:e})")]
    DegenerateBasis { gram: f64 },
    #[error("system does not satisfy the eigenplane assumption: {0}")]
    AssumptionFails(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("Hermitian candidate is not positive definite")]
    NotPositive,
    #[error("elliptic parameter m = {0} outside the supported range")]
    ModulusOutOfRange(f64),
    #[error("step size underflow at tau = {tau} (h = {h:e}); possible blow-up near tau ~ {tau}")]
    StepFailure { tau: f64, h: f64 },
    #[error("initial state is zero")]
    ZeroState,
    #[error("non-finite field value at t = {t}")]
    NonFinite { t: f64 },
    #[error("operation requires the model system: {0}")]
    WrongSystem(String),
    #[error("eigenvector for the real eigenvalue has vanishing middle coordinate ({0:e})")]
    DegenerateEigenvector(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Short machine-readable tag, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularChange { .. } => "SingularChange",
            Error::DegenerateBasis { .. } => "DegenerateBasis",
            Error::AssumptionFails(_) => "AssumptionFails",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::NotPositive => "NotPositive",
            Error::ModulusOutOfRange(_) => "ModulusOutOfRange",
            Error::StepFailure { .. } => "StepFailure",
            Error::ZeroState => "ZeroState",
            Error::NonFinite { .. } => "NonFinite",
            Error::WrongSystem(_) => "WrongSystem",
            Error::DegenerateEigenvector(_) => "DegenerateEigenvector",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
