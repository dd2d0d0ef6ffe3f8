use calrm_lp::{LpError, Status};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid demand model: {0}")]
    InvalidModel(String),
    #[error("invalid calibration target: {0}")]
    InvalidTarget(String),
    #[error("previous-stage demand {demand} before stage {stage} has probability zero")]
    ConditioningOnNull { stage: usize, demand: usize },
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown instance name {0:?}")]
    UnknownName(String),
    #[error("parameter {name} out of range: {message}")]
    ParamOutOfRange { name: String, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("assortment LP supports at most {max} products, got {got}")]
    TooManyProducts { got: usize, max: usize },
    #[error("dynamic program needs {required} states, cap is {cap}")]
    StateSpaceTooLarge { required: u128, cap: u128 },
    #[error("offline enumeration needs {required} leaves, cap is {cap}")]
    EnumerationTooLarge { required: u128, cap: u128 },
    #[error("gamma {0} is outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("minimum transition probability is zero, the asymptotic gamma is undefined")]
    EpsilonZero,
    #[error("product {product} has positive fluid acceptance but zero expected demand")]
    DegenerateDenominator { product: usize },
    #[error("LP solve ended with status {0:?}")]
    UnexpectedStatus(Status),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
