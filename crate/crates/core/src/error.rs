use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),

    #[error("expressions belong to different charts: {0}")]
    ChartMismatch(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("parity mismatch: {0}")]
    ParityMismatch(String),

    #[error("division by an expression that vanishes identically")]
    DivisionByZero,

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        message: String,
        line: usize,
        column: usize,
    },

    #[error("operator order {found} exceeds the allowed order {allowed}")]
    OrderTooHigh { found: usize, allowed: usize },

    #[error("even brackets admit no Jacobi identity: if the fake Jacobi property held, all triple brackets would vanish")]
    EvenBracket,

    #[error("singular weight {0}")]
    SingularWeight(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
