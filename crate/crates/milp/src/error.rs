use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("invalid bounds for `{name}`: [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("numerical failure in simplex (basis condition estimate {condition:.3e}); inspect the big-M report")]
    NumericalFailure { condition: f64 },
    #[error("{count} binaries exceed the enumeration cap of {cap}")]
    TooManyBinaries { count: usize, cap: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
