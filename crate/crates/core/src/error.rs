use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("index {index} out of range for base dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("`{name}` expects {expected} component indices, got {got}")]
    ComponentArity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("base dimension must be at least {min}, got {got}")]
    InvalidDimension { min: usize, got: usize },
    #[error("duplicate declaration of `{0}`")]
    DuplicateDeclaration(String),
    #[error("no generators declared for stage {0}")]
    MissingStage(i32),
    #[error("nilpotency is only defined for odd derivations")]
    EvenDerivation,
    #[error("grading mismatch: {0}")]
    GradingMismatch(String),
    #[error("not a complex: {0}")]
    NotAComplex(String),
    #[error("unsupported correction term in generator `{0}`")]
    UnsupportedCorrection(String),
    #[error("free index letter `{0}` in a scalar expression")]
    FreeIndexInScalar(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
