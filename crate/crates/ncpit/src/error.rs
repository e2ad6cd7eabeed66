use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus {0}: {1}")]
    InvalidModulus(u64, &'static str),
    #[error("modulus already fixed to {0}")]
    ModulusLocked(u64),
    #[error("degree mismatch: {0}")]
    Degree(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("invalid permutation: {0}")]
    Permutation(String),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("circuit is not UPT: shapes {0} and {1} both occur")]
    NotUpt(String, String),
    #[error("more than {0} shapes")]
    TooManyShapes(usize),
    #[error("circuit is not canonical: {0}")]
    NotCanonical(String),
    #[error("scale guard tripped: {0}")]
    ScaleGuard(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no prime in the list works at level {0}")]
    NoPrime(usize),
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("no violated dependency: g is computable with this shape and width")]
    NoViolation,
    #[error("no monomial with support at most {0} has a nonzero coefficient")]
    NoSmallSupport(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Scale guards and shape cutoffs are resource limits rather than bad input.
    pub fn is_scale_guard(&self) -> bool {
        matches!(self, Error::ScaleGuard(_) | Error::TooManyShapes(_))
    }
}
