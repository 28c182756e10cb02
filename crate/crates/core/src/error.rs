use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),

    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("shape mismatch: expected {expected} components, got {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("group of size {size} exceeds the exhaustive capacity {cap}")]
    Capacity { size: u128, cap: usize },

    #[error("function lives on the {found} side, expected {expected}")]
    WrongSide {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("points are not collinear in exponent space")]
    NonCollinear,

    #[error("the zero function has no support")]
    ZeroFunction,

    #[error("family exhausted at parameter {param} with best value {best} (target {target})")]
    FamilyExhausted {
        param: usize,
        best: f64,
        target: f64,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by hitting a size cap rather than bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. } | Error::FamilyExhausted { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
