use thiserror::Error;

/// Every failure the toolkit reports. Variants map onto the kinds of
/// numerical or input trouble a caller can act on.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("evaluation at a pole: {0}")]
    Pole(String),
    #[error("contour error: {0}")]
    Contour(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("node encountered: {0}")]
    Node(String),
    #[error("degeneracy: {0}")]
    Degeneracy(String),
    #[error("invertibility error: {0}")]
    Invertibility(String),
    #[error("iteration did not converge: {0}")]
    Iteration(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("stencil error: {0}")]
    Stencil(String),
    #[error("radius error: {0}")]
    Radius(String),
    #[error("extraction error: {0}")]
    Extraction(String),
    #[error("common root: {0}")]
    CommonRoot(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

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
