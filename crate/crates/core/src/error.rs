use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("points are not collinear (singular-value ratio {0:.3e})")]
    CollinearityViolation(f64),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("point lies on the hyperplane at infinity of the chart")]
    PointAtInfinity,
    #[error("point is not in the interior of the body")]
    PointOutsideBody,
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    #[error("body is not properly convex")]
    NotProperlyConvex,
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("map is not an automorphism of the body")]
    NotAnAutomorphism,
    #[error("body is unbounded in the requested chart")]
    UnboundedInChart,
    #[error("marked body is not standard")]
    NotStandard,
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("element cap of {0} exceeded")]
    BallCapExceeded(usize),
    #[error("action is not transitive ({reached} of {size} points reached)")]
    NotTransitive { reached: usize, size: usize },
    #[error("generators do not generate the group: {0}")]
    NotGenerating(String),
    #[error("generating set is not symmetric")]
    NotSymmetric,
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = HilbertError> = std::result::Result<T, E>;

impl From<std::io::Error> for HilbertError {
    fn from(e: std::io::Error) -> Self {
        HilbertError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HilbertError {
    fn from(e: serde_json::Error) -> Self {
        HilbertError::Schema(e.to_string())
    }
}

impl HilbertError {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            HilbertError::Schema(_) => 2,
            HilbertError::NotAnAutomorphism => 3,
            HilbertError::BallCapExceeded(_) => 4,
            _ => 1,
        }
    }
}
