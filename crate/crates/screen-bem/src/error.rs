//! Error types shared across the crate.

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A mesh or system would exceed the configured element/dof cap.
    #[error("capacity exceeded: {required} elements > cap {cap}")]
    Capacity { required: usize, cap: usize },

    /// A discrete function space has no degrees of freedom.
    #[error("empty function space: {0}")]
    EmptySpace(String),

    /// An operator was given a space of the wrong kind.
    #[error("wrong space kind: expected {expected}, got {got}")]
    SpaceKind {
        expected: &'static str,
        got: &'static str,
    },

    /// A singular quadrature rule failed its internal convergence check.
    #[error("quadrature failure ({case}): estimated relative error {estimate:.3e}")]
    Quadrature { case: &'static str, estimate: f64 },

    /// Kernel evaluated at (numerically) coincident points.
    #[error("singular evaluation: |x - y| = {r:.3e} below threshold")]
    SingularEvaluation { r: f64 },

    /// Dense factorization failed; the Galerkin matrix is numerically singular.
    #[error("singular matrix: rcond estimate {rcond:.3e}")]
    SingularMatrix { rcond: f64 },

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
