use thiserror::Error;

/// Errors raised by the operator, entropy and audit layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace is not one (got {trace})")]
    BadTrace { trace: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("bad subsystem specification: {0}")]
    BadSubsystemSpec(String),

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("invalid Renyi order {0}")]
    InvalidOrder(f64),

    #[error("invalid time ensemble: {0}")]
    BadTimeEnsemble(String),

    #[error("quadrature did not converge after {nodes} nodes (last change {delta:.3e})")]
    QuadratureNotConverged { nodes: usize, delta: f64 },

    #[error("no energy level at or below cutoff {cutoff}")]
    EmptyTruncation { cutoff: f64 },

    #[error("filler state has weight {leakage:.3e} outside the cutoff subspace")]
    FillerOutsideSubspace { leakage: f64 },

    #[error("state is not pure (purity {purity})")]
    NotPure { purity: f64 },

    #[error("measurement is not projective: {0}")]
    NotProjective(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("bad length: {0}")]
    BadLength(String),

    #[error("exact identity violated by {gap:.3e}")]
    IdentityViolation { gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
