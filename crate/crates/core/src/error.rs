use thiserror::Error;

/// Errors raised by the spectral workbench.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: nu = {nu}, points per axis = {points} (need nu >= 1, points >= 2)")]
    InvalidGrid { nu: usize, points: usize },

    #[error("length mismatch: expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix symbol is not Hermitian: deviation {deviation:e} exceeds tolerance {tol:e}")]
    NonHermitian { deviation: f64, tol: f64 },

    #[error("kernel violates K*(x,y) = K(y,x): deviation {deviation:e} exceeds tolerance {tol:e}")]
    AsymmetricKernel { deviation: f64, tol: f64 },

    #[error("operator size {size} exceeds the configured cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("unknown builtin symbol `{0}`")]
    UnknownBuiltin(String),

    #[error("unknown convention `{0}`")]
    UnknownConvention(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver failed: {0}")]
    EigenSolver(String),

    #[error("spectral parameter z = {z} lies within {distance:e} of the essential spectrum")]
    InsideBand { z: f64, distance: f64 },

    #[error("extremal point is not isolated at radius {radius:e}")]
    NotIsolated { radius: f64 },

    #[error("no bound state for mode {mode}: dispersion function has no sign change")]
    NoBoundState { mode: usize },

    #[error("every quadrature node was excluded (|Delta| below the exclusion threshold)")]
    AllNodesExcluded,

    #[error("frequency cutoff {cutoff} is not resolved by {points} points per axis")]
    CutoffBeyondResolution { cutoff: usize, points: usize },

    #[error("root bracket [{lo}, {hi}] does not enclose a sign change")]
    BadBracket { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
