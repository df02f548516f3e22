use serde::Serialize;
use thiserror::Error;

/// Ways the annular disposition of a spectrum can fail.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "reason")]
pub enum DispositionError {
    #[error("gap ({left}, {right}) is not an open interval")]
    InvalidGap { left: f64, right: f64 },
    #[error("no eigenvalue lies inside the gap ({left}, {right})")]
    EmptyInnerComponent { left: f64, right: f64 },
    #[error("gap endpoint {endpoint} is not a point of the outer spectrum")]
    GapEndpointMissing { endpoint: f64 },
    #[error("outer spectral value {value} lies strictly inside the gap")]
    NotAGap { value: f64 },
    #[error("inner spectral value {value} lies outside the gap")]
    InnerOutsideGap { value: f64 },
}

/// Which regime inequality a bound evaluation violated.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "violation")]
pub enum DomainError {
    #[error("gap length D = {big_d} must be positive")]
    NonPositiveGap { big_d: f64 },
    #[error("distance d = {d} must satisfy 0 < d <= D/2 = {half}")]
    DistanceOutOfRange { d: f64, half: f64 },
    #[error("perturbation norm v = {v} must be nonnegative")]
    NegativeNorm { v: f64 },
    #[error("v = {v} violates v < {limit} ({condition})")]
    NormTooLarge {
        v: f64,
        limit: f64,
        condition: &'static str,
    },
    #[error("a = {a} must be nonnegative")]
    NegativeHalfWidth { a: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NonHermitianInput { asymmetry: f64, tolerance: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("selector picks no eigenvalue")]
    EmptySelection,
    #[error("eigenvalue {value} lies within {tolerance:e} of interval endpoint {endpoint}")]
    AmbiguousEdge {
        value: f64,
        endpoint: f64,
        tolerance: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },
    #[error("disposition violated: {0}")]
    Disposition(#[from] DispositionError),
    #[error("domain violated: {0}")]
    Domain(#[from] DomainError),
    #[error("singular denominator in phi at ({x}, {y})")]
    SingularDenominator { x: f64, y: f64 },
    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),
    #[error("perturbed subspace is not a graph over the unperturbed one (cond = {cond:e})")]
    NotAGraph { cond: f64 },
    #[error("perturbed spectral subspace has dimension {actual}, expected {expected}")]
    RankMismatch { expected: usize, actual: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
