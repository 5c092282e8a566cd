use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must have dimension at least 1")]
    EmptyMatrix,
    #[error("dimension {dim} exceeds the supported maximum of {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error(
        "matrix is not Hermitian: max deviation {deviation:e} exceeds tolerance {tolerance:e}"
    )]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("matrix is not invertible (residual {residual:e})")]
    NotInvertible { residual: f64 },
    #[error("eigenvalue solver did not converge")]
    EigenSolverFailed,
    #[error("floating-point overflow: a result left the f64 range")]
    Overflow,
    #[error("invalid theta-scheme: theta = {theta}, tau = {tau} (need 0 <= theta <= 1, tau > 0)")]
    InvalidScheme { theta: f64, tau: f64 },
    #[error(
        "scheme (theta = {theta}, tau = {tau}) is inapplicable: eigenvalue {eigenvalue:e} of B hits the resolvent point -1/(theta tau)"
    )]
    SchemeInapplicable {
        theta: f64,
        tau: f64,
        eigenvalue: Complex64,
    },
    #[error("B is not semi-dissipative: min eigenvalue of B_H is {min_eigenvalue:e}")]
    NotSemiDissipative { min_eigenvalue: f64 },
    #[error("D is not semi-contractive: ||D|| = {norm}")]
    NotSemiContractive { norm: f64 },
    #[error("B is not hypocoercive: spectral abscissa {abscissa:e}")]
    NotHypocoercive { abscissa: f64 },
    #[error("no decay detected: 1 - ||e^(-Bt)|| is not positive on the fit window")]
    NoDecayDetected,
    #[error("post-verification failed: {0}")]
    Verification(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed matrix document at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("matrix document declares dim {dim} and needs {expected} entries, found {actual}")]
    LengthMismatch {
        dim: usize,
        expected: usize,
        actual: usize,
    },
    #[error("matrix document entry {index} is not a finite complex number")]
    NonFiniteEntry { index: usize },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Coarse failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    SchemeInapplicable,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotSquare { .. }
            | Error::EmptyMatrix
            | Error::DimensionTooLarge { .. }
            | Error::NonFinite { .. }
            | Error::DimensionMismatch { .. }
            | Error::NotHermitian { .. }
            | Error::InvalidScheme { .. }
            | Error::NotSemiDissipative { .. }
            | Error::NotSemiContractive { .. }
            | Error::NotHypocoercive { .. }
            | Error::InvalidArgument(_)
            | Error::Syntax { .. }
            | Error::LengthMismatch { .. }
            | Error::NonFiniteEntry { .. }
            | Error::Io { .. } => ErrorClass::Input,
            Error::SchemeInapplicable { .. } => ErrorClass::SchemeInapplicable,
            Error::NotInvertible { .. }
            | Error::EigenSolverFailed
            | Error::Overflow
            | Error::NoDecayDetected
            | Error::Verification(_) => ErrorClass::Numerical,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Input => 2,
            ErrorClass::SchemeInapplicable => 3,
            ErrorClass::Numerical => 4,
        }
    }
}
