use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used for CLI exit codes and the C ABI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input (files, specs, arguments).
    Input,
    /// The numerics broke down (non-PD moment matrix, degenerate spectrum...).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("count overflow computing C({n}+{d}, {d})")]
    CountOverflow { n: usize, d: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("unknown measure: {0}")]
    UnknownMeasure(String),

    #[error("degree {requested} exceeds the internal quadrature table (max {max})")]
    QuadratureTableExceeded { requested: usize, max: usize },

    #[error("moment for multi-index ({0}) is missing")]
    MissingMoment(String),

    #[error("moment for multi-index ({0}) given twice")]
    DuplicateMoment(String),

    #[error("non-finite value for multi-index ({0})")]
    NonFinite(String),

    #[error("measure mass y0 = {0} is not positive")]
    NonPositiveMass(f64),

    #[error("{what} needs moments up to degree {needed}, only {available} available")]
    InsufficientDegree {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("moment matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("bordered determinant vanishes for multi-index ({0})")]
    ZeroDeterminant(String),

    #[error("degree-{0} block of the change of basis is numerically singular")]
    SingularBasis(usize),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("multiplication operators do not commute (defect {defect:e} > {tol:e})")]
    NonCommuting { defect: f64, tol: f64 },

    #[error("joint spectrum stays degenerate after {0} random draws")]
    DegenerateSpectrum(usize),

    #[error("nodes do not give a solvable interpolation system")]
    SingularInterpolation,

    #[error("weight {index} = {value:e} is not positive: not a Gaussian rule")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotPositiveDefinite { .. }
            | Error::ZeroDeterminant(_)
            | Error::SingularBasis(_)
            | Error::NoConvergence(_)
            | Error::NonCommuting { .. }
            | Error::DegenerateSpectrum(_)
            | Error::SingularInterpolation
            | Error::NonPositiveWeight { .. }
            | Error::CountOverflow { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Input,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
