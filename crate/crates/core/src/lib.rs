//! Gaussian cubature from moment data.
//!
//! Given the moments of a measure on `R^n`, this crate decides whether a
//! Gaussian cubature rule of degree `2m - 1` (a rule with the minimal number
//! `C(n+m-1, n)` of nodes and positive weights) exists, by solving an
//! overdetermined linear system built from triple products of orthonormal
//! polynomials. When the rule exists it is constructed and verified.
//!
//! The pipeline, module by module:
//!
//! * [`indexing`]: multi-indices and the graded lexicographic order.
//! * [`measures`]: moment sequences, the measure catalog, moment files.
//! * [`ortho`]: the orthonormal polynomial basis and its triple products.
//! * [`existence`]: the linear system and its least-squares verdict.
//! * [`cubature`]: moment completion, flatness, node and weight recovery,
//!   plus the commuting multiplication-matrix check.
//! * [`qcheck`]: the certificate polynomial `Q` and its integral identities.
//! * [`cli`]: the command-line front end.

// `!(x > tol)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cubature;
pub mod error;
pub mod existence;
pub mod hexfloat;
pub mod indexing;
pub mod linalg;
pub mod measures;
pub mod ortho;
pub mod pipeline;
pub mod poly;
pub mod qcheck;
pub mod rulefile;

pub use cubature::{CubatureRule, ExactnessReport};
pub use error::{Error, ErrorClass, Result};
pub use existence::{ExpansionSystem, Verdict};
pub use indexing::{GlexTable, MultiIndex};
pub use measures::{MeasureSpec, MomentSequence, WeightTag};
pub use ortho::OrthoBasis;
pub use pipeline::{CubatureOptions, DEFAULT_EXISTENCE_TOL};
pub use poly::Polynomial;
