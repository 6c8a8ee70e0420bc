//! Facial reduction preprocessing for conic optimization.
//!
//! Strict feasibility (Slater's condition) fails surprisingly often in
//! structured semidefinite programs. This crate detects that failure,
//! produces and verifies reducing certificates, restricts problems to the
//! minimal face of the cone, and ships structure-exploiting pipelines built
//! on the same machinery:
//!
//! - [`conic`]: the primal-dual conic model, certificate checking, the
//!   facial-reduction loop, and a Dykstra-style feasibility solver.
//! - [`completion_psd`]: PSD matrix completion driven by clique exposing
//!   vectors.
//! - [`completion_edm`]: Euclidean distance matrix completion and sensor
//!   network localization, exact and noise-robust.
//! - [`lrmc`]: low-rank matrix completion from fully observed blocks,
//!   without an SDP solver.
//! - [`lifts`]: SDP lifts of combinatorial problems (max-cut second lift,
//!   QAP gangster reduction) together with their facial reductions.
//! - [`sos`]: monomial-basis elimination for sum-of-squares programs.
//!
//! Supporting layers: [`numerics`] (deterministic dense symmetric linear
//! algebra with an explicit tolerance policy), [`cones`] (face algebra for
//! the PSD cone), [`lp`] (a small dense simplex kernel), [`pathologies`]
//! (classic ill-posed instances used as fixtures), [`formats`] (stable text
//! formats), and [`cli`] (the batch front end).
//!
//! See the crate examples for runnable walkthroughs of each pipeline.

pub mod cli;
pub mod completion_edm;
pub mod completion_psd;
pub mod cones;
pub mod conic;
pub mod formats;
pub mod lifts;
pub mod lp;
pub mod lrmc;
pub mod numerics;
pub mod pathologies;
pub mod sos;

pub use cones::FaceRep;
pub use conic::{ConicProblem, ReductionTrace};
pub use numerics::{Mat, Spectrum, SymMatrix};

use std::fmt;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand dimensions are inconsistent.
    DimensionMismatch { expected: usize, got: usize },
    /// A matrix required to be PSD has a significantly negative eigenvalue.
    NotPsd { min_eig: f64 },
    /// A matrix required to be positive definite is not.
    NotPd,
    /// A clique's principal submatrix fails to be PSD, so the data is not a
    /// partial PSD matrix.
    PartialNotPsd { min_eig: f64 },
    /// A clique's distance data does not embed: the centered Gram matrix
    /// fails to be PSD.
    NotEdm { min_eig: f64 },
    /// An observation graph is missing a mandatory self-loop.
    MissingSelfLoop { node: usize },
    /// A fully observed block does not have the declared target rank.
    RankMismatch { expected: usize, got: usize },
    /// A 0/1 matrix is not a permutation matrix.
    NotPermutation,
    /// Procrustes alignment needs at least one anchor.
    TooFewAnchors,
    /// Bisection bracket does not straddle the feasibility boundary.
    BadBracket,
    /// A reducing certificate failed validation.
    InvalidCertificate(CertFailure),
    /// A linearly dependent constraint row has an inconsistent right-hand
    /// side: the problem is infeasible.
    InconsistentRow { row: usize },
    /// An iteration cap was breached; at desk scale this is a defect.
    IterationLimit,
    /// The zero polynomial has no support.
    ZeroPolynomial,
    /// A pipeline stopped because the reduced face is still too big.
    FaceTooBig { dim: usize },
    /// Text input could not be parsed.
    Parse { line: usize, msg: String },
    /// Input data is structurally invalid.
    Invalid(String),
}

/// Why a certificate was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertFailure {
    /// The candidate exposing matrix is not PSD.
    NotPsd,
    /// The candidate exposing matrix is (numerically) zero.
    Zero,
    /// An inner product that must vanish does not.
    BadInnerProduct,
}

impl fmt::Display for CertFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertFailure::NotPsd => write!(f, "exposing matrix is not PSD"),
            CertFailure::Zero => write!(f, "exposing matrix is zero"),
            CertFailure::BadInnerProduct => write!(f, "inner product residual too large"),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NotPsd { min_eig } => {
                write!(f, "matrix is not PSD (min eigenvalue {min_eig:e})")
            }
            Error::NotPd => write!(f, "matrix is not positive definite"),
            Error::PartialNotPsd { min_eig } => {
                write!(
                    f,
                    "clique submatrix is not PSD (min eigenvalue {min_eig:e})"
                )
            }
            Error::NotEdm { min_eig } => {
                write!(f, "clique distances are not a Euclidean distance matrix (min eigenvalue {min_eig:e})")
            }
            Error::MissingSelfLoop { node } => write!(f, "missing self-loop at node {node}"),
            Error::RankMismatch { expected, got } => {
                write!(f, "block rank mismatch: expected {expected}, got {got}")
            }
            Error::NotPermutation => write!(f, "matrix is not a permutation matrix"),
            Error::TooFewAnchors => write!(f, "at least one anchor is required"),
            Error::BadBracket => write!(f, "bisection bracket does not straddle the boundary"),
            Error::InvalidCertificate(why) => write!(f, "invalid certificate: {why}"),
            Error::InconsistentRow { row } => {
                write!(
                    f,
                    "dependent constraint row {row} has inconsistent right-hand side"
                )
            }
            Error::IterationLimit => write!(f, "iteration limit reached"),
            Error::ZeroPolynomial => write!(f, "zero polynomial has no support"),
            Error::FaceTooBig { dim } => {
                write!(f, "reduced face dimension {dim} is too large to continue")
            }
            Error::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
            Error::Invalid(msg) => write!(f, "invalid data: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
