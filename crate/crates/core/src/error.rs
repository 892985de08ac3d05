//! Crate-wide error type.
//!
//! Numeric payloads are stored as `f64` regardless of the scalar the
//! computation ran in, so the error type stays non-generic.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Syntax error in an expression, with 1-based line and column.
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A document was structurally valid but its contents do not form a
    /// usable definition (missing key, wrong count, bad value).
    #[error("invalid document: {0}")]
    Document(String),

    /// Expression references a state component outside 1..=n.
    #[error("variable {name} out of range for a {n}-component system")]
    VariableOutOfRange { name: String, n: usize },

    /// Evaluation produced a non-finite value; `expr` is the innermost
    /// offending subexpression and `state` the evaluation point.
    #[error("non-finite value from `{expr}` at state {state:?}")]
    NonFinite { expr: String, state: Vec<f64> },

    /// The coefficient matrix has a complex (or numerically repeated)
    /// eigenvalue pair at `state`.
    #[error("spectrum not real and simple at state {state:?}: {detail}")]
    ComplexSpectrum { state: Vec<f64>, detail: String },

    /// Two sorted eigenvalues sit closer than the resolvable floor.
    #[error("eigenvalue gap {gap:e} below floor {floor:e} at state {state:?}")]
    GapCollapse { state: Vec<f64>, gap: f64, floor: f64 },

    /// Sign continuity broke between consecutive states along a path, which
    /// means the path steps are too coarse for frame tracking.
    #[error("eigenvector orientation lost between path states {index} and {}: overlap {overlap:e}", index + 1)]
    OrientationLost { index: usize, overlap: f64 },

    /// Eigenvector matrix could not be inverted to produce left eigenvectors.
    #[error("eigenvector basis numerically singular at state {state:?}")]
    SingularEigenbasis { state: Vec<f64> },

    /// A state wandered outside the validity ball |u| <= radius.
    #[error("state left the validity ball (|u| = {norm:e} > {radius:e}) at {where_}")]
    LeftValidityBall { norm: f64, radius: f64, where_: String },

    /// Adaptive step control collapsed; the integrand is too stiff or
    /// singular at the reported location.
    #[error("step size collapsed to {step:e} at t = {t:e} during {context}")]
    StepCollapse { t: f64, step: f64, context: String },

    /// Derivative classification could not be decided: refinement levels
    /// disagree by more than the tolerance allows.
    #[error("indeterminate derivative classification for family {family} at order {order}: refinement levels differ by {disagreement:e} (threshold {threshold:e})")]
    IndeterminateClassification {
        family: usize,
        order: usize,
        disagreement: f64,
        threshold: f64,
    },

    /// Finite-difference stencil produced inconsistent eigenvector
    /// orientations even after step shrinking.
    #[error("eigenvector orientation unstable across difference stencil at state {state:?}")]
    StencilOrientationUnstable { state: Vec<f64> },

    /// Operation requires coordinates in which straight axes are the
    /// characteristic trajectories, and the system is not in that form.
    #[error("system is not in normalized coordinates: family {family} deviates by {residual:e} (tolerance {tol:e})")]
    NotNormalized { family: usize, residual: f64, tol: f64 },

    /// Operation is only implemented for a specific system size.
    #[error("{what} supports n = {supported} only, got n = {n}")]
    UnsupportedDimension { what: String, supported: usize, n: usize },

    /// Coordinate-change map failed invertibility on the sampled grid.
    #[error("coordinate map not invertible: {0}")]
    MapNotInvertible(String),

    /// Richardson refinement of the data-family derivative disagreed.
    #[error("initial-data derivative extraction unstable at x = {x:e}: levels differ by {disagreement:e}")]
    PsiUnstable { x: f64, disagreement: f64 },

    /// Quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge on [{a:e}, {b:e}] (last error estimate {err:e})")]
    QuadratureFailure { a: f64, b: f64, err: f64 },

    /// The very first step of a time evolution already violated the
    /// step-size floor; the grid cannot resolve the data.
    #[error("time step {dt:e} below floor {floor:e} at start: grid too coarse for the initial data")]
    GridTooCoarse { dt: f64, floor: f64 },

    /// Caller passed an argument outside the documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Convenience constructor for [`Error::InvalidArgument`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
