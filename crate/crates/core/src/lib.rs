//! Analysis of first-order quasi-linear strictly hyperbolic systems
//! u_t + A(u) u_x = B(u): characteristic geometry, degeneracy structure of
//! the characteristic families, the sharp lifespan prediction for small
//! initial data, and a method-of-characteristics-informed finite-difference
//! solver that validates the prediction against observed gradient blow-up.
//!
//! Everything is generic over the scalar type through [`scalar::Real`];
//! the aliases at the crate root fix `f64`, the precision all tolerances
//! are stated for.

pub mod catalog;
pub mod decomp;
pub mod dsl;
pub mod error;
pub mod geometry;
pub mod lifespan;
pub mod linalg;
pub mod numerics;
pub mod riccati;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod suites;
pub mod system;

pub use error::{Error, Result};
pub use scalar::Real;
pub use system::HyperbolicSystem;

/// Double-precision system definition.
pub type SystemDefinition = dsl::SystemDefinition<f64>;

/// Double-precision expression.
pub type Expression = dsl::Expression<f64>;

/// Double-precision dense matrix.
pub type Mat = linalg::Mat<f64>;
