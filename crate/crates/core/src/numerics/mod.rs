//! Shared numerical building blocks: ODE integration, finite differences,
//! quadrature, interpolation, and deterministic sampling.

pub mod diff;
pub mod interp;
pub mod ode;
pub mod quad;
pub mod sample;
