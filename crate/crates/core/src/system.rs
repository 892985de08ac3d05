//! The system abstraction every analysis routine is written against.

use crate::dsl::SystemDefinition;
use crate::error::Result;
use crate::linalg::Mat;
use crate::scalar::Real;

/// A quasi-linear system u_t + A(u) u_x = B(u) on the ball |u| <= delta.
///
/// Implementations must be pure: repeated calls with the same state return
/// bit-identical values.
pub trait HyperbolicSystem<T: Real> {
    /// Number of unknowns n.
    fn dim(&self) -> usize;

    /// Radius delta of the state ball on which the coefficients are trusted.
    fn validity_radius(&self) -> T;

    /// Display name for reports.
    fn name(&self) -> &str;

    /// Coefficient matrix A(u), n x n.
    fn matrix(&self, u: &[T]) -> Result<Mat<T>>;

    /// Source term B(u), length n.
    fn source(&self, u: &[T]) -> Result<Vec<T>>;
}

impl<T: Real> HyperbolicSystem<T> for SystemDefinition<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn validity_radius(&self) -> T {
        self.delta()
    }

    fn name(&self) -> &str {
        SystemDefinition::name(self)
    }

    fn matrix(&self, u: &[T]) -> Result<Mat<T>> {
        SystemDefinition::matrix(self, u)
    }

    fn source(&self, u: &[T]) -> Result<Vec<T>> {
        SystemDefinition::source(self, u)
    }
}

impl<T: Real, S: HyperbolicSystem<T> + ?Sized> HyperbolicSystem<T> for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn validity_radius(&self) -> T {
        (**self).validity_radius()
    }

    fn name(&self) -> &str {
        (**self).name()
    }

    fn matrix(&self, u: &[T]) -> Result<Mat<T>> {
        (**self).matrix(u)
    }

    fn source(&self, u: &[T]) -> Result<Vec<T>> {
        (**self).source(u)
    }
}
