//! Cubic interpolation on uniform grids (4-point Lagrange), with value and
//! first-derivative evaluation, for both periodic and clamped boundaries.

use crate::scalar::Real;

/// Lagrange basis through samples at local coordinates -1, 0, 1, 2,
/// evaluated at s in [0, 1].
#[inline]
fn weights<T: Real>(s: T) -> [T; 4] {
    let one = T::one();
    let two = T::lit(2.0);
    let sixth = T::lit(1.0 / 6.0);
    let half = T::lit(0.5);
    [
        -s * (s - one) * (s - two) * sixth,
        (s + one) * (s - one) * (s - two) * half,
        -(s + one) * s * (s - two) * half,
        (s + one) * s * (s - one) * sixth,
    ]
}

/// d/ds of the same basis.
#[inline]
fn weight_derivs<T: Real>(s: T) -> [T; 4] {
    let l = T::lit;
    let s2 = s * s;
    [
        -(l(3.0) * s2 - l(6.0) * s + l(2.0)) * l(1.0 / 6.0),
        (l(3.0) * s2 - l(4.0) * s - l(1.0)) * l(0.5),
        -(l(3.0) * s2 - l(2.0) * s - l(2.0)) * l(0.5),
        (l(3.0) * s2 - l(1.0)) * l(1.0 / 6.0),
    ]
}

/// Uniform-grid sampler over `values` at positions x0 + k*dx.
#[derive(Debug, Clone, Copy)]
pub struct UniformGrid<T> {
    pub x0: T,
    pub dx: T,
    pub periodic: bool,
}

impl<T: Real> UniformGrid<T> {
    fn stencil_base(&self, len: usize, x: T) -> (usize, T) {
        let pos = (x - self.x0) / self.dx;
        let raw = pos.floor();
        let mut cell = raw.to_isize().unwrap_or(0);
        let mut s = pos - raw;
        let n = len as isize;
        if self.periodic {
            cell = cell.rem_euclid(n);
        } else {
            // Clamp so the 4-point stencil stays inside the array; s is
            // adjusted to keep the interpolation point fixed.
            if cell < 1 {
                s = s + T::from_isize(cell - 1).unwrap();
                cell = 1;
            } else if cell > n - 3 {
                s = s + T::from_isize(cell - (n - 3)).unwrap();
                cell = n - 3;
            }
        }
        (cell as usize, s)
    }

    #[inline]
    fn gather(&self, values: &[T], cell: usize) -> [T; 4] {
        let n = values.len();
        if self.periodic {
            let idx = |k: isize| -> T {
                values[(cell as isize + k).rem_euclid(n as isize) as usize]
            };
            [idx(-1), idx(0), idx(1), idx(2)]
        } else {
            [values[cell - 1], values[cell], values[cell + 1], values[cell + 2]]
        }
    }

    /// Interpolated value at `x`.
    pub fn value(&self, values: &[T], x: T) -> T {
        let (cell, s) = self.stencil_base(values.len(), x);
        let f = self.gather(values, cell);
        let w = weights(s);
        f[0] * w[0] + f[1] * w[1] + f[2] * w[2] + f[3] * w[3]
    }

    /// Interpolated d/dx at `x`.
    pub fn derivative(&self, values: &[T], x: T) -> T {
        let (cell, s) = self.stencil_base(values.len(), x);
        let f = self.gather(values, cell);
        let w = weight_derivs(s);
        (f[0] * w[0] + f[1] * w[1] + f[2] * w[2] + f[3] * w[3]) / self.dx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        // A 4-point Lagrange interpolant is exact on cubic polynomials.
        let p = |x: f64| 0.5 * x * x * x - x * x + 2.0 * x - 3.0;
        let dp = |x: f64| 1.5 * x * x - 2.0 * x + 2.0;
        let dx = 0.25;
        let values: Vec<f64> = (0..40).map(|k| p(k as f64 * dx)).collect();
        let grid = UniformGrid { x0: 0.0, dx, periodic: false };
        for &x in &[0.1, 1.37, 5.0, 9.6] {
            assert!((grid.value(&values, x) - p(x)).abs() < 1e-12);
            assert!((grid.derivative(&values, x) - dp(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn periodic_wraps_cleanly() {
        let n = 64usize;
        let dx = 2.0 * std::f64::consts::PI / n as f64;
        let values: Vec<f64> = (0..n).map(|k| (k as f64 * dx).sin()).collect();
        let grid = UniformGrid { x0: 0.0, dx, periodic: true };
        // Points just outside [0, 2 pi) and across the seam.
        for &x in &[-0.3, 6.4, 2.0 * std::f64::consts::PI - 1e-3] {
            assert!((grid.value(&values, x) - x.sin()).abs() < 2e-5);
            assert!((grid.derivative(&values, x) - x.cos()).abs() < 2e-4);
        }
    }

    #[test]
    fn clamped_edges_stay_finite_and_close() {
        let dx = 0.1;
        let values: Vec<f64> = (0..20).map(|k| (k as f64 * dx).exp()).collect();
        let grid = UniformGrid { x0: 0.0, dx, periodic: false };
        // Extrapolation just outside the table uses the edge stencil.
        let v = grid.value(&values, -0.02);
        assert!((v - (-0.02f64).exp()).abs() < 1e-4);
    }
}
