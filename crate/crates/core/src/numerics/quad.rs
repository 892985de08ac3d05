//! Quadrature: composite rules on uniform samples and an adaptive Simpson
//! rule for callables.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Composite trapezoid on uniformly spaced samples.
pub fn trapezoid_uniform<T: Real>(values: &[T], dx: T) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let mut acc = (values[0] + values[values.len() - 1]) * T::lit(0.5);
    for &v in &values[1..values.len() - 1] {
        acc = acc + v;
    }
    acc * dx
}

/// Composite Simpson on uniformly spaced samples. An even interval count is
/// required by the pure rule; with an odd count the last interval is handled
/// by the three-eighths rule so no accuracy cliff appears.
pub fn simpson_uniform<T: Real>(values: &[T], dx: T) -> T {
    let n = values.len();
    if n < 2 {
        return T::zero();
    }
    if n == 2 {
        return (values[0] + values[1]) * dx * T::lit(0.5);
    }
    let intervals = n - 1;
    let (simpson_end, tail) = if intervals % 2 == 0 { (n, T::zero()) } else {
        // Three-eighths rule on the final three intervals, Simpson before it.
        let m = n - 4;
        let t = (values[m]
            + values[m + 1] * T::lit(3.0)
            + values[m + 2] * T::lit(3.0)
            + values[m + 3])
            * dx
            * T::lit(3.0 / 8.0);
        (m + 1, t)
    };
    let mut acc = T::zero();
    if simpson_end >= 3 {
        acc = values[0] + values[simpson_end - 1];
        let mut k = 1;
        while k < simpson_end - 1 {
            let w = if k % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
            acc = acc + w * values[k];
            k += 1;
        }
        acc = acc * dx / T::lit(3.0);
    }
    acc + tail
}

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance
/// `tol`. Handles integrands with kinks (absolute values) by bisection.
pub fn adaptive_simpson<T: Real, F>(f: &mut F, a: T, b: T, tol: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    if a == b {
        return Ok(T::zero());
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = (a + b) * T::lit(0.5);
    let fm = f(m)?;
    let whole = simpson_rule(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson_rule<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real, F>(
    f: &mut F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let m = (a + b) * T::lit(0.5);
    let lm = (a + m) * T::lit(0.5);
    let rm = (m + b) * T::lit(0.5);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson_rule(a, m, fa, flm, fm);
    let right = simpson_rule(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= T::lit(15.0) * tol {
        return Ok(left + right + delta / T::lit(15.0));
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure {
            a: a.as_f64(),
            b: b.as_f64(),
            err: delta.abs().as_f64(),
        });
    }
    let half_tol = tol * T::lit(0.5);
    let l = recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?;
    Ok(l + r)
}
