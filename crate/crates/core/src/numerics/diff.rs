//! Central finite differences for derivative orders 1..=7, second-order
//! accurate, with one optional Richardson refinement level.
//!
//! The order cap exists because degeneracy classification needs one
//! derivative beyond the configured maximum order, and the configured
//! maximum is capped at 6.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Highest derivative order the stencil table covers.
pub const MAX_ORDER: usize = 7;

/// Symmetric O(h^2) stencil for d^l/dx^l: returns the half-width r and the
/// 2r+1 weights for sample offsets -r..=r (to be divided by h^l).
fn stencil<T: Real>(order: usize) -> (usize, Vec<T>) {
    let l = T::lit;
    match order {
        1 => (1, vec![l(-0.5), l(0.0), l(0.5)]),
        2 => (1, vec![l(1.0), l(-2.0), l(1.0)]),
        3 => (2, vec![l(-0.5), l(1.0), l(0.0), l(-1.0), l(0.5)]),
        4 => (2, vec![l(1.0), l(-4.0), l(6.0), l(-4.0), l(1.0)]),
        5 => (3, vec![l(-0.5), l(2.0), l(-2.5), l(0.0), l(2.5), l(-2.0), l(0.5)]),
        6 => (3, vec![l(1.0), l(-6.0), l(15.0), l(-20.0), l(15.0), l(-6.0), l(1.0)]),
        7 => (
            4,
            vec![
                l(-0.5),
                l(3.0),
                l(-7.0),
                l(7.0),
                l(0.0),
                l(-7.0),
                l(7.0),
                l(-3.0),
                l(0.5),
            ],
        ),
        _ => panic!("derivative order {order} outside 1..={MAX_ORDER}"),
    }
}

/// Half-width (in stencil points) of the symmetric stencil for `order`.
/// With one refinement level the furthest sample sits at `radius * h` from
/// the center and the finest spacing is `h / 2`.
pub fn stencil_radius(order: usize) -> usize {
    stencil::<f64>(order).0
}

/// d^order f / dx^order at `x` using a symmetric O(h^2) stencil.
pub fn central_derivative<T: Real, F>(f: &mut F, x: T, h: T, order: usize) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let (r, w) = stencil::<T>(order);
    let mut acc = T::zero();
    for (idx, &wk) in w.iter().enumerate() {
        if wk == T::zero() {
            continue;
        }
        let k = idx as isize - r as isize;
        let v = f(x + T::from_isize(k).unwrap() * h)?;
        acc = acc + wk * v;
    }
    Ok(acc / h.powi(order as i32))
}

/// Derivative with one Richardson level: combines the O(h^2) estimates at
/// steps `h` and `h/2` into an O(h^4) value, and reports how far the two
/// levels were apart so callers can judge whether the estimate is trustworthy.
pub struct Refined<T> {
    /// Extrapolated derivative.
    pub value: T,
    /// |D(h) - D(h/2)|, the refinement disagreement.
    pub disagreement: T,
    /// The finer of the two raw estimates.
    pub fine: T,
}

pub fn refined_derivative<T: Real, F>(f: &mut F, x: T, h: T, order: usize) -> Result<Refined<T>>
where
    F: FnMut(T) -> Result<T>,
{
    let coarse = central_derivative(f, x, h, order)?;
    let fine = central_derivative(f, x, h * T::lit(0.5), order)?;
    let third = T::lit(1.0 / 3.0);
    // Both estimates carry O(h^2) error terms; 4/3 fine - 1/3 coarse cancels them.
    let value = (T::lit(4.0) * fine - coarse) * third;
    Ok(Refined { value, disagreement: (coarse - fine).abs(), fine })
}

/// Same refinement for a derivative evaluated from pre-tabulated samples on
/// the uniform grid x + k*(h/2), k = -2r..=2r (center at index 2r).
pub fn refined_from_samples<T: Real>(samples: &[T], h: T, order: usize) -> Result<Refined<T>> {
    let (r, w) = stencil::<T>(order);
    if samples.len() != 4 * r + 1 {
        return Err(Error::invalid(format!(
            "derivative order {order} needs {} samples, got {}",
            4 * r + 1,
            samples.len()
        )));
    }
    let center = 2 * r;
    let mut coarse = T::zero();
    let mut fine = T::zero();
    for (idx, &wk) in w.iter().enumerate() {
        if wk == T::zero() {
            continue;
        }
        let k = idx as isize - r as isize;
        coarse = coarse + wk * samples[(center as isize + 2 * k) as usize];
        fine = fine + wk * samples[(center as isize + k) as usize];
    }
    let hp = h.powi(order as i32);
    let half = T::lit(0.5).powi(order as i32);
    coarse = coarse / hp;
    fine = fine / (hp * half);
    let value = (T::lit(4.0) * fine - coarse) / T::lit(3.0);
    Ok(Refined { value, disagreement: (coarse - fine).abs(), fine })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Oracle: d^l/dx^l x^m = m!/(m-l)! x^(m-l), checked directly.
    fn monomial_derivative(m: u32, l: u32, x: f64) -> f64 {
        if l > m {
            return 0.0;
        }
        let mut c = 1.0;
        for k in 0..l {
            c *= (m - k) as f64;
        }
        c * x.powi((m - l) as i32)
    }

    #[test]
    fn exact_on_low_degree_polynomials() {
        // A symmetric O(h^2) stencil for order l is exact on degree <= l+1.
        for l in 1..=7usize {
            for m in l as u32..=(l as u32 + 1) {
                let mut f = |x: f64| Ok(x.powi(m as i32));
                let got = central_derivative(&mut f, 0.7, 0.05, l).unwrap();
                let want = monomial_derivative(m, l as u32, 0.7);
                let scale = want.abs().max(1.0);
                assert!(
                    (got - want).abs() / scale < 1e-7,
                    "l={l} m={m} got={got} want={want}"
                );
            }
        }
    }

    #[test]
    fn richardson_beats_raw_estimate_on_sin() {
        let mut f = |x: f64| Ok(x.sin());
        let x = 0.4f64;
        let h = 0.1;
        let raw = central_derivative(&mut f, x, h, 3).unwrap();
        let refined = refined_derivative(&mut f, x, h, 3).unwrap();
        let exact = -x.cos();
        assert!((refined.value - exact).abs() < (raw - exact).abs() / 10.0);
        // Residual error is about h^4 |f^(7)| / 160, a few 1e-7 at h = 0.1.
        assert!((refined.value - exact).abs() < 1e-5);
    }

    #[test]
    fn sample_form_agrees_with_callable_form() {
        let mut f = |x: f64| Ok((2.0 * x).exp());
        let x = 0.3f64;
        let h = 0.02;
        for order in 1..=7usize {
            let direct = refined_derivative(&mut f, x, h, order).unwrap();
            let r = stencil_radius(order);
            let samples: Vec<f64> = (-(2 * r as isize)..=(2 * r as isize))
                .map(|k| ((x + k as f64 * h / 2.0) * 2.0).exp())
                .collect();
            let tab = refined_from_samples(&samples, h, order).unwrap();
            assert!(
                (direct.value - tab.value).abs() <= 1e-9 * direct.value.abs().max(1.0),
                "order {order}"
            );
        }
    }
}
