//! Deterministic low-discrepancy sampling of balls and boxes.
//!
//! Uses the additive recurrence with the generalized golden ratio; the
//! sequence is reproducible by construction, so reports built from it are
//! byte-identical across runs.

use crate::scalar::Real;

/// Returns the generalized golden ratio for dimension d: the unique real
/// root > 1 of x^(d+1) = x + 1.
fn phi(d: usize) -> f64 {
    let mut x = 2.0f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

/// First `count` points of the d-dimensional additive-recurrence sequence in
/// the unit cube.
pub fn unit_cube<T: Real>(d: usize, count: usize) -> Vec<Vec<T>> {
    let g = phi(d);
    let alphas: Vec<f64> = (1..=d).map(|j| (1.0 / g.powi(j as i32)).fract()).collect();
    let mut out = Vec::with_capacity(count);
    for k in 1..=count {
        let point: Vec<T> = alphas
            .iter()
            .map(|&a| {
                let v = (0.5 + a * k as f64).fract();
                T::lit(v)
            })
            .collect();
        out.push(point);
    }
    out
}

/// `count` points of the sequence mapped into the closed Euclidean ball of
/// the given radius, by rejection from the enclosing cube. Always returns
/// exactly `count` points, plus the origin as the first sample.
pub fn ball<T: Real>(d: usize, radius: T, count: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(count);
    out.push(vec![T::zero(); d]);
    let g = phi(d);
    let alphas: Vec<f64> = (1..=d).map(|j| (1.0 / g.powi(j as i32)).fract()).collect();
    let two = T::lit(2.0);
    let mut k = 1u64;
    while out.len() < count {
        let mut point = Vec::with_capacity(d);
        let mut norm_sq = T::zero();
        for &a in &alphas {
            let v = (0.5 + a * k as f64).fract();
            let coord = (T::lit(v) * two - T::one()) * radius;
            norm_sq = norm_sq + coord * coord;
            point.push(coord);
        }
        if norm_sq.sqrt() <= radius {
            out.push(point);
        }
        k += 1;
        // The acceptance ratio is the ball/cube volume ratio; for the small
        // dimensions used here the loop terminates quickly, but guard anyway.
        if k > 10_000 * count as u64 + 10_000 {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;

    #[test]
    fn ball_points_stay_inside_and_are_deterministic() {
        let a: Vec<Vec<f64>> = ball(3, 0.5, 200);
        let b: Vec<Vec<f64>> = ball(3, 0.5, 200);
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        assert!(a.iter().all(|p| norm2(p) <= 0.5 + 1e-12));
        assert!(a[0].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn cube_sequence_is_equidistributed_enough() {
        // Crude discrepancy check: mean of each coordinate near 1/2.
        let pts: Vec<Vec<f64>> = unit_cube(2, 1000);
        for j in 0..2 {
            let mean: f64 = pts.iter().map(|p| p[j]).sum::<f64>() / 1000.0;
            assert!((mean - 0.5).abs() < 0.02, "coordinate {j} mean {mean}");
        }
    }
}
