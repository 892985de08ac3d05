//! Spectral decomposition of A(u) with the normalization conventions the
//! rest of the crate relies on: eigenvalues sorted strictly ascending, unit
//! right eigenvectors, and left eigenvectors forming the exact dual basis
//! l_i r_j = delta_ij.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::numerics::sample;
use crate::scalar::{lit, Real};
use crate::system::HyperbolicSystem;

/// Eigenvalue gaps below this floor count as a strict-hyperbolicity
/// violation; divisions by lambda_j - lambda_i downstream need the margin.
pub use crate::dsl::GAP_FLOOR;

/// Anchored sign continuity requires at least this much overlap between an
/// eigenvector and its anchor; less means the frame rotated too far to track.
const OVERLAP_FLOOR: f64 = 0.1;

/// Full spectral frame of A(u) at a single state.
#[derive(Debug, Clone)]
pub struct SpectralData<T> {
    /// State the matrix was evaluated at.
    pub u: Vec<T>,
    /// Eigenvalues, strictly ascending.
    pub lambdas: Vec<T>,
    /// Unit right eigenvectors, column i belonging to lambda_i.
    pub right: Mat<T>,
    /// Dual-basis left eigenvectors, row i belonging to lambda_i.
    pub left: Mat<T>,
    /// Smallest eigenvalue gap at this state; infinite when n = 1.
    pub condition: T,
}

impl<T: Real> SpectralData<T> {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// Right eigenvector r_i (zero-based family index).
    pub fn r(&self, i: usize) -> Vec<T> {
        self.right.column(i)
    }

    /// Left eigenvector l_i (zero-based family index).
    pub fn l(&self, i: usize) -> Vec<T> {
        self.left.row(i).to_vec()
    }
}

/// Sampled strict-hyperbolicity margins over a state ball.
#[derive(Debug, Clone)]
pub struct GapReport<T> {
    /// Smallest cross-family gap min |lambda_i(u) - lambda_j(v)|, i != j,
    /// over all sampled state pairs. A sampled lower-bound estimate, not a
    /// certificate; infinite when n = 1 (no cross-family pairs exist).
    pub delta0: T,
    /// Largest same-family oscillation max |lambda_i(u) - lambda_i(v)| over
    /// sampled pairs.
    pub delta1: T,
    /// Radius of the sampled ball.
    pub radius: T,
    /// Number of states sampled.
    pub samples: usize,
}

/// A(u), evaluated entrywise.
pub fn assemble_matrix<T: Real, S: HyperbolicSystem<T>>(sys: &S, u: &[T]) -> Result<Mat<T>> {
    sys.matrix(u)
}

/// Decomposes an n x n matrix into the frame of [`SpectralData`].
///
/// Signs are chosen by maximal overlap with `anchor` when given, otherwise
/// by making the largest-magnitude component of each r_i positive.
pub fn eigendecompose<T: Real>(
    m: &Mat<T>,
    u: &[T],
    anchor: Option<&SpectralData<T>>,
) -> Result<SpectralData<T>> {
    let n = m.rows();
    let state_f64 = || u.iter().map(|&v| v.as_f64()).collect::<Vec<f64>>();
    let eig = linalg::eigen(m)?;

    for (k, &im) in eig.im.iter().enumerate() {
        if im != T::zero() {
            return Err(Error::ComplexSpectrum {
                state: state_f64(),
                detail: format!(
                    "eigenvalue {} is {} + {}i",
                    k + 1,
                    eig.re[k].as_f64(),
                    im.as_f64()
                ),
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.re[a].partial_cmp(&eig.re[b]).unwrap());
    let lambdas: Vec<T> = order.iter().map(|&k| eig.re[k]).collect();

    let mut condition = T::infinity();
    for w in lambdas.windows(2) {
        let gap = w[1] - w[0];
        if gap < lit(GAP_FLOOR) {
            return Err(Error::GapCollapse {
                state: state_f64(),
                gap: gap.as_f64(),
                floor: GAP_FLOOR,
            });
        }
        condition = condition.min(gap);
    }

    let mut right = Mat::zeros(n, n);
    for (i, &k) in order.iter().enumerate() {
        let mut col = eig.vectors.column(k);
        let norm = linalg::norm2(&col);
        if norm == T::zero() {
            return Err(Error::SingularEigenbasis { state: state_f64() });
        }
        linalg::scale_in_place(&mut col, T::one() / norm);
        let flip = match anchor {
            Some(frame) => {
                let overlap = linalg::dot(&col, &frame.right.column(i));
                if overlap.abs() < lit(OVERLAP_FLOOR) {
                    return Err(Error::OrientationLost { index: i + 1, overlap: overlap.as_f64() });
                }
                overlap < T::zero()
            }
            None => {
                let mut arg = 0;
                for (j, &v) in col.iter().enumerate() {
                    if v.abs() > col[arg].abs() {
                        arg = j;
                    }
                }
                col[arg] < T::zero()
            }
        };
        if flip {
            linalg::scale_in_place(&mut col, -T::one());
        }
        right.set_column(i, &col);
    }

    let left = right
        .inverse()
        .ok_or_else(|| Error::SingularEigenbasis { state: state_f64() })?;

    Ok(SpectralData { u: u.to_vec(), lambdas, right, left, condition })
}

/// A(u) assembled and decomposed in one step.
pub fn decompose_at<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    u: &[T],
    anchor: Option<&SpectralData<T>>,
) -> Result<SpectralData<T>> {
    let m = sys.matrix(u)?;
    eigendecompose(&m, u, anchor)
}

/// Samples spectra over the ball |u| <= radius and reports the worst
/// cross-family gap and same-family oscillation seen.
pub fn check_strict_hyperbolicity<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    radius: T,
    samples: usize,
) -> Result<GapReport<T>> {
    let n = sys.dim();
    if radius > sys.validity_radius() {
        return Err(Error::invalid(format!(
            "sample radius {} exceeds the validity radius {}",
            radius.as_f64(),
            sys.validity_radius().as_f64()
        )));
    }
    if samples == 0 {
        return Err(Error::invalid("at least one sample state is required"));
    }
    let states = sample::ball(n, radius, samples);
    let mut spectra: Vec<Vec<T>> = Vec::with_capacity(states.len());
    for u in &states {
        spectra.push(decompose_at(sys, u, None)?.lambdas);
    }

    let mut delta0 = T::infinity();
    let mut delta1 = T::zero();
    for a in &spectra {
        for b in &spectra {
            for i in 0..n {
                delta1 = delta1.max((a[i] - b[i]).abs());
                for j in 0..n {
                    if i != j {
                        delta0 = delta0.min((a[i] - b[j]).abs());
                    }
                }
            }
        }
    }
    Ok(GapReport { delta0, delta1, radius, samples })
}

/// Spectral frames along a path of states, sign-continuous from point to
/// point; the first frame uses the default orientation.
pub fn eigenframe_along_path<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    path: &[Vec<T>],
) -> Result<Vec<SpectralData<T>>> {
    if path.is_empty() {
        return Ok(Vec::new());
    }
    let max_step = sys.validity_radius() * lit(0.1);
    for pair in path.windows(2) {
        let step = linalg::norm2(&linalg::sub(&pair[1], &pair[0]));
        if step > max_step {
            return Err(Error::invalid(format!(
                "path step {} exceeds a tenth of the validity radius",
                step.as_f64()
            )));
        }
    }
    let mut frames = Vec::with_capacity(path.len());
    let mut prev: Option<SpectralData<T>> = None;
    for u in path {
        let frame = decompose_at(sys, u, prev.as_ref())?;
        prev = Some(frame.clone());
        frames.push(frame);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_system_definition;

    fn decoupled_pair() -> crate::dsl::SystemDefinition<f64> {
        parse_system_definition(
            r#"
            name = "decoupled"
            n = 2
            A = [["u1", "0"], ["0", "1 + u2"]]
            B = ["0", "0"]
        "#,
        )
        .unwrap()
    }

    #[test]
    fn symmetric_exchange_matrix_frame() {
        let m = Mat::from_rows(2, 2, &[0.0f64, 1.0, 1.0, 0.0]);
        let s = eigendecompose(&m, &[0.0, 0.0], None).unwrap();
        assert!((s.lambdas[0] + 1.0).abs() < 1e-14);
        assert!((s.lambdas[1] - 1.0).abs() < 1e-14);
        let inv_sqrt2 = 0.5f64.sqrt();
        // Orthonormal frame: l_i equals r_i transposed.
        for (i, want) in [[inv_sqrt2, -inv_sqrt2], [inv_sqrt2, inv_sqrt2]].iter().enumerate() {
            let r = s.r(i);
            let l = s.l(i);
            for k in 0..2 {
                assert!((r[k] - want[k]).abs() < 1e-12, "r_{} = {:?}", i + 1, r);
                assert!((l[k] - want[k]).abs() < 1e-12, "l_{} = {:?}", i + 1, l);
            }
        }
        assert!((s.condition - 2.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_matrix_keeps_axes() {
        let m = Mat::from_rows(2, 2, &[0.0f64, 0.0, 0.0, 1.0]);
        let s = eigendecompose(&m, &[0.0, 0.0], None).unwrap();
        assert_eq!(s.lambdas, vec![0.0, 1.0]);
        for i in 0..2 {
            let r = s.r(i);
            let l = s.l(i);
            for k in 0..2 {
                let want = if k == i { 1.0 } else { 0.0 };
                assert!((r[k] - want).abs() < 1e-14);
                assert!((l[k] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rotation_matrix_rejected() {
        let m = Mat::from_rows(2, 2, &[0.0f64, -1.0, 1.0, 0.0]);
        let err = eigendecompose(&m, &[0.0, 0.0], None).unwrap_err();
        assert!(matches!(err, Error::ComplexSpectrum { .. }), "{err}");
    }

    #[test]
    fn near_repeated_spectrum_rejected() {
        let m = Mat::from_rows(2, 2, &[1.0f64, 0.0, 0.0, 1.0 + 1e-12]);
        let err = eigendecompose(&m, &[0.0, 0.0], None).unwrap_err();
        assert!(matches!(err, Error::GapCollapse { .. }), "{err}");
    }

    #[test]
    fn reconstruction_from_frame() {
        // Oracle: summing lambda_i r_i l_i must reproduce the matrix.
        let m = Mat::from_rows(3, 3, &[0.4f64, 1.0, 0.1, 0.8, -0.2, 0.3, 0.05, 0.4, 1.7]);
        let s = eigendecompose(&m, &[0.0; 3], None).unwrap();
        let mut back: Mat<f64> = Mat::zeros(3, 3);
        for i in 0..3 {
            let r = s.r(i);
            let l = s.l(i);
            for a in 0..3 {
                for b in 0..3 {
                    back[(a, b)] += s.lambdas[i] * r[a] * l[b];
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                assert!((back[(a, b)] - m[(a, b)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gap_report_for_separated_families() {
        // Families at u1 and 1 + u2: the analytic cross gap on radius 0.1
        // is 1 - 2*0.1 = 0.8; sampling can only approach it from above.
        let sys = decoupled_pair();
        let rep = check_strict_hyperbolicity(&sys, 0.1, 64).unwrap();
        assert!(rep.delta0 >= 0.8 - 1e-12, "delta0 = {}", rep.delta0);
        assert!(rep.delta0 <= 0.86, "delta0 = {}", rep.delta0);
        assert!(rep.delta1 <= 0.2 + 1e-12);
    }

    #[test]
    fn gap_report_scalar_case_is_vacuous() {
        let sys: crate::dsl::SystemDefinition<f64> = parse_system_definition(
            r#"
            name = "burgers"
            n = 1
            A = ["u1"]
            B = ["0"]
        "#,
        )
        .unwrap();
        let rep = check_strict_hyperbolicity(&sys, 0.3, 32).unwrap();
        assert!(rep.delta0.is_infinite());
        assert!(rep.delta1 > 0.0);
    }

    #[test]
    fn gap_report_detects_family_collision() {
        // diag(u1, u2) eigenvalue ranges overlap, so the cross-family gap
        // over sample pairs collapses toward zero.
        let sys: crate::dsl::SystemDefinition<f64> = parse_system_definition(
            r#"
            name = "colliding"
            n = 2
            A = [["0.5 + u1", "0"], ["0", "u2"]]
            B = ["0", "0"]
        "#,
        )
        .unwrap();
        let rep = check_strict_hyperbolicity(&sys, 0.4, 64).unwrap();
        assert!(rep.delta0 < 0.05, "delta0 = {}", rep.delta0);
    }

    #[test]
    fn frames_stay_sign_continuous_along_path() {
        let sys: crate::dsl::SystemDefinition<f64> = parse_system_definition(
            r#"
            name = "tilted"
            n = 2
            A = [["0", "1"], ["1", "u1 / 10"]]
            B = ["0", "0"]
        "#,
        )
        .unwrap();
        let path: Vec<Vec<f64>> = (0..=20).map(|k| vec![0.005 * k as f64, 0.0]).collect();
        let frames = eigenframe_along_path(&sys, &path).unwrap();
        for pair in frames.windows(2) {
            for i in 0..2 {
                let d = linalg::dot(&pair[0].r(i), &pair[1].r(i));
                assert!(d > 0.99, "family {} overlap {}", i + 1, d);
            }
        }
    }

    #[test]
    fn oversized_path_step_rejected() {
        let sys = decoupled_pair();
        let path = vec![vec![0.0, 0.0], vec![0.4, 0.0]];
        assert!(eigenframe_along_path(&sys, &path).is_err());
    }
}
