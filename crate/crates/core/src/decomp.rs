//! Projection of states, gradients, and sources onto the characteristic
//! frame, the coefficient tensors that govern how the projected components
//! interact, and the structural identities those tensors satisfy.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::scalar::{lit, Real};
use crate::spectral::{self, SpectralData};
use crate::system::HyperbolicSystem;

/// Components of state, gradient, and source in the characteristic frame
/// at one point.
#[derive(Debug, Clone)]
pub struct ProjectedState<T> {
    /// v_i = l_i(u) u.
    pub v: Vec<T>,
    /// w_i = l_i(u) u_x.
    pub w: Vec<T>,
    /// b_i = l_i(u) B(u).
    pub b: Vec<T>,
}

/// Frame components of the state and its gradient at `u`.
pub fn project<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    u: &[T],
    u_x: &[T],
) -> Result<ProjectedState<T>> {
    let frame = spectral::decompose_at(sys, u, None)?;
    project_in_frame(sys, &frame, u, u_x)
}

/// Same projections against a caller-supplied frame (for sign continuity
/// across repeated calls).
pub fn project_in_frame<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    frame: &SpectralData<T>,
    u: &[T],
    u_x: &[T],
) -> Result<ProjectedState<T>> {
    let n = frame.n();
    let bsrc = sys.source(u)?;
    let mut v = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let l = frame.l(i);
        v.push(linalg::dot(&l, u));
        w.push(linalg::dot(&l, u_x));
        b.push(linalg::dot(&l, &bsrc));
    }
    Ok(ProjectedState { v, w, b })
}

/// Dense rank-3 array indexed `[(i, j, k)]`, all axes of length n.
#[derive(Debug, Clone)]
pub struct Tensor3<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    fn zeros(n: usize) -> Self {
        Tensor3 { n, data: vec![T::zero(); n * n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for &x in &self.data {
            m = m.max(x.abs());
        }
        m
    }
}

impl<T> Index<(usize, usize, usize)> for Tensor3<T> {
    type Output = T;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &T {
        &self.data[(i * self.n + j) * self.n + k]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Tensor3<T> {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut T {
        &mut self.data[(i * self.n + j) * self.n + k]
    }
}

/// The seven coefficient families of the frame-interaction equations,
/// evaluated at one state.
///
/// With D r_j the Jacobian of the sign-continuous eigenvector field and
/// "D f . r" the directional derivative along r:
///
/// beta[(i,j,k)]        = (lambda_k - lambda_i) l_i . (D r_j r_k)
/// nu[(i,j,k)]          = -l_i . (D r_j r_k)
/// gamma[(i,j,k)]       = (lambda_k - lambda_j) l_i . (D r_j r_k)
///                        - (D lambda_j . r_k) delta_ij
/// sigma[(i,j,k)]       = l_i . (D r_k r_j - D r_j r_k)
/// beta_tilde[(i,j,k)]  = beta[(i,j,k)] + (D lambda_i . r_k) delta_ij
/// gamma_tilde[(i,j,k)] = gamma[(i,j,k)] + (1/2)[(D lambda_j . r_k) delta_ij
///                        + (D lambda_k . r_j) delta_ik]
/// b_tilde[(i,k)]       = D b_i . r_k,  b_i(u) = l_i(u) B(u)
#[derive(Debug, Clone)]
pub struct CoefficientTensors<T> {
    pub beta: Tensor3<T>,
    pub nu: Tensor3<T>,
    pub gamma: Tensor3<T>,
    pub sigma: Tensor3<T>,
    pub beta_tilde: Tensor3<T>,
    pub gamma_tilde: Tensor3<T>,
    pub b_tilde: Mat<T>,
    /// Differencing step actually used (may be smaller than requested after
    /// an orientation retry).
    pub step: T,
}

/// Default differencing step for tensor assembly at `u`.
pub fn default_step<T: Real>(u: &[T]) -> T {
    lit::<T>(1e-5) * linalg::norm2(u).max(T::one())
}

/// Assembles all coefficient tensors at `u` by central differences with one
/// Richardson refinement, on frames sign-anchored to the frame at `u`.
pub fn decomposition_coefficients<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    u: &[T],
    h: T,
) -> Result<CoefficientTensors<T>> {
    match assemble(sys, u, h) {
        Err(Error::OrientationLost { .. }) => match assemble(sys, u, h * lit(0.25)) {
            Err(Error::OrientationLost { .. }) => Err(Error::StencilOrientationUnstable {
                state: u.iter().map(|v| v.as_f64()).collect(),
            }),
            other => other,
        },
        other => other,
    }
}

fn assemble<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    u: &[T],
    h: T,
) -> Result<CoefficientTensors<T>> {
    let n = sys.dim();
    let margin = T::from_usize(n).unwrap() * h;
    let norm = linalg::norm2(u);
    if norm + margin > sys.validity_radius() {
        return Err(Error::LeftValidityBall {
            norm: norm.as_f64(),
            radius: (sys.validity_radius() - margin).as_f64(),
            where_: "coefficient differencing stencil".into(),
        });
    }
    let center = spectral::decompose_at(sys, u, None)?;

    // Frame plus projected source at one stencil point, sign-anchored to
    // the center frame.
    let probe = |q: usize, off: T| -> Result<(SpectralData<T>, Vec<T>)> {
        let mut up = u.to_vec();
        up[q] += off;
        let frame = spectral::decompose_at(sys, &up, Some(&center))?;
        let bsrc = sys.source(&up)?;
        let b: Vec<T> = (0..n).map(|i| linalg::dot(&frame.l(i), &bsrc)).collect();
        Ok((frame, b))
    };
    let richardson = |vp: T, vm: T, vp2: T, vm2: T| -> T {
        let coarse = (vp - vm) / (h + h);
        let fine = (vp2 - vm2) / h;
        (lit::<T>(4.0) * fine - coarse) / lit(3.0)
    };

    // Cartesian partials: dr[j] has D r_j with (row, col) = (component,
    // direction); dlam[j] and db[i] are gradients.
    let mut dr = vec![Mat::zeros(n, n); n];
    let mut dlam = vec![vec![T::zero(); n]; n];
    let mut db = vec![vec![T::zero(); n]; n];
    for q in 0..n {
        let (fp, bp) = probe(q, h)?;
        let (fm, bm) = probe(q, -h)?;
        let half = h * lit(0.5);
        let (fp2, bp2) = probe(q, half)?;
        let (fm2, bm2) = probe(q, -half)?;
        for j in 0..n {
            dlam[j][q] = richardson(fp.lambdas[j], fm.lambdas[j], fp2.lambdas[j], fm2.lambdas[j]);
            let (rp, rm, rp2, rm2) = (fp.r(j), fm.r(j), fp2.r(j), fm2.r(j));
            for p in 0..n {
                dr[j][(p, q)] = richardson(rp[p], rm[p], rp2[p], rm2[p]);
            }
        }
        for i in 0..n {
            db[i][q] = richardson(bp[i], bm[i], bp2[i], bm2[i]);
        }
    }

    // Directional contractions against the center frame.
    let r: Vec<Vec<T>> = (0..n).map(|k| center.r(k)).collect();
    let l: Vec<Vec<T>> = (0..n).map(|i| center.l(i)).collect();
    let mut dr_dir = vec![vec![Vec::new(); n]; n];
    let mut dlam_dir = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        for k in 0..n {
            dr_dir[j][k] = dr[j].matvec(&r[k]);
            dlam_dir[j][k] = linalg::dot(&dlam[j], &r[k]);
        }
    }

    let mut beta = Tensor3::zeros(n);
    let mut nu = Tensor3::zeros(n);
    let mut gamma = Tensor3::zeros(n);
    let mut sigma = Tensor3::zeros(n);
    let mut beta_tilde = Tensor3::zeros(n);
    let mut gamma_tilde = Tensor3::zeros(n);
    let mut b_tilde = Mat::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            b_tilde[(i, k)] = linalg::dot(&db[i], &r[k]);
        }
        for j in 0..n {
            for k in 0..n {
                let li_drjk = linalg::dot(&l[i], &dr_dir[j][k]);
                let li_drkj = linalg::dot(&l[i], &dr_dir[k][j]);
                let b = (center.lambdas[k] - center.lambdas[i]) * li_drjk;
                let mut g = (center.lambdas[k] - center.lambdas[j]) * li_drjk;
                if i == j {
                    g -= dlam_dir[j][k];
                }
                beta[(i, j, k)] = b;
                nu[(i, j, k)] = -li_drjk;
                gamma[(i, j, k)] = g;
                sigma[(i, j, k)] = li_drkj - li_drjk;
                beta_tilde[(i, j, k)] = if i == j { b + dlam_dir[i][k] } else { b };
                let mut gt = g;
                if i == j {
                    gt += dlam_dir[j][k] * lit(0.5);
                }
                if i == k {
                    gt += dlam_dir[k][j] * lit(0.5);
                }
                gamma_tilde[(i, j, k)] = gt;
            }
        }
    }
    Ok(CoefficientTensors {
        beta,
        nu,
        gamma,
        sigma,
        beta_tilde,
        gamma_tilde,
        b_tilde,
        step: h,
    })
}

/// The four interaction sources at one point.
#[derive(Debug, Clone)]
pub struct SourceTerms<T> {
    /// Drives v_i along the i-th characteristic.
    pub f: Vec<T>,
    /// Drives w_i along the i-th characteristic.
    pub g: Vec<T>,
    /// Conservative-form counterpart of `f`.
    pub f_tilde: Vec<T>,
    /// Conservative-form counterpart of `g`.
    pub g_tilde: Vec<T>,
}

/// Evaluates the interaction sources at state `u` with gradient `u_x`.
pub fn evaluate_sources<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    u: &[T],
    u_x: &[T],
) -> Result<SourceTerms<T>> {
    let tensors = decomposition_coefficients(sys, u, default_step(u))?;
    let proj = project(sys, u, u_x)?;
    Ok(sources_from_parts(&tensors, &proj))
}

/// Sources from already-computed tensors and projections.
pub fn sources_from_parts<T: Real>(
    tensors: &CoefficientTensors<T>,
    proj: &ProjectedState<T>,
) -> SourceTerms<T> {
    let n = proj.v.len();
    let ProjectedState { v, w, b } = proj;
    let mut f = vec![T::zero(); n];
    let mut g = vec![T::zero(); n];
    let mut f_tilde = vec![T::zero(); n];
    let mut g_tilde = vec![T::zero(); n];
    for i in 0..n {
        // The gradient of b_i contracts against w to give the x-derivative
        // of the projected source.
        let mut bix = T::zero();
        for k in 0..n {
            bix += tensors.b_tilde[(i, k)] * w[k];
        }
        let mut fi = b[i];
        let mut fti = b[i];
        let mut gi = bix;
        let mut gti = bix;
        for j in 0..n {
            for k in 0..n {
                fi += tensors.beta[(i, j, k)] * v[j] * w[k] + tensors.nu[(i, j, k)] * v[j] * b[k];
                fti += tensors.beta_tilde[(i, j, k)] * v[j] * w[k]
                    + tensors.nu[(i, j, k)] * v[j] * b[k];
                gi += tensors.gamma[(i, j, k)] * w[j] * w[k]
                    + tensors.sigma[(i, j, k)] * w[j] * b[k];
                gti += tensors.gamma_tilde[(i, j, k)] * w[j] * w[k]
                    + tensors.sigma[(i, j, k)] * w[j] * b[k];
            }
        }
        f[i] = fi;
        g[i] = gi;
        f_tilde[i] = fti;
        g_tilde[i] = gti;
    }
    SourceTerms { f, g, f_tilde, g_tilde }
}

/// Max residuals of the structural identities, named by index pattern.
///
/// The `beta_iji` and `gamma_tilde_ijj` groups hold at every state; the
/// `gamma_ijj` / `beta_tilde_iji` groups for j != i; the axis groups only
/// for systems in normalized coordinates, evaluated at the axis shadows
/// u_j e_j of the given state.
#[derive(Debug, Clone)]
pub struct IdentityReport<T> {
    pub beta_iji: T,
    pub gamma_tilde_ijj: T,
    pub gamma_ijj: T,
    pub beta_tilde_iji: T,
    pub axis_beta_ijj: T,
    pub axis_nu_ijj: T,
    pub axis_sigma_ijj: T,
    pub axis_beta_tilde_ijj: T,
    pub axis_b_tilde: T,
    /// |gamma_iii(u_i e_i) + d lambda_i / d u_i (u_i e_i)|, the coupling
    /// between the leading quadratic coefficient and the speed slope.
    pub axis_speed_coupling: T,
    pub max_residual: T,
}

/// Evaluates every structural identity at `u` (general groups) and at its
/// axis shadows (axis groups).
pub fn identity_residuals<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    u: &[T],
) -> Result<IdentityReport<T>> {
    let n = sys.dim();
    let tensors = decomposition_coefficients(sys, u, default_step(u))?;

    let mut beta_iji = T::zero();
    let mut gamma_tilde_ijj = T::zero();
    let mut gamma_ijj = T::zero();
    let mut beta_tilde_iji = T::zero();
    for i in 0..n {
        for j in 0..n {
            beta_iji = beta_iji.max(tensors.beta[(i, j, i)].abs());
            gamma_tilde_ijj = gamma_tilde_ijj.max(tensors.gamma_tilde[(i, j, j)].abs());
            if j != i {
                gamma_ijj = gamma_ijj.max(tensors.gamma[(i, j, j)].abs());
                beta_tilde_iji = beta_tilde_iji.max(tensors.beta_tilde[(i, j, i)].abs());
            }
        }
    }

    let mut axis_beta_ijj = T::zero();
    let mut axis_nu_ijj = T::zero();
    let mut axis_sigma_ijj = T::zero();
    let mut axis_beta_tilde_ijj = T::zero();
    let mut axis_b_tilde = T::zero();
    let mut axis_speed_coupling = T::zero();
    for j in 0..n {
        let mut axis = vec![T::zero(); n];
        axis[j] = u[j];
        let h = default_step(&axis);
        let at = decomposition_coefficients(sys, &axis, h)?;
        for i in 0..n {
            axis_beta_ijj = axis_beta_ijj.max(at.beta[(i, j, j)].abs());
            axis_nu_ijj = axis_nu_ijj.max(at.nu[(i, j, j)].abs());
            axis_sigma_ijj = axis_sigma_ijj.max(at.sigma[(i, j, j)].abs());
            if i != j {
                axis_beta_tilde_ijj = axis_beta_tilde_ijj.max(at.beta_tilde[(i, j, j)].abs());
            }
            axis_b_tilde = axis_b_tilde.max(at.b_tilde[(i, j)].abs());
        }
        // Speed slope along the axis by direct differencing of the sorted
        // eigenvalue, no frames involved.
        let slope = axis_speed_slope(sys, j, u[j], h)?;
        axis_speed_coupling = axis_speed_coupling.max((at.gamma[(j, j, j)] + slope).abs());
    }

    let max_residual = [
        beta_iji,
        gamma_tilde_ijj,
        gamma_ijj,
        beta_tilde_iji,
        axis_beta_ijj,
        axis_nu_ijj,
        axis_sigma_ijj,
        axis_beta_tilde_ijj,
        axis_b_tilde,
        axis_speed_coupling,
    ]
    .into_iter()
    .fold(T::zero(), |a, b| a.max(b));

    Ok(IdentityReport {
        beta_iji,
        gamma_tilde_ijj,
        gamma_ijj,
        beta_tilde_iji,
        axis_beta_ijj,
        axis_nu_ijj,
        axis_sigma_ijj,
        axis_beta_tilde_ijj,
        axis_b_tilde,
        axis_speed_coupling,
        max_residual,
    })
}

/// d lambda_i / d u_i at the axis point u_i e_i by refined central
/// differences of the sorted eigenvalue.
fn axis_speed_slope<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    family: usize,
    coord: T,
    h: T,
) -> Result<T> {
    let n = sys.dim();
    let lam = |off: T| -> Result<T> {
        let mut u = vec![T::zero(); n];
        u[family] = coord + off;
        Ok(spectral::decompose_at(sys, &u, None)?.lambdas[family])
    };
    let half = h * lit(0.5);
    let coarse = (lam(h)? - lam(-h)?) / (h + h);
    let fine = (lam(half)? - lam(-half)?) / h;
    Ok((lit::<T>(4.0) * fine - coarse) / lit(3.0))
}

/// How the projected source behaves against the off-diagonal quadratic
/// |u_j||u_k| (j != k) envelope.
#[derive(Debug, Clone)]
pub struct QuadraticVanishingReport<T> {
    /// Largest ratio max_i |b_i(u)| / (sum over ordered j != k of
    /// |u_j||u_k|) over interior ball samples.
    pub bound: T,
    /// Largest ratio seen anywhere, near-axis ladder included.
    pub worst_ratio: T,
    /// The near-axis ladder shows the ratio diverging.
    pub unbounded: bool,
    pub pass: bool,
}

/// Checks that the projected source vanishes at least quadratically in the
/// off-diagonal sense: |b_i(u)| bounded by a multiple of
/// sum_{j != k} |u_j||u_k|.
///
/// The ball samples estimate the bound; a ladder of states approaching each
/// axis probes for divergence, which is how a merely first-order zero on an
/// axis shows up.
pub fn matching_expansion_check<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    samples: usize,
) -> Result<QuadraticVanishingReport<T>> {
    let n = sys.dim();
    let radius = sys.validity_radius() * lit(0.5);
    let ratio_at = |u: &[T]| -> Result<Option<T>> {
        let frame = spectral::decompose_at(sys, u, None)?;
        let bsrc = sys.source(u)?;
        let mut bmax = T::zero();
        for i in 0..n {
            bmax = bmax.max(linalg::dot(&frame.l(i), &bsrc).abs());
        }
        let mut envelope = T::zero();
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    envelope += u[j].abs() * u[k].abs();
                }
            }
        }
        if envelope < lit(1e-30) {
            return Ok(None);
        }
        Ok(Some(bmax / envelope))
    };

    let mut bound = T::zero();
    for u in crate::numerics::sample::ball(n, radius, samples) {
        if let Some(r) = ratio_at(&u)? {
            bound = bound.max(r);
        }
    }

    // March each axis ladder: fixed on-axis coordinate, off-axis part
    // shrinking geometrically. A bounded ratio settles; a first-order zero
    // on the axis makes it grow like the inverse off-axis distance.
    let mut worst_ratio = bound;
    let mut unbounded = false;
    for j in 0..n {
        let mut first: Option<T> = None;
        let mut last = T::zero();
        for m in 0..10 {
            let mut u = vec![radius * lit::<T>(1e-2) * lit::<T>(0.5).powi(m); n];
            u[j] = radius * lit(0.5);
            if let Some(r) = ratio_at(&u)? {
                if first.is_none() {
                    first = Some(r);
                }
                last = r;
                worst_ratio = worst_ratio.max(r);
            }
        }
        if let Some(f) = first {
            if last > f * lit(100.0) && last > lit(1e-6) {
                unbounded = true;
            }
        }
    }
    Ok(QuadraticVanishingReport { bound, worst_ratio, unbounded, pass: !unbounded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_system_definition, SystemDefinition};

    fn parse(doc: &str) -> SystemDefinition<f64> {
        parse_system_definition(doc).unwrap()
    }

    fn burgers() -> SystemDefinition<f64> {
        parse(
            r#"
            name = "burgers"
            n = 1
            A = ["u1"]
            B = ["0"]
        "#,
        )
    }

    fn decoupled_pair() -> SystemDefinition<f64> {
        parse(
            r#"
            name = "decoupled"
            n = 2
            A = [["u1", "0"], ["0", "1 + u2"]]
            B = ["0", "0"]
        "#,
        )
    }

    /// Normalized 2x2 system whose frames genuinely rotate off the axes.
    fn coupled_normalized() -> SystemDefinition<f64> {
        parse(
            r#"
            name = "coupled"
            n = 2
            A = [["u1", "u1 * u2"], ["u1 * u2", "1 + u2"]]
            B = ["0", "0"]
        "#,
        )
    }

    #[test]
    fn projection_against_identity_frame() {
        let sys = decoupled_pair();
        let p = project(&sys, &[0.1, 0.2], &[1.0, -1.0]).unwrap();
        assert!((p.v[0] - 0.1).abs() < 1e-12);
        assert!((p.v[1] - 0.2).abs() < 1e-12);
        assert!((p.w[0] - 1.0).abs() < 1e-12);
        assert!((p.w[1] + 1.0).abs() < 1e-12);
        assert!(p.b[0].abs() < 1e-15 && p.b[1].abs() < 1e-15);
    }

    #[test]
    fn projection_against_rotated_frame() {
        let sys = parse(
            r#"
            name = "exchange"
            n = 2
            A = [["0", "1"], ["1", "0"]]
            B = ["0", "0"]
        "#,
        );
        let p = project(&sys, &[0.1, 0.0], &[0.0, 0.0]).unwrap();
        let want = 0.1 / 2.0f64.sqrt();
        assert!((p.v[0] - want).abs() < 1e-12, "v = {:?}", p.v);
        assert!((p.v[1] - want).abs() < 1e-12);
    }

    #[test]
    fn projection_reconstructs_state_and_gradient() {
        let sys = parse(
            r#"
            name = "p-system"
            n = 2
            A = [["0", "1"], ["1 + u1", "0"]]
            B = ["0.2 * u2 * u1", "0.1 * u1 * u2"]
        "#,
        );
        let u = [0.07, -0.04];
        let u_x = [0.3, 0.9];
        let frame = spectral::decompose_at(&sys, &u, None).unwrap();
        let p = project_in_frame(&sys, &frame, &u, &u_x).unwrap();
        let b = sys.source(&u).unwrap();
        for c in 0..2 {
            let mut su = 0.0;
            let mut sx = 0.0;
            let mut sb = 0.0;
            for k in 0..2 {
                let r = frame.r(k);
                su += p.v[k] * r[c];
                sx += p.w[k] * r[c];
                sb += p.b[k] * r[c];
            }
            assert!((su - u[c]).abs() < 1e-9);
            assert!((sx - u_x[c]).abs() < 1e-9);
            assert!((sb - b[c]).abs() < 1e-9);
        }
    }

    #[test]
    fn scalar_tensors_in_closed_form() {
        let sys = burgers();
        let t = decomposition_coefficients(&sys, &[0.1], default_step(&[0.1])).unwrap();
        assert!(t.beta[(0, 0, 0)].abs() < 1e-10);
        assert!(t.nu[(0, 0, 0)].abs() < 1e-10);
        assert!((t.gamma[(0, 0, 0)] + 1.0).abs() < 1e-8);
        assert!(t.gamma_tilde[(0, 0, 0)].abs() < 1e-8);
        assert!((t.beta_tilde[(0, 0, 0)] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_pair_leading_quadratic_coefficient() {
        let sys = decoupled_pair();
        let t = decomposition_coefficients(&sys, &[0.0, 0.0], 1e-5).unwrap();
        assert!((t.gamma[(0, 0, 0)] + 1.0).abs() < 1e-8);
        assert!((t.gamma[(1, 1, 1)] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn identities_on_coupled_normalized_system() {
        let sys = coupled_normalized();
        let rep = identity_residuals(&sys, &[0.01, 0.02]).unwrap();
        assert!(rep.max_residual < 1e-8, "{rep:?}");
    }

    #[test]
    fn identities_on_three_component_system() {
        let sys = parse(
            r#"
            name = "coupled-triple"
            n = 3
            A = [
                ["u1", "u1 * u2", "u1 * u3"],
                ["u2 * u1", "1 + u2", "u2 * u3"],
                ["u3 * u1", "u3 * u2", "2 + u3"],
            ]
            B = ["0", "0", "0"]
        "#,
        );
        let rep = identity_residuals(&sys, &[0.02, -0.01, 0.015]).unwrap();
        assert!(rep.max_residual < 1e-8, "{rep:?}");
    }

    #[test]
    fn scalar_speed_coupling_on_axis() {
        let sys = burgers();
        let rep = identity_residuals(&sys, &[0.05]).unwrap();
        assert!(rep.axis_speed_coupling < 1e-8, "{rep:?}");
    }

    #[test]
    fn axis_source_slope_vanishes_for_matched_source() {
        let sys = parse(
            r#"
            name = "matched"
            n = 2
            A = [["u1", "u1 * u2"], ["u1 * u2", "1 + u2"]]
            B = ["u1 * u2", "-0.5 * u1 * u2"]
        "#,
        );
        let rep = identity_residuals(&sys, &[0.03, -0.02]).unwrap();
        assert!(rep.axis_b_tilde < 1e-8, "{rep:?}");
        assert!(rep.max_residual < 1e-8, "{rep:?}");
    }

    #[test]
    fn sources_vanish_without_gradient_or_source_term() {
        let sys = coupled_normalized();
        let s = evaluate_sources(&sys, &[0.05, -0.03], &[0.0, 0.0]).unwrap();
        for i in 0..2 {
            assert!(s.g[i].abs() < 1e-12, "g = {:?}", s.g);
            assert!(s.g_tilde[i].abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_gradient_equation_closes() {
        let sys = burgers();
        let w = 0.7;
        let s = evaluate_sources(&sys, &[0.1], &[w]).unwrap();
        assert!((s.g[0] + w * w).abs() < 1e-6 * w * w, "g = {:?}", s.g);
        // The state component rides unchanged along its characteristic.
        assert!(s.f[0].abs() < 1e-8);
        // Conservative form picks up the speed-slope transport term.
        assert!((s.f_tilde[0] - 0.1 * w).abs() < 1e-6);
        assert!(s.g_tilde[0].abs() < 1e-6);
    }

    #[test]
    fn quadratic_envelope_bounds_matched_source() {
        let sys = parse(
            r#"
            name = "matched"
            n = 2
            A = [["u1", "0"], ["0", "1 + u2"]]
            B = ["u1 * u2", "0"]
        "#,
        );
        let rep = matching_expansion_check(&sys, 64).unwrap();
        assert!(rep.pass);
        // b_1 = u1 u2 against the ordered sum 2 |u1||u2|.
        assert!((rep.worst_ratio - 0.5).abs() < 0.05, "{rep:?}");
    }

    #[test]
    fn zero_source_has_zero_envelope_ratio() {
        let sys = decoupled_pair();
        let rep = matching_expansion_check(&sys, 32).unwrap();
        assert!(rep.pass);
        assert!(rep.worst_ratio < 1e-12);
    }

    #[test]
    fn axis_supported_source_fails_the_envelope() {
        let sys = parse(
            r#"
            name = "unmatched"
            n = 2
            A = [["u1", "0"], ["0", "1 + u2"]]
            B = ["u1", "0"]
        "#,
        );
        let rep = matching_expansion_check(&sys, 32).unwrap();
        assert!(!rep.pass, "{rep:?}");
        assert!(rep.unbounded);
    }
}
