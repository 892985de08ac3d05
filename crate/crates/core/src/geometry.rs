//! Characteristic geometry through the origin: the curves traced by each
//! eigenvector field, how fast each characteristic speed varies along its
//! own curve (the degeneracy index), and the coordinate checks and 2x2
//! coordinate construction that make those curves the axes.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::numerics::diff;
use crate::numerics::ode::{self, OdeOptions};
use crate::scalar::{lit, Real};
use crate::spectral::{self, SpectralData};
use crate::system::HyperbolicSystem;

/// Default integrator tolerance for characteristic curves; derivative
/// extraction at the origin needs the samples accurate well below the
/// classification threshold.
pub const TRAJECTORY_TOL: f64 = 1e-12;

/// Largest supported degeneracy search depth; one derivative order beyond
/// it must still fit the difference table.
pub const L_MAX_LIMIT: usize = 6;

/// Default degeneracy search depth.
pub const L_MAX_DEFAULT: usize = 4;

/// The curve through u = 0 with velocity r_i(u), sampled on a symmetric
/// parameter grid.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    /// Zero-based family index.
    pub family: usize,
    /// Parameter samples, ascending, containing 0.
    pub s: Vec<T>,
    /// States u^(i)(s_k).
    pub states: Vec<Vec<T>>,
    /// Characteristic speed of the family at each sample.
    pub lambdas: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    /// State at the sample closest to s = 0 (exactly 0 by construction).
    pub fn origin_index(&self) -> usize {
        let mut best = 0;
        for (k, &s) in self.s.iter().enumerate() {
            if s.abs() < self.s[best].abs() {
                best = k;
            }
        }
        best
    }
}

/// Integrates du/ds = r_i(u) from u(0) = 0 to every requested node.
///
/// `nodes` may mix signs; each sign is integrated outward from 0 in its own
/// pass, so the returned states match `nodes` element for element.
pub fn trajectory_states<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    family: usize,
    nodes: &[T],
    tol: T,
) -> Result<Vec<Vec<T>>> {
    let n = sys.dim();
    if family >= n {
        return Err(Error::invalid(format!(
            "family {} out of range for a {n}-component system",
            family + 1
        )));
    }
    let radius = sys.validity_radius();
    let origin = vec![T::zero(); n];

    let mut out: Vec<Option<Vec<T>>> = vec![None; nodes.len()];
    for (side_positive, label) in [(true, "forward"), (false, "backward")] {
        let mut side: Vec<(usize, T)> = nodes
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, s)| if side_positive { s > T::zero() } else { s < T::zero() })
            .collect();
        if side.is_empty() {
            continue;
        }
        side.sort_by(|a, b| {
            let (x, y) = (a.1.abs(), b.1.abs());
            x.partial_cmp(&y).unwrap()
        });
        let ordered: Vec<T> = side.iter().map(|&(_, s)| s).collect();

        let mut anchor: Option<SpectralData<T>> = None;
        let mut rhs = |_s: T, u: &[T]| -> Result<Vec<T>> {
            let norm = linalg::norm2(u);
            if norm > radius {
                return Err(Error::LeftValidityBall {
                    norm: norm.as_f64(),
                    radius: radius.as_f64(),
                    where_: format!("{label} characteristic curve of family {}", family + 1),
                });
            }
            let frame = spectral::decompose_at(sys, u, anchor.as_ref())?;
            let r = frame.r(family);
            anchor = Some(frame);
            Ok(r)
        };
        let opts = OdeOptions::with_tol(tol, "characteristic curve integration");
        let states = ode::solve_to_nodes(&mut rhs, T::zero(), &origin, &ordered, &opts)?;
        for ((idx, _), state) in side.into_iter().zip(states) {
            out[idx] = Some(state);
        }
    }

    Ok(out
        .into_iter()
        .zip(nodes)
        .map(|(slot, &s)| match slot {
            Some(state) => state,
            // Exactly s = 0 stays at the origin.
            None => {
                debug_assert!(s == T::zero());
                origin.clone()
            }
        })
        .collect())
}

/// Characteristic curve of one family on a uniform symmetric grid of
/// `samples` points over [-s_max, s_max].
pub fn integrate_rarefaction_trajectory<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    family: usize,
    s_max: T,
    tol: T,
) -> Result<Trajectory<T>> {
    let samples = 33usize;
    if !(s_max > T::zero()) || s_max > sys.validity_radius() * lit(0.5) {
        return Err(Error::invalid(format!(
            "s_max {} must be positive and at most half the validity radius",
            s_max.as_f64()
        )));
    }
    let half = (samples / 2) as isize;
    let ds = s_max / T::from_isize(half).unwrap();
    let s: Vec<T> = (-half..=half).map(|k| T::from_isize(k).unwrap() * ds).collect();
    let states = trajectory_states(sys, family, &s, tol)?;
    let mut lambdas = Vec::with_capacity(states.len());
    for u in &states {
        lambdas.push(spectral::decompose_at(sys, u, None)?.lambdas[family]);
    }
    Ok(Trajectory { family, s, states, lambdas })
}

/// Degeneracy record of a single characteristic family.
#[derive(Debug, Clone)]
pub struct FamilyDegeneracy<T> {
    /// Zero-based family index.
    pub family: usize,
    /// Index alpha_i: the first order with nonvanishing derivative of the
    /// speed along the curve, minus one. `None` is the sentinel for a family
    /// whose speed is flat to every tested order (at least l_max).
    pub alpha: Option<usize>,
    /// The first nonvanishing derivative d^(alpha+1) lambda / ds^(alpha+1)
    /// at s = 0, when one exists.
    pub leading: Option<T>,
    /// Derivative estimates for orders 1..=l_max+1.
    pub derivatives: Vec<T>,
    /// Refinement disagreement for each estimate.
    pub disagreements: Vec<T>,
    /// Classification threshold the estimates were compared against.
    pub threshold: T,
}

/// Degeneracy structure of the whole system.
#[derive(Debug, Clone)]
pub struct WldReport<T> {
    pub families: Vec<FamilyDegeneracy<T>>,
    /// Families with a finite index (zero-based).
    pub j: Vec<usize>,
    /// min alpha_i over `j`; `None` when every family is degenerate.
    pub alpha: Option<usize>,
    /// Families attaining the minimum (zero-based).
    pub j1: Vec<usize>,
    /// Search depth used.
    pub l_max: usize,
}

/// Derivatives of the family speed along its own curve at s = 0, orders
/// 1..=l_max+1, each with one Richardson refinement level.
fn speed_derivatives<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    family: usize,
    l_max: usize,
) -> Result<(Vec<diff::Refined<T>>, T)> {
    let top = l_max + 1;
    let r = diff::stencil_radius(top);
    let s_max = sys.validity_radius() * lit(0.4);
    let h = s_max / T::from_usize(r).unwrap();
    let half = h * lit(0.5);

    // One shared sample table at spacing h/2 covers both refinement levels
    // of every order: offsets -2R..=2R with R the widest radius.
    let nodes: Vec<T> = (-(2 * r as isize)..=2 * r as isize)
        .map(|k| T::from_isize(k).unwrap() * half)
        .collect();
    let states = trajectory_states(sys, family, &nodes, lit(TRAJECTORY_TOL))?;
    let mut lambda_samples = Vec::with_capacity(states.len());
    for u in &states {
        lambda_samples.push(spectral::decompose_at(sys, u, None)?.lambdas[family]);
    }

    let mut out = Vec::with_capacity(top);
    for order in 1..=top {
        let ro = diff::stencil_radius(order);
        let center = 2 * r;
        let window = &lambda_samples[center - 2 * ro..=center + 2 * ro];
        out.push(diff::refined_from_samples(window, h, order)?);
    }
    Ok((out, h))
}

/// Classifies one family's degeneracy by differencing its speed along its
/// own characteristic curve.
pub fn compute_wld_index<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    family: usize,
    l_max: usize,
) -> Result<FamilyDegeneracy<T>> {
    if l_max == 0 || l_max > L_MAX_LIMIT {
        return Err(Error::invalid(format!(
            "degeneracy search depth {l_max} outside 1..={L_MAX_LIMIT}"
        )));
    }
    let (refined, _h) = speed_derivatives(sys, family, l_max)?;
    let derivatives: Vec<T> = refined.iter().map(|r| r.value).collect();
    let disagreements: Vec<T> = refined.iter().map(|r| r.disagreement).collect();

    let mut scale = T::zero();
    for d in &derivatives {
        scale = scale.max(d.abs());
    }
    let threshold = lit::<T>(1e-6).max(lit::<T>(1e-4) * scale);

    let mut alpha = None;
    let mut leading = None;
    for (idx, &d) in derivatives.iter().enumerate() {
        if disagreements[idx] > lit::<T>(10.0) * threshold {
            return Err(Error::IndeterminateClassification {
                family: family + 1,
                order: idx + 1,
                disagreement: disagreements[idx].as_f64(),
                threshold: threshold.as_f64(),
            });
        }
        if d.abs() > threshold {
            alpha = Some(idx);
            leading = Some(d);
            break;
        }
    }
    Ok(FamilyDegeneracy { family, alpha, leading, derivatives, disagreements, threshold })
}

/// Degeneracy structure of every family, with the minimum index and its
/// attaining set.
pub fn compute_wld<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    l_max: usize,
) -> Result<WldReport<T>> {
    let mut families = Vec::with_capacity(sys.dim());
    for i in 0..sys.dim() {
        families.push(compute_wld_index(sys, i, l_max)?);
    }
    let j: Vec<usize> = families
        .iter()
        .filter_map(|f| f.alpha.map(|_| f.family))
        .collect();
    let alpha = families.iter().filter_map(|f| f.alpha).min();
    let j1: Vec<usize> = match alpha {
        Some(a) => families
            .iter()
            .filter(|f| f.alpha == Some(a))
            .map(|f| f.family)
            .collect(),
        None => Vec::new(),
    };
    Ok(WldReport { families, j, alpha, j1, l_max })
}

/// Residual of the source term along the characteristic curves.
#[derive(Debug, Clone)]
pub struct MatchingReport<T> {
    /// Max |B(u^(i)(s))| (infinity norm over components) per family.
    pub per_family: Vec<T>,
    /// Largest residual overall.
    pub max_residual: T,
    /// Family attaining it (zero-based) and the parameter where.
    pub worst_family: usize,
    pub worst_s: T,
    /// Pass iff max_residual <= tol.
    pub pass: bool,
    pub tol: T,
}

/// Checks that the source term vanishes along every characteristic curve
/// through the origin.
pub fn check_matching<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    s_max: T,
    tol: T,
) -> Result<MatchingReport<T>> {
    let mut per_family = Vec::with_capacity(sys.dim());
    let mut max_residual = T::zero();
    let mut worst_family = 0;
    let mut worst_s = T::zero();
    for i in 0..sys.dim() {
        let traj = integrate_rarefaction_trajectory(sys, i, s_max, lit(TRAJECTORY_TOL))?;
        let mut fam_max = T::zero();
        for (k, u) in traj.states.iter().enumerate() {
            let b = sys.source(u)?;
            let res = linalg::norm_inf(&b);
            if res > fam_max {
                fam_max = res;
            }
            if res > max_residual {
                max_residual = res;
                worst_family = i;
                worst_s = traj.s[k];
            }
        }
        per_family.push(fam_max);
    }
    Ok(MatchingReport {
        per_family,
        max_residual,
        worst_family,
        worst_s,
        pass: max_residual <= tol,
        tol,
    })
}

/// Residuals of the coordinate conventions: each axis is its family's
/// characteristic curve and the origin frame is the standard basis.
#[derive(Debug, Clone)]
pub struct NormalizedReport<T> {
    /// Max |r_i(u_i e_i) - e_i| (Euclidean norm) per family over the axis.
    pub per_family: Vec<T>,
    /// |r_i(0) - e_i| at the origin, worst family.
    pub origin_right: T,
    /// |l_i(0) - e_i^T| at the origin, worst family.
    pub origin_left: T,
    pub max_residual: T,
    pub pass: bool,
    pub tol: T,
}

/// Checks r_i(u_i e_i) = e_i on each axis and the origin frame conventions.
pub fn check_normalized<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    s_max: T,
    tol: T,
) -> Result<NormalizedReport<T>> {
    let n = sys.dim();
    if !(s_max > T::zero()) || s_max > sys.validity_radius() {
        return Err(Error::invalid(format!(
            "axis extent {} must be positive and inside the validity radius",
            s_max.as_f64()
        )));
    }
    let origin_frame = spectral::decompose_at(sys, &vec![T::zero(); n], None)?;
    let mut origin_right = T::zero();
    let mut origin_left = T::zero();
    for i in 0..n {
        let mut r = origin_frame.r(i);
        let mut l = origin_frame.l(i);
        r[i] -= T::one();
        l[i] -= T::one();
        origin_right = origin_right.max(linalg::norm2(&r));
        origin_left = origin_left.max(linalg::norm2(&l));
    }

    let steps = 16isize;
    let ds = s_max / T::from_isize(steps).unwrap();
    let mut per_family = Vec::with_capacity(n);
    let mut max_residual = origin_right.max(origin_left);
    for i in 0..n {
        let mut fam_max = T::zero();
        // March outward along each half-axis, carrying the frame for sign
        // continuity so a legitimate e_i is not reported as -e_i.
        for sign in [T::one(), -T::one()] {
            let mut anchor = Some(origin_frame.clone());
            for k in 1..=steps {
                let mut u = vec![T::zero(); n];
                u[i] = sign * ds * T::from_isize(k).unwrap();
                let frame = spectral::decompose_at(sys, &u, anchor.as_ref())?;
                let mut r = frame.r(i);
                r[i] -= T::one();
                fam_max = fam_max.max(linalg::norm2(&r));
                anchor = Some(frame);
            }
        }
        max_residual = max_residual.max(fam_max);
        per_family.push(fam_max);
    }
    Ok(NormalizedReport {
        per_family,
        origin_right,
        origin_left,
        max_residual,
        pass: max_residual <= tol,
        tol,
    })
}

/// The coordinate change built from composed characteristic flows: the
/// image of (c1, c2) is the origin carried along family 1 for parameter c1,
/// then along family 2 for parameter c2.
#[derive(Debug, Clone)]
pub struct FlowTransform<T, S> {
    base: S,
    tol: T,
    fd_step: T,
}

impl<T: Real, S: HyperbolicSystem<T>> FlowTransform<T, S> {
    /// Carries `start` along the family's characteristic field for the
    /// signed parameter `time`.
    fn flow(&self, family: usize, time: T, start: &[T]) -> Result<Vec<T>> {
        if time == T::zero() {
            return Ok(start.to_vec());
        }
        let radius = self.base.validity_radius();
        let mut anchor: Option<SpectralData<T>> = None;
        let mut rhs = |_s: T, u: &[T]| -> Result<Vec<T>> {
            let norm = linalg::norm2(u);
            if norm > radius {
                return Err(Error::LeftValidityBall {
                    norm: norm.as_f64(),
                    radius: radius.as_f64(),
                    where_: format!("coordinate flow of family {}", family + 1),
                });
            }
            let frame = spectral::decompose_at(&self.base, u, anchor.as_ref())?;
            let r = frame.r(family);
            anchor = Some(frame);
            Ok(r)
        };
        let opts = OdeOptions::with_tol(self.tol, "coordinate flow integration");
        let states = ode::solve_to_nodes(&mut rhs, T::zero(), start, &[time], &opts)?;
        Ok(states.into_iter().next().unwrap())
    }

    /// Forward map: new coordinates to original state.
    pub fn forward(&self, c: &[T]) -> Result<Vec<T>> {
        let mid = self.flow(0, c[0], &vec![T::zero(); 2])?;
        self.flow(1, c[1], &mid)
    }

    /// Jacobian of the forward map by central differences.
    pub fn jacobian(&self, c: &[T]) -> Result<Mat<T>> {
        let h = self.fd_step;
        let mut j = Mat::zeros(2, 2);
        for m in 0..2 {
            let mut hi = c.to_vec();
            let mut lo = c.to_vec();
            hi[m] += h;
            lo[m] -= h;
            let fhi = self.forward(&hi)?;
            let flo = self.forward(&lo)?;
            for row in 0..2 {
                j[(row, m)] = (fhi[row] - flo[row]) / (h + h);
            }
        }
        Ok(j)
    }

    /// Inverse map by Newton iteration seeded at the state itself (the map
    /// is a near-identity perturbation at the scales it is used on).
    pub fn inverse(&self, u: &[T]) -> Result<Vec<T>> {
        let mut c = u.to_vec();
        let target_tol = lit::<T>(1e-11) * linalg::norm2(u).max(T::one());
        for _ in 0..30 {
            let f = self.forward(&c)?;
            let res = linalg::sub(u, &f);
            if linalg::norm2(&res) <= target_tol {
                return Ok(c);
            }
            let j = self.jacobian(&c)?;
            let step = j.solve(&res).ok_or_else(|| {
                Error::MapNotInvertible(format!(
                    "flow-map Jacobian singular near coordinates {:?}",
                    c.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
                ))
            })?;
            for k in 0..2 {
                c[k] += step[k];
            }
        }
        Err(Error::MapNotInvertible(format!(
            "Newton iteration stalled inverting the flow map at state {:?}",
            u.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
        )))
    }
}

/// A 2-component system rewritten in the coordinates of a [`FlowTransform`],
/// in which both characteristic curves through the origin are the axes.
#[derive(Debug, Clone)]
pub struct NormalizedSystem2<T, S> {
    name: String,
    transform: FlowTransform<T, S>,
    radius: T,
}

impl<T: Real, S: HyperbolicSystem<T>> NormalizedSystem2<T, S> {
    pub fn transform(&self) -> &FlowTransform<T, S> {
        &self.transform
    }

    /// Max round-trip error |inverse(forward(c)) - c| over a deterministic
    /// grid of coordinates with |c| <= radius.
    pub fn verify_invertible(&self, radius: T, per_axis: usize) -> Result<T> {
        let mut worst = T::zero();
        let m = per_axis as isize;
        for a in -m..=m {
            for b in -m..=m {
                let c = vec![
                    radius * T::from_isize(a).unwrap() / T::from_isize(m).unwrap(),
                    radius * T::from_isize(b).unwrap() / T::from_isize(m).unwrap(),
                ];
                if linalg::norm2(&c) > radius {
                    continue;
                }
                let u = self.transform.forward(&c)?;
                let back = self.transform.inverse(&u)?;
                worst = worst.max(linalg::norm_inf(&linalg::sub(&back, &c)));
            }
        }
        Ok(worst)
    }
}

impl<T: Real, S: HyperbolicSystem<T>> HyperbolicSystem<T> for NormalizedSystem2<T, S> {
    fn dim(&self) -> usize {
        2
    }

    fn validity_radius(&self) -> T {
        self.radius
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn matrix(&self, u: &[T]) -> Result<Mat<T>> {
        let j = self.transform.jacobian(u)?;
        let jinv = j.inverse().ok_or_else(|| {
            Error::MapNotInvertible("flow-map Jacobian singular in matrix assembly".into())
        })?;
        let a = self.transform.base.matrix(&self.transform.forward(u)?)?;
        Ok(jinv.matmul(&a).matmul(&j))
    }

    fn source(&self, u: &[T]) -> Result<Vec<T>> {
        let j = self.transform.jacobian(u)?;
        let b = self.transform.base.source(&self.transform.forward(u)?)?;
        let jinv = j.inverse().ok_or_else(|| {
            Error::MapNotInvertible("flow-map Jacobian singular in source assembly".into())
        })?;
        Ok(jinv.matvec(&b))
    }
}

/// Rewrites a 2-component system in coordinates whose axes are the
/// characteristic curves through the origin.
pub fn normalize_2x2<T: Real, S: HyperbolicSystem<T>>(sys: S) -> Result<NormalizedSystem2<T, S>> {
    if sys.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            what: "flow-composition coordinate construction".into(),
            supported: 2,
            n: sys.dim(),
        });
    }
    let name = format!("{} (characteristic coordinates)", sys.name());
    let radius = sys.validity_radius() * lit(0.4);
    let transform = FlowTransform { base: sys, tol: lit(TRAJECTORY_TOL), fd_step: lit(1e-4) };
    // Fail fast if the map degenerates already at the origin.
    let j0 = transform.jacobian(&[T::zero(), T::zero()])?;
    if j0.inverse().is_none() {
        return Err(Error::MapNotInvertible(
            "origin Jacobian of the flow map is singular".into(),
        ));
    }
    Ok(NormalizedSystem2 { name, transform, radius })
}
