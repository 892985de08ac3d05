//! Scalar quadratic dynamics z' = a0(t) z^2 + a1(t) z + a2(t): integration
//! to a growth threshold with a fitted blow-up time, window integrals of
//! the coefficients, and the two inequalities those integrals satisfy (an
//! existence cap on the damped a0 integral, and a floor on the reciprocal
//! of the solution at the window's end).

use std::sync::Arc;

use crate::decomp;
use crate::error::{Error, Result};
use crate::geometry::FamilyDegeneracy;
use crate::numerics::interp::UniformGrid;
use crate::numerics::ode::{self, Control, OdeOptions, StopReason};
use crate::numerics::quad;
use crate::scalar::{lit, Real};
use crate::solver::{CharacteristicCurve, SolutionField};
use crate::system::HyperbolicSystem;

/// Growth threshold treated as numerical blow-up.
const Z_STOP: f64 = 1e8;

/// A scalar coefficient of time.
pub type CoefFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Where a coefficient triple came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance<T> {
    Synthetic,
    /// Extracted along the characteristic of one family launched from a
    /// foot point on the initial line.
    Extracted { family: usize, launch: T },
}

/// The coefficient triple of the quadratic equation.
#[derive(Clone)]
pub struct RiccatiCoefficients<T> {
    a0: CoefFn<T>,
    a1: CoefFn<T>,
    a2: CoefFn<T>,
    pub provenance: Provenance<T>,
}

impl<T: Real> RiccatiCoefficients<T> {
    pub fn from_fns(
        a0: impl Fn(T) -> T + Send + Sync + 'static,
        a1: impl Fn(T) -> T + Send + Sync + 'static,
        a2: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        RiccatiCoefficients {
            a0: Arc::new(a0),
            a1: Arc::new(a1),
            a2: Arc::new(a2),
            provenance: Provenance::Synthetic,
        }
    }

    /// Each coefficient a cubic polynomial in t with the given
    /// coefficients, constant term first.
    pub fn cubic_polynomials(p0: [T; 4], p1: [T; 4], p2: [T; 4]) -> Self {
        let poly = |p: [T; 4]| move |t: T| ((p[3] * t + p[2]) * t + p[1]) * t + p[0];
        Self::from_fns(poly(p0), poly(p1), poly(p2))
    }

    /// Coefficients sampled on the uniform time grid t0 + k*dt, read back
    /// by cubic interpolation (clamped at the ends).
    pub fn from_samples(
        t0: T,
        dt: T,
        a0: Vec<T>,
        a1: Vec<T>,
        a2: Vec<T>,
        provenance: Provenance<T>,
    ) -> Result<Self> {
        if a0.len() < 4 || a0.len() != a1.len() || a1.len() != a2.len() {
            return Err(Error::invalid(
                "coefficient samples need equal lengths of at least 4",
            ));
        }
        if !(dt > T::zero()) {
            return Err(Error::invalid("coefficient sample spacing must be positive"));
        }
        let grid = UniformGrid { x0: t0, dx: dt, periodic: false };
        let wrap = |vals: Vec<T>| -> CoefFn<T> {
            let vals = Arc::new(vals);
            Arc::new(move |t: T| grid.value(&vals, t))
        };
        Ok(RiccatiCoefficients {
            a0: wrap(a0),
            a1: wrap(a1),
            a2: wrap(a2),
            provenance,
        })
    }

    pub fn a0(&self, t: T) -> T {
        (self.a0)(t)
    }

    pub fn a1(&self, t: T) -> T {
        (self.a1)(t)
    }

    pub fn a2(&self, t: T) -> T {
        (self.a2)(t)
    }
}

impl<T: Real> std::fmt::Debug for RiccatiCoefficients<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RiccatiCoefficients")
            .field("provenance", &self.provenance)
            .finish()
    }
}

/// How an integration over the window ended.
#[derive(Debug, Clone, PartialEq)]
pub enum RiccatiOutcome<T> {
    /// The solution stayed below the growth threshold to the end.
    GlobalOnWindow { z_end: T },
    /// The solution crossed the growth threshold; `t_star` is the fitted
    /// divergence time, with an uncertainty from the fit residual.
    BlowUp { t_star: T, uncertainty: T },
}

/// Integration record: outcome plus the accepted-step samples.
#[derive(Debug, Clone)]
pub struct RiccatiSolution<T> {
    pub outcome: RiccatiOutcome<T>,
    pub times: Vec<T>,
    pub z: Vec<T>,
}

/// Integrates z' = a0 z^2 + a1 z + a2 from z(0) = z0 over [0, t_max].
///
/// Crossing |z| = 1e8 counts as blow-up; the divergence time is then the
/// root of a least-squares line through 1/z over the final decade of
/// growth. A step collapse while the solution is already large is treated
/// the same way; a collapse at moderate amplitude is reported as the
/// underlying error.
pub fn integrate_riccati<T: Real>(
    c: &RiccatiCoefficients<T>,
    z0: T,
    t_max: T,
    tol: T,
) -> Result<RiccatiSolution<T>> {
    if !(t_max > T::zero()) {
        return Err(Error::invalid("integration window must have positive length"));
    }
    let opts = OdeOptions::with_tol(tol, "quadratic growth along a characteristic");
    let mut rhs = |t: T, y: &[T]| -> Result<Vec<T>> {
        let z = y[0];
        Ok(vec![c.a0(t) * z * z + c.a1(t) * z + c.a2(t)])
    };
    let stop = lit::<T>(Z_STOP);
    let mut times = vec![T::zero()];
    let mut z = vec![z0];
    let mut observer = |t: T, y: &[T]| {
        times.push(t);
        z.push(y[0]);
        if y[0].abs() >= stop {
            Control::Stop
        } else {
            Control::Continue
        }
    };
    let res = ode::solve_observed(&mut rhs, T::zero(), t_max, &[z0], &opts, &mut observer);
    match res {
        Ok((_t, y, StopReason::ReachedEnd)) => Ok(RiccatiSolution {
            outcome: RiccatiOutcome::GlobalOnWindow { z_end: y[0] },
            times,
            z,
        }),
        Ok((_t, _y, StopReason::ObserverStopped)) => {
            let (t_star, uncertainty) = fit_divergence(&times, &z, None)?;
            Ok(RiccatiSolution {
                outcome: RiccatiOutcome::BlowUp { t_star, uncertainty },
                times,
                z,
            })
        }
        Err(Error::StepCollapse { t, .. })
            if z.last().map(|v| v.abs()).unwrap_or(T::zero())
                >= lit::<T>(1e4) * z0.abs().max(T::one()) =>
        {
            let (t_star, uncertainty) = fit_divergence(&times, &z, Some(lit(t)))?;
            Ok(RiccatiSolution {
                outcome: RiccatiOutcome::BlowUp { t_star, uncertainty },
                times,
                z,
            })
        }
        Err(e) => Err(e),
    }
}

/// Root of a least-squares line through 1/z over the final decade of
/// samples with the terminal sign.
fn fit_divergence<T: Real>(times: &[T], z: &[T], fallback: Option<T>) -> Result<(T, T)> {
    let z_end = *z.last().unwrap();
    let t_end = *times.last().unwrap();
    let sign = if z_end > T::zero() { T::one() } else { -T::one() };
    let mut cut = z_end.abs() * lit(0.1);
    let collect = |cut: T| -> Vec<(T, T)> {
        times
            .iter()
            .zip(z)
            .filter(|(_, &v)| v * sign > T::zero() && v.abs() >= cut)
            .map(|(&t, &v)| (t - t_end, v.recip()))
            .collect()
    };
    let mut pts = collect(cut);
    if pts.len() < 3 {
        cut = z_end.abs() * lit(0.01);
        pts = collect(cut);
    }
    if pts.len() < 3 {
        return match fallback {
            Some(t) => Ok((t, t_end.abs().max(T::one()) * lit(1e-3))),
            None => Err(Error::invalid(
                "too few samples near the growth threshold to fit a divergence time",
            )),
        };
    }
    let n = T::from_usize(pts.len()).unwrap();
    let (mut st, mut sy, mut stt, mut sty) = (T::zero(), T::zero(), T::zero(), T::zero());
    for &(t, y) in &pts {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = n * stt - st * st;
    let m = (n * sty - st * sy) / denom;
    let b = (sy - m * st) / n;
    if !(m.abs() > T::zero()) || !m.is_finite() {
        return match fallback {
            Some(t) => Ok((t, t_end.abs().max(T::one()) * lit(1e-3))),
            None => Err(Error::invalid("reciprocal fit near blow-up is degenerate")),
        };
    }
    let t_star = t_end - b / m;
    let mut max_res = T::zero();
    for &(t, y) in &pts {
        max_res = max_res.max((y - (m * t + b)).abs());
    }
    Ok((t_star, max_res / m.abs()))
}

/// Integrals of the coefficients over [0, window] and the combinations the
/// inequalities use.
#[derive(Debug, Clone)]
pub struct WindowQuantities<T> {
    pub window: T,
    pub int_abs_a0: T,
    pub int_pos_a0: T,
    pub int_abs_a1: T,
    pub int_abs_a2: T,
    /// int |a2| amplified by exp(int |a1|).
    pub k: T,
    /// int |a0| damped by exp(-int |a1|).
    pub damped_a0: T,
    /// int max(a0, 0) amplified by exp(int |a1|).
    pub amplified_pos_a0: T,
    /// int |a0| amplified by exp(int |a1|).
    pub amplified_abs_a0: T,
}

/// Adaptive quadrature of the four coefficient integrals over [0, window].
pub fn window_quantities<T: Real>(
    c: &RiccatiCoefficients<T>,
    window: T,
    tol: T,
) -> Result<WindowQuantities<T>> {
    if !(window > T::zero()) {
        return Err(Error::invalid("quantity window must have positive length"));
    }
    let zero = T::zero();
    let int_abs_a0 = quad::adaptive_simpson(&mut |t| Ok(c.a0(t).abs()), zero, window, tol)?;
    let int_pos_a0 = quad::adaptive_simpson(&mut |t| Ok(c.a0(t).max(zero)), zero, window, tol)?;
    let int_abs_a1 = quad::adaptive_simpson(&mut |t| Ok(c.a1(t).abs()), zero, window, tol)?;
    let int_abs_a2 = quad::adaptive_simpson(&mut |t| Ok(c.a2(t).abs()), zero, window, tol)?;
    let boost = int_abs_a1.exp();
    Ok(WindowQuantities {
        window,
        int_abs_a0,
        int_pos_a0,
        int_abs_a1,
        int_abs_a2,
        k: int_abs_a2 * boost,
        damped_a0: int_abs_a0 / boost,
        amplified_pos_a0: int_pos_a0 * boost,
        amplified_abs_a0: int_abs_a0 * boost,
    })
}

/// The existence cap, when it applies (z0 > k): a solution that stays
/// finite on the whole window forces `damped_a0 < 1 / (z0 - k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceCap<T> {
    pub lhs: T,
    pub cap: T,
}

pub fn existence_cap<T: Real>(q: &WindowQuantities<T>, z0: T) -> Option<ExistenceCap<T>> {
    if z0 > q.k {
        Some(ExistenceCap {
            lhs: q.damped_a0,
            cap: (z0 - q.k).recip(),
        })
    } else {
        None
    }
}

/// A lower bound on the reciprocal of the solution at the end of the
/// window, when one applies.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalFloor<T> {
    /// 1 / |z(window)|.
    pub actual: T,
    pub floor: T,
}

impl<T: Real> ReciprocalFloor<T> {
    pub fn satisfied_with_slack(&self, slack: T) -> bool {
        self.actual >= self.floor - slack
    }
}

/// Floor for a nonnegative start: positive end values satisfy
/// 1/z >= 1/(z0 + k) - amplified_pos_a0; negative end values satisfy
/// 1/|z| >= 1/k - amplified_abs_a0 provided that right side is positive.
pub fn reciprocal_floor<T: Real>(
    q: &WindowQuantities<T>,
    z0: T,
    z_end: T,
) -> Option<ReciprocalFloor<T>> {
    if z0 < T::zero() {
        return None;
    }
    if z_end > T::zero() {
        Some(ReciprocalFloor {
            actual: z_end.recip(),
            floor: (z0 + q.k).recip() - q.amplified_pos_a0,
        })
    } else if z_end < T::zero() {
        if !(q.k > T::zero()) {
            return None;
        }
        let floor = q.k.recip() - q.amplified_abs_a0;
        if floor > T::zero() {
            Some(ReciprocalFloor {
                actual: z_end.abs().recip(),
                floor,
            })
        } else {
            None
        }
    } else {
        None
    }
}

/// Verdict of the window inequality certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaVerdict {
    /// z0 exceeds K and the damped a0 integral respects the cap, which is
    /// consistent with existence on the whole window.
    LemmaInequalityHolds,
    /// z0 exceeds K but the damped a0 integral breaks the cap, certifying
    /// divergence strictly inside the window.
    InequalityFails,
    /// z0 does not exceed K, so the inequality asserts nothing.
    NotApplicable,
}

/// The certificate data: K, the start value, and the damped a0 integral
/// the cap constrains.
#[derive(Debug, Clone)]
pub struct BlowupCertificate<T> {
    pub k: T,
    pub z0: T,
    /// int |a0| damped by exp(-int |a1|) over the window.
    pub weighted_a0_integral: T,
    pub verdict: LemmaVerdict,
}

/// Certificate from already-computed window integrals.
pub fn certificate_from_quantities<T: Real>(
    q: &WindowQuantities<T>,
    z0: T,
) -> BlowupCertificate<T> {
    let verdict = if z0 > q.k {
        if q.damped_a0 * (z0 - q.k) < T::one() {
            LemmaVerdict::LemmaInequalityHolds
        } else {
            LemmaVerdict::InequalityFails
        }
    } else {
        LemmaVerdict::NotApplicable
    };
    BlowupCertificate {
        k: q.k,
        z0,
        weighted_a0_integral: q.damped_a0,
        verdict,
    }
}

/// Window integrals and the cap verdict for [0, t_max], by adaptive
/// quadrature at tolerance 1e-10.
pub fn hormander_quantities<T: Real>(
    c: &RiccatiCoefficients<T>,
    t_max: T,
    z0: T,
) -> Result<BlowupCertificate<T>> {
    let q = window_quantities(c, t_max, lit(1e-10))?;
    Ok(certificate_from_quantities(&q, z0))
}

/// Outcome of integrating first and then checking the certificate.
#[derive(Debug, Clone)]
pub enum LemmaCheck<T> {
    /// Global on the window with z0 > K, and the cap held.
    Verified { certificate: BlowupCertificate<T>, z_end: T },
    /// Global on the window but z0 <= K: nothing is asserted.
    NotApplicable { certificate: BlowupCertificate<T>, z_end: T },
    /// The solution crossed the growth threshold inside the window.
    SolutionDiverged { t_star: T, uncertainty: T },
    /// Global on the window with z0 > K, yet the cap failed. Reachable
    /// only when a0 takes negative values: damping can keep the solution
    /// finite while |a0| accumulates past any cap. The cap is a theorem
    /// for a0 >= 0 on the window, and holds by plain arithmetic whenever
    /// the damped integral times (z0 - K) stays below one.
    Falsified { certificate: BlowupCertificate<T>, z_end: T },
}

/// Integrates the equation over [0, t_max] and checks the certificate on
/// the survivors. A globally existing solution with z0 > K either
/// verifies the cap or lands in `Falsified`; the latter cannot occur for
/// pointwise nonnegative a0.
pub fn check_blowup_lemma<T: Real>(
    c: &RiccatiCoefficients<T>,
    z0: T,
    t_max: T,
) -> Result<LemmaCheck<T>> {
    let sol = integrate_riccati(c, z0, t_max, lit(1e-10))?;
    match sol.outcome {
        RiccatiOutcome::BlowUp { t_star, uncertainty } => {
            Ok(LemmaCheck::SolutionDiverged { t_star, uncertainty })
        }
        RiccatiOutcome::GlobalOnWindow { z_end } => {
            let certificate = hormander_quantities(c, t_max, z0)?;
            Ok(match certificate.verdict {
                LemmaVerdict::NotApplicable => LemmaCheck::NotApplicable { certificate, z_end },
                LemmaVerdict::LemmaInequalityHolds => LemmaCheck::Verified { certificate, z_end },
                LemmaVerdict::InequalityFails => LemmaCheck::Falsified { certificate, z_end },
            })
        }
    }
}

/// Piecewise-linear read-back of samples on a nonuniform time grid,
/// clamped at the ends.
fn sampled_fn<T: Real>(times: Arc<Vec<T>>, vals: Vec<T>) -> CoefFn<T> {
    let vals = Arc::new(vals);
    Arc::new(move |t: T| {
        let ts = &*times;
        if t <= ts[0] {
            return vals[0];
        }
        if t >= *ts.last().unwrap() {
            return *vals.last().unwrap();
        }
        let mut lo = 0usize;
        let mut hi = ts.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ts[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = (t - ts[lo]) / (ts[hi] - ts[lo]);
        vals[lo] + (vals[hi] - vals[lo]) * theta
    })
}

/// Reads the coefficient triple of the gradient equation off a solved
/// field along one traced characteristic.
///
/// At each stored frame time the state comes from the curve, the other
/// families' gradients from the frame interpolated at the curve's
/// position, and the coefficient tensors from differencing at that state;
/// the self-coupling source coefficient is recentred by its value on the
/// coordinate axis of the curve's family. Samples are read back by
/// piecewise-linear interpolation in time.
pub fn extract_characteristic_riccati<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    solution: &SolutionField<T>,
    curve: &CharacteristicCurve<T>,
) -> Result<RiccatiCoefficients<T>> {
    let n = solution.n;
    let i = curve.family;
    if i >= n {
        return Err(Error::VariableOutOfRange {
            name: format!("family {}", i + 1),
            n,
        });
    }
    if curve.t.len() != solution.frames.len() || curve.t.len() < 2 {
        return Err(Error::invalid(
            "curve samples do not line up with the stored frames",
        ));
    }
    let grid = solution.grid();
    let zero_grad = vec![T::zero(); n];
    let mut a0s = Vec::with_capacity(curve.t.len());
    let mut a1s = Vec::with_capacity(curve.t.len());
    let mut a2s = Vec::with_capacity(curve.t.len());
    let mut comp = vec![T::zero(); solution.points];
    for (j, frame) in solution.frames.iter().enumerate() {
        let u = &curve.state[j];
        let x = curve.x[j];
        let mut w = vec![T::zero(); n];
        for c in 0..n {
            for (m, slot) in comp.iter_mut().enumerate() {
                *slot = frame.w[m * n + c];
            }
            w[c] = grid.value(&comp, x);
        }
        let tensors = decomp::decomposition_coefficients(sys, u, decomp::default_step(u))?;
        let b = decomp::project(sys, u, &zero_grad)?.b;
        let mut axis = vec![T::zero(); n];
        axis[i] = u[i];
        let axis_tensors =
            decomp::decomposition_coefficients(sys, &axis, decomp::default_step(&axis))?;

        let a0 = tensors.gamma[(i, i, i)];
        let mut a1 = tensors.b_tilde[(i, i)] - axis_tensors.b_tilde[(i, i)];
        for j2 in 0..n {
            if j2 != i {
                a1 += (tensors.gamma[(i, i, j2)] + tensors.gamma[(i, j2, i)]) * w[j2];
            }
            a1 += tensors.sigma[(i, i, j2)] * b[j2];
        }
        let mut a2 = T::zero();
        for j2 in 0..n {
            for k in 0..n {
                if j2 != k && j2 != i && k != i {
                    a2 += tensors.gamma[(i, j2, k)] * w[j2] * w[k];
                }
                if j2 != i {
                    a2 += tensors.sigma[(i, j2, k)] * w[j2] * b[k];
                }
            }
            if j2 != i {
                a2 += tensors.b_tilde[(i, j2)] * w[j2];
            }
        }
        a0s.push(a0);
        a1s.push(a1);
        a2s.push(a2);
    }
    let times = Arc::new(curve.t.clone());
    Ok(RiccatiCoefficients {
        a0: sampled_fn(times.clone(), a0s),
        a1: sampled_fn(times.clone(), a1s),
        a2: sampled_fn(times, a2s),
        provenance: Provenance::Extracted {
            family: i,
            launch: curve.launch,
        },
    })
}

/// Leading term of the quadratic coefficient at small amplitude: minus
/// the family's first surviving speed derivative over alpha factorial,
/// times the i-th coordinate to the power alpha. `None` for an all-flat
/// family.
pub fn a0_leading_term<T: Real>(degeneracy: &FamilyDegeneracy<T>, u_i: T) -> Option<T> {
    let alpha = degeneracy.alpha?;
    let leading = degeneracy.leading?;
    let mut fact = T::one();
    for k in 1..=alpha {
        fact *= T::from_usize(k).unwrap();
    }
    Some(-leading / fact * u_i.powi(alpha as i32))
}
