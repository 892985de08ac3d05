//! Finite-difference solution of u_t + A(u) u_x = B(u) from small initial
//! data up to gradient blow-up: a predictor-corrector scheme with centered
//! fluxes and fourth-order dissipation, characteristic tracing through the
//! stored field, functional monitors, blow-up time estimation from the
//! reciprocal gradient trace, and amplitude sweeps.

use crate::error::{Error, Result};
use crate::lifespan::{InitialDataFamily, LifespanPrediction};
use crate::linalg;
use crate::numerics::interp::UniformGrid;
use crate::scalar::{lit, Real};
use crate::spectral;
use crate::system::HyperbolicSystem;

/// Hard cap on the one-cell gradient before the stop threshold formula.
const GRAD_CAP: f64 = 50.0;

/// Default CFL number.
const DEFAULT_CFL: f64 = 0.4;

/// Default fourth-order dissipation coefficient.
const DEFAULT_DISSIPATION: f64 = 0.01;

/// Default cap on stored frames per run.
const DEFAULT_MAX_FRAMES: usize = 400;

/// Grid and stepping configuration for one run.
#[derive(Debug, Clone)]
pub struct GridConfig<T> {
    pub cells: usize,
    /// Spatial window; `None` derives one from the data support padded by
    /// the maximal signal speed times the horizon.
    pub window: Option<(T, T)>,
    pub periodic: bool,
    pub cfl: T,
    pub dissipation: T,
    pub t_end: T,
    pub max_frames: usize,
}

impl<T: Real> GridConfig<T> {
    pub fn new(cells: usize, t_end: T) -> Self {
        GridConfig {
            cells,
            window: None,
            periodic: false,
            cfl: lit(DEFAULT_CFL),
            dissipation: lit(DEFAULT_DISSIPATION),
            t_end,
            max_frames: DEFAULT_MAX_FRAMES,
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCause {
    ReachedEnd,
    /// The one-cell gradient threshold was crossed (numerical blow-up).
    GradientThreshold,
    /// The step size collapsed below the floor (secondary blow-up signal).
    StepFloor,
}

/// One stored spatial snapshot. Cell-major layout: component c of cell m
/// sits at index m*n + c.
#[derive(Debug, Clone)]
pub struct Frame<T> {
    pub t: T,
    pub u: Vec<T>,
    /// Projected amplitudes l_i(u) u.
    pub v: Vec<T>,
    /// Projected gradients l_i(u) u_x.
    pub w: Vec<T>,
    /// Characteristic speeds per cell.
    pub lambda: Vec<T>,
}

/// Per-step scalar trace.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<T> {
    pub t: T,
    /// Step taken from this time (zero on the final record).
    pub dt: T,
    pub max_w: T,
    pub max_u: T,
    pub max_lambda: T,
}

/// The evolved field: subsampled frames plus the dense scalar trace.
#[derive(Debug, Clone)]
pub struct SolutionField<T> {
    pub n: usize,
    pub x0: T,
    pub dx: T,
    /// Grid points (cells for a periodic window, cells + 1 otherwise).
    pub points: usize,
    pub periodic: bool,
    pub frames: Vec<Frame<T>>,
    pub steps: Vec<StepRecord<T>>,
    pub stop: StopCause,
    pub t_final: T,
}

impl<T: Real> SolutionField<T> {
    pub fn x(&self, m: usize) -> T {
        self.x0 + self.dx * T::from_usize(m).unwrap()
    }

    pub fn grid(&self) -> UniformGrid<T> {
        UniformGrid { x0: self.x0, dx: self.dx, periodic: self.periodic }
    }

    /// Index of the last frame at or before `t` (0 if `t` precedes all).
    pub fn frame_at_or_before(&self, t: T) -> usize {
        let mut idx = 0;
        for (k, f) in self.frames.iter().enumerate() {
            if f.t <= t {
                idx = k;
            } else {
                break;
            }
        }
        idx
    }
}

/// Evolves the datum family.eval(eps, x) on a uniform grid until the
/// horizon, the gradient stop threshold, or step collapse.
///
/// Scheme: two-stage predictor-corrector in time; centered first
/// derivative plus fourth-order dissipation scaled by the current maximal
/// speed over the mesh width. The step obeys the CFL bound and a gradient
/// cap, and the state must stay inside the coefficient validity ball.
pub fn solve_cauchy<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    family: &InitialDataFamily<T>,
    eps: T,
    config: &GridConfig<T>,
) -> Result<SolutionField<T>> {
    let n = sys.dim();
    if family.n() != n {
        return Err(Error::invalid(format!(
            "initial data has {} components but the system has {n}",
            family.n()
        )));
    }
    if config.cells < 16 {
        return Err(Error::invalid("grid needs at least 16 cells"));
    }
    if !(config.t_end > T::zero()) {
        return Err(Error::invalid("horizon must be positive"));
    }
    if !(config.cfl > T::zero()) || config.cfl > T::one() {
        return Err(Error::invalid("CFL number must lie in (0, 1]"));
    }
    let (lo, hi) = match config.window {
        Some(w) if w.0 < w.1 => w,
        Some(_) => return Err(Error::invalid("window interval is empty")),
        None => {
            if config.periodic {
                family.support()
            } else {
                padded_window(sys, family, eps, config.t_end)?
            }
        }
    };
    let points = if config.periodic { config.cells } else { config.cells + 1 };
    let dx = (hi - lo) / T::from_usize(config.cells).unwrap();
    let radius = sys.validity_radius();

    // Initial state.
    let mut u = vec![T::zero(); points * n];
    for m in 0..points {
        let x = lo + dx * T::from_usize(m).unwrap();
        let val = family.eval(eps, x);
        if val.len() != n {
            return Err(Error::invalid("initial datum has the wrong arity"));
        }
        u[m * n..(m + 1) * n].copy_from_slice(&val);
    }
    check_validity(&u, n, radius)?;

    let dt_min = config.t_end * lit(1e-12);
    let frame_spacing = config.t_end / T::from_usize(config.max_frames.max(2)).unwrap();
    let mut next_mark = frame_spacing;

    let mut field = SolutionField {
        n,
        x0: lo,
        dx,
        points,
        periodic: config.periodic,
        frames: Vec::new(),
        steps: Vec::new(),
        stop: StopCause::ReachedEnd,
        t_final: T::zero(),
    };

    let mut t = T::zero();
    let mut scratch = Scratch::new(sys, n, points, config.periodic, dx);
    let first = scratch.survey(sys, &u)?;
    field.frames.push(scratch.project_frame(sys, t, &u)?);
    let w_initial = first.max_w;
    let mut running_u_sup = first.max_u;
    let mut stop = StopCause::ReachedEnd;
    let mut first_step = true;
    let mut survey = first;

    loop {
        running_u_sup = running_u_sup.max(survey.max_u);
        // Stop when a single cell carries half the running amplitude (or
        // the hard cap) and the gradient has genuinely grown.
        let threshold = (running_u_sup * lit(0.5)).min(lit(GRAD_CAP)) / dx;
        let grew = w_initial > T::zero() && survey.max_w >= lit::<T>(10.0) * w_initial;
        if threshold > T::zero() && survey.max_w >= threshold && grew {
            stop = StopCause::GradientThreshold;
            field.steps.push(StepRecord {
                t,
                dt: T::zero(),
                max_w: survey.max_w,
                max_u: survey.max_u,
                max_lambda: survey.max_lambda,
            });
            break;
        }
        if t >= config.t_end {
            field.steps.push(StepRecord {
                t,
                dt: T::zero(),
                max_w: survey.max_w,
                max_u: survey.max_u,
                max_lambda: survey.max_lambda,
            });
            break;
        }

        let mut dt = config.t_end / lit(64.0);
        if survey.max_lambda > T::zero() {
            dt = dt.min(config.cfl * dx / survey.max_lambda);
        }
        if survey.max_w > T::zero() {
            dt = dt.min(lit::<T>(0.25) / survey.max_w);
        }
        dt = dt.min(config.t_end - t);
        if dt < dt_min {
            if first_step {
                return Err(Error::GridTooCoarse {
                    dt: dt.as_f64(),
                    floor: dt_min.as_f64(),
                });
            }
            stop = StopCause::StepFloor;
            field.steps.push(StepRecord {
                t,
                dt: T::zero(),
                max_w: survey.max_w,
                max_u: survey.max_u,
                max_lambda: survey.max_lambda,
            });
            break;
        }
        field.steps.push(StepRecord {
            t,
            dt,
            max_w: survey.max_w,
            max_u: survey.max_u,
            max_lambda: survey.max_lambda,
        });

        let nu = config.dissipation * survey.max_lambda / dx;
        let l0 = scratch.rhs(sys, &u, nu)?;
        let mut predictor = u.clone();
        for (p, &d) in predictor.iter_mut().zip(&l0) {
            *p += dt * d;
        }
        let l1 = scratch.rhs(sys, &predictor, nu)?;
        let half = dt * lit(0.5);
        for ((uu, &d0), &d1) in u.iter_mut().zip(&l0).zip(&l1) {
            *uu += half * (d0 + d1);
        }
        t += dt;
        first_step = false;
        check_validity(&u, n, radius)?;
        survey = scratch.survey(sys, &u)?;

        if t + dt_min >= next_mark {
            field.frames.push(scratch.project_frame(sys, t, &u)?);
            while next_mark <= t + dt_min {
                next_mark += frame_spacing;
            }
        }
    }

    if field
        .frames
        .last()
        .map(|f| f.t < t - dt_min)
        .unwrap_or(true)
    {
        field.frames.push(scratch.project_frame(sys, t, &u)?);
    }
    field.stop = stop;
    field.t_final = t;
    Ok(field)
}

fn check_validity<T: Real>(u: &[T], n: usize, radius: T) -> Result<()> {
    for cell in u.chunks_exact(n) {
        let norm = linalg::norm2(cell);
        if !norm.is_finite() || norm > radius {
            return Err(Error::LeftValidityBall {
                norm: norm.as_f64(),
                radius: radius.as_f64(),
                where_: "time stepping".into(),
            });
        }
    }
    Ok(())
}

/// Window for compactly supported data: the support padded on both sides
/// by the maximal initial signal speed times the horizon (with slack).
fn padded_window<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    family: &InitialDataFamily<T>,
    eps: T,
    t_end: T,
) -> Result<(T, T)> {
    let (lo, hi) = family.support();
    let samples = 512usize;
    let mut max_speed = T::zero();
    for k in 0..=samples {
        let x = lo + (hi - lo) * T::from_usize(k).unwrap() / T::from_usize(samples).unwrap();
        let u = family.eval(eps, x);
        let data = spectral::decompose_at(sys, &u, None)?;
        for &l in &data.lambdas {
            max_speed = max_speed.max(l.abs());
        }
    }
    let pad = max_speed * t_end * lit(1.1) + (hi - lo) * lit(0.01);
    Ok((lo - pad, hi + pad))
}

/// Per-step survey of the current state.
#[derive(Debug, Clone, Copy)]
struct Survey<T> {
    max_lambda: T,
    max_w: T,
    max_u: T,
}

/// Workspace for the stepping loop: gradient buffers and the periodic /
/// outflow index arithmetic.
struct Scratch<T> {
    n: usize,
    points: usize,
    periodic: bool,
    dx: T,
    ux: Vec<T>,
    scalar: bool,
}

impl<T: Real> Scratch<T> {
    fn new<S: HyperbolicSystem<T>>(
        _sys: &S,
        n: usize,
        points: usize,
        periodic: bool,
        dx: T,
    ) -> Self {
        Scratch {
            n,
            points,
            periodic,
            dx,
            ux: vec![T::zero(); points * n],
            scalar: n == 1,
        }
    }

    fn neighbor(&self, m: usize, off: isize) -> Option<usize> {
        let p = self.points as isize;
        let idx = m as isize + off;
        if self.periodic {
            Some(idx.rem_euclid(p) as usize)
        } else if (0..p).contains(&idx) {
            Some(idx as usize)
        } else {
            // Outflow: the state beyond the window is identically zero.
            None
        }
    }

    fn fill_gradient(&mut self, u: &[T]) {
        let n = self.n;
        let two_dx = self.dx + self.dx;
        for m in 0..self.points {
            for c in 0..n {
                let up = self
                    .neighbor(m, 1)
                    .map(|j| u[j * n + c])
                    .unwrap_or(T::zero());
                let dn = self
                    .neighbor(m, -1)
                    .map(|j| u[j * n + c])
                    .unwrap_or(T::zero());
                self.ux[m * n + c] = (up - dn) / two_dx;
            }
        }
    }

    /// Maximal speed, projected gradient, and amplitude over the mesh.
    fn survey<S: HyperbolicSystem<T>>(&mut self, sys: &S, u: &[T]) -> Result<Survey<T>> {
        self.fill_gradient(u);
        let n = self.n;
        let mut max_lambda = T::zero();
        let mut max_w = T::zero();
        let mut max_u = T::zero();
        for m in 0..self.points {
            let cell = &u[m * n..(m + 1) * n];
            let grad = &self.ux[m * n..(m + 1) * n];
            max_u = max_u.max(linalg::norm2(cell));
            if self.scalar {
                let a = sys.matrix(cell)?;
                max_lambda = max_lambda.max(a[(0, 0)].abs());
                max_w = max_w.max(grad[0].abs());
            } else {
                let data = spectral::decompose_at(sys, cell, None)?;
                for i in 0..n {
                    max_lambda = max_lambda.max(data.lambdas[i].abs());
                    max_w = max_w.max(linalg::dot(data.left.row(i), grad).abs());
                }
            }
        }
        Ok(Survey { max_lambda, max_w, max_u })
    }

    /// Full projection of a snapshot; left-frame signs chained along x.
    fn project_frame<S: HyperbolicSystem<T>>(
        &mut self,
        sys: &S,
        t: T,
        u: &[T],
    ) -> Result<Frame<T>> {
        self.fill_gradient(u);
        let n = self.n;
        let mut v = vec![T::zero(); self.points * n];
        let mut w = vec![T::zero(); self.points * n];
        let mut lambda = vec![T::zero(); self.points * n];
        let mut anchor: Option<spectral::SpectralData<T>> = None;
        for m in 0..self.points {
            let cell = &u[m * n..(m + 1) * n];
            let grad = &self.ux[m * n..(m + 1) * n];
            let data = spectral::decompose_at(sys, cell, anchor.as_ref())?;
            for i in 0..n {
                v[m * n + i] = linalg::dot(data.left.row(i), cell);
                w[m * n + i] = linalg::dot(data.left.row(i), grad);
                lambda[m * n + i] = data.lambdas[i];
            }
            anchor = Some(data);
        }
        Ok(Frame { t, u: u.to_vec(), v, w, lambda })
    }

    /// Right-hand side -A(u) u_x + B(u) - nu * d4(u).
    fn rhs<S: HyperbolicSystem<T>>(&mut self, sys: &S, u: &[T], nu: T) -> Result<Vec<T>> {
        self.fill_gradient(u);
        let n = self.n;
        let mut out = vec![T::zero(); self.points * n];
        for m in 0..self.points {
            let cell = &u[m * n..(m + 1) * n];
            let grad = &self.ux[m * n..(m + 1) * n];
            let a = sys.matrix(cell)?;
            let b = sys.source(cell)?;
            let flux = a.matvec(grad);
            for c in 0..n {
                // Undivided fourth difference for the dissipation.
                let g = |off: isize| -> T {
                    self.neighbor(m, off)
                        .map(|j| u[j * n + c])
                        .unwrap_or(T::zero())
                };
                let d4 = g(-2) - lit::<T>(4.0) * g(-1) + lit::<T>(6.0) * g(0)
                    - lit::<T>(4.0) * g(1)
                    + g(2);
                out[m * n + c] = -flux[c] + b[c] - nu * d4;
            }
        }
        Ok(out)
    }
}

/// Blow-up time estimated from the scalar gradient trace.
#[derive(Debug, Clone, PartialEq)]
pub enum BlowupEstimate<T> {
    /// The gradient never grew tenfold.
    NoBlowupObserved { growth: T },
    Estimated { t_num: T, uncertainty: T },
}

/// Least-squares line through 1/max|w| against t over the final decade of
/// growth; the blow-up time is the root of the fit.
pub fn detect_blowup<T: Real>(steps: &[StepRecord<T>]) -> Result<BlowupEstimate<T>> {
    if steps.len() < 2 {
        return Err(Error::invalid("gradient trace needs at least two samples"));
    }
    let w0 = steps[0].max_w;
    let w_end = steps.last().unwrap().max_w;
    if !(w0 > T::zero()) || w_end < lit::<T>(10.0) * w0 {
        let growth = if w0 > T::zero() { w_end / w0 } else { T::zero() };
        return Ok(BlowupEstimate::NoBlowupObserved { growth });
    }
    let t_end = steps.last().unwrap().t;
    let cut = w_end * lit(0.1);
    let pts: Vec<(T, T)> = steps
        .iter()
        .filter(|s| s.max_w >= cut)
        .map(|s| (s.t - t_end, s.max_w.recip()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::invalid(
            "too few samples in the final decade of gradient growth",
        ));
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
    if !(denom.abs() > T::zero()) {
        return Err(Error::invalid("degenerate time samples in the gradient trace"));
    }
    let m = (n * sty - st * sy) / denom;
    let b = (sy - m * st) / n;
    if !(m < T::zero()) {
        return Ok(BlowupEstimate::NoBlowupObserved { growth: w_end / w0 });
    }
    let t_num = t_end - b / m;
    let mut max_res = T::zero();
    for &(t, y) in &pts {
        max_res = max_res.max((y - (m * t + b)).abs());
    }
    Ok(BlowupEstimate::Estimated {
        t_num,
        uncertainty: max_res / m.abs(),
    })
}

/// One characteristic curve through the stored field with its compression
/// factor from side curves.
#[derive(Debug, Clone)]
pub struct CharacteristicCurve<T> {
    pub family: usize,
    pub launch: T,
    /// Frame times the samples sit on.
    pub t: Vec<T>,
    pub x: Vec<T>,
    /// State u at (t, x) per sample.
    pub state: Vec<Vec<T>>,
    /// Foot-point Jacobian estimated from curves launched 2 dx apart.
    pub k: Vec<T>,
}

/// Integrates dx/dt = lambda_family(u(t, x)) through the stored frames
/// (cubic in x, linear in t) for every launch point, estimating the
/// foot-point Jacobian from side curves at y plus/minus 2 dx.
pub fn trace_characteristics<T: Real>(
    solution: &SolutionField<T>,
    families: &[usize],
    launches: &[T],
) -> Result<Vec<CharacteristicCurve<T>>> {
    if solution.frames.len() < 4 {
        return Err(Error::invalid("tracing needs at least 4 stored frames"));
    }
    let n = solution.n;
    for &i in families {
        if i >= n {
            return Err(Error::VariableOutOfRange {
                name: format!("family {}", i + 1),
                n,
            });
        }
    }
    let grid = solution.grid();
    let delta = solution.dx * lit(2.0);
    let mut curves = Vec::new();
    for &fam in families {
        // Per-frame speed field of this family.
        let lam: Vec<Vec<T>> = solution
            .frames
            .iter()
            .map(|f| (0..solution.points).map(|m| f.lambda[m * n + fam]).collect())
            .collect();
        for &y in launches {
            let main = integrate_curve(solution, &grid, &lam, y)?;
            let plus = integrate_curve(solution, &grid, &lam, y + delta)?;
            let minus = integrate_curve(solution, &grid, &lam, y - delta)?;
            let mut state = Vec::with_capacity(main.len());
            let mut k = Vec::with_capacity(main.len());
            let mut t = Vec::with_capacity(main.len());
            for (j, frame) in solution.frames.iter().enumerate() {
                t.push(frame.t);
                let mut u_here = Vec::with_capacity(n);
                for c in 0..n {
                    let comp: Vec<T> =
                        (0..solution.points).map(|m| frame.u[m * n + c]).collect();
                    u_here.push(grid.value(&comp, main[j]));
                }
                state.push(u_here);
                k.push((plus[j] - minus[j]) / (delta + delta));
            }
            curves.push(CharacteristicCurve {
                family: fam,
                launch: y,
                t,
                x: main,
                state,
                k,
            });
        }
    }
    Ok(curves)
}

/// Position samples of one curve at every frame time.
fn integrate_curve<T: Real>(
    solution: &SolutionField<T>,
    grid: &UniformGrid<T>,
    lam: &[Vec<T>],
    y: T,
) -> Result<Vec<T>> {
    let frames = &solution.frames;
    let mut xs = Vec::with_capacity(frames.len());
    let mut x = y;
    xs.push(x);
    let span = solution.dx * T::from_usize(solution.points.saturating_sub(1)).unwrap();
    let x_lo = solution.x0;
    let x_hi = solution.x0 + span;
    for j in 0..frames.len() - 1 {
        let t0 = frames[j].t;
        let t1 = frames[j + 1].t;
        let gap = t1 - t0;
        if !(gap > T::zero()) {
            xs.push(x);
            continue;
        }
        // Substeps sized so one step moves at most about one mesh width.
        let speed_scale = lam[j]
            .iter()
            .fold(T::zero(), |acc, &l| acc.max(l.abs()))
            .max(lit(1e-30));
        let steps = ((gap * speed_scale / solution.dx).as_f64().ceil() as usize).clamp(1, 64);
        let h = gap / T::from_usize(steps).unwrap();
        let speed = |theta: T, x: T| -> T {
            let a = grid.value(&lam[j], x);
            let b = grid.value(&lam[j + 1], x);
            a + (b - a) * theta
        };
        for s in 0..steps {
            let th0 = T::from_usize(s).unwrap() / T::from_usize(steps).unwrap();
            let th1 = T::from_usize(s + 1).unwrap() / T::from_usize(steps).unwrap();
            let k1 = speed(th0, x);
            let k2 = speed(th1, x + h * k1);
            x += h * (k1 + k2) * lit(0.5);
        }
        if !solution.periodic && (x < x_lo || x > x_hi) {
            return Err(Error::invalid(format!(
                "characteristic from {} left the window at t = {}",
                y.as_f64(),
                t1.as_f64()
            )));
        }
        xs.push(x);
    }
    Ok(xs)
}

/// Running norms and accumulated cross-products over the stored frames.
#[derive(Debug, Clone)]
pub struct FunctionalTrace<T> {
    pub t: Vec<T>,
    /// Running sup of max_x |u|.
    pub u_sup: Vec<T>,
    pub v_sup: Vec<T>,
    pub w_sup: Vec<T>,
    /// Running sup of the x-integral of |v|.
    pub v_l1: Vec<T>,
    pub w_l1: Vec<T>,
    /// Accumulated double integrals of the off-diagonal products.
    pub q_v: Vec<T>,
    pub q_w: Vec<T>,
    pub q_vw: Vec<T>,
    /// Minimum over tracked curves of the compression factor (infinity
    /// when no curves are supplied).
    pub min_k: Vec<T>,
}

/// Computes the functional trace over stored frames; integrals by the
/// trapezoid rule (periodic sums wrap), cross-products accumulated in
/// time between consecutive frames.
pub fn monitor_functionals<T: Real>(
    solution: &SolutionField<T>,
    curves: &[CharacteristicCurve<T>],
) -> FunctionalTrace<T> {
    let n = solution.n;
    let len = solution.frames.len();
    let mut out = FunctionalTrace {
        t: Vec::with_capacity(len),
        u_sup: Vec::with_capacity(len),
        v_sup: Vec::with_capacity(len),
        w_sup: Vec::with_capacity(len),
        v_l1: Vec::with_capacity(len),
        w_l1: Vec::with_capacity(len),
        q_v: Vec::with_capacity(len),
        q_w: Vec::with_capacity(len),
        q_vw: Vec::with_capacity(len),
        min_k: Vec::with_capacity(len),
    };
    let mut run = [T::zero(); 5];
    let mut q = [T::zero(); 3];
    let mut prev: Option<(T, [T; 3])> = None;
    for (j, f) in solution.frames.iter().enumerate() {
        let mut sup_u = T::zero();
        let mut sup_v = T::zero();
        let mut sup_w = T::zero();
        let mut int_v = T::zero();
        let mut int_w = T::zero();
        let mut cross = [T::zero(); 3];
        let points = solution.points;
        let mut abs_v_sum = vec![T::zero(); points];
        let mut abs_w_sum = vec![T::zero(); points];
        for m in 0..points {
            let uc = &f.u[m * n..(m + 1) * n];
            let vc = &f.v[m * n..(m + 1) * n];
            let wc = &f.w[m * n..(m + 1) * n];
            sup_u = sup_u.max(linalg::norm2(uc));
            sup_v = sup_v.max(linalg::norm2(vc));
            sup_w = sup_w.max(linalg::norm2(wc));
            abs_v_sum[m] = linalg::norm2(vc);
            abs_w_sum[m] = linalg::norm2(wc);
            let mut cv = T::zero();
            let mut cw = T::zero();
            let mut cvw = T::zero();
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    cv += vc[a].abs() * vc[b].abs();
                    cw += wc[a].abs() * wc[b].abs();
                    cvw += vc[a].abs() * wc[b].abs();
                }
            }
            let weight = edge_weight(solution, m);
            cross[0] += cv * weight;
            cross[1] += cw * weight;
            cross[2] += cvw * weight;
        }
        for m in 0..points {
            let weight = edge_weight(solution, m);
            int_v += abs_v_sum[m] * weight;
            int_w += abs_w_sum[m] * weight;
        }
        int_v *= solution.dx;
        int_w *= solution.dx;
        for c in cross.iter_mut() {
            *c *= solution.dx;
        }
        if let Some((t_prev, c_prev)) = prev {
            let gap = f.t - t_prev;
            for (qi, (ci, pi)) in q.iter_mut().zip(cross.iter().zip(c_prev.iter())) {
                *qi += (*ci + *pi) * gap * lit(0.5);
            }
        }
        prev = Some((f.t, cross));
        run[0] = run[0].max(sup_u);
        run[1] = run[1].max(sup_v);
        run[2] = run[2].max(sup_w);
        run[3] = run[3].max(int_v);
        run[4] = run[4].max(int_w);
        let mut mk = T::infinity();
        for c in curves {
            if let Some(&k) = c.k.get(j) {
                mk = mk.min(k);
            }
        }
        out.t.push(f.t);
        out.u_sup.push(run[0]);
        out.v_sup.push(run[1]);
        out.w_sup.push(run[2]);
        out.v_l1.push(run[3]);
        out.w_l1.push(run[4]);
        out.q_v.push(q[0]);
        out.q_w.push(q[1]);
        out.q_vw.push(q[2]);
        out.min_k.push(mk);
    }
    out
}

fn edge_weight<T: Real>(solution: &SolutionField<T>, m: usize) -> T {
    if solution.periodic {
        T::one()
    } else if m == 0 || m + 1 == solution.points {
        lit(0.5)
    } else {
        T::one()
    }
}

/// One row of an amplitude sweep.
#[derive(Debug, Clone)]
pub struct SweepRow<T> {
    pub epsilon: T,
    pub outcome: std::result::Result<SweepOutcome<T>, String>,
}

/// Successful sweep entry.
#[derive(Debug, Clone)]
pub struct SweepOutcome<T> {
    pub t_num: T,
    pub uncertainty: T,
    /// epsilon^(alpha+1) * t_num.
    pub scaled: T,
    pub t_pred: Option<T>,
    /// t_num / t_pred.
    pub ratio: Option<T>,
    /// Running integral norm of |w| at 0.9 t_num, divided by epsilon.
    pub w1_over_eps: T,
    /// Running sup of |u| at 0.9 t_num, divided by epsilon.
    pub uinf_over_eps: T,
    pub stop: StopCause,
    pub t_final: T,
}

/// Sweep report: per-amplitude rows plus the linear extrapolation of the
/// scaled lifespan from the last two rows.
#[derive(Debug, Clone)]
pub struct SweepReport<T> {
    pub alpha: Option<usize>,
    pub rows: Vec<SweepRow<T>>,
    pub extrapolated: Option<T>,
}

/// Runs solve + blow-up detection per amplitude (descending list), with
/// per-row horizon `horizon * t_pred(eps)` when a finite prediction
/// exists. Rows run on up to `threads` worker threads; failures are
/// recorded per row and do not stop the sweep.
pub fn epsilon_sweep<T: Real, S: HyperbolicSystem<T> + Sync>(
    sys: &S,
    family: &InitialDataFamily<T>,
    epsilons: &[T],
    base: &GridConfig<T>,
    pred: &LifespanPrediction<T>,
    horizon: T,
    threads: usize,
) -> Result<SweepReport<T>>
where
    T: Send + Sync,
{
    if epsilons.is_empty() {
        return Err(Error::invalid("amplitude list is empty"));
    }
    for pair in epsilons.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::invalid("amplitude list must be strictly descending"));
        }
    }
    if epsilons.iter().any(|&e| !(e > T::zero())) {
        return Err(Error::invalid("amplitudes must be positive"));
    }
    if !(horizon > T::zero()) {
        return Err(Error::invalid("horizon multiplier must be positive"));
    }
    let exponent = pred.scaling_exponent();
    let run_one = |eps: T| -> std::result::Result<SweepOutcome<T>, String> {
        let mut config = base.clone();
        if let Some(tp) = pred.t_pred(eps) {
            config.t_end = tp * horizon;
        }
        let field = solve_cauchy(sys, family, eps, &config).map_err(|e| e.to_string())?;
        let est = detect_blowup(&field.steps).map_err(|e| e.to_string())?;
        let (t_num, uncertainty) = match est {
            BlowupEstimate::Estimated { t_num, uncertainty } => (t_num, uncertainty),
            BlowupEstimate::NoBlowupObserved { growth } => {
                return Err(format!(
                    "no blow-up observed before t = {} (gradient growth {}x)",
                    field.t_final.as_f64(),
                    growth.as_f64()
                ))
            }
        };
        let trace = monitor_functionals(&field, &[]);
        let idx = field.frame_at_or_before(t_num * lit(0.9));
        let t_pred = pred.t_pred(eps);
        let scaled = match exponent {
            Some(e) => eps.powi(e as i32) * t_num,
            None => t_num,
        };
        Ok(SweepOutcome {
            t_num,
            uncertainty,
            scaled,
            t_pred,
            ratio: t_pred.map(|tp| t_num / tp),
            w1_over_eps: trace.w_l1[idx] / eps,
            uinf_over_eps: trace.u_sup[idx] / eps,
            stop: field.stop,
            t_final: field.t_final,
        })
    };

    let count = epsilons.len();
    let workers = threads.max(1).min(count);
    let mut outcomes: Vec<Option<std::result::Result<SweepOutcome<T>, String>>> =
        (0..count).map(|_| None).collect();
    if workers <= 1 {
        for (slot, &eps) in outcomes.iter_mut().zip(epsilons) {
            *slot = Some(run_one(eps));
        }
    } else {
        let run_ref = &run_one;
        std::thread::scope(|scope| {
            let mut slices: Vec<&mut [Option<std::result::Result<SweepOutcome<T>, String>>]> =
                Vec::new();
            let mut rest = outcomes.as_mut_slice();
            let chunk = count.div_ceil(workers);
            while !rest.is_empty() {
                let take = chunk.min(rest.len());
                let (head, tail) = rest.split_at_mut(take);
                slices.push(head);
                rest = tail;
            }
            for (g, slice) in slices.into_iter().enumerate() {
                let eps_chunk = &epsilons[g * chunk..(g * chunk + slice.len())];
                scope.spawn(move || {
                    for (slot, &eps) in slice.iter_mut().zip(eps_chunk) {
                        *slot = Some(run_ref(eps));
                    }
                });
            }
        });
    }
    let rows: Vec<SweepRow<T>> = epsilons
        .iter()
        .zip(outcomes)
        .map(|(&epsilon, o)| SweepRow {
            epsilon,
            outcome: o.expect("every sweep slot is filled"),
        })
        .collect();

    let good: Vec<&SweepOutcome<T>> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let extrapolated = if good.len() >= 2 {
        let a = good[good.len() - 2].scaled;
        let b = good[good.len() - 1].scaled;
        Some(b + b - a)
    } else {
        None
    };
    Ok(SweepReport {
        alpha: pred.alpha,
        rows,
        extrapolated,
    })
}

/// Experiment description: document references plus run settings. The
/// caller resolves the `system` and `init` references.
#[derive(Debug, Clone)]
pub struct ExperimentConfig<T> {
    pub system: String,
    pub init: String,
    pub epsilon: Vec<T>,
    pub cells: usize,
    pub window: Option<(T, T)>,
    pub periodic: bool,
    pub cfl: T,
    pub horizon: T,
    pub t_end: Option<T>,
    pub dissipation: T,
    pub launch_points: Vec<T>,
    pub threads: usize,
}

impl<T: Real> ExperimentConfig<T> {
    /// Grid configuration for one run; `t_end` here is a fallback horizon
    /// used when no finite prediction fixes one.
    pub fn grid(&self) -> GridConfig<T> {
        let mut g = GridConfig::new(self.cells, self.t_end.unwrap_or_else(|| lit(1.0)));
        g.window = self.window;
        g.periodic = self.periodic;
        g.cfl = self.cfl;
        g.dissipation = self.dissipation;
        g
    }
}

/// Parses an experiment document. Required keys: `system`, `init`,
/// `cells`. Optional: `epsilon` (list), `window`, `periodic`, `cfl`,
/// `horizon`, `t_end`, `dissipation`, `launch_points`, `threads`.
pub fn parse_experiment_config<T: Real>(text: &str) -> Result<ExperimentConfig<T>> {
    let doc: toml::Value = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Document(e.to_string()))?;
    let table = doc
        .as_table()
        .ok_or_else(|| Error::Document("experiment document is not a table".into()))?;
    const KEYS: [&str; 12] = [
        "system",
        "init",
        "epsilon",
        "cells",
        "window",
        "periodic",
        "cfl",
        "horizon",
        "t_end",
        "dissipation",
        "launch_points",
        "threads",
    ];
    for key in table.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Document(format!("unknown key '{key}'")));
        }
    }
    let get_str = |key: &str| -> Result<String> {
        table
            .get(key)
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .ok_or_else(|| Error::Document(format!("missing or non-string key '{key}'")))
    };
    let num = |v: &toml::Value, key: &str| -> Result<f64> {
        v.as_float()
            .or_else(|| v.as_integer().map(|i| i as f64))
            .ok_or_else(|| Error::Document(format!("'{key}' must be a number")))
    };
    let num_key = |key: &str, default: f64| -> Result<f64> {
        match table.get(key) {
            None => Ok(default),
            Some(v) => num(v, key),
        }
    };
    let list_key = |key: &str| -> Result<Vec<T>> {
        match table.get(key) {
            None => Ok(Vec::new()),
            Some(v) => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| Error::Document(format!("'{key}' must be a list")))?;
                arr.iter()
                    .map(|e| num(e, key).map(lit))
                    .collect::<Result<Vec<T>>>()
            }
        }
    };
    let cells = table
        .get("cells")
        .and_then(|v| v.as_integer())
        .ok_or_else(|| Error::Document("missing or non-integer key 'cells'".into()))?;
    if cells < 16 {
        return Err(Error::Document("'cells' must be at least 16".into()));
    }
    let window = match table.get("window") {
        None => None,
        Some(v) => {
            let arr = v
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Document("'window' must be [lo, hi]".into()))?;
            let lo = num(&arr[0], "window")?;
            let hi = num(&arr[1], "window")?;
            if !(lo < hi) {
                return Err(Error::Document("'window' interval is empty".into()));
            }
            Some((lit(lo), lit(hi)))
        }
    };
    let periodic = match table.get("periodic") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| Error::Document("'periodic' must be a boolean".into()))?,
    };
    let threads = match table.get("threads") {
        None => None,
        Some(v) => {
            let t = v
                .as_integer()
                .ok_or_else(|| Error::Document("'threads' must be an integer".into()))?;
            if t < 1 {
                return Err(Error::Document("'threads' must be at least 1".into()));
            }
            Some(t as usize)
        }
    };
    let t_end = match table.get("t_end") {
        None => None,
        Some(v) => Some(lit(num(v, "t_end")?)),
    };
    Ok(ExperimentConfig {
        system: get_str("system")?,
        init: get_str("init")?,
        epsilon: list_key("epsilon")?,
        cells: cells as usize,
        window,
        periodic,
        cfl: lit(num_key("cfl", DEFAULT_CFL)?),
        horizon: lit(num_key("horizon", 3.0)?),
        t_end,
        dissipation: lit(num_key("dissipation", DEFAULT_DISSIPATION)?),
        launch_points: list_key("launch_points")?,
        threads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_system_definition;
    use crate::geometry;
    use crate::lifespan::{builtin_family, compute_m0, PredictionOutcome};
    use crate::SystemDefinition;

    fn burgers() -> SystemDefinition {
        parse_system_definition(
            r#"
            name = "burgers"
            n = 1
            A = ["u1"]
            B = ["0"]
        "#,
        )
        .unwrap()
    }

    fn decoupled_pair() -> SystemDefinition {
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

    fn record(t: f64, max_w: f64) -> StepRecord<f64> {
        StepRecord { t, dt: 0.0, max_w, max_u: 0.0, max_lambda: 0.0 }
    }

    #[test]
    fn reciprocal_fit_recovers_exact_root() {
        // Points (0.5, 2) and (0.8, 5) put 1/w on the line 1 - t, so the
        // fitted blow-up time is exactly 1. A small leading sample
        // satisfies the growth precondition without entering the final
        // decade of the fit.
        let steps = vec![record(0.0, 0.49), record(0.5, 2.0), record(0.8, 5.0)];
        match detect_blowup(&steps).unwrap() {
            BlowupEstimate::Estimated { t_num, uncertainty } => {
                assert!((t_num - 1.0).abs() < 1e-12, "t_num = {t_num}");
                assert!(uncertainty < 1e-12);
            }
            other => panic!("expected an estimate, got {other:?}"),
        }
    }

    #[test]
    fn flat_gradient_trace_reports_no_blowup() {
        let steps: Vec<StepRecord<f64>> =
            (0..50).map(|k| record(k as f64 * 0.1, 1.0 + 1e-3 * k as f64)).collect();
        match detect_blowup(&steps).unwrap() {
            BlowupEstimate::NoBlowupObserved { growth } => assert!(growth < 1.2),
            other => panic!("expected no blow-up, got {other:?}"),
        }
    }

    #[test]
    fn zero_datum_evolves_as_zero_with_straight_characteristics() {
        let sys = decoupled_pair();
        let fam = builtin_family("gaussian-derivative", 2).unwrap();
        let mut config = GridConfig::new(64, 1.0);
        config.window = Some((-2.0, 2.0));
        let field = solve_cauchy(&sys, &fam, 0.0, &config).unwrap();
        assert_eq!(field.stop, StopCause::ReachedEnd);
        assert!(field.frames.len() >= 4);
        for frame in &field.frames {
            for &v in frame.u.iter().chain(&frame.w) {
                assert!(v.abs() <= 1e-14);
            }
        }
        // Family 2 has speed 1 at the origin: curves are straight lines
        // of slope 1 with unit compression factor.
        let curves = trace_characteristics(&field, &[1], &[-0.5, 0.0]).unwrap();
        assert_eq!(curves.len(), 2);
        for curve in &curves {
            for (j, (&t, &x)) in curve.t.iter().zip(&curve.x).enumerate() {
                assert!(
                    (x - (curve.launch + t)).abs() < 1e-6,
                    "sample {j}: x = {x}, expected {}",
                    curve.launch + t
                );
                assert!((curve.k[j] - 1.0).abs() < 1e-9);
            }
        }
        let trace = monitor_functionals(&field, &curves);
        assert!(trace.u_sup.iter().all(|&s| s == 0.0));
        assert!(trace.q_vw.iter().all(|&q| q == 0.0));
        assert!(trace.min_k.iter().all(|&k| (k - 1.0).abs() < 1e-9));
    }

    #[test]
    fn burgers_blowup_matches_the_steepening_oracle() {
        // For u_t + u u_x = 0 with datum eps * psi the gradient blows up
        // at 1 / (eps * sup(-psi')) = 10 for this profile at eps = 0.1.
        let sys = burgers();
        let fam = builtin_family("gaussian-derivative", 1).unwrap();
        let eps = 0.1;
        let config = GridConfig::new(1024, 15.0);
        let field = solve_cauchy(&sys, &fam, eps, &config).unwrap();
        assert_eq!(field.stop, StopCause::GradientThreshold);

        // The datum lands exactly on the grid at t = 0.
        let first = &field.frames[0];
        for m in 0..field.points {
            let want = fam.eval(eps, field.x(m));
            assert_eq!(first.u[m], want[0]);
        }
        // Every accepted step obeyed the CFL bound.
        for s in &field.steps {
            if s.dt > 0.0 {
                assert!(s.dt * s.max_lambda / field.dx <= config.cfl * (1.0 + 1e-12));
            }
        }

        match detect_blowup(&field.steps).unwrap() {
            BlowupEstimate::Estimated { t_num, uncertainty } => {
                assert!((t_num - 10.0).abs() < 0.5, "t_num = {t_num}");
                assert!(uncertainty < 0.5, "uncertainty = {uncertainty}");
            }
            other => panic!("expected blow-up, got {other:?}"),
        }

        // Characteristics are straight with slope u(0, y); the curve
        // from the steepest point compresses as k = 1 + t eps psi'(y).
        let curves = trace_characteristics(&field, &[0], &[0.0, 0.8]).unwrap();
        let at_zero = &curves[0];
        let mid = at_zero.t.len() / 2;
        let t_mid = at_zero.t[mid];
        assert!(at_zero.x[mid].abs() < 2e-3, "x(t_mid) = {}", at_zero.x[mid]);
        assert!(
            (at_zero.k[mid] - (1.0 - eps * t_mid)).abs() < 0.02,
            "k(t_mid) = {}, expected {}",
            at_zero.k[mid],
            1.0 - eps * t_mid
        );
        for &k in &at_zero.k {
            assert!(k > 0.0, "compression factor stayed positive before blow-up");
        }
        let at_08 = &curves[1];
        let slope = eps * 0.8 * (-0.64f64).exp() * (-1.0);
        assert!(
            (at_08.x[mid] - (0.8 + slope * t_mid)).abs() < 3e-3,
            "x(t_mid) = {}, expected {}",
            at_08.x[mid],
            0.8 + slope * t_mid
        );

        // Functionals: amplitude sup, mass, and variation match the
        // closed forms of the profile; scalar cross-terms vanish.
        let trace = monitor_functionals(&field, &curves);
        let u_sup = *trace.u_sup.last().unwrap();
        let want_sup = eps * (0.5f64).sqrt() * (-0.5f64).exp();
        assert!((u_sup - want_sup).abs() < 0.01 * want_sup, "u_sup = {u_sup}");
        let v0 = trace.v_l1[0];
        assert!((v0 - eps).abs() < 0.01 * eps, "initial mass = {v0}");
        let v1 = *trace.v_l1.last().unwrap();
        assert!((v1 - eps).abs() < 0.03 * eps, "running mass = {v1}");
        let want_tv = eps * 2.0 * (2.0f64).sqrt() * (-0.5f64).exp();
        let w1 = *trace.w_l1.last().unwrap();
        assert!((w1 - want_tv).abs() < 0.03 * want_tv, "running variation = {w1}");
        assert!(trace.q_v.iter().all(|&q| q == 0.0));
        assert!(trace.q_w.iter().all(|&q| q == 0.0));
        let final_k = *trace.min_k.last().unwrap();
        assert!(final_k < 0.2, "min k near blow-up = {final_k}");
    }

    #[test]
    fn untouched_component_stays_numerically_zero() {
        let sys = decoupled_pair();
        let fam = builtin_family("gaussian-derivative", 2).unwrap();
        let config = GridConfig::new(256, 2.0);
        let field = solve_cauchy(&sys, &fam, 0.05, &config).unwrap();
        assert_eq!(field.stop, StopCause::ReachedEnd);
        for frame in &field.frames {
            for m in 0..field.points {
                assert!(frame.u[m * 2 + 1].abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn sweep_scales_lifespans_and_isolates_failures() {
        let sys = burgers();
        let fam = builtin_family("gaussian-derivative", 1).unwrap();
        let wld = geometry::compute_wld(&sys, 4).unwrap();
        let pred = compute_m0(&sys, &wld, &fam, 400).unwrap();
        match &pred.outcome {
            PredictionOutcome::Blowup { m0, .. } => assert!((m0 - 1.0).abs() < 1e-3),
            other => panic!("expected a blow-up prediction, got {other:?}"),
        }
        // The leading amplitude exceeds the validity ball and must fail
        // without aborting the remaining rows.
        let eps = [3.0, 0.1, 0.05];
        let base = GridConfig::new(768, 1.0);
        let report = epsilon_sweep(&sys, &fam, &eps, &base, &pred, 1.5, 2).unwrap();
        assert_eq!(report.alpha, Some(0));
        assert!(report.rows[0].outcome.is_err());
        let mut ratios = Vec::new();
        for row in &report.rows[1..] {
            let out = row.outcome.as_ref().expect("small amplitudes blow up");
            assert!(out.scaled > 0.9 && out.scaled < 1.1, "scaled = {}", out.scaled);
            let ratio = out.ratio.expect("prediction is finite");
            assert!((ratio - 1.0).abs() < 0.1);
            assert!(out.stop == StopCause::GradientThreshold);
            ratios.push(out.w1_over_eps);
            assert!(out.uinf_over_eps > 0.2 && out.uinf_over_eps < 1.0);
        }
        // Scaled diagnostics stay within a factor of two across rows.
        assert!(ratios[0] / ratios[1] < 2.0 && ratios[1] / ratios[0] < 2.0);
        let limit = report.extrapolated.expect("two good rows");
        assert!((limit - 1.0).abs() < 0.1, "extrapolated = {limit}");

        // Bitwise determinism across thread counts.
        let again = epsilon_sweep(&sys, &fam, &eps, &base, &pred, 1.5, 1).unwrap();
        for (a, b) in report.rows.iter().zip(&again.rows) {
            match (&a.outcome, &b.outcome) {
                (Ok(x), Ok(y)) => {
                    assert_eq!(x.t_num.to_bits(), y.t_num.to_bits());
                    assert_eq!(x.w1_over_eps.to_bits(), y.w1_over_eps.to_bits());
                }
                (Err(x), Err(y)) => assert_eq!(x, y),
                _ => panic!("thread count changed a row outcome"),
            }
        }
    }

    #[test]
    fn solver_rejects_bad_launches_and_degenerate_grids() {
        let sys = burgers();
        let fam = builtin_family("gaussian-derivative", 1).unwrap();
        let field = solve_cauchy(&sys, &fam, 0.05, &GridConfig::new(64, 0.5)).unwrap();
        assert!(matches!(
            trace_characteristics(&field, &[1], &[0.0]),
            Err(Error::VariableOutOfRange { .. })
        ));
        let mut stub = field.clone();
        stub.frames.truncate(2);
        assert!(trace_characteristics(&stub, &[0], &[0.0]).is_err());

        // An amplitude far outside the validity ball fails immediately.
        assert!(matches!(
            solve_cauchy(&sys, &fam, 3.0, &GridConfig::new(64, 0.5)),
            Err(Error::LeftValidityBall { .. })
        ));

        // Enormous speeds push the first step below the floor.
        let stiff: SystemDefinition = parse_system_definition(
            r#"
            name = "stiff"
            n = 1
            A = ["1000000000000000 * u1"]
            B = ["0"]
        "#,
        )
        .unwrap();
        let mut config = GridConfig::new(64, 1.0);
        config.window = Some((-6.0, 6.0));
        assert!(matches!(
            solve_cauchy(&stiff, &fam, 0.05, &config),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn experiment_documents_parse_with_defaults_and_reject_unknown_keys() {
        let config: ExperimentConfig<f64> = parse_experiment_config(
            r#"
            system = "burgers"
            init = "gaussian-derivative"
            epsilon = [0.1, 0.05]
            cells = 512
            window = [-8.0, 8.0]
            launch_points = [0.0, 0.5]
            threads = 2
        "#,
        )
        .unwrap();
        assert_eq!(config.system, "burgers");
        assert_eq!(config.cells, 512);
        assert_eq!(config.epsilon, vec![0.1, 0.05]);
        assert_eq!(config.window, Some((-8.0, 8.0)));
        assert_eq!(config.cfl, 0.4);
        assert_eq!(config.horizon, 3.0);
        assert_eq!(config.dissipation, 0.01);
        assert_eq!(config.launch_points, vec![0.0, 0.5]);
        assert_eq!(config.threads, 2);
        assert!(!config.periodic);
        let grid = config.grid();
        assert_eq!(grid.cells, 512);
        assert!(grid.window.is_some());

        for bad in [
            "system = \"a\"\ninit = \"b\"\ncells = 512\nwhat = 1",
            "system = \"a\"\ninit = \"b\"\ncells = 4",
            "system = \"a\"\ninit = \"b\"\ncells = 512\nwindow = [2.0, 1.0]",
            "system = \"a\"\ninit = \"b\"\ncells = 512\nthreads = 0",
            "init = \"b\"\ncells = 512",
        ] {
            assert!(
                parse_experiment_config::<f64>(bad).is_err(),
                "accepted: {bad}"
            );
        }
    }
}
