//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! One embedded method serves every ODE in the crate: characteristic
//! trajectories in state space, coordinate-change flows, scalar blow-up
//! equations. The right-hand side returns a `Result` because evaluating it
//! may itself fail (an eigendecomposition inside the field, say), and those
//! failures must surface instead of being smoothed over.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// What an observer tells the integrator after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    /// Stop cleanly after this step (threshold reached, etc).
    Stop,
}

/// Why an observed integration returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ReachedEnd,
    ObserverStopped,
}

#[derive(Debug, Clone)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_steps: usize,
    /// Named in step-collapse errors so the caller knows which integration died.
    pub context: &'static str,
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tol(tol: T, context: &'static str) -> Self {
        OdeOptions { rel_tol: tol, abs_tol: tol, max_steps: 1_000_000, context }
    }
}

const STAGES: usize = 7;

/// Dormand-Prince tableau, row-major lower triangle.
fn tableau<T: Real>() -> ([[T; 6]; STAGES], [T; STAGES], [T; STAGES], [T; STAGES]) {
    let z = T::zero();
    let l = T::lit;
    let a = [
        [z; 6],
        [l(1.0 / 5.0), z, z, z, z, z],
        [l(3.0 / 40.0), l(9.0 / 40.0), z, z, z, z],
        [l(44.0 / 45.0), l(-56.0 / 15.0), l(32.0 / 9.0), z, z, z],
        [
            l(19372.0 / 6561.0),
            l(-25360.0 / 2187.0),
            l(64448.0 / 6561.0),
            l(-212.0 / 729.0),
            z,
            z,
        ],
        [
            l(9017.0 / 3168.0),
            l(-355.0 / 33.0),
            l(46732.0 / 5247.0),
            l(49.0 / 176.0),
            l(-5103.0 / 18656.0),
            z,
        ],
        [
            l(35.0 / 384.0),
            z,
            l(500.0 / 1113.0),
            l(125.0 / 192.0),
            l(-2187.0 / 6784.0),
            l(11.0 / 84.0),
        ],
    ];
    let c = [z, l(0.2), l(0.3), l(0.8), l(8.0 / 9.0), T::one(), T::one()];
    let b5 = [
        l(35.0 / 384.0),
        z,
        l(500.0 / 1113.0),
        l(125.0 / 192.0),
        l(-2187.0 / 6784.0),
        l(11.0 / 84.0),
        z,
    ];
    // b5 - b4, used directly for the error estimate.
    let e = [
        l(71.0 / 57600.0),
        z,
        l(-71.0 / 16695.0),
        l(71.0 / 1920.0),
        l(-17253.0 / 339200.0),
        l(22.0 / 525.0),
        l(-1.0 / 40.0),
    ];
    (a, c, b5, e)
}

struct Stepper<T> {
    a: [[T; 6]; STAGES],
    c: [T; STAGES],
    b5: [T; STAGES],
    e: [T; STAGES],
    k: Vec<Vec<T>>,
    ytmp: Vec<T>,
}

impl<T: Real> Stepper<T> {
    fn new(dim: usize) -> Self {
        let (a, c, b5, e) = tableau::<T>();
        Stepper { a, c, b5, e, k: vec![vec![T::zero(); dim]; STAGES], ytmp: vec![T::zero(); dim] }
    }

    /// One trial step. Returns the 5th-order solution and the scaled error
    /// norm (<= 1 means acceptable).
    fn try_step<F>(
        &mut self,
        f: &mut F,
        t: T,
        y: &[T],
        h: T,
        rel: T,
        abs: T,
    ) -> Result<(Vec<T>, T)>
    where
        F: FnMut(T, &[T]) -> Result<Vec<T>>,
    {
        let dim = y.len();
        self.k[0] = f(t, y)?;
        for s in 1..STAGES {
            for i in 0..dim {
                let mut acc = T::zero();
                for (j, kj) in self.k.iter().enumerate().take(s) {
                    let aij = self.a[s][j];
                    if aij != T::zero() {
                        acc = acc + aij * kj[i];
                    }
                }
                self.ytmp[i] = y[i] + h * acc;
            }
            self.k[s] = f(t + self.c[s] * h, &self.ytmp)?;
        }
        let mut y5 = vec![T::zero(); dim];
        let mut err_sq = T::zero();
        for i in 0..dim {
            let mut acc5 = T::zero();
            let mut acc_e = T::zero();
            for s in 0..STAGES {
                if self.b5[s] != T::zero() {
                    acc5 = acc5 + self.b5[s] * self.k[s][i];
                }
                if self.e[s] != T::zero() {
                    acc_e = acc_e + self.e[s] * self.k[s][i];
                }
            }
            y5[i] = y[i] + h * acc5;
            let scale = abs + rel * y[i].abs().max(y5[i].abs());
            let q = h * acc_e / scale;
            err_sq = err_sq + q * q;
        }
        let err = (err_sq / T::from_usize(dim).unwrap()).sqrt();
        Ok((y5, err))
    }
}

/// Integrates from `t0`, producing the state at each node of `nodes`
/// (strictly monotone, all on one side of `t0` or starting at it). Adaptive
/// steps never cross a node, so node values are genuine solution points
/// rather than interpolants.
pub fn solve_to_nodes<T: Real, F>(
    f: &mut F,
    t0: T,
    y0: &[T],
    nodes: &[T],
    opts: &OdeOptions<T>,
) -> Result<Vec<Vec<T>>>
where
    F: FnMut(T, &[T]) -> Result<Vec<T>>,
{
    let mut out = Vec::with_capacity(nodes.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut stepper = Stepper::new(y0.len());
    let mut h_prev: Option<T> = None;
    for &target in nodes {
        if target == t {
            out.push(y.clone());
            continue;
        }
        let (t_new, y_new, h_last) =
            march(&mut stepper, f, t, &y, target, opts, h_prev, &mut no_observer::<T>)?.into_state();
        t = t_new;
        y = y_new;
        h_prev = Some(h_last);
        out.push(y.clone());
    }
    Ok(out)
}

/// Integrates `t0 -> t1` calling `observer` after every accepted step.
/// Returns the final time, state, and why it stopped.
pub fn solve_observed<T: Real, F, O>(
    f: &mut F,
    t0: T,
    t1: T,
    y0: &[T],
    opts: &OdeOptions<T>,
    observer: &mut O,
) -> Result<(T, Vec<T>, StopReason)>
where
    F: FnMut(T, &[T]) -> Result<Vec<T>>,
    O: FnMut(T, &[T]) -> Control,
{
    let mut stepper = Stepper::new(y0.len());
    let m = march(&mut stepper, f, t0, y0, t1, opts, None, observer)?;
    Ok((m.t, m.y, m.reason))
}

struct Marched<T> {
    t: T,
    y: Vec<T>,
    h_last: T,
    reason: StopReason,
}

impl<T> Marched<T> {
    fn into_state(self) -> (T, Vec<T>, T) {
        (self.t, self.y, self.h_last)
    }
}

fn no_observer<T: Real>(_t: T, _y: &[T]) -> Control {
    Control::Continue
}

#[allow(clippy::too_many_arguments)]
fn march<T: Real, F, O>(
    stepper: &mut Stepper<T>,
    f: &mut F,
    t0: T,
    y0: &[T],
    t1: T,
    opts: &OdeOptions<T>,
    h_init: Option<T>,
    observer: &mut O,
) -> Result<Marched<T>>
where
    F: FnMut(T, &[T]) -> Result<Vec<T>>,
    O: FnMut(T, &[T]) -> Control,
{
    let dir = if t1 > t0 { T::one() } else { -T::one() };
    let span = (t1 - t0).abs();
    let mut h = h_init
        .map(|v| v.abs())
        .unwrap_or_else(|| span * T::lit(0.01))
        .min(span)
        .max(span * T::lit(1e-6));
    let h_floor = span * T::lit(1e-14).max(T::epsilon() * T::lit(100.0));
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut steps = 0usize;
    while (t1 - t) * dir > T::zero() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepCollapse {
                t: t.as_f64(),
                step: h.as_f64(),
                context: format!("{} (step budget exhausted)", opts.context),
            });
        }
        let remaining = (t1 - t).abs();
        let h_try = h.min(remaining);
        let (y_new, err) = stepper.try_step(f, t, &y, h_try * dir, opts.rel_tol, opts.abs_tol)?;
        if err <= T::one() {
            t = if h_try >= remaining { t1 } else { t + h_try * dir };
            y = y_new;
            if observer(t, &y) == Control::Stop {
                return Ok(Marched { t, y, h_last: h, reason: StopReason::ObserverStopped });
            }
        } else if h_try <= h_floor {
            return Err(Error::StepCollapse {
                t: t.as_f64(),
                step: h_try.as_f64(),
                context: opts.context.to_string(),
            });
        }
        // Standard controller with safety factor and growth clamps.
        let factor = if err > T::zero() {
            T::lit(0.9) * err.powf(T::lit(-0.2))
        } else {
            T::lit(5.0)
        };
        h = (h_try * factor.max(T::lit(0.2)).min(T::lit(5.0))).max(h_floor);
    }
    Ok(Marched { t, y, h_last: h, reason: StopReason::ReachedEnd })
}
