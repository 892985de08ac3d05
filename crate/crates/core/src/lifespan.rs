//! Initial-data families u(0, x) = f(epsilon, x), their smallness norms,
//! and the sharp gradient blow-up constant: the amplitude-profile pair
//! (psi, psi') determines, together with the leading speed derivative of
//! each minimally degenerate family, the constant M0 in the lifespan
//! asymptotics T(epsilon) ~ M0 * epsilon^-(alpha+1).

use std::fmt;
use std::sync::Arc;

use crate::dsl::parser::{parse_expression, VarSpec};
use crate::error::{Error, Result};
use crate::geometry::WldReport;
use crate::linalg;
use crate::numerics::quad;
use crate::scalar::{lit, Real};
use crate::system::HyperbolicSystem;

/// Base step for differencing f in epsilon at 0.
const EPS_STEP: f64 = 1e-4;

/// Base step for differencing profiles in x.
const X_STEP: f64 = 1e-4;

/// A vector-valued profile of x.
pub type ProfileFn<T> = Box<dyn Fn(T) -> Vec<T> + Send + Sync>;

/// A map (epsilon, x) -> state.
pub type DataFn<T> = Box<dyn Fn(T, T) -> Vec<T> + Send + Sync>;

type SharedProfile<T> = Arc<dyn Fn(T) -> Vec<T> + Send + Sync>;

/// A family of initial data parameterized by amplitude: x maps to an
/// n-vector for each epsilon, vanishing identically at epsilon = 0, with
/// amplitude profile psi = (d f / d epsilon)(0, x).
pub struct InitialDataFamily<T> {
    name: String,
    n: usize,
    f: Box<dyn Fn(T, T) -> Vec<T> + Send + Sync>,
    psi: Option<SharedProfile<T>>,
    psi_prime: Option<SharedProfile<T>>,
    support: (T, T),
    holder_r: T,
    suggested_epsilons: Vec<T>,
}

impl<T: Real> fmt::Debug for InitialDataFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialDataFamily")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("support", &(self.support.0.as_f64(), self.support.1.as_f64()))
            .field("holder_r", &self.holder_r.as_f64())
            .finish()
    }
}

impl<T: Real> InitialDataFamily<T> {
    /// Family linear in amplitude: f(epsilon, x) = epsilon * psi(x).
    pub fn from_profile(
        name: impl Into<String>,
        n: usize,
        psi: ProfileFn<T>,
        psi_prime: Option<ProfileFn<T>>,
        support: (T, T),
    ) -> Result<Self> {
        let psi: SharedProfile<T> = Arc::from(psi);
        let f = {
            let psi = Arc::clone(&psi);
            Box::new(move |eps: T, x: T| {
                psi(x).into_iter().map(|p| eps * p).collect::<Vec<T>>()
            })
        };
        let mut fam = Self::from_map(name, n, f, support, T::one())?;
        fam.psi = Some(psi);
        fam.psi_prime = psi_prime.map(Arc::from);
        Ok(fam)
    }

    /// Family given directly as a map (epsilon, x) -> state.
    pub fn from_map(
        name: impl Into<String>,
        n: usize,
        f: DataFn<T>,
        support: (T, T),
        holder_r: T,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("initial data needs at least one component"));
        }
        if !(support.0 < support.1) {
            return Err(Error::invalid(format!(
                "support [{}, {}] is empty",
                support.0.as_f64(),
                support.1.as_f64()
            )));
        }
        if !(holder_r > T::zero()) || holder_r > T::one() {
            return Err(Error::invalid(format!(
                "amplitude remainder exponent {} outside (0, 1]",
                holder_r.as_f64()
            )));
        }
        Ok(InitialDataFamily {
            name: name.into(),
            n,
            f,
            psi: None,
            psi_prime: None,
            support,
            holder_r,
            suggested_epsilons: Vec::new(),
        })
    }

    pub fn with_psi(mut self, psi: ProfileFn<T>) -> Self {
        self.psi = Some(Arc::from(psi));
        self
    }

    pub fn with_psi_prime(mut self, psi_prime: ProfileFn<T>) -> Self {
        self.psi_prime = Some(Arc::from(psi_prime));
        self
    }

    pub fn with_suggested_epsilons(mut self, eps: Vec<T>) -> Self {
        self.suggested_epsilons = eps;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> (T, T) {
        self.support
    }

    pub fn holder_r(&self) -> T {
        self.holder_r
    }

    pub fn suggested_epsilons(&self) -> &[T] {
        &self.suggested_epsilons
    }

    /// The datum at amplitude `eps` and position `x`.
    pub fn eval(&self, eps: T, x: T) -> Vec<T> {
        (self.f)(eps, x)
    }

    /// Amplitude profile at `x`: analytic when provided, otherwise the
    /// refined epsilon-derivative of f at 0.
    pub fn psi_at(&self, x: T) -> Result<Vec<T>> {
        if let Some(psi) = &self.psi {
            return Ok(psi(x));
        }
        let e = lit::<T>(EPS_STEP);
        let coarse = diff_quot(self.f.as_ref(), e, x);
        let fine = diff_quot(self.f.as_ref(), e * lit(0.5), x);
        let mut out = Vec::with_capacity(self.n);
        for c in 0..self.n {
            let value = (lit::<T>(4.0) * fine[c] - coarse[c]) / lit(3.0);
            let disagreement = (fine[c] - coarse[c]).abs();
            if disagreement > lit::<T>(1e-4) * value.abs().max(T::one()) {
                return Err(Error::PsiUnstable {
                    x: x.as_f64(),
                    disagreement: disagreement.as_f64(),
                });
            }
            out.push(value);
        }
        Ok(out)
    }

    /// Profile slope at `x`: analytic when provided, otherwise refined
    /// central differencing of the profile.
    pub fn psi_prime_at(&self, x: T) -> Result<Vec<T>> {
        if let Some(p) = &self.psi_prime {
            return Ok(p(x));
        }
        let h = lit::<T>(X_STEP);
        let half = h * lit(0.5);
        let pp = self.psi_at(x + h)?;
        let pm = self.psi_at(x - h)?;
        let pp2 = self.psi_at(x + half)?;
        let pm2 = self.psi_at(x - half)?;
        let mut out = Vec::with_capacity(self.n);
        for c in 0..self.n {
            let coarse = (pp[c] - pm[c]) / (h + h);
            let fine = (pp2[c] - pm2[c]) / h;
            out.push((lit::<T>(4.0) * fine - coarse) / lit(3.0));
        }
        Ok(out)
    }
}

fn diff_quot<T: Real, F: Fn(T, T) -> Vec<T> + ?Sized>(f: &F, e: T, x: T) -> Vec<T> {
    let hi = f(e, x);
    let lo = f(-e, x);
    hi.into_iter()
        .zip(lo)
        .map(|(a, b)| (a - b) / (e + e))
        .collect()
}

/// Amplitude profile and slope sampled on a grid.
#[derive(Debug, Clone)]
pub struct PsiSamples<T> {
    pub x: Vec<T>,
    /// psi[k] is the profile vector at x[k].
    pub psi: Vec<Vec<T>>,
    pub psi_prime: Vec<Vec<T>>,
}

/// Samples the amplitude profile and its slope on the given grid.
pub fn psi_from_family<T: Real>(
    family: &InitialDataFamily<T>,
    grid: &[T],
) -> Result<PsiSamples<T>> {
    let mut psi = Vec::with_capacity(grid.len());
    let mut psi_prime = Vec::with_capacity(grid.len());
    for &x in grid {
        psi.push(family.psi_at(x)?);
        psi_prime.push(family.psi_prime_at(x)?);
    }
    Ok(PsiSamples { x: grid.to_vec(), psi, psi_prime })
}

/// Integral and sup norms of the datum at one amplitude, with the implied
/// smallness constants.
#[derive(Debug, Clone)]
pub struct SmallnessReport<T> {
    /// Integral of |d f / d x| over the support (total variation).
    pub tv: T,
    /// Integral of |f| over the support.
    pub l1: T,
    /// sup |psi'| over the support.
    pub sup_psi_prime: T,
    /// tv / epsilon.
    pub k1: T,
    /// l1 * (sup_psi_prime + 1) / epsilon.
    pub k2: T,
    pub epsilon: T,
    pub cells: usize,
}

/// Norms of the datum at amplitude `eps` by composite quadrature on a
/// uniform grid of `cells` intervals over the support.
pub fn check_smallness<T: Real>(
    family: &InitialDataFamily<T>,
    eps: T,
    cells: usize,
) -> Result<SmallnessReport<T>> {
    if cells < 8 {
        return Err(Error::invalid("smallness quadrature needs at least 8 cells"));
    }
    let (lo, hi) = family.support;
    let dx = (hi - lo) / T::from_usize(cells).unwrap();
    let h = lit::<T>(X_STEP);
    let mut abs_f = Vec::with_capacity(cells + 1);
    let mut abs_fx = Vec::with_capacity(cells + 1);
    let mut sup_pp = T::zero();
    for k in 0..=cells {
        let x = lo + dx * T::from_usize(k).unwrap();
        let f = family.eval(eps, x);
        for &v in &f {
            if !v.is_finite() {
                return Err(Error::invalid(format!(
                    "initial datum not finite at x = {}",
                    x.as_f64()
                )));
            }
        }
        abs_f.push(linalg::norm2(&f));
        let fp = family.eval(eps, x + h);
        let fm = family.eval(eps, x - h);
        let fx: Vec<T> = fp
            .into_iter()
            .zip(fm)
            .map(|(a, b)| (a - b) / (h + h))
            .collect();
        abs_fx.push(linalg::norm2(&fx));
        sup_pp = sup_pp.max(linalg::norm2(&family.psi_prime_at(x)?));
    }
    let l1 = quad::simpson_uniform(&abs_f, dx);
    let tv = quad::simpson_uniform(&abs_fx, dx);
    Ok(SmallnessReport {
        tv,
        l1,
        sup_psi_prime: sup_pp,
        k1: tv / eps,
        k2: l1 * (sup_pp + T::one()) / eps,
        epsilon: eps,
        cells,
    })
}

/// What the sharp-constant computation concluded.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictionOutcome<T> {
    /// Gradient blow-up certified: finite lifespan with sharp constant.
    Blowup {
        m0: T,
        /// The compression rate 1/M0 (the maximized quantity).
        inverse_m0: T,
        /// Zero-based family attaining the maximum.
        family: usize,
        /// Location attaining it.
        location: T,
    },
    /// The compression condition fails everywhere on the support.
    NoBlowupPredicted,
    /// Every family's speed is flat to the tested order; the lifespan
    /// exceeds any tested inverse power of the amplitude.
    AllFamiliesDegenerate,
}

/// Sharp lifespan constant and the scaling it certifies.
#[derive(Debug, Clone)]
pub struct LifespanPrediction<T> {
    /// Minimal degeneracy index of the system; `None` is the all-flat
    /// sentinel.
    pub alpha: Option<usize>,
    pub outcome: PredictionOutcome<T>,
}

impl<T: Real> LifespanPrediction<T> {
    /// Exponent of the guaranteed amplitude scaling, alpha + 1.
    pub fn scaling_exponent(&self) -> Option<usize> {
        self.alpha.map(|a| a + 1)
    }

    /// Predicted lifespan at amplitude `eps`, when finite.
    pub fn t_pred(&self, eps: T) -> Option<T> {
        match (&self.outcome, self.alpha) {
            (PredictionOutcome::Blowup { m0, .. }, Some(alpha)) => {
                Some(*m0 * eps.powi(-(alpha as i32 + 1)))
            }
            _ => None,
        }
    }

    /// Human-readable qualifications of the prediction.
    pub fn notes(&self) -> Vec<String> {
        match &self.outcome {
            PredictionOutcome::Blowup { .. } => {
                let e = self.scaling_exponent().unwrap_or(1);
                vec![format!(
                    "lifespan also bounded below by a constant times epsilon^-{e} \
                     (constant not computed)"
                )]
            }
            PredictionOutcome::NoBlowupPredicted => vec![
                "compression condition fails everywhere on the support: \
                 no gradient blow-up predicted"
                    .into(),
            ],
            PredictionOutcome::AllFamiliesDegenerate => vec![
                "every characteristic speed is flat to the tested order: \
                 lifespan exceeds any tested inverse power of the amplitude; \
                 no finite prediction"
                    .into(),
            ],
        }
    }
}

/// Predicted lifespan at amplitude `eps` (None when no finite prediction
/// exists).
pub fn predict_lifespan<T: Real>(pred: &LifespanPrediction<T>, eps: T) -> Option<T> {
    pred.t_pred(eps)
}

/// Computes the sharp constant M0 for a system in normalized coordinates:
/// the reciprocal of the largest compression rate
///
///   (-1/alpha!) * (leading speed derivative of family i) * psi_i(x)^alpha
///     * psi_i'(x)
///
/// over families of minimal degeneracy index and x in the support, with
/// the grid maximum refined by golden-section search.
pub fn compute_m0<T: Real, S: HyperbolicSystem<T>>(
    sys: &S,
    wld: &WldReport<T>,
    family: &InitialDataFamily<T>,
    cells: usize,
) -> Result<LifespanPrediction<T>> {
    if sys.dim() != family.n() {
        return Err(Error::invalid(format!(
            "initial data has {} components but the system has {}",
            family.n(),
            sys.dim()
        )));
    }
    if cells < 16 {
        return Err(Error::invalid("sharp-constant search needs at least 16 cells"));
    }
    let alpha = match wld.alpha {
        Some(a) => a,
        None => {
            return Ok(LifespanPrediction {
                alpha: None,
                outcome: PredictionOutcome::AllFamiliesDegenerate,
            })
        }
    };
    let factorial: usize = (1..=alpha).product();
    let (lo, hi) = family.support();
    let dx = (hi - lo) / T::from_usize(cells).unwrap();

    let mut best: Option<(T, usize, T)> = None;
    for &i in &wld.j1 {
        let leading = wld.families[i].leading.ok_or_else(|| {
            Error::invalid(format!(
                "family {} in the minimal set has no leading derivative",
                i + 1
            ))
        })?;
        let factor = -leading / T::from_usize(factorial).unwrap();
        let rate = |x: T| -> Result<T> {
            let psi = family.psi_at(x)?;
            let psi_prime = family.psi_prime_at(x)?;
            Ok(factor * psi[i].powi(alpha as i32) * psi_prime[i])
        };
        // Grid scan, then golden-section refinement around the best cell.
        let mut grid_best = (lo, rate(lo)?);
        for k in 1..=cells {
            let x = lo + dx * T::from_usize(k).unwrap();
            let g = rate(x)?;
            if g > grid_best.1 {
                grid_best = (x, g);
            }
        }
        let a = (grid_best.0 - dx).max(lo);
        let b = (grid_best.0 + dx).min(hi);
        let (x_star, g_star) = golden_max(&rate, a, b)?;
        let (x_star, g_star) = if g_star >= grid_best.1 {
            (x_star, g_star)
        } else {
            grid_best
        };
        match &best {
            Some((g, _, _)) if *g >= g_star => {}
            _ => best = Some((g_star, i, x_star)),
        }
    }

    let (g, fam, x) = best
        .ok_or_else(|| Error::invalid("no family attains the minimal degeneracy index"))?;
    if !(g > T::zero()) {
        return Ok(LifespanPrediction {
            alpha: Some(alpha),
            outcome: PredictionOutcome::NoBlowupPredicted,
        });
    }
    Ok(LifespanPrediction {
        alpha: Some(alpha),
        outcome: PredictionOutcome::Blowup {
            m0: g.recip(),
            inverse_m0: g,
            family: fam,
            location: x,
        },
    })
}

/// Golden-section maximization on [a, b].
fn golden_max<T: Real, F: Fn(T) -> Result<T>>(f: &F, a: T, b: T) -> Result<(T, T)> {
    let inv_phi = lit::<T>(0.618_033_988_749_894_8);
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - (hi - lo) * inv_phi;
    let mut x2 = lo + (hi - lo) * inv_phi;
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..90 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * inv_phi;
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * inv_phi;
            f1 = f(x1)?;
        }
    }
    let mid = (lo + hi) * lit(0.5);
    Ok((mid, f(mid)?))
}

/// Names of the built-in amplitude profiles.
pub const BUILTIN_PROFILES: [&str; 3] = ["gaussian-derivative", "bump", "windowed-sine"];

/// A built-in scalar amplitude profile: the shape, its exact derivative,
/// and the support (truncated where the shape falls below 1e-12 for the
/// Gaussian tail).
#[allow(clippy::type_complexity)]
pub fn builtin_profile<T: Real>(
    kind: &str,
) -> Option<(
    Box<dyn Fn(T) -> T + Send + Sync>,
    Box<dyn Fn(T) -> T + Send + Sync>,
    (T, T),
)> {
    match kind {
        "gaussian-derivative" => Some((
            Box::new(|x: T| -x * (-x * x).exp()),
            Box::new(|x: T| ((x + x) * x - T::one()) * (-x * x).exp()),
            (lit(-5.5), lit(5.5)),
        )),
        "bump" => Some((
            Box::new(|x: T| {
                let s = T::one() - x * x;
                if s > T::zero() {
                    s * s * s
                } else {
                    T::zero()
                }
            }),
            Box::new(|x: T| {
                let s = T::one() - x * x;
                if s > T::zero() {
                    -lit::<T>(6.0) * x * s * s
                } else {
                    T::zero()
                }
            }),
            (-T::one(), T::one()),
        )),
        "windowed-sine" => Some((
            // -sin(x) tapered by cos^2(x/2); the taper is exactly 1 at the
            // steepest descent point x = 0, so the sharpest compression
            // rate matches the raw sine.
            Box::new(|x: T| {
                if x.abs() >= T::from_f64(std::f64::consts::PI).unwrap() {
                    return T::zero();
                }
                let w = (x * lit(0.5)).cos();
                -x.sin() * w * w
            }),
            Box::new(|x: T| {
                if x.abs() >= T::from_f64(std::f64::consts::PI).unwrap() {
                    return T::zero();
                }
                // With c = cos(x), the slope is -(2c^2 + c - 1)/2.
                let c = x.cos();
                -((c + c) * c + c - T::one()) * lit(0.5)
            }),
            (
                T::from_f64(-std::f64::consts::PI).unwrap(),
                T::from_f64(std::f64::consts::PI).unwrap(),
            ),
        )),
        _ => None,
    }
}

/// A built-in profile lifted to an n-component family: component 1 carries
/// the shape, every other component is zero, and the amplitude enters
/// linearly.
pub fn builtin_family<T: Real>(kind: &str, n: usize) -> Result<InitialDataFamily<T>> {
    let (shape, slope, support) = builtin_profile::<T>(kind).ok_or_else(|| {
        Error::invalid(format!(
            "unknown profile '{kind}'; built-ins are {}",
            BUILTIN_PROFILES.join(", ")
        ))
    })?;
    let psi: ProfileFn<T> = Box::new(move |x| {
        let mut v = vec![T::zero(); n];
        v[0] = shape(x);
        v
    });
    let psi_prime: ProfileFn<T> = Box::new(move |x| {
        let mut v = vec![T::zero(); n];
        v[0] = slope(x);
        v
    });
    InitialDataFamily::from_profile(kind, n, psi, Some(psi_prime), support)
}

/// Parses an initial-data document for an n-component system.
///
/// Keys: `kind` (a built-in profile name, or a list of n expressions in x
/// defining the profile per component), optional `support` (required for
/// expression profiles), optional `epsilon` list, optional `holder_r`.
pub fn parse_initial_data<T: Real>(text: &str, n: usize) -> Result<InitialDataFamily<T>> {
    let doc: toml::Value = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Document(e.to_string()))?;
    let table = doc
        .as_table()
        .ok_or_else(|| Error::Document("initial-data document is not a table".into()))?;
    for key in table.keys() {
        if !matches!(key.as_str(), "kind" | "support" | "epsilon" | "holder_r") {
            return Err(Error::Document(format!("unknown key '{key}'")));
        }
    }
    let kind = table
        .get("kind")
        .ok_or_else(|| Error::Document("missing key 'kind'".into()))?;

    let support_override = match table.get("support") {
        None => None,
        Some(v) => {
            let arr = v
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Document("'support' must be [lo, hi]".into()))?;
            let mut ends = [T::zero(); 2];
            for (k, e) in arr.iter().enumerate() {
                let x = e
                    .as_float()
                    .or_else(|| e.as_integer().map(|i| i as f64))
                    .ok_or_else(|| Error::Document("'support' entries must be numbers".into()))?;
                ends[k] = lit(x);
            }
            if !(ends[0] < ends[1]) {
                return Err(Error::Document("'support' interval is empty".into()));
            }
            Some((ends[0], ends[1]))
        }
    };
    let holder_r = match table.get("holder_r") {
        None => T::one(),
        Some(v) => {
            let x = v
                .as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .ok_or_else(|| Error::Document("'holder_r' must be a number".into()))?;
            if !(x > 0.0) || x > 1.0 {
                return Err(Error::Document(format!("'holder_r' = {x} outside (0, 1]")));
            }
            lit(x)
        }
    };
    let epsilons: Vec<T> = match table.get("epsilon") {
        None => Vec::new(),
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or_else(|| Error::Document("'epsilon' must be a list".into()))?;
            let mut out = Vec::with_capacity(arr.len());
            for e in arr {
                let x = e
                    .as_float()
                    .or_else(|| e.as_integer().map(|i| i as f64))
                    .ok_or_else(|| Error::Document("'epsilon' entries must be numbers".into()))?;
                if x <= 0.0 {
                    return Err(Error::Document("'epsilon' entries must be positive".into()));
                }
                out.push(lit(x));
            }
            out
        }
    };

    let mut family = match kind {
        toml::Value::String(name) => {
            let mut fam = builtin_family::<T>(name, n)?;
            if let Some(s) = support_override {
                fam.support = s;
            }
            fam
        }
        toml::Value::Array(items) => {
            if items.len() != n {
                return Err(Error::Document(format!(
                    "profile has {} components but the system has {n}",
                    items.len()
                )));
            }
            let spec = VarSpec::Named(vec!["x".into()]);
            let mut exprs = Vec::with_capacity(n);
            for item in items {
                let src = item.as_str().ok_or_else(|| {
                    Error::Document("profile components must be expression strings".into())
                })?;
                exprs.push(parse_expression::<T>(src, &spec)?);
            }
            let support = support_override.ok_or_else(|| {
                Error::Document("expression profiles require an explicit 'support'".into())
            })?;
            let psi: ProfileFn<T> = Box::new(move |x| {
                exprs
                    .iter()
                    .map(|e| e.eval(&[x]).unwrap_or_else(|_| T::nan()))
                    .collect()
            });
            InitialDataFamily::from_profile("expression profile", n, psi, None, support)?
        }
        _ => {
            return Err(Error::Document(
                "'kind' must be a built-in profile name or a list of expressions".into(),
            ))
        }
    };
    // Probe the profile across the support so a malformed expression
    // fails here rather than deep inside a search.
    let (lo, hi) = family.support;
    for k in 0..=8 {
        let x = lo + (hi - lo) * lit::<T>(k as f64 / 8.0);
        if family.psi_at(x)?.iter().any(|v| !v.is_finite()) {
            return Err(Error::Document(format!(
                "profile is not finite at x = {}",
                x.as_f64()
            )));
        }
    }
    family.holder_r = holder_r;
    family.suggested_epsilons = epsilons;
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_system_definition;
    use crate::geometry;

    fn gaussian_family(n: usize) -> InitialDataFamily<f64> {
        builtin_family("gaussian-derivative", n).unwrap()
    }

    #[test]
    fn linear_family_profile_recovered_by_differencing() {
        // No analytic profile stored: psi_at has to difference in
        // amplitude.
        let fam = InitialDataFamily::from_map(
            "linear",
            1,
            Box::new(|eps: f64, x: f64| vec![eps * (-x * (-x * x).exp())]),
            (-5.5, 5.5),
            1.0,
        )
        .unwrap();
        for x in [-1.2, -0.3, 0.0, 0.7, 2.1] {
            let psi = fam.psi_at(x).unwrap();
            let want = -x * (-x * x).exp();
            assert!((psi[0] - want).abs() < 1e-10, "x={x}: {} vs {want}", psi[0]);
        }
    }

    #[test]
    fn quadratic_amplitude_term_is_suppressed() {
        let fam = InitialDataFamily::from_map(
            "with-second-order",
            1,
            Box::new(|eps: f64, x: f64| vec![eps * x.cos() + eps * eps * x.sin()]),
            (-1.0, 1.0),
            1.0,
        )
        .unwrap();
        for x in [-0.9, 0.0, 0.4] {
            let psi = fam.psi_at(x).unwrap();
            assert!((psi[0] - x.cos()).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn zero_family_has_zero_profile() {
        let fam = InitialDataFamily::from_map(
            "zero",
            2,
            Box::new(|_eps: f64, _x: f64| vec![0.0, 0.0]),
            (-1.0, 1.0),
            1.0,
        )
        .unwrap();
        let s = psi_from_family(&fam, &[-0.5, 0.0, 0.5]).unwrap();
        for row in s.psi.iter().chain(&s.psi_prime) {
            assert!(row.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn profile_slope_matches_analytic_derivative() {
        // Built-in slope against fresh differencing of the shape.
        let fam = gaussian_family(1);
        let h = 1e-5;
        for x in [-2.0, -0.6, 0.0, 0.5, 1.7] {
            let analytic = fam.psi_prime_at(x).unwrap()[0];
            let fd = (fam.psi_at(x + h).unwrap()[0] - fam.psi_at(x - h).unwrap()[0]) / (2.0 * h);
            assert!((analytic - fd).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn smallness_norms_of_the_gaussian_profile() {
        let fam = gaussian_family(1);
        let rep = check_smallness(&fam, 0.1, 2000).unwrap();
        // Integral of |x| exp(-x^2) is exactly 1.
        assert!((rep.l1 - 0.1).abs() < 1e-6, "l1 = {}", rep.l1);
        assert!((rep.sup_psi_prime - 1.0).abs() < 1e-6, "M = {}", rep.sup_psi_prime);
        assert!((rep.k2 - 2.0).abs() < 1e-4, "k2 = {}", rep.k2);
        // Total variation of the profile: four times its peak value.
        let tv_exact = 2.0 * 2.0f64.sqrt() * (-0.5f64).exp();
        assert!((rep.k1 - tv_exact).abs() < 1e-4, "k1 = {} vs {tv_exact}", rep.k1);
    }

    #[test]
    fn zero_data_has_zero_norms() {
        let fam = InitialDataFamily::<f64>::from_map(
            "zero",
            1,
            Box::new(|_e, _x| vec![0.0]),
            (-1.0, 1.0),
            1.0,
        )
        .unwrap();
        let rep = check_smallness(&fam, 0.1, 64).unwrap();
        assert_eq!(rep.tv, 0.0);
        assert_eq!(rep.l1, 0.0);
        assert_eq!(rep.sup_psi_prime, 0.0);
    }

    #[test]
    fn scalar_sharp_constant_is_one_for_the_gaussian_profile() {
        let sys = parse_system_definition::<f64>(
            r#"
            name = "burgers"
            n = 1
            A = ["u1"]
            B = ["0"]
        "#,
        )
        .unwrap();
        let wld = geometry::compute_wld(&sys, 4).unwrap();
        let fam = gaussian_family(1);
        let pred = compute_m0(&sys, &wld, &fam, 400).unwrap();
        assert_eq!(pred.alpha, Some(0));
        match &pred.outcome {
            PredictionOutcome::Blowup { m0, family, location, .. } => {
                assert!((m0 - 1.0).abs() < 1e-6, "m0 = {m0}");
                assert_eq!(*family, 0);
                assert!(location.abs() < 1e-4, "x* = {location}");
            }
            other => panic!("unexpected outcome {other:?}"),
        }
        assert!((pred.t_pred(0.05).unwrap() - 20.0).abs() < 2e-5);
        assert!((predict_lifespan(&pred, 0.1).unwrap() - 10.0).abs() < 1e-5);
    }

    #[test]
    fn monotone_profile_predicts_no_blowup() {
        let sys = parse_system_definition::<f64>(
            r#"
            name = "burgers"
            n = 1
            A = ["u1"]
            B = ["0"]
        "#,
        )
        .unwrap();
        let wld = geometry::compute_wld(&sys, 4).unwrap();
        let fam = InitialDataFamily::from_profile(
            "ramp",
            1,
            Box::new(|x: f64| vec![0.3 * x]),
            Some(Box::new(|_x: f64| vec![0.3])),
            (-1.0, 1.0),
        )
        .unwrap();
        let pred = compute_m0(&sys, &wld, &fam, 64).unwrap();
        assert_eq!(pred.outcome, PredictionOutcome::NoBlowupPredicted);
        assert!(pred.t_pred(0.1).is_none());
    }

    #[test]
    fn second_family_with_zero_profile_does_not_compete() {
        let sys = parse_system_definition::<f64>(
            r#"
            name = "decoupled"
            n = 2
            A = [["u1", "0"], ["0", "1 + u2"]]
            B = ["0", "0"]
        "#,
        )
        .unwrap();
        let wld = geometry::compute_wld(&sys, 4).unwrap();
        assert_eq!(wld.j1, vec![0, 1]);
        let fam = gaussian_family(2);
        let pred = compute_m0(&sys, &wld, &fam, 400).unwrap();
        match &pred.outcome {
            PredictionOutcome::Blowup { m0, family, .. } => {
                assert!((m0 - 1.0).abs() < 1e-6);
                assert_eq!(*family, 0);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn degenerate_system_gives_no_finite_prediction() {
        let sys = parse_system_definition::<f64>(
            r#"
            name = "transport"
            n = 2
            A = [["1", "0"], ["0", "2"]]
            B = ["0", "0"]
        "#,
        )
        .unwrap();
        let wld = geometry::compute_wld(&sys, 4).unwrap();
        let fam = gaussian_family(2);
        let pred = compute_m0(&sys, &wld, &fam, 64).unwrap();
        assert_eq!(pred.outcome, PredictionOutcome::AllFamiliesDegenerate);
        assert!(pred.t_pred(0.1).is_none());
        assert!(pred.notes()[0].contains("no finite prediction"));
    }

    #[test]
    fn profile_scaling_scales_the_rate_by_its_power() {
        // Both families flat to first order: alpha = 1, so scaling the
        // profile by c scales the compression rate by c^2.
        let sys = parse_system_definition::<f64>(
            r#"
            name = "doubly-quadratic"
            n = 2
            A = [["u1 ^ 2", "0"], ["0", "1 + u2 ^ 2"]]
            B = ["0", "0"]
        "#,
        )
        .unwrap();
        let wld = geometry::compute_wld(&sys, 4).unwrap();
        assert_eq!(wld.alpha, Some(1));
        let rate = |c: f64| -> f64 {
            let fam = InitialDataFamily::from_profile(
                "scaled",
                2,
                Box::new(move |x: f64| vec![c * -x * (-x * x).exp(), 0.0]),
                Some(Box::new(move |x: f64| {
                    vec![c * (2.0 * x * x - 1.0) * (-x * x).exp(), 0.0]
                })),
                (-5.5, 5.5),
            )
            .unwrap();
            match compute_m0(&sys, &wld, &fam, 600).unwrap().outcome {
                PredictionOutcome::Blowup { inverse_m0, .. } => inverse_m0,
                other => panic!("unexpected outcome {other:?}"),
            }
        };
        let r1 = rate(1.0);
        let r3 = rate(3.0);
        assert!((r3 / r1 - 9.0).abs() < 1e-10 * 9.0, "ratio {}", r3 / r1);
    }

    #[test]
    fn sharp_constant_stable_under_grid_refinement() {
        let sys = parse_system_definition::<f64>(
            r#"
            name = "burgers"
            n = 1
            A = ["u1"]
            B = ["0"]
        "#,
        )
        .unwrap();
        let wld = geometry::compute_wld(&sys, 4).unwrap();
        for kind in BUILTIN_PROFILES {
            let fam = builtin_family::<f64>(kind, 1).unwrap();
            let m0 = |cells: usize| match compute_m0(&sys, &wld, &fam, cells).unwrap().outcome {
                PredictionOutcome::Blowup { m0, .. } => m0,
                other => panic!("{kind}: unexpected outcome {other:?}"),
            };
            let coarse = m0(200);
            let fine = m0(400);
            assert!(
                (coarse - fine).abs() / fine < 5e-3,
                "{kind}: {coarse} vs {fine}"
            );
        }
    }

    #[test]
    fn windowed_sine_peak_compression_is_one() {
        let (_, slope, _) = builtin_profile::<f64>("windowed-sine").unwrap();
        // Steepest descent of the tapered sine sits at the origin with
        // unit rate, like the raw sine.
        let mut sup = 0.0f64;
        for k in -600..=600 {
            let x = k as f64 * std::f64::consts::PI / 600.0;
            sup = sup.max(-slope(x));
        }
        assert!((sup - 1.0).abs() < 1e-9, "sup = {sup}");
        assert!((-slope(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_coefficient_expansion_matches_speed_derivative() {
        // The axis derivative of the leading quadratic coefficient equals
        // minus the next speed derivative, order by order.
        use crate::decomp;
        let sys = parse_system_definition::<f64>(
            r#"
            name = "wld-pair"
            n = 2
            A = [["u1 ^ 2", "0"], ["0", "1 + u2"]]
            B = ["0", "0"]
        "#,
        )
        .unwrap();
        let wld = geometry::compute_wld(&sys, 4).unwrap();
        assert_eq!(wld.families[0].alpha, Some(1));
        let leading = wld.families[0].leading.unwrap();
        let g_at = |u1: f64| -> f64 {
            decomp::decomposition_coefficients(&sys, &[u1, 0.0], 1e-5)
                .unwrap()
                .gamma[(0, 0, 0)]
        };
        let h = 1e-4;
        let slope = (g_at(h) - g_at(-h)) / (2.0 * h);
        assert!(
            (slope + leading).abs() / leading.abs() < 0.01,
            "slope {slope} vs -leading {}",
            -leading
        );
    }

    #[test]
    fn document_with_builtin_profile() {
        let fam = parse_initial_data::<f64>(
            r#"
            kind = "gaussian-derivative"
            epsilon = [0.1, 0.05, 0.025]
        "#,
            2,
        )
        .unwrap();
        assert_eq!(fam.n(), 2);
        assert_eq!(fam.suggested_epsilons(), &[0.1, 0.05, 0.025]);
        let v = fam.eval(0.1, 0.5);
        assert!((v[0] - 0.1 * -0.5 * (-0.25f64).exp()).abs() < 1e-12);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn document_with_expression_profile() {
        let fam = parse_initial_data::<f64>(
            r#"
            kind = ["-x * exp(-(x^2))", "0"]
            support = [-5.5, 5.5]
        "#,
            2,
        )
        .unwrap();
        let psi = fam.psi_at(0.5).unwrap();
        assert!((psi[0] - -0.5 * (-0.25f64).exp()).abs() < 1e-9);
        assert_eq!(psi[1], 0.0);
    }

    #[test]
    fn document_rejections() {
        assert!(matches!(
            parse_initial_data::<f64>("kind = \"no-such-shape\"", 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            parse_initial_data::<f64>("kind = [\"x\"]\nsupport = [-1, 1]", 2),
            Err(Error::Document(_))
        ));
        assert!(matches!(
            parse_initial_data::<f64>("kind = [\"x\", \"0\"]", 2),
            Err(Error::Document(_))
        ));
        assert!(matches!(
            parse_initial_data::<f64>("kind = \"bump\"\nextra = 1", 1),
            Err(Error::Document(_))
        ));
        assert!(matches!(
            parse_initial_data::<f64>("kind = \"bump\"\nholder_r = 1.5", 1),
            Err(Error::Document(_))
        ));
    }
}
