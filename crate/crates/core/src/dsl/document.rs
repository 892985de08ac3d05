//! System-definition documents and the [`SystemDefinition`] type itself.
//!
//! Documents are TOML: order-insensitive keyed text. `A` may be given as a
//! flat row-major list of n*n expression strings or as n rows of n strings.

use super::ast::Expression;
use super::parser::{parse_expression, VarSpec};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, Mat};
use crate::numerics::sample;
use crate::scalar::Real;

/// Eigenvalues closer than this (anywhere, in any routine that sorts a
/// spectrum) are treated as a strict-hyperbolicity violation.
pub const GAP_FLOOR: f64 = 1e-9;

/// Default validity radius when a document omits `delta`.
pub const DEFAULT_DELTA: f64 = 0.5;

/// A parsed, validated quasi-linear system u_t + A(u) u_x = B(u).
#[derive(Debug, Clone)]
pub struct SystemDefinition<T> {
    name: String,
    n: usize,
    /// Row-major n*n entries of A.
    a: Vec<Expression<T>>,
    /// n entries of B.
    b: Vec<Expression<T>>,
    delta: T,
}

impl<T: Real> SystemDefinition<T> {
    /// Validating constructor; `a` is row-major with n*n entries.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        a: Vec<Expression<T>>,
        b: Vec<Expression<T>>,
        delta: T,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Document("n must be at least 1".into()));
        }
        if a.len() != n * n {
            return Err(Error::Document(format!(
                "A has {} entries, expected {} for n = {n}",
                a.len(),
                n * n
            )));
        }
        if b.len() != n {
            return Err(Error::Document(format!(
                "B has {} entries, expected {n}",
                b.len()
            )));
        }
        if !(delta > T::zero()) {
            return Err(Error::Document("delta must be positive".into()));
        }
        for e in a.iter().chain(b.iter()) {
            if let Some(k) = e.max_variable() {
                if k >= n {
                    return Err(Error::VariableOutOfRange { name: format!("u{}", k + 1), n });
                }
            }
        }
        let sys = SystemDefinition { name: name.into(), n, a, b, delta };
        sys.check_origin_spectrum()?;
        sys.check_finiteness_on_ball()?;
        Ok(sys)
    }

    /// Strict hyperbolicity at the origin: n distinct real eigenvalues.
    fn check_origin_spectrum(&self) -> Result<()> {
        let zero = vec![T::zero(); self.n];
        let a0 = self.matrix(&zero)?;
        let (re, im) = eigenvalues(&a0)?;
        for (k, &v) in im.iter().enumerate() {
            if v != T::zero() {
                return Err(Error::ComplexSpectrum {
                    state: vec![0.0; self.n],
                    detail: format!(
                        "A(0) eigenvalue {} is complex: {} + {}i",
                        k + 1,
                        re[k].as_f64(),
                        v.as_f64()
                    ),
                });
            }
        }
        let mut sorted = re;
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for w in sorted.windows(2) {
            let gap = w[1] - w[0];
            if gap < T::lit(GAP_FLOOR) {
                return Err(Error::GapCollapse {
                    state: vec![0.0; self.n],
                    gap: gap.as_f64(),
                    floor: GAP_FLOOR,
                });
            }
        }
        Ok(())
    }

    /// Every entry must evaluate finite on a deterministic sample of the
    /// validity ball.
    fn check_finiteness_on_ball(&self) -> Result<()> {
        for u in sample::ball(self.n, self.delta, 48) {
            for e in self.a.iter().chain(self.b.iter()) {
                e.eval(&u)?;
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expression<T> {
        &self.a[i * self.n + j]
    }

    pub fn source_entry(&self, i: usize) -> &Expression<T> {
        &self.b[i]
    }

    /// A(u).
    pub fn matrix(&self, u: &[T]) -> Result<Mat<T>> {
        let mut m = Mat::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.a[i * self.n + j].eval(u)?;
            }
        }
        Ok(m)
    }

    /// B(u).
    pub fn source(&self, u: &[T]) -> Result<Vec<T>> {
        self.b.iter().map(|e| e.eval(u)).collect()
    }
}

/// Parses a system-definition document.
pub fn parse_system_definition<T: Real>(text: &str) -> Result<SystemDefinition<T>> {
    let value: toml::Value = text
        .parse()
        .map_err(|e| Error::Document(format!("document is not valid keyed text: {e}")))?;
    let table = value
        .as_table()
        .ok_or_else(|| Error::Document("document root must be a key/value table".into()))?;
    for key in table.keys() {
        if !matches!(key.as_str(), "name" | "n" | "A" | "B" | "delta") {
            return Err(Error::Document(format!("unknown key `{key}`")));
        }
    }
    let name = table
        .get("name")
        .ok_or_else(|| Error::Document("missing key `name`".into()))?
        .as_str()
        .ok_or_else(|| Error::Document("`name` must be a string".into()))?
        .to_string();
    let n = table
        .get("n")
        .ok_or_else(|| Error::Document("missing key `n`".into()))?
        .as_integer()
        .filter(|&v| v >= 1)
        .ok_or_else(|| Error::Document("`n` must be an integer >= 1".into()))? as usize;
    let a_strings = expression_list(table, "A")?;
    if a_strings.len() != n * n {
        return Err(Error::Document(format!(
            "A has {} entries, expected {} for n = {n}",
            a_strings.len(),
            n * n
        )));
    }
    let b_strings = expression_list(table, "B")?;
    if b_strings.len() != n {
        return Err(Error::Document(format!(
            "B has {} entries, expected {n}",
            b_strings.len()
        )));
    }
    let delta = match table.get("delta") {
        None => T::lit(DEFAULT_DELTA),
        Some(v) => {
            let d = v
                .as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .filter(|&d| d > 0.0)
                .ok_or_else(|| Error::Document("`delta` must be a positive number".into()))?;
            T::lit(d)
        }
    };
    let vars = VarSpec::State(n);
    let a = a_strings
        .iter()
        .map(|s| parse_expression(s, &vars))
        .collect::<Result<Vec<_>>>()?;
    let b = b_strings
        .iter()
        .map(|s| parse_expression(s, &vars))
        .collect::<Result<Vec<_>>>()?;
    SystemDefinition::new(name, n, a, b, delta)
}

/// Reads `key` as a list of expression strings; a list of equal-length rows
/// is flattened row-major.
fn expression_list(table: &toml::value::Table, key: &str) -> Result<Vec<String>> {
    let arr = table
        .get(key)
        .ok_or_else(|| Error::Document(format!("missing key `{key}`")))?
        .as_array()
        .ok_or_else(|| Error::Document(format!("`{key}` must be a list")))?;
    let mut out = Vec::new();
    let nested = arr.iter().all(|v| v.is_array());
    if nested && !arr.is_empty() {
        let width = arr[0].as_array().map(|r| r.len()).unwrap_or(0);
        for row in arr {
            let row = row.as_array().unwrap();
            if row.len() != width {
                return Err(Error::Document(format!("`{key}` rows have unequal lengths")));
            }
            for v in row {
                out.push(string_entry(key, v)?);
            }
        }
    } else {
        for v in arr {
            out.push(string_entry(key, v)?);
        }
    }
    Ok(out)
}

fn string_entry(key: &str, v: &toml::Value) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::Document(format!("`{key}` entries must be expression strings")))
}
