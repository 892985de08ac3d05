//! Dense linear algebra for small matrices.
//!
//! The systems this crate handles have a handful of components, so everything
//! here is written for n up to roughly ten: row-major storage, partial-pivot
//! LU, and a classic Hessenberg + shifted-QR eigendecomposition in the
//! EISPACK/JAMA lineage. n = 1 and n = 2 take closed-form fast paths because
//! the grid solver calls the eigenroutines once per cell per step.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds from a row-major flat slice; `data.len()` must be `rows*cols`.
    pub fn from_rows(rows: usize, cols: usize, data: &[T]) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Mat { rows, cols, data: data.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![T::zero(); self.rows];
        for i in 0..self.rows {
            let mut acc = T::zero();
            for j in 0..self.cols {
                acc = acc + self[(i, j)] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn set_column(&mut self, j: usize, col: &[T]) {
        assert_eq!(col.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = col[i];
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Inverse via partial-pivot LU; `None` when numerically singular.
    pub fn inverse(&self) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut lu = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        if !lu_decompose(&mut lu, &mut piv) {
            return None;
        }
        let mut inv = Mat::zeros(n, n);
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            for v in col.iter_mut() {
                *v = T::zero();
            }
            col[j] = T::one();
            let x = lu_solve_factored(&lu, &piv, &col);
            inv.set_column(j, &x);
        }
        Some(inv)
    }

    /// Solves `self * x = b`; `None` when numerically singular.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut lu = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        if !lu_decompose(&mut lu, &mut piv) {
            return None;
        }
        Some(lu_solve_factored(&lu, &piv, b))
    }

    /// Determinant via LU.
    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut lu = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        if !lu_decompose(&mut lu, &mut piv) {
            return T::zero();
        }
        let mut sign = T::one();
        let mut seen = vec![false; n];
        // Count permutation parity cycle by cycle.
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0usize;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = piv[k];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        let mut det = sign;
        for i in 0..n {
            det = det * lu[(i, i)];
        }
        det
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// In-place Doolittle LU with partial pivoting. `piv[k]` records the row
/// swapped into position k. Returns false on a zero pivot.
fn lu_decompose<T: Real>(a: &mut Mat<T>, piv: &mut [usize]) -> bool {
    let n = a.rows();
    for k in 0..n {
        let mut p = k;
        let mut best = a[(k, k)].abs();
        for i in k + 1..n {
            let v = a[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == T::zero() {
            return false;
        }
        if p != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            piv.swap(k, p);
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let m = a[(i, k)] / pivot;
            a[(i, k)] = m;
            for j in k + 1..n {
                a[(i, j)] = a[(i, j)] - m * a[(k, j)];
            }
        }
    }
    true
}

fn lu_solve_factored<T: Real>(lu: &Mat<T>, piv: &[usize], b: &[T]) -> Vec<T> {
    let n = lu.rows();
    let mut x = vec![T::zero(); n];
    // The pivot array maps factored row -> original row of b.
    for i in 0..n {
        x[i] = b[piv[i]];
    }
    for i in 0..n {
        for j in 0..i {
            x[i] = x[i] - lu[(i, j)] * x[j];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            x[i] = x[i] - lu[(i, j)] * x[j];
        }
        x[i] = x[i] / lu[(i, i)];
    }
    x
}

// Vector helpers on slices.

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc = acc + x * y;
    }
    acc
}

/// Euclidean norm.
pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

pub fn scale_in_place<T: Real>(a: &mut [T], s: T) {
    for v in a.iter_mut() {
        *v = *v * s;
    }
}

/// `a - b` elementwise.
pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Eigendecomposition output. Complex conjugate pairs are reported with the
/// positive-imaginary member first; their vectors are packed as adjacent
/// real/imaginary columns, matching the classic EISPACK convention. Callers
/// in this crate reject complex output anyway.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub re: Vec<T>,
    pub im: Vec<T>,
    /// Column k is the eigenvector for eigenvalue k (real case).
    pub vectors: Mat<T>,
}

/// Full eigendecomposition of a general real square matrix.
pub fn eigen<T: Real>(a: &Mat<T>) -> Result<Eigen<T>> {
    assert_eq!(a.rows(), a.cols());
    match a.rows() {
        0 => Err(Error::invalid("eigendecomposition of empty matrix")),
        1 => Ok(Eigen {
            re: vec![a[(0, 0)]],
            im: vec![T::zero()],
            vectors: Mat::identity(1),
        }),
        2 => Ok(eigen_2x2(a)),
        _ => eigen_qr(a),
    }
}

/// Eigenvalues only; same fast paths as [`eigen`].
pub fn eigenvalues<T: Real>(a: &Mat<T>) -> Result<(Vec<T>, Vec<T>)> {
    match a.rows() {
        1 => Ok((vec![a[(0, 0)]], vec![T::zero()])),
        2 => {
            let e = eigen_2x2(a);
            Ok((e.re, e.im))
        }
        _ => eigen(a).map(|e| (e.re, e.im)),
    }
}

/// Closed form for 2x2 matrices.
fn eigen_2x2<T: Real>(m: &Mat<T>) -> Eigen<T> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half = T::lit(0.5);
    let mean = (a + d) * half;
    let diff = (a - d) * half;
    let disc = diff * diff + b * c;
    let mut vectors = Mat::identity(2);
    if disc < T::zero() {
        let omega = (-disc).sqrt();
        // Vector for mean + i*omega, packed as (Re | Im) columns.
        // (A - lambda I) v = 0 with v = (b, lambda - a) when b != 0.
        if b != T::zero() {
            vectors[(0, 0)] = b;
            vectors[(0, 1)] = T::zero();
            vectors[(1, 0)] = mean - a;
            vectors[(1, 1)] = omega;
        } else if c != T::zero() {
            vectors[(0, 0)] = mean - d;
            vectors[(0, 1)] = omega;
            vectors[(1, 0)] = c;
            vectors[(1, 1)] = T::zero();
        }
        return Eigen {
            re: vec![mean, mean],
            im: vec![omega, -omega],
            vectors,
        };
    }
    let root = disc.sqrt();
    // Add the radical to the larger-magnitude half to avoid cancellation.
    let l_big = if mean >= T::zero() { mean + root } else { mean - root };
    let l_small = if root == T::zero() || l_big == T::zero() {
        mean - root.copysign(mean)
    } else {
        // lambda1*lambda2 = det
        (a * d - b * c) / l_big
    };
    let (l0, l1) = if l_big <= l_small { (l_big, l_small) } else { (l_small, l_big) };
    for (k, lam) in [l0, l1].into_iter().enumerate() {
        let v = if b.abs() > c.abs() {
            [b, lam - a]
        } else if c != T::zero() {
            [lam - d, c]
        } else {
            // Diagonal matrix: eigenvectors are coordinate axes.
            if (lam - a).abs() <= (lam - d).abs() {
                [T::one(), T::zero()]
            } else {
                [T::zero(), T::one()]
            }
        };
        let n = norm2(&v);
        vectors[(0, k)] = v[0] / n;
        vectors[(1, k)] = v[1] / n;
    }
    Eigen { re: vec![l0, l1], im: vec![T::zero(); 2], vectors }
}

/// Hessenberg reduction + shifted double QR with eigenvector accumulation,
/// following the EISPACK `orthes`/`hqr2` pair.
fn eigen_qr<T: Real>(a: &Mat<T>) -> Result<Eigen<T>> {
    let nn = a.rows();
    let mut h = a.clone();
    let mut v = Mat::identity(nn);
    let mut ort = vec![T::zero(); nn];

    // Householder reduction to Hessenberg form, accumulating the
    // transformation in v.
    let low = 0usize;
    let high = nn - 1;
    for m in (low + 1)..high {
        let mut scale = T::zero();
        for i in m..=high {
            scale = scale + h[(i, m - 1)].abs();
        }
        if scale != T::zero() {
            let mut hh = T::zero();
            for i in (m..=high).rev() {
                ort[i] = h[(i, m - 1)] / scale;
                hh = hh + ort[i] * ort[i];
            }
            let mut g = hh.sqrt();
            if ort[m] > T::zero() {
                g = -g;
            }
            hh = hh - ort[m] * g;
            ort[m] = ort[m] - g;
            for j in m..nn {
                let mut f = T::zero();
                for i in (m..=high).rev() {
                    f = f + ort[i] * h[(i, j)];
                }
                f = f / hh;
                for i in m..=high {
                    h[(i, j)] = h[(i, j)] - f * ort[i];
                }
            }
            for i in 0..=high {
                let mut f = T::zero();
                for j in (m..=high).rev() {
                    f = f + ort[j] * h[(i, j)];
                }
                f = f / hh;
                for j in m..=high {
                    h[(i, j)] = h[(i, j)] - f * ort[j];
                }
            }
            ort[m] = scale * ort[m];
            h[(m, m - 1)] = scale * g;
        }
    }
    for m in ((low + 1)..high).rev() {
        if h[(m, m - 1)] != T::zero() {
            for i in (m + 1)..=high {
                ort[i] = h[(i, m - 1)];
            }
            for j in m..=high {
                let mut g = T::zero();
                for i in m..=high {
                    g = g + ort[i] * v[(i, j)];
                }
                // Double division avoids underflow in the product.
                g = (g / ort[m]) / h[(m, m - 1)];
                for i in m..=high {
                    v[(i, j)] = v[(i, j)] + g * ort[i];
                }
            }
        }
    }

    hqr2(&mut h, &mut v)
}

/// Complex scalar division (cr + i*ci) / (dr + i*di) by Smith's formula.
fn cdiv<T: Real>(cr: T, ci: T, dr: T, di: T) -> (T, T) {
    if dr.abs() > di.abs() {
        let r = di / dr;
        let d = dr + r * di;
        ((cr + r * ci) / d, (ci - r * cr) / d)
    } else {
        let r = dr / di;
        let d = di + r * dr;
        ((r * cr + ci) / d, (r * ci - cr) / d)
    }
}

/// QR iteration on a Hessenberg matrix with accumulated transformations,
/// then back-substitution for the eigenvectors of the original matrix.
#[allow(clippy::needless_range_loop)]
fn hqr2<T: Real>(h: &mut Mat<T>, v: &mut Mat<T>) -> Result<Eigen<T>> {
    let nn = h.rows();
    let mut d = vec![T::zero(); nn];
    let mut e = vec![T::zero(); nn];
    let eps = T::epsilon();
    let low = 0isize;
    let high = nn as isize - 1;
    let mut exshift = T::zero();
    // The scratch variables live across loop arms, like fields in the
    // EISPACK-style originals; start them all at zero.
    let mut p = T::zero();
    let mut q = T::zero();
    let mut r = T::zero();
    let mut s = T::zero();
    let mut z = T::zero();
    let (mut w, mut x, mut y);

    let mut norm = T::zero();
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm = norm + h[(i, j)].abs();
        }
    }

    let mut n = high;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    while n >= low {
        // Look for a negligible subdiagonal element.
        let mut l = n;
        while l > low {
            s = h[(l as usize - 1, l as usize - 1)].abs() + h[(l as usize, l as usize)].abs();
            if s == T::zero() {
                s = norm;
            }
            if h[(l as usize, l as usize - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One real root.
            let nu = n as usize;
            h[(nu, nu)] = h[(nu, nu)] + exshift;
            d[nu] = h[(nu, nu)];
            e[nu] = T::zero();
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // A 2x2 block: real pair or complex pair.
            let nu = n as usize;
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) * T::lit(0.5);
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] = h[(nu, nu)] + exshift;
            h[(nu - 1, nu - 1)] = h[(nu - 1, nu - 1)] + exshift;
            x = h[(nu, nu)];
            if q >= T::zero() {
                z = if p >= T::zero() { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != T::zero() {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = T::zero();
                e[nu] = T::zero();
                x = h[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p = p / r;
                q = q / r;
                for j in (nu - 1)..nn {
                    z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                for i in low as usize..=high as usize {
                    z = v[(i, nu - 1)];
                    v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                    v[(i, nu)] = q * v[(i, nu)] - p * z;
                }
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // Form shift.
            let nu = n as usize;
            x = h[(nu, nu)];
            y = T::zero();
            w = T::zero();
            if l < n {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            if iter == 10 {
                exshift = exshift + x;
                for i in low as usize..=nu {
                    h[(i, i)] = h[(i, i)] - x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) * T::lit(0.5);
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) * T::lit(0.5) + s);
                    for i in low as usize..=nu {
                        h[(i, i)] = h[(i, i)] - s;
                    }
                    exshift = exshift + s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total_iter += 1;
            if total_iter > 60 * nn {
                return Err(Error::invalid(
                    "eigenvalue QR iteration exceeded its iteration budget",
                ));
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = n - 2;
            while m >= l {
                let mu = m as usize;
                z = h[(mu, mu)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(mu + 1, mu)] + h[(mu, mu + 1)];
                q = h[(mu + 1, mu + 1)] - z - r - s;
                r = h[(mu + 2, mu + 1)];
                s = p.abs() + q.abs() + r.abs();
                p = p / s;
                q = q / s;
                r = r / s;
                if m == l {
                    break;
                }
                if h[(mu, mu - 1)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (h[(mu - 1, mu - 1)].abs() + z.abs() + h[(mu + 1, mu + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                let iu = i as usize;
                h[(iu, iu - 2)] = T::zero();
                if i > m + 2 {
                    h[(iu, iu - 3)] = T::zero();
                }
            }

            // Double QR step on rows l..=n, columns m..=n.
            for k in m..=(n - 1) {
                let ku = k as usize;
                let notlast = k != n - 1;
                if k != m {
                    p = h[(ku, ku - 1)];
                    q = h[(ku + 1, ku - 1)];
                    r = if notlast { h[(ku + 2, ku - 1)] } else { T::zero() };
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p = p / x;
                        q = q / x;
                        r = r / x;
                    }
                }
                if x == T::zero() {
                    break;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s != T::zero() {
                    if k != m {
                        h[(ku, ku - 1)] = -s * x;
                    } else if l != m {
                        h[(ku, ku - 1)] = -h[(ku, ku - 1)];
                    }
                    p = p + s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q = q / p;
                    r = r / p;
                    for j in ku..nn {
                        p = h[(ku, j)] + q * h[(ku + 1, j)];
                        if notlast {
                            p = p + r * h[(ku + 2, j)];
                            h[(ku + 2, j)] = h[(ku + 2, j)] - p * z;
                        }
                        h[(ku, j)] = h[(ku, j)] - p * x;
                        h[(ku + 1, j)] = h[(ku + 1, j)] - p * y;
                    }
                    // Right application scales the third column by r (already
                    // divided by the pivot), unlike the row pass which uses z.
                    let imax = n.min(k + 3) as usize;
                    for i in 0..=imax {
                        p = x * h[(i, ku)] + y * h[(i, ku + 1)];
                        if notlast {
                            p = p + z * h[(i, ku + 2)];
                            h[(i, ku + 2)] = h[(i, ku + 2)] - p * r;
                        }
                        h[(i, ku)] = h[(i, ku)] - p;
                        h[(i, ku + 1)] = h[(i, ku + 1)] - p * q;
                    }
                    for i in low as usize..=high as usize {
                        p = x * v[(i, ku)] + y * v[(i, ku + 1)];
                        if notlast {
                            p = p + z * v[(i, ku + 2)];
                            v[(i, ku + 2)] = v[(i, ku + 2)] - p * r;
                        }
                        v[(i, ku)] = v[(i, ku)] - p;
                        v[(i, ku + 1)] = v[(i, ku + 1)] - p * q;
                    }
                }
            }
        }
    }

    if norm == T::zero() {
        return Ok(Eigen { re: d, im: e, vectors: v.clone() });
    }

    // Back-substitute the quasi-triangular system for eigenvectors.
    for nrev in (0..nn).rev() {
        p = d[nrev];
        q = e[nrev];
        if q == T::zero() {
            // Real vector.
            let mut l = nrev;
            h[(nrev, nrev)] = T::one();
            for i in (0..nrev).rev() {
                w = h[(i, i)] - p;
                r = T::zero();
                for j in l..=nrev {
                    r = r + h[(i, j)] * h[(j, nrev)];
                }
                if e[i] < T::zero() {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i] == T::zero() {
                        if w != T::zero() {
                            h[(i, nrev)] = -r / w;
                        } else {
                            h[(i, nrev)] = -r / (eps * norm);
                        }
                    } else {
                        x = h[(i, i + 1)];
                        y = h[(i + 1, i)];
                        q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        let t = (x * s - z * r) / q;
                        h[(i, nrev)] = t;
                        if x.abs() > z.abs() {
                            h[(i + 1, nrev)] = (-r - w * t) / x;
                        } else {
                            h[(i + 1, nrev)] = (-s - y * t) / z;
                        }
                    }
                    let t = h[(i, nrev)].abs();
                    if (eps * t) * t > T::one() {
                        for j in i..=nrev {
                            h[(j, nrev)] = h[(j, nrev)] / t;
                        }
                    }
                }
            }
        } else if q < T::zero() {
            // Complex vector, stored in columns nrev-1 (real) and nrev (imag).
            let mut l = nrev - 1;
            if h[(nrev, nrev - 1)].abs() > h[(nrev - 1, nrev)].abs() {
                h[(nrev - 1, nrev - 1)] = q / h[(nrev, nrev - 1)];
                h[(nrev - 1, nrev)] = -(h[(nrev, nrev)] - p) / h[(nrev, nrev - 1)];
            } else {
                let (cr, ci) = cdiv(T::zero(), -h[(nrev - 1, nrev)], h[(nrev - 1, nrev - 1)] - p, q);
                h[(nrev - 1, nrev - 1)] = cr;
                h[(nrev - 1, nrev)] = ci;
            }
            h[(nrev, nrev - 1)] = T::zero();
            h[(nrev, nrev)] = T::one();
            if nrev >= 2 {
                for i in (0..=(nrev - 2)).rev() {
                    let mut ra = T::zero();
                    let mut sa = T::zero();
                    for j in l..=nrev {
                        ra = ra + h[(i, j)] * h[(j, nrev - 1)];
                        sa = sa + h[(i, j)] * h[(j, nrev)];
                    }
                    w = h[(i, i)] - p;
                    if e[i] < T::zero() {
                        z = w;
                        r = ra;
                        s = sa;
                    } else {
                        l = i;
                        if e[i] == T::zero() {
                            let (cr, ci) = cdiv(-ra, -sa, w, q);
                            h[(i, nrev - 1)] = cr;
                            h[(i, nrev)] = ci;
                        } else {
                            x = h[(i, i + 1)];
                            y = h[(i + 1, i)];
                            let mut vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                            let vi = (d[i] - p) * T::lit(2.0) * q;
                            if vr == T::zero() && vi == T::zero() {
                                vr = eps
                                    * norm
                                    * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                            }
                            let (cr, ci) = cdiv(
                                x * r - z * ra + q * sa,
                                x * s - z * sa - q * ra,
                                vr,
                                vi,
                            );
                            h[(i, nrev - 1)] = cr;
                            h[(i, nrev)] = ci;
                            if x.abs() > z.abs() + q.abs() {
                                h[(i + 1, nrev - 1)] =
                                    (-ra - w * h[(i, nrev - 1)] + q * h[(i, nrev)]) / x;
                                h[(i + 1, nrev)] =
                                    (-sa - w * h[(i, nrev)] - q * h[(i, nrev - 1)]) / x;
                            } else {
                                let (cr, ci) =
                                    cdiv(-r - y * h[(i, nrev - 1)], -s - y * h[(i, nrev)], z, q);
                                h[(i + 1, nrev - 1)] = cr;
                                h[(i + 1, nrev)] = ci;
                            }
                        }
                        let t = h[(i, nrev - 1)].abs().max(h[(i, nrev)].abs());
                        if (eps * t) * t > T::one() {
                            for j in i..=nrev {
                                h[(j, nrev - 1)] = h[(j, nrev - 1)] / t;
                                h[(j, nrev)] = h[(j, nrev)] / t;
                            }
                        }
                    }
                }
            }
        }
    }

    // Back-transform to eigenvectors of the original matrix.
    for j in (0..nn).rev() {
        for i in 0..nn {
            z = T::zero();
            for k in 0..=j {
                z = z + v[(i, k)] * h[(k, j)];
            }
            v[(i, j)] = z;
        }
    }

    Ok(Eigen { re: d, im: e, vectors: v.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, vals: &[f64]) -> Mat<f64> {
        Mat::from_rows(rows, cols, vals)
    }

    #[test]
    fn lu_solve_and_inverse_roundtrip() {
        let a = mat(3, 3, &[2.0, 1.0, 1.0, 1.0, 3.0, 2.0, 1.0, 0.0, 0.5]);
        let b = [1.0, 2.0, 3.0];
        let x = a.solve(&b).unwrap();
        let back = a.matvec(&x);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        // Oracle: direct cofactor expansion of the same 3x3.
        let v = [3.0, 1.0, -2.0, 0.5, 2.0, 1.0, -1.0, 0.0, 4.0];
        let a = mat(3, 3, &v);
        let cof = v[0] * (v[4] * v[8] - v[5] * v[7]) - v[1] * (v[3] * v[8] - v[5] * v[6])
            + v[2] * (v[3] * v[7] - v[4] * v[6]);
        assert!((a.det() - cof).abs() < 1e-12);
    }

    #[test]
    fn eigen_2x2_symmetric_known_values() {
        // [[0,1],[1,0]] has eigenvalues -1, 1 with vectors (1,-1), (1,1)/sqrt2.
        let a = mat(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = eigen(&a).unwrap();
        assert!((e.re[0] + 1.0).abs() < 1e-14);
        assert!((e.re[1] - 1.0).abs() < 1e-14);
        assert_eq!(e.im, vec![0.0, 0.0]);
        for k in 0..2 {
            let v = e.vectors.column(k);
            let av = a.matvec(&v);
            for i in 0..2 {
                assert!((av[i] - e.re[k] * v[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn eigen_2x2_complex_pair_detected() {
        let a = mat(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let e = eigen(&a).unwrap();
        assert!((e.im[0] - 1.0).abs() < 1e-14);
        assert!((e.im[1] + 1.0).abs() < 1e-14);
        assert!(e.re[0].abs() < 1e-14);
    }

    #[test]
    fn eigen_2x2_near_cancellation_uses_product_form() {
        // Eigenvalues 1e-8 and 1.0; the naive small root loses digits.
        let a = mat(2, 2, &[1.0, 1.0, 0.0, 1e-8]);
        let e = eigen(&a).unwrap();
        assert!((e.re[0] - 1e-8).abs() < 1e-20);
        assert!((e.re[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_qr_reproduces_known_spectrum() {
        // Companion-style matrix with eigenvalues 1, 2, 3:
        // x^3 - 6x^2 + 11x - 6.
        let a = mat(3, 3, &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let e = eigen(&a).unwrap();
        let mut re = e.re.clone();
        re.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
        }
        for k in 0..3 {
            assert_eq!(e.im[k], 0.0);
            let v = e.vectors.column(k);
            let av = a.matvec(&v);
            let scale = norm2(&v);
            for i in 0..3 {
                assert!((av[i] - e.re[k] * v[i]).abs() / scale < 1e-9);
            }
        }
    }

    #[test]
    fn eigen_qr_handles_similarity_conjugated_diagonal() {
        // B = S D S^-1 with D = diag(-2, 0.5, 1, 4); spectrum must survive.
        let s = mat(
            4,
            4,
            &[
                1.0, 0.2, -0.3, 0.1, 0.0, 1.0, 0.4, -0.2, 0.5, -0.1, 1.0, 0.3, -0.2, 0.3, 0.1, 1.0,
            ],
        );
        let d = mat(
            4,
            4,
            &[
                -2.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 4.0,
            ],
        );
        let b = s.matmul(&d).matmul(&s.inverse().unwrap());
        let e = eigen(&b).unwrap();
        let mut re = e.re.clone();
        re.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in re.iter().zip([-2.0, 0.5, 1.0, 4.0]) {
            assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
        }
    }

    #[test]
    fn eigen_agrees_between_closed_form_and_qr_path() {
        // Embed a 2x2 in a block-diagonal 3x3 so the QR path sees it; the
        // shared eigenvalues must agree with the closed form to 1e-12.
        let a2 = mat(2, 2, &[0.3, 0.7, 0.2, -0.4]);
        let a3 = mat(3, 3, &[0.3, 0.7, 0.0, 0.2, -0.4, 0.0, 0.0, 0.0, 9.0]);
        let e2 = eigen(&a2).unwrap();
        let e3 = eigen(&a3).unwrap();
        let mut r2 = e2.re.clone();
        r2.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut r3: Vec<f64> = e3.re.iter().cloned().filter(|v| (v - 9.0).abs() > 1.0).collect();
        r3.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (a, b) in r2.iter().zip(&r3) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
