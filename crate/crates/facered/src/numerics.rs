//! Deterministic dense symmetric linear algebra with an explicit tolerance
//! policy.
//!
//! Every spectral decision in the crate (rank, kernel, PSD projection)
//! routes through this module so that facial-reduction steps are
//! reproducible. The eigensolver is cyclic Jacobi for orders up to 64 and
//! Householder tridiagonalization followed by implicitly shifted QL beyond
//! that; both are deterministic and dependency-free.

use crate::{Error, Result};
use std::fmt;

/// Default absolute rank threshold: `n * 1e-12 * max(|sigma_1|, 1)`.
///
/// One global policy; callers may override per call.
pub fn default_rank_tol(n: usize, sigma1: f64) -> f64 {
    n as f64 * 1e-12 * sigma1.abs().max(1.0)
}

// ---------------------------------------------------------------------------
// Dense rectangular matrix
// ---------------------------------------------------------------------------

/// Dense row-major rectangular matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Column vector from a slice.
    pub fn column(v: &[f64]) -> Self {
        let mut m = Mat::zeros(v.len(), 1);
        for (i, &x) in v.iter().enumerate() {
            m[(i, 0)] = x;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `self^T * other`.
    pub fn tr_matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "tr_matmul shape");
        let mut out = Mat::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self[(k, i)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self^T * v`.
    pub fn tr_apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for j in 0..self.cols {
                out[j] += self[(i, j)] * vi;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut m = self.clone();
        for x in &mut m.data {
            *x *= s;
        }
        m
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        m
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        m
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &x| a.max(x.abs()))
    }

    /// Keeps the listed columns, in order.
    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// Symmetric matrix
// ---------------------------------------------------------------------------

/// Dense real symmetric matrix; entries are symmetrized on construction and
/// stay exactly equal across the diagonal.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix. Order 0 is allowed as the degenerate endpoint of a
    /// full-rank facial reduction step.
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    /// Builds from arbitrary square data, averaging across the diagonal.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (f(i, j) + f(j, i));
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        SymMatrix::from_fn(n, |i, j| rows[i][j])
    }

    pub fn from_mat(m: &Mat) -> Self {
        assert_eq!(m.rows(), m.cols(), "symmetric matrix must be square");
        SymMatrix::from_fn(m.rows(), |i, j| m[(i, j)])
    }

    /// Rank-one matrix `v v^T`.
    pub fn outer(v: &[f64]) -> Self {
        let n = v.len();
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j];
            }
        }
        m
    }

    /// Symmetric unit matrix with ones at `(i,j)` and `(j,i)`, so that
    /// `<basis(i,j), X> = 2 X_ij` off the diagonal and `X_ii` on it.
    pub fn sym_unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        m.set(i, j, 1.0);
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i,j)` and `(j,i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        m
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        m
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        let mut m = self.clone();
        for x in &mut m.data {
            *x *= s;
        }
        m
    }

    pub fn add_assign_scaled(&mut self, other: &SymMatrix, s: f64) {
        assert_eq!(self.n, other.n);
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += s * y;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Trace inner product `<X, Y> = sum_ij X_ij Y_ij`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(x, y)| x * y).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &x| a.max(x.abs()))
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    /// `V^T M V` for `V` of shape `n x k`; the reduced matrix of order `k`.
    pub fn compress(&self, v: &Mat) -> SymMatrix {
        assert_eq!(v.rows(), self.n);
        let mv = self.to_mat().matmul(v);
        SymMatrix::from_mat(&v.tr_matmul(&mv))
    }

    /// `V M V^T` for `V` of shape `n x k` and `M` of order `k`.
    pub fn expand(&self, v: &Mat) -> SymMatrix {
        assert_eq!(v.cols(), self.n);
        let vm = v.matmul(&self.to_mat());
        SymMatrix::from_mat(&vm.matmul(&v.transpose()))
    }

    /// Embeds this matrix into order `n` at the index subset `idx`.
    pub fn pad_to(&self, n: usize, idx: &[usize]) -> SymMatrix {
        assert_eq!(idx.len(), self.n);
        let mut out = SymMatrix::zeros(n);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.data[i * n + j] = self.get(a, b);
            }
        }
        out
    }

    /// Principal submatrix on the index subset `idx`.
    pub fn principal_submatrix(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn eig(&self) -> Spectrum {
        sym_eig(self)
    }

    /// Smallest eigenvalue; `+inf` for the empty matrix (vacuously PSD).
    pub fn min_eig(&self) -> f64 {
        self.eig().values.last().copied().unwrap_or(f64::INFINITY)
    }
}

// ---------------------------------------------------------------------------
// Symmetric vectorization
// ---------------------------------------------------------------------------

/// Length of the symmetric vectorization of an order-`n` matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Columnwise upper-triangular vectorization with off-diagonals scaled by
/// `sqrt(2)`, so that `dot(svec(X), svec(Y)) = <X, Y>`.
pub fn sym_to_svec(m: &SymMatrix) -> Vec<f64> {
    let n = m.order();
    let s2 = 2.0f64.sqrt();
    let mut out = Vec::with_capacity(svec_len(n));
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                out.push(m.get(i, j));
            } else {
                out.push(s2 * m.get(i, j));
            }
        }
    }
    out
}

/// Inverse of [`sym_to_svec`].
pub fn svec_to_sym(v: &[f64]) -> SymMatrix {
    // n(n+1)/2 = len  =>  n = (sqrt(8 len + 1) - 1) / 2
    let n = (((8 * v.len() + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    assert_eq!(svec_len(n), v.len(), "not a triangular length");
    let s2 = 2.0f64.sqrt();
    let mut m = SymMatrix::zeros(n);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m.set(i, j, v[k]);
            } else {
                m.set(i, j, v[k] / s2);
            }
            k += 1;
        }
    }
    m
}

/// Position of the `(i, j)` entry (for `i <= j`) in [`sym_to_svec`] order.
pub fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix {} [", self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", &self.data[i * self.n..(i + 1) * self.n])?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// Eigendecomposition
// ---------------------------------------------------------------------------

/// Spectral decomposition `M = Q diag(values) Q^T` with eigenvalues sorted
/// descending and orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl Spectrum {
    /// Reassembles `Q diag(f(lambda_i)) Q^T`.
    pub fn reassemble(&self, f: impl Fn(usize, f64) -> f64) -> SymMatrix {
        let n = self.vectors.rows();
        let mut out = SymMatrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(k, lam);
            if w == 0.0 {
                continue;
            }
            let q = self.vectors.col(k);
            for i in 0..n {
                for j in 0..n {
                    out.data[i * n + j] += w * q[i] * q[j];
                }
            }
        }
        out
    }
}

const JACOBI_MAX_ORDER: usize = 64;

/// Eigendecomposition of a symmetric matrix.
///
/// Always converges for symmetric input; an iteration-cap breach is treated
/// as a defect and panics.
pub fn sym_eig(m: &SymMatrix) -> Spectrum {
    let n = m.order();
    let (mut values, mut vectors) = if n <= JACOBI_MAX_ORDER {
        jacobi_eig(m)
    } else {
        tridiag_ql_eig(m)
    };
    // Sort descending; stable so equal eigenvalues keep the earlier index.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .expect("finite eigenvalues")
    });
    values = order.iter().map(|&i| values[i]).collect();
    vectors = vectors.select_cols(&order);
    Spectrum { values, vectors }
}

fn jacobi_eig(m: &SymMatrix) -> (Vec<f64>, Mat) {
    let n = m.order();
    let mut a = m.to_mat();
    let mut v = Mat::identity(n);
    let scale = m.fro_norm().max(1.0);
    let stop = 1e-15 * scale;
    let max_sweeps = 100;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if (2.0 * off).sqrt() <= stop {
            let values = (0..n).map(|i| a[(i, i)]).collect();
            return (values, v);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    panic!("Jacobi eigensolver failed to converge in {max_sweeps} sweeps (defect)");
}

/// Householder tridiagonalization with accumulation, then implicitly
/// shifted QL on the tridiagonal form.
fn tridiag_ql_eig(m: &SymMatrix) -> (Vec<f64>, Mat) {
    let n = m.order();
    let mut v = m.to_mat();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    // Householder reduction to tridiagonal form.
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[(k, j)] -= upd;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    // Accumulate transformations.
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[(k, j)] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;

    // Implicit QL with Wilkinson-style shifts.
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON / 2.0;
    let mut f_acc = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut mm = l;
        while mm < n {
            if e[mm].abs() <= eps * tst1 {
                break;
            }
            mm += 1;
        }
        if mm > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    panic!("QL eigensolver failed to converge in 64 iterations (defect)");
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f_acc += h;

                p = d[mm];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..mm).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f_acc;
        e[l] = 0.0;
    }
    (d, v)
}

// ---------------------------------------------------------------------------
// Rank, kernels, and PSD projections
// ---------------------------------------------------------------------------

/// Number of values exceeding the threshold in magnitude.
///
/// Values must be sorted descending by magnitude. With an explicit `tol`
/// the threshold is `tol * max(|v_1|, 1)`; by default it is the global
/// policy [`default_rank_tol`].
pub fn numerical_rank(values: &[f64], tol: Option<f64>) -> usize {
    if values.is_empty() {
        return 0;
    }
    let v1 = values[0].abs();
    let thresh = match tol {
        Some(t) => t * v1.max(1.0),
        None => default_rank_tol(values.len(), v1),
    };
    values.iter().filter(|v| v.abs() > thresh).count()
}

fn kernel_threshold(spec: &Spectrum, tol: Option<f64>) -> f64 {
    let v1 = spec.values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    match tol {
        Some(t) => t * v1.max(1.0),
        None => default_rank_tol(spec.values.len(), v1),
    }
}

/// Orthonormal basis of the numerical kernel of a symmetric matrix.
pub fn nullspace_basis(m: &SymMatrix, tol: Option<f64>) -> Mat {
    let spec = sym_eig(m);
    let thresh = kernel_threshold(&spec, tol);
    let idx: Vec<usize> = (0..spec.values.len())
        .filter(|&i| spec.values[i].abs() <= thresh)
        .collect();
    spec.vectors.select_cols(&idx)
}

/// Orthonormal basis of the numerical range of a symmetric matrix.
pub fn range_basis(m: &SymMatrix, tol: Option<f64>) -> Mat {
    let spec = sym_eig(m);
    let thresh = kernel_threshold(&spec, tol);
    let idx: Vec<usize> = (0..spec.values.len())
        .filter(|&i| spec.values[i].abs() > thresh)
        .collect();
    spec.vectors.select_cols(&idx)
}

/// Frobenius projection onto the PSD cone (eigenvalue clipping at zero).
pub fn nearest_psd(m: &SymMatrix) -> SymMatrix {
    let spec = sym_eig(m);
    spec.reassemble(|_, lam| lam.max(0.0))
}

/// Frobenius projection onto `S^n_+ ∩ S^n_c`: project onto the centered
/// subspace first, then clip eigenvalues at zero.
pub fn nearest_psd_centered(m: &SymMatrix) -> SymMatrix {
    let n = m.order();
    let j = centering_projector(n);
    let centered = m.compress(&j); // J M J since J is symmetric n x n
    nearest_psd(&centered)
}

/// `J = I - (1/n) e e^T`, the orthogonal projector onto `e^perp`.
pub fn centering_projector(n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0 - 1.0 / n as f64
        } else {
            -1.0 / n as f64
        }
    })
}

/// Keeps the `k` largest positive eigenvalues' spectral components.
///
/// Ties at the cut keep the earlier index of the deterministic descending
/// sort.
pub fn best_psd_rank_k(m: &SymMatrix, k: usize) -> SymMatrix {
    let spec = sym_eig(m);
    spec.reassemble(|i, lam| if i < k && lam > 0.0 { lam } else { 0.0 })
}

/// Relative PSD check: `lambda_min >= -tol * max(1, ||M||_F)`.
pub fn is_psd(m: &SymMatrix, tol: f64) -> bool {
    m.min_eig() >= -tol * m.fro_norm().max(1.0)
}

// ---------------------------------------------------------------------------
// Least squares and small SVD
// ---------------------------------------------------------------------------

/// Minimum-residual solution of `A x ~= b` by Householder QR, falling back
/// to an eigenvalue pseudoinverse of the normal equations when `A` is
/// numerically rank-deficient.
pub fn solve_least_squares(a: &Mat, b: &[f64]) -> Vec<f64> {
    assert_eq!(a.rows(), b.len(), "least squares shape");
    let m = a.rows();
    let k = a.cols();
    if k == 0 {
        return Vec::new();
    }
    if m >= k {
        if let Some(x) = qr_least_squares(a, b) {
            return x;
        }
    }
    // Rank-deficient or underdetermined: normal equations + pseudoinverse.
    let g = SymMatrix::from_mat(&a.tr_matmul(a));
    let rhs = a.tr_apply(b);
    pinv_apply(&g, &rhs, None)
}

fn qr_least_squares(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let m = a.rows();
    let k = a.cols();
    let mut r = a.clone();
    let mut qtb = b.to_vec();
    let mut diag_max = 0.0f64;
    for j in 0..k {
        // Householder vector for column j.
        let mut norm = 0.0;
        for i in j..m {
            norm = r[(i, j)].hypot(norm);
        }
        if norm == 0.0 {
            return None;
        }
        let alpha = if r[(j, j)] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m - j];
        v[0] = r[(j, j)] - alpha;
        for i in (j + 1)..m {
            v[i - j] = r[(i, j)];
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in j..k {
                let mut s = 0.0;
                for i in j..m {
                    s += v[i - j] * r[(i, col)];
                }
                s *= 2.0 / vnorm2;
                for i in j..m {
                    r[(i, col)] -= s * v[i - j];
                }
            }
            let mut s = 0.0;
            for i in j..m {
                s += v[i - j] * qtb[i];
            }
            s *= 2.0 / vnorm2;
            for i in j..m {
                qtb[i] -= s * v[i - j];
            }
        }
        r[(j, j)] = alpha;
        diag_max = diag_max.max(alpha.abs());
    }
    // Detect rank deficiency on the R diagonal.
    for j in 0..k {
        if r[(j, j)].abs() <= 1e-12 * diag_max.max(1.0) {
            return None;
        }
    }
    let mut x = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = qtb[j];
        for col in (j + 1)..k {
            s -= r[(j, col)] * x[col];
        }
        x[j] = s / r[(j, j)];
    }
    Some(x)
}

/// Applies the spectral pseudoinverse of a symmetric matrix to a vector.
pub fn pinv_apply(g: &SymMatrix, rhs: &[f64], tol: Option<f64>) -> Vec<f64> {
    let spec = sym_eig(g);
    let thresh = kernel_threshold(&spec, tol);
    let n = g.order();
    let mut out = vec![0.0; n];
    for (k, &lam) in spec.values.iter().enumerate() {
        if lam.abs() <= thresh {
            continue;
        }
        let q = spec.vectors.col(k);
        let coef = dot(&q, rhs) / lam;
        for i in 0..n {
            out[i] += coef * q[i];
        }
    }
    out
}

/// Compact SVD `Z = U diag(sigma) V^T` with positive singular values only,
/// computed through the symmetric eigendecomposition of the smaller Gram
/// matrix.
pub fn svd_compact(z: &Mat, tol: Option<f64>) -> (Mat, Vec<f64>, Mat) {
    let (m, n) = (z.rows(), z.cols());
    if m <= n {
        let gram = SymMatrix::from_mat(&z.matmul(&z.transpose()));
        let spec = sym_eig(&gram);
        let sig_all: Vec<f64> = spec.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
        let rank = sv_rank(&sig_all, m.max(n), tol);
        let u = spec.vectors.select_cols(&(0..rank).collect::<Vec<_>>());
        let mut v = Mat::zeros(n, rank);
        for k in 0..rank {
            let uk = u.col(k);
            let col = z.tr_apply(&uk);
            for i in 0..n {
                v[(i, k)] = col[i] / sig_all[k];
            }
        }
        (u, sig_all[..rank].to_vec(), v)
    } else {
        let (v, sig, u) = svd_compact(&z.transpose(), tol);
        (u, sig, v)
    }
}

/// Rank cut for Gram-based singular values: the threshold lives on the
/// eigenvalue scale, since squaring costs half the digits at the sigma
/// scale.
fn sv_rank(sigma: &[f64], dim: usize, tol: Option<f64>) -> usize {
    if sigma.is_empty() {
        return 0;
    }
    let l1 = sigma[0] * sigma[0];
    let thresh = match tol {
        Some(t) => t * l1.max(1.0),
        None => default_rank_tol(dim, l1),
    };
    sigma.iter().filter(|s| *s * *s > thresh).count()
}

/// Singular values of a rectangular matrix, descending, computed through
/// the symmetric embedding `[[0, Z], [Z^T, 0]]` whose eigenvalues are
/// `{+sigma_i, -sigma_i, 0}`; this keeps full absolute accuracy for tiny
/// singular values.
pub fn singular_values(z: &Mat) -> Vec<f64> {
    let (m, n) = (z.rows(), z.cols());
    let mut jw = SymMatrix::zeros(m + n);
    for i in 0..m {
        for j in 0..n {
            jw.set(i, m + j, z[(i, j)]);
        }
    }
    let spec = sym_eig(&jw);
    spec.values
        .iter()
        .take(m.min(n))
        .map(|&l| l.max(0.0))
        .collect()
}

/// Full SVD of a square matrix, completing the compact factors to
/// orthogonal ones; zero singular values pair completion columns in a
/// deterministic order.
pub fn svd_square_full(z: &Mat) -> (Mat, Vec<f64>, Mat) {
    assert_eq!(z.rows(), z.cols());
    let n = z.rows();
    let (uc, mut sig, vc) = svd_compact(z, None);
    let u = complete_orthonormal(&uc, n);
    let v = complete_orthonormal(&vc, n);
    sig.resize(n, 0.0);
    (u, sig, v)
}

/// Extends orthonormal columns to a full orthonormal basis of `R^n` by
/// Gram-Schmidt against coordinate vectors in index order.
pub fn complete_orthonormal(cols: &Mat, n: usize) -> Mat {
    assert!(cols.rows() == n || cols.cols() == 0);
    let mut basis: Vec<Vec<f64>> = (0..cols.cols()).map(|j| cols.col(j)).collect();
    let mut i = 0;
    while basis.len() < n && i < n {
        let mut cand = vec![0.0; n];
        cand[i] = 1.0;
        for b in &basis {
            let c = dot(b, &cand);
            for (x, y) in cand.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let norm = norm2(&cand);
        if norm > 1e-8 {
            for x in &mut cand {
                *x /= norm;
            }
            basis.push(cand);
        }
        i += 1;
    }
    assert_eq!(basis.len(), n, "failed to complete orthonormal basis");
    let mut out = Mat::zeros(n, n);
    for (j, b) in basis.iter().enumerate() {
        out.set_col(j, b);
    }
    out
}

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn unit_vector(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

// ---------------------------------------------------------------------------
// Dense matrix text format (test fixtures)
// ---------------------------------------------------------------------------

/// Parses the dense text fixture format: first line `n`, then `n`
/// whitespace-separated rows.
pub fn parse_square_text(s: &str) -> Result<Mat> {
    let mut tokens = Vec::new();
    for (lineno, line) in s.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        for tok in trimmed.split_whitespace() {
            tokens.push((lineno + 1, tok));
        }
    }
    if tokens.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty matrix file".into(),
        });
    }
    let (l0, t0) = tokens[0];
    let n: usize = t0.parse().map_err(|_| Error::Parse {
        line: l0,
        msg: format!("expected matrix order, got {t0:?}"),
    })?;
    if n == 0 {
        return Err(Error::Parse {
            line: l0,
            msg: "matrix order must be positive".into(),
        });
    }
    if tokens.len() != 1 + n * n {
        return Err(Error::Parse {
            line: l0,
            msg: format!(
                "expected {} entries for order {n}, got {}",
                n * n,
                tokens.len() - 1
            ),
        });
    }
    let mut m = Mat::zeros(n, n);
    for (idx, &(line, tok)) in tokens[1..].iter().enumerate() {
        let v: f64 = tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("expected a number, got {tok:?}"),
        })?;
        m[(idx / n, idx % n)] = v;
    }
    Ok(m)
}

/// Parses the dense fixture format and symmetrizes.
pub fn parse_sym_text(s: &str) -> Result<SymMatrix> {
    let m = parse_square_text(s)?;
    Ok(SymMatrix::from_mat(&m))
}

/// Formats a square matrix in the dense fixture format with
/// shortest-round-trip decimals.
pub fn format_square_text(m: &Mat) -> String {
    let mut out = format!("{}\n", m.rows());
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
