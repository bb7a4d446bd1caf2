//! Dense kernels used by the learning loop.
//!
//! [`Mat`] stores entries in column-major order: signals and atoms are
//! columns, so every hot loop walks contiguous memory.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::LinalgError;

pub const DEFAULT_SVD_TOL: f64 = 1e-10;
pub const DEFAULT_SVD_MAX_ITER: usize = 1000;

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of rows, mostly for tests and small literals.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(LinalgError::Shape {
                    expected: c,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            if col.len() != rows {
                return Err(LinalgError::Shape {
                    expected: rows,
                    got: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copies the listed columns into a new matrix, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Mat {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Mat {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// `y = self * x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        y.fill(0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), y);
            }
        }
    }

    /// `y = selfᵀ * x`
    pub fn tr_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = dot(self.col(j), x);
        }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Mat) -> Result<Mat, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::Shape {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let (src, dst) = (rhs.col(j), &mut out.data[j * self.rows..(j + 1) * self.rows]);
            for (k, &b) in src.iter().enumerate() {
                if b != 0.0 {
                    axpy(b, self.col(k), dst);
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Mat) -> Result<Mat, LinalgError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LinalgError::Shape {
                expected: self.data.len(),
                got: rhs.data.len(),
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Scales `v` to unit length; returns the original norm. Zero vectors are left alone.
pub fn normalize(v: &mut [f64]) -> f64 {
    let nrm = norm2(v);
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Sum of squared entries.
pub fn fro_norm_sq(m: &Mat) -> f64 {
    dot(&m.data, &m.data)
}

/// Dominant singular triplet `R ≈ sigma * u * vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Triplet {
    pub u: Vec<f64>,
    pub sigma: f64,
    pub v: Vec<f64>,
}

impl Rank1Triplet {
    fn zero(m: usize, p: usize) -> Self {
        let mut u = vec![0.0; m];
        let mut v = vec![0.0; p];
        u[0] = 1.0;
        v[0] = 1.0;
        Self { u, sigma: 0.0, v }
    }

    /// Flips `u` and `v` together so the first nonzero entry of `u` is positive.
    fn canonicalize(&mut self) {
        if let Some(&first) = self.u.iter().find(|x| **x != 0.0) {
            if first < 0.0 {
                self.u.iter_mut().for_each(|x| *x = -*x);
                self.v.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
}

/// Best rank-1 approximation by power iteration on `RᵀR`.
///
/// The start vector is `Rᵀc` where `c` is the largest-norm column of `R`
/// (lowest index on ties), so the result is a pure function of `R`.
/// Converged when `‖Rᵀu − σv‖ ≤ tol·max(1, σ)`; `Rv = σu` holds exactly by
/// construction. An all-zero `R` yields `σ = 0, u = e₁, v = e₁`.
///
/// On non-convergence the error carries the best iterate seen, which
/// callers may still use: its `σ = uᵀRv` is a valid lower bound on `σ₁`.
pub fn rank1_svd(r: &Mat, tol: f64, max_iter: usize) -> Result<Rank1Triplet, LinalgError> {
    let (m, p) = (r.rows(), r.cols());
    if m == 0 || p == 0 {
        return Err(LinalgError::Empty);
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(LinalgError::InvalidParameter);
    }

    let mut best_col = 0;
    let mut best_norm = -1.0;
    for j in 0..p {
        let nrm = dot(r.col(j), r.col(j));
        if nrm > best_norm {
            best_norm = nrm;
            best_col = j;
        }
    }
    if best_norm <= 0.0 {
        return Ok(Rank1Triplet::zero(m, p));
    }

    let mut u: Vec<f64> = r.col(best_col).to_vec();
    normalize(&mut u);
    let mut v = vec![0.0; p];
    r.tr_mul_vec(&u, &mut v);
    if normalize(&mut v) == 0.0 {
        // Cannot happen for a nonzero column, but keep v well defined.
        v[best_col] = 1.0;
    }

    let mut z = vec![0.0; p];
    let mut best: Option<(f64, Rank1Triplet)> = None;
    for _ in 0..max_iter {
        r.mul_vec(&v, &mut u);
        let sigma = normalize(&mut u);
        if sigma == 0.0 {
            // v landed in the null space; only reachable through rounding.
            return Ok(Rank1Triplet::zero(m, p));
        }
        r.tr_mul_vec(&u, &mut z);
        let residual = libm::sqrt(
            z.iter()
                .zip(&v)
                .map(|(zi, vi)| (zi - sigma * vi) * (zi - sigma * vi))
                .sum::<f64>(),
        );
        if residual <= tol * sigma.max(1.0) {
            let mut t = Rank1Triplet {
                u,
                sigma,
                v,
            };
            t.canonicalize();
            return Ok(t);
        }
        if best.as_ref().is_none_or(|(res, _)| residual < *res) {
            best = Some((
                residual,
                Rank1Triplet {
                    u: u.clone(),
                    sigma,
                    v: v.clone(),
                },
            ));
        }
        v.copy_from_slice(&z);
        normalize(&mut v);
    }

    let (residual, mut best) = best.expect("max_iter >= 1");
    best.canonicalize();
    Err(LinalgError::NotConverged {
        best,
        residual,
    })
}

/// Like [`rank1_svd`] but accepts the best iterate on non-convergence.
pub fn rank1_approx(r: &Mat, tol: f64, max_iter: usize) -> Result<Rank1Triplet, LinalgError> {
    match rank1_svd(r, tol, max_iter) {
        Err(LinalgError::NotConverged { best, .. }) => Ok(best),
        other => other,
    }
}

/// Solves `G a = b` for symmetric positive definite `G` (column-major `k×k`)
/// by Cholesky. Returns `None` when a pivot falls below `pivot_tol`.
pub fn cholesky_solve(g: &[f64], k: usize, b: &[f64], pivot_tol: f64) -> Option<Vec<f64>> {
    let l = cholesky(g, k, pivot_tol)?;
    Some(cholesky_apply(&l, k, b))
}

/// Lower Cholesky factor, column-major. `None` on a pivot `≤ pivot_tol`.
pub fn cholesky(g: &[f64], k: usize, pivot_tol: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for j in 0..k {
        let mut d = g[j * k + j];
        for p in 0..j {
            d -= l[p * k + j] * l[p * k + j];
        }
        if !(d > pivot_tol) {
            return None;
        }
        let djj = libm::sqrt(d);
        l[j * k + j] = djj;
        for i in j + 1..k {
            let mut s = g[j * k + i];
            for p in 0..j {
                s -= l[p * k + i] * l[p * k + j];
            }
            l[j * k + i] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the factor from [`cholesky`].
pub fn cholesky_apply(l: &[f64], k: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..k {
        let mut s = y[i];
        for p in 0..i {
            s -= l[p * k + i] * y[p];
        }
        y[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = y[i];
        for p in i + 1..k {
            s -= l[i * k + p] * y[p];
        }
        y[i] = s / l[i * k + i];
    }
    y
}
