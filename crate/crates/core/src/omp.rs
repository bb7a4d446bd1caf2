//! Dictionaries, sparse representation storage and Orthogonal Matching Pursuit.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, dot, norm2, Mat};

/// Tolerance on atom norms accepted by [`Dictionary::new`].
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Gram pivots below this are treated as linear dependence among selected atoms.
const PIVOT_TOL: f64 = 1e-10;

/// Sparsity level used when none is given: `max(1, round(0.2·√m))`, halves rounded up.
pub fn default_sparsity(m: usize) -> usize {
    let s = libm::floor(0.2 * libm::sqrt(m as f64) + 0.5) as usize;
    s.max(1)
}

/// An `m×n` matrix with unit-norm columns (atoms).
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Mat,
}

impl Dictionary {
    /// Wraps `atoms`, checking every column is unit norm.
    pub fn new(atoms: Mat) -> Result<Self> {
        for j in 0..atoms.cols() {
            let norm = norm2(atoms.col(j));
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::NotNormalized { index: j, norm });
            }
        }
        Ok(Self { atoms })
    }

    /// Normalizes every column of `atoms`. Zero columns are rejected.
    pub fn normalized(mut atoms: Mat) -> Result<Self> {
        for j in 0..atoms.cols() {
            let norm = linalg::normalize(atoms.col_mut(j));
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::NotNormalized { index: j, norm });
            }
        }
        Ok(Self { atoms })
    }

    /// I.i.d. standard normal entries, columns normalized. Deterministic in `seed`.
    pub fn random(m: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut atoms = Mat::zeros(m, n);
        for j in 0..n {
            loop {
                let col = atoms.col_mut(j);
                col.iter_mut()
                    .for_each(|x| *x = StandardNormal.sample(&mut rng));
                if linalg::normalize(col) > 0.0 {
                    break;
                }
            }
        }
        Self { atoms }
    }

    pub fn dim(&self) -> usize {
        self.atoms.rows()
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.cols()
    }

    pub fn atom(&self, j: usize) -> &[f64] {
        self.atoms.col(j)
    }

    pub fn matrix(&self) -> &Mat {
        &self.atoms
    }

    pub fn into_matrix(self) -> Mat {
        self.atoms
    }

    /// Replaces atom `j`; the caller guarantees `atom` is unit norm.
    pub(crate) fn set_atom(&mut self, j: usize, atom: &[f64]) {
        debug_assert!((norm2(atom) - 1.0).abs() <= UNIT_NORM_TOL);
        self.atoms.col_mut(j).copy_from_slice(atom);
    }
}

/// Support and coefficients of one sparse column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseColumn {
    /// Atom indices in selection order.
    pub support: Vec<usize>,
    pub coeffs: Vec<f64>,
}

impl SparseColumn {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.coeffs.iter().copied())
    }

    fn drop_zeros(&mut self) {
        let mut k = 0;
        for i in 0..self.support.len() {
            if self.coeffs[i] != 0.0 {
                self.support[k] = self.support[i];
                self.coeffs[k] = self.coeffs[i];
                k += 1;
            }
        }
        self.support.truncate(k);
        self.coeffs.truncate(k);
    }
}

/// Column-wise sparse storage of an `n×N` representation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    n: usize,
    pub(crate) columns: Vec<SparseColumn>,
}

impl SparseCode {
    pub fn new(n: usize, columns: Vec<SparseColumn>) -> Result<Self> {
        for (j, col) in columns.iter().enumerate() {
            if col.support.len() != col.coeffs.len() {
                return Err(Error::Config(format!(
                    "column {j}: support and coefficient lengths differ"
                )));
            }
            for (a, &i) in col.support.iter().enumerate() {
                if i >= n || col.support[..a].contains(&i) {
                    return Err(Error::Config(format!(
                        "column {j}: atom index {i} out of range or repeated"
                    )));
                }
            }
        }
        let mut code = Self { n, columns };
        code.columns.iter_mut().for_each(SparseColumn::drop_zeros);
        Ok(code)
    }

    pub fn zeros(n: usize, n_cols: usize) -> Self {
        Self {
            n,
            columns: vec![SparseColumn::default(); n_cols],
        }
    }

    /// Number of rows (atoms).
    pub fn n_rows(&self) -> usize {
        self.n
    }

    /// Number of columns (signals).
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &SparseColumn {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseColumn] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseColumn::len).sum()
    }

    /// `‖x_i‖₂` for every row `i`.
    pub fn row_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.n];
        for col in &self.columns {
            for (i, c) in col.iter() {
                sq[i] += c * c;
            }
        }
        sq.into_iter().map(libm::sqrt).collect()
    }

    pub fn to_dense(&self) -> Mat {
        let mut x = Mat::zeros(self.n, self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            for (i, c) in col.iter() {
                x[(i, j)] = c;
            }
        }
        x
    }

    /// `D·X` as a dense `m×N` matrix.
    pub fn reconstruct(&self, dict: &Dictionary) -> Mat {
        let mut out = Mat::zeros(dict.dim(), self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            let dst = out.col_mut(j);
            for (i, c) in col.iter() {
                axpy(c, dict.atom(i), dst);
            }
        }
        out
    }
}

/// Greedy OMP: selects up to `s` atoms by maximal `|⟨r, d_j⟩|` (lowest index
/// on ties) and refits all coefficients by least squares after each pick.
///
/// Stops early once `‖r‖ ≤ residual_tol`, when no atom correlates with the
/// residual, or when the next pick would make the selected atoms linearly
/// dependent. Exact zero coefficients are dropped from the result.
pub fn omp_encode(y: &[f64], dict: &Dictionary, s: usize, residual_tol: f64) -> Result<SparseColumn> {
    let m = dict.dim();
    if y.len() != m {
        return Err(Error::Dimension {
            what: "signal length",
            expected: m,
            got: y.len(),
        });
    }
    if s == 0 || !(residual_tol >= 0.0) {
        return Err(Error::Config("omp needs s >= 1 and residual_tol >= 0".into()));
    }
    if s > m {
        return Err(Error::SparsityTooLarge { s, m });
    }

    let mut support: Vec<usize> = Vec::with_capacity(s);
    let mut coeffs: Vec<f64> = Vec::new();
    let mut residual = y.to_vec();
    let mut rnorm = norm2(&residual);

    for _ in 0..s.min(dict.n_atoms()) {
        if rnorm <= residual_tol {
            break;
        }
        let mut best = None;
        let mut best_abs = 0.0;
        for j in 0..dict.n_atoms() {
            if support.contains(&j) {
                continue;
            }
            let c = dot(dict.atom(j), &residual).abs();
            if c > best_abs {
                best_abs = c;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };

        support.push(j);
        let Some(fit) = least_squares(y, dict, &support) else {
            support.pop();
            break;
        };
        let mut r = y.to_vec();
        for (&i, &c) in support.iter().zip(&fit) {
            axpy(-c, dict.atom(i), &mut r);
        }
        coeffs = fit;
        residual = r;
        rnorm = norm2(&residual);
    }

    let mut col = SparseColumn { support, coeffs };
    col.drop_zeros();
    Ok(col)
}

/// Least-squares coefficients of `y` on the selected atoms, via the normal
/// equations plus one step of iterative refinement.
fn least_squares(y: &[f64], dict: &Dictionary, support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut gram = vec![0.0; k * k];
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate().take(a + 1) {
            let g = dot(dict.atom(i), dict.atom(j));
            gram[a * k + b] = g;
            gram[b * k + a] = g;
        }
    }
    let l = linalg::cholesky(&gram, k, PIVOT_TOL)?;
    let rhs: Vec<f64> = support.iter().map(|&i| dot(dict.atom(i), y)).collect();
    let mut coef = linalg::cholesky_apply(&l, k, &rhs);

    let mut r = y.to_vec();
    for (&i, &c) in support.iter().zip(&coef) {
        axpy(-c, dict.atom(i), &mut r);
    }
    let g: Vec<f64> = support.iter().map(|&i| dot(dict.atom(i), &r)).collect();
    let delta = linalg::cholesky_apply(&l, k, &g);
    coef.iter_mut().zip(&delta).for_each(|(c, d)| *c += d);
    Some(coef)
}

/// Default stopping tolerance for a signal: `1e-12·‖y‖₂`.
pub fn default_residual_tol(y: &[f64]) -> f64 {
    1e-12 * norm2(y)
}

/// Column-wise [`omp_encode`]. A `residual_tol` of `None` uses
/// [`default_residual_tol`] per column.
pub fn omp_encode_batch(
    y: &Mat,
    dict: &Dictionary,
    s: usize,
    residual_tol: Option<f64>,
) -> Result<SparseCode> {
    if y.rows() != dict.dim() {
        return Err(Error::Dimension {
            what: "signal dimension",
            expected: dict.dim(),
            got: y.rows(),
        });
    }
    let columns = (0..y.cols())
        .map(|j| {
            let yj = y.col(j);
            let tol = residual_tol.unwrap_or_else(|| default_residual_tol(yj));
            omp_encode(yj, dict, s, tol).map_err(|e| Error::Column {
                index: j,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseCode {
        n: dict.n_atoms(),
        columns,
    })
}
