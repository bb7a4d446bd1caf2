//! Row-sparsity regularized K-SVD.
//!
//! Minimizes `½‖DX − Y‖²_F + λ Σᵢ φ(‖xᵢ‖₂)` over unit-norm atoms `D` and
//! representations `X` by visiting one (atom, row) pair at a time. Each
//! visit solves its subproblem in closed form from the dominant singular
//! triplet of the atom's residual, restricted to the signals that use the
//! atom. Sparse coding runs once, before the first sweep, so column
//! supports can only shrink.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, dot, fro_norm_sq, Mat, Rank1Triplet};
use crate::omp::{self, Dictionary, SparseCode};

/// Row penalty `φ` applied to `‖xᵢ‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    /// `φ(z) = z`, the ℓ2,1 norm of `X`. Soft-thresholds `σ₁` by `λ`.
    L21,
    /// `φ(z) = [z ≠ 0]`, counting nonzero rows. Keeps a row iff `σ₁² ≥ 2λ`.
    L20,
    /// `φ(z) = min(z, ε)`: only rows with norm below `ε` are penalized at full slope.
    Trunc { epsilon: f64 },
}

impl Regularizer {
    pub fn penalty(&self, z: f64) -> f64 {
        match *self {
            Regularizer::L21 => z,
            Regularizer::L20 => {
                if z != 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Regularizer::Trunc { epsilon } => z.min(epsilon),
        }
    }

    /// Minimizer over `t ≥ 0` of `λφ(t) + ½t² − σt`, where `σ ≥ 0` is the
    /// dominant singular value of the residual. Ties go to the smaller `t`.
    pub fn magnitude(&self, sigma: f64, lambda: f64) -> f64 {
        if !(sigma > 0.0) {
            return 0.0;
        }
        match *self {
            Regularizer::L21 => {
                if sigma >= lambda {
                    sigma - lambda
                } else {
                    0.0
                }
            }
            Regularizer::L20 => {
                if sigma * sigma >= 2.0 * lambda {
                    sigma
                } else {
                    0.0
                }
            }
            Regularizer::Trunc { epsilon } => {
                let low = (sigma - lambda).clamp(0.0, epsilon);
                let high = sigma.max(epsilon);
                let f = |t: f64| lambda * t.min(epsilon) + 0.5 * t * t - sigma * t;
                if f(high) < f(low) {
                    high
                } else {
                    low
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regularizer::L21 => "l21",
            Regularizer::L20 => "l20",
            Regularizer::Trunc { .. } => "trunc",
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            Regularizer::Trunc { epsilon } => Some(epsilon),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Regularizer::Trunc { epsilon } if !(epsilon > 0.0 && epsilon.is_finite()) => {
                Err(Error::Config(format!("epsilon must be positive, got {epsilon}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Penalty weight λ.
    pub lambda: f64,
    /// Number of full passes over the atoms (K).
    pub sweeps: usize,
    /// OMP sparsity s.
    pub sparsity: usize,
    pub regularizer: Regularizer,
    /// Seed of the initial random dictionary.
    pub seed: u64,
    pub svd_tol: f64,
}

impl TrainConfig {
    pub fn new(lambda: f64, sparsity: usize, regularizer: Regularizer) -> Self {
        Self {
            lambda,
            sweeps: 20,
            sparsity,
            regularizer,
            seed: 0,
            svd_tol: linalg::DEFAULT_SVD_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.sweeps == 0 {
            return Err(Error::Config("sweeps must be >= 1".into()));
        }
        if self.sparsity == 0 {
            return Err(Error::Config("sparsity must be >= 1".into()));
        }
        if !(self.svd_tol > 0.0) {
            return Err(Error::Config("svd_tol must be positive".into()));
        }
        self.regularizer.validate()
    }
}

/// Solution of one (atom, row) subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct RowUpdate {
    /// New atom; meaningless when `is_zero`, where the caller keeps its old atom.
    pub atom: Vec<f64>,
    /// Row values over the restricted column set.
    pub row_values: Vec<f64>,
    pub is_zero: bool,
}

impl RowUpdate {
    /// `(u, t·v)` for `t > 0`, otherwise the zero row.
    pub fn from_triplet(triplet: Rank1Triplet, magnitude: f64) -> Self {
        let Rank1Triplet { u, v, .. } = triplet;
        if magnitude > 0.0 {
            let row_values: Vec<f64> = v.iter().map(|x| magnitude * x).collect();
            let is_zero = row_values.iter().all(|x| *x == 0.0);
            Self {
                atom: u,
                row_values,
                is_zero,
            }
        } else {
            Self {
                atom: u,
                row_values: vec![0.0; v.len()],
                is_zero: true,
            }
        }
    }

    pub fn norm(&self) -> f64 {
        linalg::norm2(&self.row_values)
    }
}

/// Closed-form update of one atom and its row for any regularizer.
///
/// Power-iteration non-convergence falls back to the best iterate; the
/// resulting update is still the exact minimizer along that direction pair.
pub fn row_update(
    r: &Mat,
    lambda: f64,
    regularizer: Regularizer,
    svd_tol: f64,
    max_iter: usize,
) -> Result<RowUpdate> {
    let triplet = linalg::rank1_approx(r, svd_tol, max_iter)?;
    let t = regularizer.magnitude(triplet.sigma, lambda);
    Ok(RowUpdate::from_triplet(triplet, t))
}

fn default_update(r: &Mat, lambda: f64, regularizer: Regularizer) -> RowUpdate {
    row_update(
        r,
        lambda,
        regularizer,
        linalg::DEFAULT_SVD_TOL,
        linalg::DEFAULT_SVD_MAX_ITER,
    )
    .expect("residual matrix must be nonempty")
}

/// ℓ2,1 update: `(u₁, (σ₁ − λ)v₁)` when `σ₁ ≥ λ`, else the zero row.
pub fn row_update_l21(r: &Mat, lambda: f64) -> RowUpdate {
    default_update(r, lambda, Regularizer::L21)
}

/// ℓ2,0 update: `(u₁, σ₁v₁)` when `σ₁² ≥ 2λ`, else the zero row.
pub fn row_update_l20(r: &Mat, lambda: f64) -> RowUpdate {
    default_update(r, lambda, Regularizer::L20)
}

/// Truncated-norm update; see [`Regularizer::magnitude`].
pub fn row_update_trunc(r: &Mat, lambda: f64, epsilon: f64) -> RowUpdate {
    default_update(r, lambda, Regularizer::Trunc { epsilon })
}

/// `½‖DX − Y‖²_F + λ Σᵢ φ(‖xᵢ‖₂)`.
pub fn objective(
    dict: &Dictionary,
    x: &SparseCode,
    y: &Mat,
    lambda: f64,
    regularizer: Regularizer,
) -> Result<f64> {
    if y.rows() != dict.dim() || y.cols() != x.n_cols() || x.n_rows() != dict.n_atoms() {
        return Err(Error::Dimension {
            what: "objective operands",
            expected: dict.dim() * x.n_cols(),
            got: y.rows() * y.cols(),
        });
    }
    let err = y.sub(&x.reconstruct(dict))?;
    let penalty: f64 = x.row_norms().into_iter().map(|z| regularizer.penalty(z)).sum();
    Ok(0.5 * fro_norm_sq(&err) + lambda * penalty)
}

/// Learned dictionary and the uniform support set.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub dictionary: Dictionary,
    /// Sorted indices of rows of `X` left nonzero by training.
    pub support_set: Vec<usize>,
    pub config: TrainConfig,
    /// Objective after sparse coding, then after each sweep.
    pub objective_trace: Vec<f64>,
}

/// Training progress reported to an observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainEvent {
    /// Objective right after OMP, before any sweep.
    Initial { objective: f64 },
    /// A row was visited (skipped rows are not reported).
    RowUpdated {
        sweep: usize,
        atom: usize,
        objective: f64,
        zeroed: bool,
    },
    SweepFinished { sweep: usize, objective: f64 },
}

/// Runs sparse coding once and then `cfg.sweeps` regularized K-SVD sweeps.
pub fn train(y: &Mat, init: Dictionary, cfg: &TrainConfig) -> Result<(Model, SparseCode)> {
    train_with_observer(y, init, cfg, |_| {})
}

pub fn train_with_observer(
    y: &Mat,
    init: Dictionary,
    cfg: &TrainConfig,
    mut observer: impl FnMut(&TrainEvent),
) -> Result<(Model, SparseCode)> {
    cfg.validate()?;
    if y.rows() != init.dim() {
        return Err(Error::Dimension {
            what: "training signal dimension",
            expected: init.dim(),
            got: y.rows(),
        });
    }
    if !y.is_finite() {
        return Err(Error::Config("training data contains non-finite values".into()));
    }

    let code = omp::omp_encode_batch(y, &init, cfg.sparsity, None)?;
    let mut state = State::new(y, init, code, cfg);
    let mut trace = Vec::with_capacity(cfg.sweeps + 1);
    let f0 = state.objective();
    trace.push(f0);
    observer(&TrainEvent::Initial { objective: f0 });

    for sweep in 0..cfg.sweeps {
        for atom in 0..state.dict.n_atoms() {
            if let Some(zeroed) = state.update_atom(atom)? {
                observer(&TrainEvent::RowUpdated {
                    sweep,
                    atom,
                    objective: state.objective(),
                    zeroed,
                });
            }
        }
        state.resync();
        let f = state.objective();
        trace.push(f);
        observer(&TrainEvent::SweepFinished { sweep, objective: f });
    }

    let (dictionary, code) = state.finish();
    let support_set = crate::detect::support_set(&code);
    if support_set.is_empty() {
        return Err(Error::AllRowsAnnihilated);
    }
    let model = Model {
        dictionary,
        support_set,
        config: cfg.clone(),
        objective_trace: trace,
    };
    Ok((model, code))
}

/// Mutable training state: dictionary, representations, error `E = Y − DX`,
/// and the columns that currently use each atom.
struct State<'a> {
    #[cfg_attr(not(debug_assertions), allow(dead_code))]
    y: &'a Mat,
    dict: Dictionary,
    code: SparseCode,
    err: Mat,
    users: Vec<Vec<usize>>,
    err_sq: f64,
    penalties: Vec<f64>,
    cfg: &'a TrainConfig,
}

impl<'a> State<'a> {
    fn new(y: &'a Mat, dict: Dictionary, code: SparseCode, cfg: &'a TrainConfig) -> Self {
        let mut users = vec![Vec::new(); dict.n_atoms()];
        for (j, col) in code.columns().iter().enumerate() {
            for &i in &col.support {
                users[i].push(j);
            }
        }
        let err = y.sub(&code.reconstruct(&dict)).expect("shapes checked");
        let err_sq = fro_norm_sq(&err);
        let penalties = code
            .row_norms()
            .into_iter()
            .map(|z| cfg.regularizer.penalty(z))
            .collect();
        Self {
            y,
            dict,
            code,
            err,
            users,
            err_sq,
            penalties,
            cfg,
        }
    }

    fn objective(&self) -> f64 {
        0.5 * self.err_sq + self.cfg.lambda * self.penalties.iter().sum::<f64>()
    }

    fn coeff_slot(&self, col: usize, atom: usize) -> usize {
        self.code.columns[col]
            .support
            .iter()
            .position(|&i| i == atom)
            .expect("user list and column supports agree")
    }

    /// Visits one atom. Returns `None` when no column uses it, otherwise
    /// whether its row ended up zero.
    fn update_atom(&mut self, atom: usize) -> Result<Option<bool>> {
        let cols = core::mem::take(&mut self.users[atom]);
        if cols.is_empty() {
            return Ok(None);
        }
        let old_atom = self.dict.atom(atom).to_vec();
        let old_row: Vec<f64> = cols
            .iter()
            .map(|&j| self.code.columns[j].coeffs[self.coeff_slot(j, atom)])
            .collect();

        let mut r = self.err.select_columns(&cols);
        let mut old_err_sq = 0.0;
        for (k, &x) in old_row.iter().enumerate() {
            let rk = r.col_mut(k);
            old_err_sq += dot(rk, rk);
            axpy(x, &old_atom, rk);
        }

        let lambda = self.cfg.lambda;
        let reg = self.cfg.regularizer;
        let old_norm = linalg::norm2(&old_row);
        let triplet = linalg::rank1_approx(&r, self.cfg.svd_tol, linalg::DEFAULT_SVD_MAX_ITER)?;
        let t = reg.magnitude(triplet.sigma, lambda);
        let sigma = triplet.sigma;
        let update = RowUpdate::from_triplet(triplet, t);

        // Local objective minus ½‖R‖²: −⟨x, Rᵀd⟩ + ½‖x‖² + λφ(‖x‖).
        let mut rt_d = vec![0.0; cols.len()];
        r.tr_mul_vec(&old_atom, &mut rt_d);
        let old_local = -dot(&old_row, &rt_d) + 0.5 * old_norm * old_norm + lambda * reg.penalty(old_norm);
        let new_norm = update.norm();
        let new_local = if update.is_zero {
            0.0
        } else {
            -new_norm * sigma + 0.5 * new_norm * new_norm + lambda * reg.penalty(new_norm)
        };
        if new_local > old_local {
            // Only reachable through an unconverged SVD; keep the previous pair.
            self.users[atom] = cols;
            return Ok(Some(false));
        }

        let mut new_err_sq = 0.0;
        let mut kept = Vec::with_capacity(cols.len());
        if !update.is_zero {
            self.dict.set_atom(atom, &update.atom);
        }
        for (k, &j) in cols.iter().enumerate() {
            let rk = r.col_mut(k);
            let x = update.row_values[k];
            if x != 0.0 {
                axpy(-x, &update.atom, rk);
            }
            new_err_sq += dot(rk, rk);
            self.err.col_mut(j).copy_from_slice(rk);
            let slot = self.coeff_slot(j, atom);
            let col = &mut self.code.columns[j];
            if x != 0.0 {
                col.coeffs[slot] = x;
                kept.push(j);
            } else {
                col.support.remove(slot);
                col.coeffs.remove(slot);
            }
        }
        self.err_sq += new_err_sq - old_err_sq;
        self.penalties[atom] = if kept.is_empty() { 0.0 } else { reg.penalty(new_norm) };
        let zeroed = kept.is_empty();
        self.users[atom] = kept;
        Ok(Some(zeroed))
    }

    /// Recomputes the cached objective terms from the maintained error.
    fn resync(&mut self) {
        self.err_sq = fro_norm_sq(&self.err);
        let reg = self.cfg.regularizer;
        for (p, z) in self.penalties.iter_mut().zip(self.code.row_norms()) {
            *p = reg.penalty(z);
        }
        #[cfg(debug_assertions)]
        {
            let exact = self.y.sub(&self.code.reconstruct(&self.dict)).expect("shapes checked");
            let drift = libm::sqrt(fro_norm_sq(&exact.sub(&self.err).expect("same shape")));
            let scale = libm::sqrt(fro_norm_sq(self.y)).max(1.0);
            debug_assert!(drift <= 1e-8 * scale, "residual drift {drift:e}");
        }
    }

    fn finish(self) -> (Dictionary, SparseCode) {
        (self.dict, self.code)
    }
}
