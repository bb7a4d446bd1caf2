//! Support-based anomaly detection.
//!
//! A test signal is anomalous when its sparse code uses any atom outside the
//! uniform support set learned during training.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ksvd::Model;
use crate::linalg::Mat;
use crate::omp::{self, Dictionary, SparseCode};

/// Reported when every atom is in the support set, so no signal can ever be flagged.
pub const DEGENERATE_SUPPORT_WARNING: &str =
    "support set covers every atom; no anomalies would be detected";

/// Sorted indices of rows of `x` with at least one nonzero entry.
pub fn support_set(x: &SparseCode) -> Vec<usize> {
    let mut used = alloc::vec![false; x.n_rows()];
    for col in x.columns() {
        for (i, c) in col.iter() {
            if c != 0.0 {
                used[i] = true;
            }
        }
    }
    used.iter()
        .enumerate()
        .filter_map(|(i, &u)| u.then_some(i))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    /// `true` marks an anomaly.
    pub flags: Vec<bool>,
    /// Number of atoms in the signal's support outside the support set.
    pub scores: Vec<usize>,
    /// Sparse support of each test signal, in OMP selection order.
    pub supports: Vec<Vec<usize>>,
    /// Samples whose sparse code came out empty; classified as inliers.
    pub empty_supports: Vec<usize>,
    pub warning: Option<&'static str>,
}

impl DetectionReport {
    pub fn n_flagged(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }
}

/// Applies the support rule to precomputed codes. `support` must be sorted.
pub fn classify(code: &SparseCode, support: &[usize]) -> DetectionReport {
    let n = code.n_cols();
    let mut report = DetectionReport {
        flags: Vec::with_capacity(n),
        scores: Vec::with_capacity(n),
        supports: Vec::with_capacity(n),
        empty_supports: Vec::new(),
        warning: (support.len() == code.n_rows()).then_some(DEGENERATE_SUPPORT_WARNING),
    };
    for (j, col) in code.columns().iter().enumerate() {
        let outside = col
            .support
            .iter()
            .filter(|i| support.binary_search(i).is_err())
            .count();
        if col.is_empty() {
            report.empty_supports.push(j);
        }
        report.flags.push(outside > 0);
        report.scores.push(outside);
        report.supports.push(col.support.clone());
    }
    report
}

/// Encodes each test column with `dict` at sparsity `s` and applies the support rule.
pub fn detect_with(y: &Mat, dict: &Dictionary, support: &[usize], s: usize) -> Result<DetectionReport> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let code = omp::omp_encode_batch(y, dict, s, None)?;
    Ok(classify(&code, support))
}

pub fn detect(y: &Mat, model: &Model) -> Result<DetectionReport> {
    detect_with(y, &model.dictionary, &model.support_set, model.config.sparsity)
}
