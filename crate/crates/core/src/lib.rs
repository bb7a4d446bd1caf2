//! Uniform-support dictionary learning for anomaly detection.
//!
//! Training learns a dictionary with a row-sparsity penalty so that the
//! regular majority of the data is represented by a common subset of atoms,
//! the support set. Detection flags any signal whose sparse code reaches
//! outside that set.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod data;
pub mod detect;
pub mod error;
pub mod ksvd;
pub mod linalg;
pub mod metrics;
pub mod omp;

pub use data::{gen_synthetic, split_for_ad, Dataset, Standardizer, SynthConfig, SyntheticData};
pub use detect::{detect, support_set, DetectionReport, DEGENERATE_SUPPORT_WARNING};
pub use error::{Error, LinalgError, Result};
pub use ksvd::{
    objective, row_update_l20, row_update_l21, row_update_trunc, train, train_with_observer, Model,
    Regularizer, RowUpdate, TrainConfig, TrainEvent,
};
pub use linalg::{fro_norm_sq, rank1_svd, Mat, Rank1Triplet};
pub use metrics::balanced_accuracy;
pub use omp::{default_sparsity, omp_encode, omp_encode_batch, Dictionary, SparseCode, SparseColumn};
