//! Datasets, the synthetic two-dictionary benchmark, and train/test splitting.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, Mat};
use crate::omp::Dictionary;

/// Samples as columns of an `m×N` matrix, optionally labeled (`true` = outlier).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub signals: Mat,
    pub labels: Option<Vec<bool>>,
    pub name: String,
}

impl Dataset {
    pub fn new(name: impl Into<String>, signals: Mat, labels: Option<Vec<bool>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != signals.cols() {
                return Err(Error::Dimension {
                    what: "label count",
                    expected: signals.cols(),
                    got: l.len(),
                });
            }
        }
        if !signals.is_finite() {
            return Err(Error::Config("signals contain non-finite values".into()));
        }
        Ok(Self {
            signals,
            labels,
            name: name.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.signals.rows()
    }

    pub fn len(&self) -> usize {
        self.signals.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn indices_where(&self, outlier: bool) -> Vec<usize> {
        match &self.labels {
            Some(l) => (0..l.len()).filter(|&j| l[j] == outlier).collect(),
            None if !outlier => (0..self.len()).collect(),
            None => Vec::new(),
        }
    }

    /// Unlabeled samples count as inliers.
    pub fn inlier_indices(&self) -> Vec<usize> {
        self.indices_where(false)
    }

    pub fn outlier_indices(&self) -> Vec<usize> {
        self.indices_where(true)
    }

    /// The listed samples, in the given order.
    pub fn subset(&self, idx: &[usize], name: impl Into<String>) -> Dataset {
        Dataset {
            signals: self.signals.select_columns(idx),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&j| l[j]).collect()),
            name: name.into(),
        }
    }

    pub fn mean_column_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let total: f64 = (0..self.len()).map(|j| linalg::norm2(self.signals.col(j))).sum();
        total / self.len() as f64
    }
}

/// Parameters of the two-dictionary synthetic benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub m: usize,
    pub n_inlier: usize,
    pub n_outlier: usize,
    /// Leading atoms shared by both generating dictionaries.
    pub overlap: usize,
    /// Atoms combined per signal.
    pub s_gen: usize,
    pub n_train: usize,
    pub n_test_inliers: usize,
    /// Share of outliers among test signals, in `[0, 1)`.
    pub outlier_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            m: 64,
            n_inlier: 32,
            n_outlier: 32,
            overlap: 0,
            s_gen: 2,
            n_train: 1000,
            n_test_inliers: 250,
            outlier_fraction: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn n_test_outliers(&self) -> usize {
        let f = self.outlier_fraction;
        libm::round(f / (1.0 - f) * self.n_test_inliers as f64) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.n_inlier == 0 || self.n_outlier == 0 {
            return bad("m, n_inlier and n_outlier must be positive".into());
        }
        if self.overlap > self.n_inlier.min(self.n_outlier) {
            return bad(format!(
                "overlap {} exceeds min(n_inlier, n_outlier) = {}",
                self.overlap,
                self.n_inlier.min(self.n_outlier)
            ));
        }
        if self.s_gen == 0 || self.s_gen > self.n_inlier.min(self.n_outlier) {
            return bad(format!(
                "s_gen {} must be in 1..={}",
                self.s_gen,
                self.n_inlier.min(self.n_outlier)
            ));
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return bad(format!(
                "outlier_fraction must be in [0, 1), got {}",
                self.outlier_fraction
            ));
        }
        Ok(())
    }
}

/// Generated benchmark plus its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    /// Inliers only, labeled all `false`.
    pub train: Dataset,
    /// Inliers first, then outliers.
    pub test: Dataset,
    pub inlier_dict: Dictionary,
    pub outlier_dict: Dictionary,
    /// Generating atoms per training signal, indexing `inlier_dict`.
    pub train_supports: Vec<Vec<usize>>,
    /// Generating atoms per test signal, indexing the dictionary matching its label.
    pub test_supports: Vec<Vec<usize>>,
}

fn sample_signals(
    dict: &Dictionary,
    count: usize,
    s: usize,
    rng: &mut ChaCha8Rng,
    signals: &mut Vec<Vec<f64>>,
    supports: &mut Vec<Vec<usize>>,
) {
    for _ in 0..count {
        let atoms = index::sample(rng, dict.n_atoms(), s).into_vec();
        let mut y = vec![0.0; dict.dim()];
        for &a in &atoms {
            let c: f64 = StandardNormal.sample(rng);
            axpy(c, dict.atom(a), &mut y);
        }
        signals.push(y);
        supports.push(atoms);
    }
}

/// Inliers combine `s_gen` random atoms of the inlier dictionary with
/// standard-normal weights; outliers do the same with the outlier dictionary.
pub fn gen_synthetic(cfg: &SynthConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let inlier_dict = Dictionary::random(cfg.m, cfg.n_inlier, rng_seed(&mut rng));
    let fresh = Dictionary::random(cfg.m, cfg.n_outlier - cfg.overlap, rng_seed(&mut rng));
    let mut outlier_atoms = inlier_dict.matrix().select_columns(&(0..cfg.overlap).collect::<Vec<_>>()).into_vec();
    outlier_atoms.extend_from_slice(fresh.matrix().as_slice());
    let outlier_dict = Dictionary::new(Mat::from_col_major(cfg.m, cfg.n_outlier, outlier_atoms)?)?;

    let mut train_cols = Vec::with_capacity(cfg.n_train);
    let mut train_supports = Vec::with_capacity(cfg.n_train);
    sample_signals(&inlier_dict, cfg.n_train, cfg.s_gen, &mut rng, &mut train_cols, &mut train_supports);

    let n_out = cfg.n_test_outliers();
    let mut test_cols = Vec::with_capacity(cfg.n_test_inliers + n_out);
    let mut test_supports = Vec::with_capacity(cfg.n_test_inliers + n_out);
    sample_signals(&inlier_dict, cfg.n_test_inliers, cfg.s_gen, &mut rng, &mut test_cols, &mut test_supports);
    sample_signals(&outlier_dict, n_out, cfg.s_gen, &mut rng, &mut test_cols, &mut test_supports);

    let mut labels = vec![false; cfg.n_test_inliers];
    labels.resize(cfg.n_test_inliers + n_out, true);
    let train = Dataset::new(
        "synthetic-train",
        Mat::from_columns(cfg.m, &train_cols)?,
        Some(vec![false; cfg.n_train]),
    )?;
    let test = Dataset::new("synthetic-test", Mat::from_columns(cfg.m, &test_cols)?, Some(labels))?;
    Ok(SyntheticData {
        train,
        test,
        inlier_dict,
        outlier_dict,
        train_supports,
        test_supports,
    })
}

fn rng_seed(rng: &mut ChaCha8Rng) -> u64 {
    rand::Rng::random(rng)
}

/// Random `train_inlier_fraction` of the inliers for training; the rest of
/// the inliers plus every outlier for testing. Both parts keep the original
/// sample order.
pub fn split_for_ad(data: &Dataset, train_inlier_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let Some(labels) = &data.labels else {
        return Err(Error::MissingLabels);
    };
    if !(train_inlier_fraction > 0.0 && train_inlier_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must be in (0, 1), got {train_inlier_fraction}"
        )));
    }
    let mut inliers = data.inlier_indices();
    if inliers.is_empty() {
        return Err(Error::NoInliers);
    }
    let n_train = (libm::round(train_inlier_fraction * inliers.len() as f64) as usize).clamp(1, inliers.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    inliers.shuffle(&mut rng);
    let mut train_idx = inliers[..n_train].to_vec();
    train_idx.sort_unstable();
    let mut in_train = vec![false; data.len()];
    train_idx.iter().for_each(|&j| in_train[j] = true);
    let test_idx: Vec<usize> = (0..labels.len()).filter(|&j| !in_train[j]).collect();

    Ok((
        data.subset(&train_idx, format!("{}-train", data.name)),
        data.subset(&test_idx, format!("{}-test", data.name)),
    ))
}

/// Per-feature affine map to zero mean and unit variance, fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(signals: &Mat) -> Self {
        let (m, n) = (signals.rows(), signals.cols());
        let mut mean = vec![0.0; m];
        for j in 0..n {
            axpy(1.0, signals.col(j), &mut mean);
        }
        let count = n.max(1) as f64;
        mean.iter_mut().for_each(|x| *x /= count);
        let mut var = vec![0.0; m];
        for j in 0..n {
            for (i, v) in signals.col(j).iter().enumerate() {
                var[i] += (v - mean[i]) * (v - mean[i]);
            }
        }
        // Constant features are centered but left unscaled.
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = libm::sqrt(v / count);
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, signals: &mut Mat) {
        for j in 0..signals.cols() {
            for (i, v) in signals.col_mut(j).iter_mut().enumerate() {
                *v = (*v - self.mean[i]) / self.scale[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(n_in: usize, n_out: usize) -> Dataset {
        let n = n_in + n_out;
        let signals = Mat::from_col_major(1, n, (0..n).map(|j| j as f64).collect()).unwrap();
        let mut labels = vec![false; n_in];
        labels.resize(n, true);
        Dataset::new("toy", signals, Some(labels)).unwrap()
    }

    #[test]
    fn split_ninety_ten() {
        let data = labeled(100, 10);
        let (train, test) = split_for_ad(&data, 0.9, 4).unwrap();
        assert_eq!(train.len(), 90);
        assert!(train.labels.as_ref().unwrap().iter().all(|l| !l));
        let test_labels = test.labels.as_ref().unwrap();
        assert_eq!(test_labels.iter().filter(|l| !**l).count(), 10);
        assert_eq!(test_labels.iter().filter(|l| **l).count(), 10);
    }

    #[test]
    fn smallest_split() {
        let (train, test) = split_for_ad(&labeled(2, 1), 0.5, 0).unwrap();
        assert_eq!(train.len(), 1);
        assert_eq!(test.len(), 2);
        assert_eq!(test.labels.unwrap().iter().filter(|l| **l).count(), 1);
    }

    #[test]
    fn split_errors() {
        assert_eq!(split_for_ad(&labeled(0, 3), 0.9, 0), Err(Error::NoInliers));
        let unlabeled = Dataset::new("u", Mat::zeros(2, 3), None).unwrap();
        assert_eq!(split_for_ad(&unlabeled, 0.9, 0), Err(Error::MissingLabels));
        assert!(split_for_ad(&labeled(3, 1), 1.0, 0).is_err());
    }

    #[test]
    fn synth_shapes_and_labels() {
        let cfg = SynthConfig {
            m: 16,
            n_inlier: 8,
            n_outlier: 6,
            overlap: 0,
            s_gen: 2,
            n_train: 40,
            n_test_inliers: 18,
            outlier_fraction: 0.1,
            seed: 1,
        };
        let data = gen_synthetic(&cfg).unwrap();
        assert_eq!(data.train.signals.cols(), 40);
        assert_eq!(cfg.n_test_outliers(), 2);
        assert_eq!(data.test.labels.as_ref().unwrap().iter().filter(|l| **l).count(), 2);

        let none = gen_synthetic(&SynthConfig {
            outlier_fraction: 0.0,
            ..cfg.clone()
        })
        .unwrap();
        assert!(none.test.labels.unwrap().iter().all(|l| !l));
    }

    #[test]
    fn overlap_shares_leading_atoms() {
        let cfg = SynthConfig {
            m: 8,
            n_inlier: 5,
            n_outlier: 4,
            overlap: 3,
            s_gen: 1,
            n_train: 2,
            n_test_inliers: 2,
            outlier_fraction: 0.5,
            seed: 9,
        };
        let data = gen_synthetic(&cfg).unwrap();
        for j in 0..3 {
            assert_eq!(data.inlier_dict.atom(j), data.outlier_dict.atom(j));
        }
        assert_ne!(data.inlier_dict.atom(3), data.outlier_dict.atom(3));
    }

    #[test]
    fn synth_rejects_bad_configs() {
        let base = SynthConfig::default();
        assert!(gen_synthetic(&SynthConfig { overlap: 33, ..base.clone() }).is_err());
        assert!(gen_synthetic(&SynthConfig { s_gen: 40, ..base.clone() }).is_err());
        assert!(gen_synthetic(&SynthConfig { outlier_fraction: 1.0, ..base }).is_err());
    }

    #[test]
    fn standardizer_centers_and_scales() {
        let train = Mat::from_rows(&[&[1.0, 3.0], &[5.0, 5.0]]).unwrap();
        let st = Standardizer::fit(&train);
        assert_eq!(st.mean, vec![2.0, 5.0]);
        assert_eq!(st.scale, vec![1.0, 1.0]);
        let mut x = train.clone();
        st.apply(&mut x);
        assert_eq!(x.as_slice(), &[-1.0, 0.0, 1.0, 0.0]);
    }
}
