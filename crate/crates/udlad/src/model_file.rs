//! Binary model format, all fields little-endian:
//!
//! ```text
//! b"UDLAD1"
//! u64 m, u64 n, u64 |I|, u64 regularizer (0 = l21, 1 = l20, 2 = trunc)
//! f64 lambda, f64 epsilon (0 unless trunc)
//! u64 sparsity, u64 sweeps, u64 seed
//! f64 × m·n   atoms, column-major
//! u64 × |I|   support set, ascending
//! ```

use std::path::Path;

use udlad_core::linalg::DEFAULT_SVD_TOL;
use udlad_core::{Dictionary, Mat, Model, Regularizer, TrainConfig};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"UDLAD1";

pub fn encode_model(model: &Model) -> Vec<u8> {
    let dict = &model.dictionary;
    let cfg = &model.config;
    let (m, n) = (dict.dim(), dict.n_atoms());
    let mut out = Vec::with_capacity(MAGIC.len() + 9 * 8 + 8 * (m * n + model.support_set.len()));
    out.extend_from_slice(MAGIC);
    let kind: u64 = match cfg.regularizer {
        Regularizer::L21 => 0,
        Regularizer::L20 => 1,
        Regularizer::Trunc { .. } => 2,
    };
    for v in [m as u64, n as u64, model.support_set.len() as u64, kind] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&cfg.lambda.to_le_bytes());
    out.extend_from_slice(&cfg.regularizer.epsilon().unwrap_or(0.0).to_le_bytes());
    for v in [cfg.sparsity as u64, cfg.sweeps as u64, cfg.seed] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in dict.matrix().as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &i in &model.support_set {
        out.extend_from_slice(&(i as u64).to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl Cursor<'_> {
    fn take8(&mut self) -> Result<[u8; 8]> {
        if self.bytes.len() < 8 {
            return Err(Error::Model("truncated".into()));
        }
        let (head, rest) = self.bytes.split_at(8);
        self.bytes = rest;
        Ok(head.try_into().expect("8 bytes"))
    }

    fn u64(&mut self) -> Result<u64> {
        self.take8().map(u64::from_le_bytes)
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Model(format!("{what} {v} too large")))
    }

    fn f64(&mut self) -> Result<f64> {
        self.take8().map(f64::from_le_bytes)
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<Model> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut cur = Cursor {
        bytes: &bytes[MAGIC.len()..],
    };
    let m = cur.usize("m")?;
    let n = cur.usize("n")?;
    let n_support = cur.usize("support size")?;
    let kind = cur.u64()?;
    let lambda = cur.f64()?;
    let epsilon = cur.f64()?;
    let sparsity = cur.usize("sparsity")?;
    let sweeps = cur.usize("sweeps")?;
    let seed = cur.u64()?;

    let regularizer = match kind {
        0 => Regularizer::L21,
        1 => Regularizer::L20,
        2 => Regularizer::Trunc { epsilon },
        k => return Err(Error::Model(format!("unknown regularizer kind {k}"))),
    };
    if kind != 2 && epsilon != 0.0 {
        return Err(Error::Model("epsilon set for a non-truncated regularizer".into()));
    }
    let body = m
        .checked_mul(n)
        .and_then(|mn| mn.checked_add(n_support))
        .and_then(|k| k.checked_mul(8))
        .ok_or_else(|| Error::Model("sizes overflow".into()))?;
    if cur.bytes.len() != body {
        return Err(Error::Model(format!(
            "expected {body} payload bytes, found {}",
            cur.bytes.len()
        )));
    }
    let atoms = (0..m * n).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
    let support_set = (0..n_support)
        .map(|_| cur.usize("support index"))
        .collect::<Result<Vec<_>>>()?;
    if support_set.windows(2).any(|w| w[0] >= w[1]) || support_set.last().is_some_and(|&i| i >= n) {
        return Err(Error::Model("support set not ascending or out of range".into()));
    }

    let dictionary = Dictionary::new(Mat::from_col_major(m, n, atoms).map_err(udlad_core::Error::from)?)?;
    let config = TrainConfig {
        lambda,
        sweeps,
        sparsity,
        regularizer,
        seed,
        svd_tol: DEFAULT_SVD_TOL,
    };
    config.validate()?;
    Ok(Model {
        dictionary,
        support_set,
        config,
        objective_trace: Vec::new(),
    })
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(reg: Regularizer) -> Model {
        let mut config = TrainConfig::new(0.25, 2, reg);
        config.seed = 99;
        Model {
            dictionary: Dictionary::random(5, 7, 1),
            support_set: vec![0, 3, 6],
            config,
            objective_trace: vec![1.0],
        }
    }

    #[test]
    fn bytes_round_trip() {
        for reg in [Regularizer::L21, Regularizer::L20, Regularizer::Trunc { epsilon: 0.5 }] {
            let bytes = encode_model(&model(reg));
            assert_eq!(bytes.len(), 6 + 9 * 8 + 8 * (35 + 3));
            let back = decode_model(&bytes).unwrap();
            assert_eq!(back.config.regularizer, reg);
            assert_eq!(back.support_set, vec![0, 3, 6]);
            assert_eq!(encode_model(&back), bytes);
        }
    }

    #[test]
    fn corrupted_magic() {
        let mut bytes = encode_model(&model(Regularizer::L21));
        bytes[0] = b'X';
        let err = decode_model(&bytes).unwrap_err();
        assert_eq!(err.to_string(), "unrecognized model file");
    }

    #[test]
    fn truncation_and_trailing_bytes() {
        let bytes = encode_model(&model(Regularizer::L20));
        assert!(matches!(decode_model(&bytes[..bytes.len() - 3]), Err(Error::Model(_))));
        assert!(matches!(decode_model(&bytes[..20]), Err(Error::Model(_))));
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(matches!(decode_model(&longer), Err(Error::Model(_))));
    }

    #[test]
    fn unsorted_support_is_rejected() {
        let mut m = model(Regularizer::L21);
        m.support_set = vec![3, 1];
        assert!(matches!(decode_model(&encode_model(&m)), Err(Error::Model(_))));
    }
}
