//! Reference computations that share no code with the library's algorithms.
//! Also included by the `udlad` acceptance suite.

#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Row-major dense matrix as nested vectors.
pub type Dense = Vec<Vec<f64>>;

pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Dense {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns `(eigenvalues, eigenvectors as columns)`.
pub fn jacobi_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Dense = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let total: f64 = a.iter().flatten().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Top singular triplet of `r` from the eigen-decomposition of `rᵀr`.
pub fn top_singular(r: &Dense) -> (Vec<f64>, f64, Vec<f64>) {
    let (m, p) = (r.len(), r[0].len());
    let gram: Dense = (0..p)
        .map(|i| (0..p).map(|j| (0..m).map(|k| r[k][i] * r[k][j]).sum()).collect())
        .collect();
    let (vals, vecs) = jacobi_eigen(&gram);
    let top = (0..p)
        .max_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap())
        .unwrap();
    let sigma = vals[top].max(0.0).sqrt();
    let v: Vec<f64> = (0..p).map(|k| vecs[k][top]).collect();
    let u: Vec<f64> = (0..m)
        .map(|i| (0..p).map(|j| r[i][j] * v[j]).sum::<f64>() / sigma)
        .collect();
    (u, sigma, v)
}

/// Argmin over a uniform grid on `[0, hi]` with the given step; first minimum wins.
pub fn grid_argmin(f: impl Fn(f64) -> f64, hi: f64, step: f64) -> f64 {
    let n = (hi / step).ceil() as usize;
    let mut best = (0.0, f(0.0));
    for k in 1..=n {
        let t = (k as f64 * step).min(hi);
        let v = f(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    best.0
}

/// Row penalty by name, written out from its definition.
pub fn phi(kind: &str, z: f64, eps: f64) -> f64 {
    match kind {
        "l21" => z.abs(),
        "l20" => {
            if z != 0.0 {
                1.0
            } else {
                0.0
            }
        }
        "trunc" => z.abs().min(eps),
        _ => unreachable!(),
    }
}

/// `½‖DX − Y‖²_F + λ Σᵢ φ(‖xᵢ‖)` with everything dense and row-major.
pub fn dense_objective(d: &Dense, x: &Dense, y: &Dense, lambda: f64, kind: &str, eps: f64) -> f64 {
    let (m, n, big_n) = (d.len(), x.len(), y[0].len());
    let mut fit = 0.0;
    for i in 0..m {
        for j in 0..big_n {
            let dx: f64 = (0..n).map(|k| d[i][k] * x[k][j]).sum();
            fit += (dx - y[i][j]) * (dx - y[i][j]);
        }
    }
    let pen: f64 = x
        .iter()
        .map(|row| phi(kind, row.iter().map(|v| v * v).sum::<f64>().sqrt(), eps))
        .sum();
    0.5 * fit + lambda * pen
}
