#![allow(clippy::needless_range_loop)]

use std::collections::HashSet;

use udlad_core::*;

fn small_problem(seed: u64) -> SyntheticData {
    gen_synthetic(&SynthConfig {
        m: 16,
        n_inlier: 8,
        n_outlier: 8,
        overlap: 0,
        s_gen: 2,
        n_train: 200,
        n_test_inliers: 20,
        outlier_fraction: 0.1,
        seed,
    })
    .unwrap()
}

/// Point `k` of the default grid: 8 log-spaced values in [1e-3, 1e1] times the mean column norm.
fn grid_lambda(data: &Dataset, k: usize) -> f64 {
    data.mean_column_norm() * 10f64.powf(-3.0 + 4.0 * k as f64 / 7.0)
}

const REGS: [Regularizer; 3] = [
    Regularizer::L21,
    Regularizer::L20,
    Regularizer::Trunc { epsilon: 1.0 },
];

#[test]
fn plain_ksvd_sweep_on_representable_data() {
    let init = Dictionary::random(12, 20, 4);
    let mut cols = Vec::new();
    for j in 0..30 {
        let (a, b) = (j % 20, (j * 7 + 3) % 20);
        let mut y = vec![0.0; 12];
        for i in 0..12 {
            y[i] = 1.5 * init.atom(a)[i] - 0.7 * init.atom(b)[i];
        }
        cols.push(y);
    }
    let y = Mat::from_columns(12, &cols).unwrap();
    let omp_support = support_set(&omp_encode_batch(&y, &init, 2, None).unwrap());

    let mut cfg = TrainConfig::new(0.0, 2, Regularizer::L20);
    cfg.sweeps = 1;
    let (model, _) = train(&y, init, &cfg).unwrap();
    assert_eq!(model.objective_trace.len(), 2);
    let (f0, f1) = (model.objective_trace[0], model.objective_trace[1]);
    assert!(f1 <= f0 + 1e-9 * f0.max(1.0), "{f0} -> {f1}");
    assert_eq!(model.support_set, omp_support);
}

#[test]
fn huge_lambda_annihilates_every_row() {
    let data = small_problem(0);
    let cfg = TrainConfig::new(1e9, 2, Regularizer::L21);
    let err = train(&data.train.signals, Dictionary::random(16, 24, 0), &cfg).unwrap_err();
    assert_eq!(err, Error::AllRowsAnnihilated);
    assert_eq!(err.to_string(), "all rows annihilated; reduce λ");
}

#[test]
fn transition_lambda_l21_finds_a_small_support() {
    // Point 6 of 8 sits between "every atom kept" and "every row annihilated".
    let data = small_problem(0);
    let mut cfg = TrainConfig::new(grid_lambda(&data.train, 6), 2, Regularizer::L21);
    cfg.sweeps = 20;
    let (model, _) = train(&data.train.signals, Dictionary::random(16, 24, 0), &cfg).unwrap();
    assert!(model.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(!model.support_set.is_empty());
    assert!(model.support_set.len() <= 16, "|I| = {}", model.support_set.len());
}

#[test]
fn every_row_update_descends() {
    for reg in REGS {
        for seed in 0..5 {
            let data = small_problem(seed);
            let mut cfg = TrainConfig::new(grid_lambda(&data.train, 5), 2, reg);
            cfg.seed = seed;
            let mut trace = Vec::new();
            let init = Dictionary::random(16, 24, seed);
            let result = train_with_observer(&data.train.signals, init, &cfg, |ev| match ev {
                TrainEvent::Initial { objective } | TrainEvent::RowUpdated { objective, .. } => {
                    trace.push(*objective)
                }
                TrainEvent::SweepFinished { .. } => {}
            });
            if let Err(e) = result {
                assert_eq!(e, Error::AllRowsAnnihilated);
            }
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0), "{reg:?} seed {seed}: {} -> {}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn trace_matches_direct_objective() {
    for reg in REGS {
        let data = small_problem(11);
        let cfg = TrainConfig::new(grid_lambda(&data.train, 3), 2, reg);
        let (model, code) = train(&data.train.signals, Dictionary::random(16, 24, 11), &cfg).unwrap();
        let direct = objective(&model.dictionary, &code, &data.train.signals, cfg.lambda, reg).unwrap();
        let last = *model.objective_trace.last().unwrap();
        assert!((direct - last).abs() <= 1e-9 * direct.max(1.0), "{direct} vs {last}");
        assert_eq!(model.objective_trace.len(), cfg.sweeps + 1);
    }
}

#[test]
fn supports_only_shrink_and_atoms_stay_unit() {
    for reg in REGS {
        let data = small_problem(2);
        let init = Dictionary::random(16, 24, 2);
        let omp = omp_encode_batch(&data.train.signals, &init, 2, None).unwrap();
        let cfg = TrainConfig::new(grid_lambda(&data.train, 5), 2, reg);
        let (model, code) = train(&data.train.signals, init.clone(), &cfg).unwrap();
        for j in 0..code.n_cols() {
            let before: HashSet<_> = omp.column(j).support.iter().collect();
            assert!(code.column(j).support.iter().all(|i| before.contains(i)));
        }
        assert_eq!(model.support_set, support_set(&code));
        let used = support_set(&omp);
        for a in 0..24 {
            let atom = model.dictionary.atom(a);
            let nrm = atom.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((nrm - 1.0).abs() <= 1e-9);
            if !used.contains(&a) {
                assert_eq!(atom, init.atom(a), "unused atom {a} changed");
            }
        }
    }
}

#[test]
fn zeroed_rows_stay_zero() {
    for reg in REGS {
        let data = small_problem(3);
        let cfg = TrainConfig::new(grid_lambda(&data.train, 6), 2, reg);
        let mut zeroed = HashSet::new();
        let mut revisited = Vec::new();
        let _ = train_with_observer(&data.train.signals, Dictionary::random(16, 24, 3), &cfg, |ev| {
            if let TrainEvent::RowUpdated { atom, zeroed: z, .. } = *ev {
                if zeroed.contains(&atom) {
                    revisited.push(atom);
                }
                if z {
                    zeroed.insert(atom);
                }
            }
        });
        assert!(!zeroed.is_empty(), "{reg:?}: expected some zeroed rows");
        assert!(revisited.is_empty(), "{reg:?}: zeroed rows revisited: {revisited:?}");
    }
}

#[test]
fn training_is_deterministic() {
    let data = small_problem(6);
    let cfg = TrainConfig::new(grid_lambda(&data.train, 4), 2, Regularizer::L20);
    let a = train(&data.train.signals, Dictionary::random(16, 24, 6), &cfg).unwrap();
    let b = train(&data.train.signals, Dictionary::random(16, 24, 6), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn wrong_dimension_is_rejected() {
    let cfg = TrainConfig::new(0.1, 1, Regularizer::L21);
    let err = train(&Mat::zeros(5, 3), Dictionary::random(4, 6, 0), &cfg).unwrap_err();
    assert!(matches!(err, Error::Dimension { .. }));
}
