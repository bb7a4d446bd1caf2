use std::path::Path;

use udlad::run_cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(std::iter::once("udlad").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn synth_into(dir: &Path) {
    let (code, _, err) = run(&[
        "synth", "--out-dir", &s(dir), "--m", "16", "--n-inlier", "6", "--n-outlier", "6", "--n-train", "200",
        "--n-test-inliers", "60", "--seed", "2",
    ]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [&["frobnicate"][..], &["train", "--bogus"], &[]] {
        let (code, _, err) = run(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(err.contains("Usage"), "{err}");
    }
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("bench"));
}

#[test]
fn semantic_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path());
    let train = s(&dir.path().join("train.csv"));
    let model = s(&dir.path().join("m.bin"));
    for args in [
        vec!["train", "--data", &train, "--out", &model],
        vec!["train", "--data", &train, "--out", &model, "--lambda", "1", "--reg", "trunc"],
        vec!["train", "--data", &train, "--out", &model, "--lambda", "1", "--reg", "l21,l20"],
        vec!["train", "--data", &train, "--out", &model, "--lambda", "1", "--standardize"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 1, "{args:?}: {err}");
    }
}

#[test]
fn huge_lambda_is_a_degenerate_training_error() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path());
    let (code, _, err) = run(&[
        "train", "--data", &s(&dir.path().join("train.csv")), "--out", &s(&dir.path().join("m.bin")),
        "--lambda", "1e9", "--atoms", "24",
    ]);
    assert_eq!(code, 3);
    assert!(err.contains("all rows annihilated; reduce λ"), "{err}");
    assert!(!dir.path().join("m.bin").exists());
}

#[test]
fn bad_data_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1,2\n3,x\n").unwrap();
    let (code, _, err) = run(&["train", "--data", &s(&bad), "--out", &s(&dir.path().join("m")), "--lambda", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("row 3, column 2"), "{err}");

    let junk = dir.path().join("junk.bin");
    std::fs::write(&junk, b"nope").unwrap();
    let (code, _, err) = run(&["detect", "--model", &s(&junk), "--data", &s(&bad)]);
    assert_eq!(code, 2);
    assert!(err.contains("unrecognized model file"), "{err}");
}

#[test]
fn train_then_detect_reports_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path());
    let model = s(&dir.path().join("m.bin"));
    let (code, out, err) = run(&[
        "train", "--data", &s(&dir.path().join("train.csv")), "--out", &model, "--lambda", "0.5", "--atoms", "24",
        "--sweeps", "5",
    ]);
    assert_eq!(code, 0, "{err}");
    // Initial objective plus one line per sweep, then the support summary.
    assert_eq!(out.lines().filter(|l| l.starts_with("sweep ")).count(), 6);
    assert!(out.contains("support size"));

    let (code, out, err) = run(&["detect", "--model", &model, "--data", &s(&dir.path().join("test.csv"))]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("sample,flag,score"));
    assert_eq!(lines.count(), 60 + 7);
    assert!(err.contains("balanced accuracy"), "{err}");
}

#[test]
fn bench_json_lines_have_the_result_schema() {
    let (code, out, err) = run(&[
        "bench", "--synthetic", "--m", "16", "--n-inlier", "6", "--n-outlier", "6", "--n-train", "150",
        "--n-test-inliers", "40", "--atoms", "24", "--repeats", "2", "--lambda-grid", "0.1,1",
    ]);
    assert_eq!(code, 0, "{err}");
    let results: Vec<udlad::BenchResult> =
        out.lines().map(|l| serde_json::from_str(l).expect("closed schema")).collect();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0].regularizer, "l21");
    assert_eq!(results[1].regularizer, "l20");
    for r in &results {
        assert!(r.ba_std >= 0.0 && r.ba_max >= r.ba_mean && r.train_seconds == 0.0);
        assert_eq!(r.repeats, 2);
    }
    assert!(err.starts_with("dataset"), "{err}");
}

#[test]
fn bench_on_labeled_csv() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path());
    let args = [
        "bench", "--data", &s(&dir.path().join("test.csv")), "--atoms", "24", "--repeats", "2", "--reg", "l20",
        "--train-frac", "0.5", "--standardize",
    ];
    let (code, first, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let r: udlad::BenchResult = serde_json::from_str(first.trim()).unwrap();
    assert_eq!(r.dataset_name, "test");
    assert_eq!(run(&args).1, first);
}
