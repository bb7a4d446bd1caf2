//! The `udlad` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 degenerate training.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use udlad_core::{
    balanced_accuracy, default_sparsity, detect, gen_synthetic, train, Dataset, Dictionary, Regularizer, SynthConfig,
    TrainConfig,
};

use crate::bench::{default_lambda_grid, format_table, grid_search, BenchOptions, BenchSource};
use crate::csv_io::{header_contains, load_csv, write_csv, LabelColumn};
use crate::error::{Error, Result};
use crate::model_file::{load_model, save_model};

#[derive(Debug, Parser)]
#[command(name = "udlad", version, about = "Uniform-support dictionary learning for anomaly detection")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Base seed; repeat r of a benchmark uses seed + r.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Regularizer(s), comma separated. `bench` runs each; other commands take one.
    #[arg(long, global = true, value_delimiter = ',')]
    reg: Vec<RegKind>,
    /// Penalty weight λ.
    #[arg(long, global = true, conflicts_with = "lambda_grid")]
    lambda: Option<f64>,
    /// Explicit λ values for `bench`, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    /// Number of points in the default log-spaced λ grid.
    #[arg(long, global = true, default_value_t = 8)]
    grid_points: usize,
    /// Threshold ε of the truncated regularizer.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Training sweeps K.
    #[arg(long, global = true, default_value_t = 20)]
    sweeps: usize,
    /// OMP sparsity; defaults to max(1, round(0.2·√m)).
    #[arg(long, global = true)]
    sparsity: Option<usize>,
    /// Standardize features with training statistics (`bench` only).
    #[arg(long, global = true)]
    standardize: bool,
    /// Share of inliers used for training in each `bench` split.
    #[arg(long, global = true, default_value_t = 0.9)]
    train_frac: f64,
    /// Runs per λ in `bench`.
    #[arg(long, global = true, default_value_t = 10)]
    repeats: usize,
    /// Dictionary size n.
    #[arg(long, global = true, default_value_t = 128)]
    atoms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegKind {
    L21,
    L20,
    Trunc,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic train.csv and labeled test.csv.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        synth: SynthArgs,
    },
    /// Learn a dictionary and support set from a CSV file.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Flag anomalies in a CSV file with a trained model.
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Per-sample CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Grid-search λ over repeated randomized runs.
    Bench {
        /// Labeled CSV dataset.
        #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
        data: Option<PathBuf>,
        /// Generate a fresh synthetic benchmark for each run.
        #[arg(long)]
        synthetic: bool,
        /// Record training wall time (makes the output time dependent).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        synth: SynthArgs,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    /// The CSV has no header row.
    #[arg(long)]
    no_header: bool,
    /// Label column, by header name or 0-based index. A header column named
    /// `label` is used when this is absent.
    #[arg(long)]
    label_column: Option<String>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 32)]
    n_inlier: usize,
    #[arg(long, default_value_t = 32)]
    n_outlier: usize,
    /// Shared leading atoms, as a count.
    #[arg(long, conflicts_with = "overlap_frac")]
    overlap: Option<usize>,
    /// Shared leading atoms, as a share of the outlier dictionary.
    #[arg(long)]
    overlap_frac: Option<f64>,
    #[arg(long, default_value_t = 2)]
    s_gen: usize,
    #[arg(long, default_value_t = 1000)]
    n_train: usize,
    #[arg(long, default_value_t = 250)]
    n_test_inliers: usize,
    #[arg(long, default_value_t = 0.1)]
    outlier_frac: f64,
}

impl SynthArgs {
    fn config(&self, seed: u64) -> Result<SynthConfig> {
        let overlap = match (self.overlap, self.overlap_frac) {
            (Some(k), _) => k,
            (None, Some(f)) if (0.0..=1.0).contains(&f) => (f * self.n_outlier as f64).round() as usize,
            (None, Some(f)) => return Err(Error::Usage(format!("--overlap-frac must be in [0, 1], got {f}"))),
            (None, None) => 0,
        };
        let cfg = SynthConfig {
            m: self.m,
            n_inlier: self.n_inlier,
            n_outlier: self.n_outlier,
            overlap,
            s_gen: self.s_gen,
            n_train: self.n_train,
            n_test_inliers: self.n_test_inliers,
            outlier_fraction: self.outlier_frac,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl InputArgs {
    fn load(&self, path: &Path) -> Result<Dataset> {
        let has_header = !self.no_header;
        let label = match &self.label_column {
            Some(s) => Some(LabelColumn::parse(s)),
            None if has_header && header_contains(path, "label")? => Some(LabelColumn::Name("label".into())),
            None => None,
        };
        load_csv(path, has_header, label.as_ref())
    }
}

impl GlobalArgs {
    fn regularizers(&self, default: &[RegKind]) -> Result<Vec<Regularizer>> {
        let kinds = if self.reg.is_empty() { default } else { &self.reg };
        kinds
            .iter()
            .map(|k| match k {
                RegKind::L21 => Ok(Regularizer::L21),
                RegKind::L20 => Ok(Regularizer::L20),
                RegKind::Trunc => self
                    .eps
                    .map(|epsilon| Regularizer::Trunc { epsilon })
                    .ok_or_else(|| Error::Usage("--reg trunc needs --eps".into())),
            })
            .collect()
    }

    fn single_regularizer(&self) -> Result<Regularizer> {
        match self.regularizers(&[RegKind::L20])?.as_slice() {
            [r] => Ok(*r),
            _ => Err(Error::Usage("this command takes a single --reg".into())),
        }
    }

    fn config(&self, lambda: f64, m: usize, regularizer: Regularizer) -> TrainConfig {
        TrainConfig {
            sweeps: self.sweeps,
            seed: self.seed,
            ..TrainConfig::new(lambda, self.sparsity.unwrap_or_else(|| default_sparsity(m)), regularizer)
        }
    }

    fn reject_bench_only(&self, command: &str) -> Result<()> {
        if self.standardize {
            return Err(Error::Usage(format!("--standardize applies to bench only, not {command}")));
        }
        if self.lambda_grid.is_some() {
            return Err(Error::Usage(format!("--lambda-grid applies to bench only, not {command}")));
        }
        Ok(())
    }
}

/// Parses `args` (program name first) and runs the command. Reports go to
/// `out`; diagnostics, notes and the bench table go to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{rendered}");
                0
            } else {
                let _ = write!(err, "{rendered}");
                1
            };
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Synth { out_dir, synth } => {
            g.reject_bench_only("synth")?;
            let data = gen_synthetic(&synth.config(g.seed)?)?;
            std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
            let n = data.train.len();
            let train = Dataset::new("train", data.train.signals, Some(vec![false; n]))?;
            write_csv(&train, out_dir.join("train.csv"))?;
            write_csv(&data.test, out_dir.join("test.csv"))?;
            log(out, format_args!(
                "wrote {} training and {} test samples (m = {}) to {}",
                train.len(),
                data.test.len(),
                train.dim(),
                out_dir.display()
            ))
        }
        Command::Train { data, out: model_path, input } => {
            g.reject_bench_only("train")?;
            let lambda = g.lambda.ok_or_else(|| Error::Usage("train needs --lambda".into()))?;
            let mut ds = input.load(data)?;
            if ds.labels.is_some() {
                let outliers = ds.outlier_indices().len();
                if outliers > 0 {
                    log(err, format_args!("note: dropping {outliers} labeled outliers before training"))?;
                }
                ds = ds.subset(&ds.inlier_indices(), ds.name.clone());
            }
            let cfg = g.config(lambda, ds.dim(), g.single_regularizer()?);
            let init = Dictionary::random(ds.dim(), g.atoms, cfg.seed);
            let (model, _) = train(&ds.signals, init, &cfg)?;
            save_model(&model, model_path)?;
            for (k, f) in model.objective_trace.iter().enumerate() {
                log(out, format_args!("sweep {k} objective {f:.12e}"))?;
            }
            let support: Vec<String> = model.support_set.iter().map(usize::to_string).collect();
            log(out, format_args!("support size {} of {}", model.support_set.len(), g.atoms))?;
            log(out, format_args!("support {}", support.join(",")))
        }
        Command::Detect { model, data, out: dest, input } => {
            g.reject_bench_only("detect")?;
            let model = load_model(model)?;
            let ds = input.load(data)?;
            let report = detect(&ds.signals, &model)?;
            if let Some(w) = report.warning {
                log(err, format_args!("warning: {w}"))?;
            }
            let mut body = String::from("sample,flag,score\n");
            for (j, (f, s)) in report.flags.iter().zip(&report.scores).enumerate() {
                body.push_str(&format!("{j},{},{s}\n", u8::from(*f)));
            }
            match dest {
                Some(p) => std::fs::write(p, body).map_err(|e| Error::io(p, e))?,
                None => out.write_all(body.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
            }
            log(err, format_args!("flagged {} of {} samples", report.n_flagged(), ds.len()))?;
            if let Some(labels) = &ds.labels {
                log(err, format_args!("balanced accuracy {:.6}", balanced_accuracy(labels, &report.flags)?))?;
            }
            Ok(())
        }
        Command::Bench {
            data,
            synthetic,
            timing,
            input,
            synth,
        } => {
            let source = match (data, synthetic) {
                (Some(path), _) => BenchSource::Labeled {
                    data: input.load(path)?,
                    train_frac: g.train_frac,
                },
                (None, true) => BenchSource::Synthetic(synth.config(g.seed)?),
                (None, false) => unreachable!("clap requires --data or --synthetic"),
            };
            let lambdas = match (&g.lambda_grid, g.lambda) {
                (Some(grid), _) => grid.clone(),
                (None, Some(l)) => vec![l],
                (None, None) => default_lambda_grid(&source, g.seed, g.standardize, g.grid_points)?,
            };
            let opts = BenchOptions {
                atoms: g.atoms,
                repeats: g.repeats,
                standardize: g.standardize,
                timing: *timing,
            };
            let mut results = Vec::new();
            for reg in g.regularizers(&[RegKind::L21, RegKind::L20])? {
                let base = g.config(0.0, source.dim(), reg);
                let res = grid_search(&source, &lambdas, &base, &opts)?;
                let line = serde_json::to_string(&res).expect("plain struct serializes");
                log(out, format_args!("{line}"))?;
                results.push(res);
            }
            err.write_all(format_table(&results).as_bytes())
                .map_err(|e| Error::io("<stderr>", e))
        }
    }
}

fn log(w: &mut dyn Write, args: std::fmt::Arguments) -> Result<()> {
    writeln!(w, "{args}").map_err(|e| Error::io("<output>", e))
}
