//! File formats, benchmarks and the command line for `udlad-core`.
//!
//! CSV datasets, the binary model file, repeated grid-search benchmarks and
//! the `udlad` binary all live here so the core stays `no_std`.

pub mod bench;
pub mod cli;
pub mod csv_io;
pub mod error;
pub mod model_file;

pub use bench::{default_lambda_grid, grid_search, BenchOptions, BenchResult, BenchSource};
pub use cli::run_cli;
pub use csv_io::{load_csv, write_csv, LabelColumn};
pub use error::{Error, Result};
pub use model_file::{decode_model, encode_model, load_model, save_model};
