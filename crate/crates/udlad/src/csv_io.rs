//! CSV interchange: one sample per row, decimal floats, optional header and
//! label column (`0` inlier, `1` outlier).

use std::fs::File;
use std::io::Write;
use std::path::Path;

use udlad_core::{Dataset, Mat};

use crate::error::{Error, Result};

/// Which field holds the outlier label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl LabelColumn {
    /// Parses a CLI value: plain integers are indices, anything else a header name.
    pub fn parse(s: &str) -> Self {
        match s.parse() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }
}

/// True when the file's header row has a field named exactly `name`.
pub fn header_contains(path: impl AsRef<Path>, name: &str) -> Result<bool> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(headers.iter().any(|h| h == name))
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool, label_column: Option<&LabelColumn>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };

    let label_idx = match label_column {
        None => None,
        Some(LabelColumn::Index(i)) => Some(*i),
        Some(LabelColumn::Name(name)) => {
            if !has_header {
                return Err(Error::Usage(format!(
                    "label column '{name}' given by name but the file has no header"
                )));
            }
            let headers = reader.headers().map_err(csv_err)?;
            Some(headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
                path: path.to_path_buf(),
                message: format!("no column named '{name}'"),
            })?)
        }
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    let mut n = 0;
    let first_row = if has_header { 2 } else { 1 };
    for (r, record) in reader.records().enumerate() {
        let row = r + first_row;
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            message: format!("row {row}: {e}"),
        })?;
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                message: format!("row {row} has {} fields, expected {w}", record.len()),
            });
        }
        if let Some(li) = label_idx {
            if li >= w {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    message: format!("label column {li} out of range for {w} fields"),
                });
            }
        }
        for (c, field) in record.iter().enumerate() {
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                row,
                column: c + 1,
                message,
            };
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(format!("not a number: '{field}'")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value '{field}'")));
            }
            if Some(c) == label_idx {
                labels.push(match v {
                    0.0 => false,
                    1.0 => true,
                    _ => return Err(parse_err(format!("label must be 0 or 1, got '{field}'"))),
                });
            } else {
                values.push(v);
            }
        }
        n += 1;
    }

    let m = width.map_or(0, |w| w - label_idx.map_or(0, |_| 1));
    if n == 0 || m == 0 {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            message: "no samples or no feature columns".into(),
        });
    }
    let signals = Mat::from_col_major(m, n, values).map_err(udlad_core::Error::from)?;
    let name = path
        .file_stem()
        .map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(Dataset::new(name, signals, label_idx.map(|_| labels))?)
}

/// Writes `f0..f{m-1}` (and `label` when present) with a header row.
/// Values use the shortest representation that parses back exactly.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    write_csv_to(data, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to(data: &Dataset, out: &mut impl Write) -> std::io::Result<()> {
    let m = data.dim();
    let mut header: Vec<String> = (0..m).map(|i| format!("f{i}")).collect();
    if data.labels.is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for j in 0..data.len() {
        let mut fields: Vec<String> = data.signals.col(j).iter().map(|v| format!("{v:?}")).collect();
        if let Some(labels) = &data.labels {
            fields.push(if labels[j] { "1" } else { "0" }.into());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
