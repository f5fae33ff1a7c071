use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::{Dataset, Task};
use crate::error::{Error, Result};
use crate::numkit::Matrix;

/// Dense numeric CSV with a header; `label_column` becomes the response.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str, task: Task, normalize: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let mut d = parse_csv(File::open(path)?, label_column, task, normalize)?;
    d.meta.name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    Ok(d)
}

pub fn parse_csv<R: Read>(input: R, label_column: &str, task: Task, normalize: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    let label_at = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::invalid(format!("no column named `{label_column}`")))?;
    let p = headers.len() - 1;
    let mut data = Vec::new();
    let mut y = Vec::new();
    for (no, rec) in reader.records().enumerate() {
        let line = no + 2;
        let rec = rec.map_err(|e| csv_error(e, line))?;
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column `{}`: `{cell}` is not a number", &headers[j]),
            })?;
            if j == label_at {
                y.push(if task == Task::Logistic { binary_label(v) } else { v });
            } else {
                data.push(v);
            }
        }
    }
    let n = y.len();
    let mut x = Matrix::dense(n, p, data)?;
    if normalize {
        x.normalize_rows();
    }
    Dataset::new(x, y, task, "csv")
}

/// Logistic labels are `+1` for positive values and `-1` otherwise, so `{0, 1}` and `{-1, 1}` codings both work.
pub(crate) fn binary_label(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("row has {len} fields, header has {expected_len}")
        }
        _ => e.to_string(),
    };
    Error::Parse { line, message }
}
