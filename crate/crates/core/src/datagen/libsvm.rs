use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::tabular::binary_label;
use super::{Dataset, Task};
use crate::error::{Error, Result};
use crate::numkit::{Matrix, SparseRow};

/// Reads `label idx:val ...` lines with 1-based ascending indices.
/// `width` fixes the column count; otherwise it is the largest index seen.
pub fn load_libsvm(path: impl AsRef<Path>, task: Task, width: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut d = parse_libsvm(BufReader::new(File::open(path)?), task, width)?;
    d.meta.name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    Ok(d)
}

pub fn parse_libsvm<R: BufRead>(input: R, task: Task, width: Option<usize>) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut max_col = 0usize;
    for (no, line) in input.lines().enumerate() {
        let line_no = no + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: line_no, message };
        let mut tokens = content.split_whitespace();
        let label = tokens.next().expect("non-empty line has a token");
        let label: f64 = label.parse().map_err(|_| err(format!("bad label `{label}`")))?;
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for tok in tokens {
            let (i, v) = tok.split_once(':').ok_or_else(|| err(format!("expected idx:val, got `{tok}`")))?;
            let i: usize = i.parse().map_err(|_| err(format!("bad index `{i}`")))?;
            if i == 0 {
                return Err(err("indices are 1-based".into()));
            }
            if indices.last().is_some_and(|&last| i - 1 <= last) {
                return Err(err(format!("index {i} not ascending")));
            }
            let v: f64 = v.parse().map_err(|_| err(format!("bad value `{v}`")))?;
            indices.push(i - 1);
            values.push(v);
            max_col = max_col.max(i);
        }
        rows.push(SparseRow::new(indices, values));
        y.push(if task == Task::Logistic { binary_label(label) } else { label });
    }
    let p = match width {
        Some(w) if w < max_col => {
            return Err(Error::invalid(format!("column {max_col} exceeds the declared width {w}")));
        }
        Some(w) => w,
        None => max_col,
    };
    Dataset::new(Matrix::sparse(p, rows)?, y, task, "libsvm")
}

/// Writes stored entries of every row, indices shifted to 1-based.
pub fn write_libsvm(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (i, label) in d.y.iter().enumerate() {
        write!(out, "{label}")?;
        for (j, v) in d.x.row(i).entries() {
            write!(out, " {}:{v}", j + 1)?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}
