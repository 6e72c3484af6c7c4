use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::{dataset_name, LabeledDataset};
use crate::error::{Error, Result};

fn parse_err(path: &Path, location: String, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        location,
        message: message.into(),
    }
}

/// Maps raw class ids to `0..g` in order of first appearance.
pub fn canonicalize_labels(raw: &[i64]) -> Vec<usize> {
    let mut ids: HashMap<i64, usize> = HashMap::new();
    raw.iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(*l).or_insert(next)
        })
        .collect()
}

fn parse_label(path: &Path, location: String, cell: &str) -> Result<i64> {
    cell.trim()
        .parse::<i64>()
        .map_err(|_| parse_err(path, location, format!("label {cell:?} is not an integer")))
}

/// Reads one sample per line, comma-separated, no header.
///
/// With `has_labels` the last column holds integer class ids, which are
/// canonicalized to `0..g`.
pub fn load_csv(path: &Path, has_labels: bool) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(path, "file".into(), format!("{other:?}")),
        })?;

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, format!("row {line}"), e.to_string())
        })?;
        let row = rows + 1;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(parse_err(
                    path,
                    format!("row {row}"),
                    format!("expected {w} fields, found {}", record.len()),
                ));
            }
            _ => {}
        }
        let feature_cells = if has_labels {
            if record.len() < 2 {
                return Err(parse_err(
                    path,
                    format!("row {row}"),
                    "need at least one feature and a label column",
                ));
            }
            record.len() - 1
        } else {
            record.len()
        };
        for (c, cell) in record.iter().take(feature_cells).enumerate() {
            let loc = || format!("row {row}, column {}", c + 1);
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(path, loc(), format!("{cell:?} is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(path, loc(), format!("non-finite value {cell:?}")));
            }
            values.push(v);
        }
        if has_labels {
            let loc = format!("row {row}, column {}", record.len());
            raw_labels.push(parse_label(path, loc, &record[record.len() - 1])?);
        }
        rows += 1;
    }
    let Some(width) = width else {
        return Err(parse_err(path, "file".into(), "no data rows"));
    };
    let cols = if has_labels { width - 1 } else { width };
    let features = DMatrix::from_row_slice(rows, cols, &values);
    let labels = has_labels.then(|| canonicalize_labels(&raw_labels));
    LabeledDataset::new(dataset_name(path), features, labels)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Writes features (and optionally a trailing label column) as CSV.
///
/// Values use the shortest decimal form that parses back to the same `f64`.
pub fn save_csv(path: &Path, x: &DMatrix<f64>, labels: Option<&[usize]>) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != x.nrows() {
            return Err(Error::contract(format!(
                "{} labels for {} rows",
                l.len(),
                x.nrows()
            )));
        }
    }
    let mut text = String::new();
    for (i, row) in x.row_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        text.push_str(&cells.join(","));
        if let Some(l) = labels {
            text.push(',');
            text.push_str(&l[i].to_string());
        }
        text.push('\n');
    }
    write_file(path, &text)
}

/// One integer label per line; blank lines are skipped.
pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        raw.push(parse_label(path, format!("row {}", i + 1), line)?);
    }
    Ok(canonicalize_labels(&raw))
}

pub fn save_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut text = String::with_capacity(labels.len() * 3);
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    write_file(path, &text)
}
