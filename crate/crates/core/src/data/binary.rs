use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Leading bytes of the binary matrix format.
///
/// Layout: magic, rows as u64 LE, cols as u64 LE, then `rows * cols` f64 LE
/// values in row-major order.
pub const BINARY_MAGIC: &[u8; 5] = b"SMCL1";
const HEADER_LEN: usize = 5 + 8 + 8;

fn parse_err(path: &Path, location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        location: location.into(),
        message: message.into(),
    }
}

pub fn is_binary_file(path: &Path) -> Result<bool> {
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut head = [0u8; 5];
    let mut read = 0;
    while read < head.len() {
        match file.read(&mut head[read..]).map_err(|e| Error::io(path, e))? {
            0 => break,
            k => read += k,
        }
    }
    Ok(read == head.len() && &head == BINARY_MAGIC)
}

pub fn write_binary(path: &Path, x: &DMatrix<f64>) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * x.len());
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&(x.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(x.ncols() as u64).to_le_bytes());
    for row in x.row_iter() {
        for v in row.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_binary(path: &Path) -> Result<DMatrix<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < HEADER_LEN || &bytes[..5] != BINARY_MAGIC {
        return Err(parse_err(path, "header", "missing SMCL1 header"));
    }
    let rows = u64::from_le_bytes(bytes[5..13].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[13..21].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| parse_err(path, "header", "dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(parse_err(
            path,
            "payload",
            format!("expected {expected} bytes for {rows}x{cols}, found {}", bytes.len()),
        ));
    }
    let mut values = Vec::with_capacity(rows * cols);
    for (idx, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(parse_err(
                path,
                format!("row {}, column {}", idx / cols + 1, idx % cols + 1),
                "non-finite value",
            ));
        }
        values.push(v);
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}
