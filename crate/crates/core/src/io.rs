//! Matrix files.
//!
//! MAT1 layout (all little-endian):
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 8    | magic `TSQRMAT1`               |
//! | 8      | 4    | rows (u32)                     |
//! | 12     | 4    | cols (u32)                     |
//! | 16     | 4    | reserved (u32, written as 0)   |
//! | 20     | 4    | padding (u32, written as 0)    |
//! | 24     | 8·rows·cols | IEEE-754 doubles, column-major |
//!
//! The padding keeps the payload 8-byte aligned. Vectors are stored as
//! `len x 1` matrices. CSV files hold one matrix row per line.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAT1_MAGIC: &[u8; 8] = b"TSQRMAT1";
pub const MAT1_HEADER_LEN: usize = 24;

pub fn encode_mat1(a: &Matrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(a.rows()).map_err(|_| Error::dim("too many rows for MAT1"))?;
    let cols = u32::try_from(a.cols()).map_err(|_| Error::dim("too many columns for MAT1"))?;
    let mut out = Vec::with_capacity(MAT1_HEADER_LEN + 8 * a.as_slice().len());
    out.extend_from_slice(MAT1_MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in a.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_mat1(bytes: &[u8], path: &Path) -> Result<Matrix> {
    let bad = |msg: &str| Error::Format {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    };
    if bytes.len() < MAT1_HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if &bytes[..8] != MAT1_MAGIC {
        return Err(bad("bad magic, expected TSQRMAT1"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (rows, cols) = (word(8), word(12));
    let payload = &bytes[MAT1_HEADER_LEN..];
    if payload.len() != 8 * rows * cols {
        return Err(bad(&format!(
            "payload has {} bytes, header promises {rows}x{cols}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let a = Matrix::from_col_major(rows, cols, data)?;
    a.check_finite()?;
    Ok(a)
}

pub fn write_mat1(path: impl AsRef<Path>, a: &Matrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    w.write_all(&encode_mat1(a)?)?;
    w.flush()?;
    Ok(())
}

pub fn read_mat1(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_mat1(&bytes, path)
}

pub fn write_vec(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    write_mat1(path, &Matrix::column_vector(v))
}

pub fn read_vec(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let m = read_mat1(path)?;
    if m.cols() != 1 && !m.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: format!("expected a column vector, found {}x{}", m.rows(), m.cols()),
        });
    }
    Ok(m.into_vec())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|e| Error::Format {
                    path: path.to_path_buf(),
                    msg: format!("bad number {s:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let a = Matrix::from_rows(&rows).map_err(|_| Error::Format {
        path: path.to_path_buf(),
        msg: "rows have different lengths".into(),
    })?;
    a.check_finite()?;
    Ok(a)
}

pub fn write_csv(path: impl AsRef<Path>, a: &Matrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path.as_ref())?;
    for i in 0..a.rows() {
        // `{:e}` round-trips doubles exactly.
        w.write_record((0..a.cols()).map(|j| format!("{:e}", a[(i, j)])))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads MAT1 or CSV, chosen by extension (`.csv` means CSV).
pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    if is_csv(path) {
        read_csv(path)
    } else {
        read_mat1(path)
    }
}

pub fn write_matrix(path: impl AsRef<Path>, a: &Matrix) -> Result<()> {
    let path = path.as_ref();
    if is_csv(path) {
        write_csv(path, a)
    } else {
        write_mat1(path, a)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}
