//! On-disk formats: the `HSD1` binary dataset, headerless CSV matrices, JSON.
//!
//! `HSD1` layout: the 4 magic bytes, then `M`, `L` and `N_truth` (0 when
//! unknown) as little-endian `u32`, then `M * L` little-endian `f64` stored
//! pixel-major, i.e. the `M` bands of pixel 0 first.

use std::fs;
use std::path::Path;

use hypercsi::SpectralDataset;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CliError, Result};

pub const HSD_MAGIC: &[u8; 4] = b"HSD1";
const HEADER_LEN: usize = 16;

pub fn encode_hsd(data: &SpectralDataset) -> Vec<u8> {
    let pixels = data.pixels();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * pixels.len());
    out.extend_from_slice(HSD_MAGIC);
    out.extend_from_slice(&(data.n_bands() as u32).to_le_bytes());
    out.extend_from_slice(&(data.n_pixels() as u32).to_le_bytes());
    out.extend_from_slice(&(data.n_truth.unwrap_or(0) as u32).to_le_bytes());
    // column-major storage already keeps each pixel contiguous
    for v in pixels.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_hsd(bytes: &[u8]) -> std::result::Result<SpectralDataset, String> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != HSD_MAGIC {
        return Err("not an HSD1 file".into());
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 * k..4 * k + 4].try_into().unwrap()) as usize;
    let (m, l, n_truth) = (word(1), word(2), word(3));
    let expected = m
        .checked_mul(l)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or("header dimensions overflow")?;
    if bytes.len() != expected {
        return Err(format!(
            "expected {expected} bytes for {m} bands x {l} pixels, found {}",
            bytes.len()
        ));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(format!("non-finite value in pixel {}", k / m.max(1)));
    }
    let pixels = DMatrix::from_vec(m, l, values);
    Ok(match n_truth {
        0 => SpectralDataset::new(pixels),
        n => SpectralDataset::with_truth(pixels, n),
    })
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a dataset, as CSV (one pixel per row) when the extension is `.csv`
/// and as `HSD1` otherwise.
pub fn read_dataset(path: &Path) -> Result<SpectralDataset> {
    if is_csv(path) {
        let rows = read_matrix_csv(path)?;
        return Ok(SpectralDataset::new(rows.transpose()));
    }
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_hsd(&bytes).map_err(|m| CliError::format(path, m))
}

pub fn write_dataset(path: &Path, data: &SpectralDataset) -> Result<()> {
    if is_csv(path) {
        return write_matrix_csv(path, &data.pixels().transpose());
    }
    fs::write(path, encode_hsd(data)).map_err(|e| CliError::io(path, e))
}

/// Headerless CSV, one matrix row per line.
pub fn write_matrix_csv(path: &Path, matrix: &DMatrix<f64>) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut row = vec![0.0; matrix.ncols()];
    for r in 0..matrix.nrows() {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = matrix[(r, c)];
        }
        wtr.serialize(&row).map_err(|e| csv_error(path, e))?;
    }
    wtr.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut values = Vec::new();
    let mut ncols = 0;
    let mut nrows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if nrows == 0 {
            ncols = record.len();
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::format(path, format!("line {}: bad number {field:?}", nrows + 1)))?;
            if !v.is_finite() {
                return Err(CliError::format(path, format!("line {}: non-finite value", nrows + 1)));
            }
            values.push(v);
        }
        nrows += 1;
    }
    if nrows == 0 {
        return Err(CliError::format(path, "empty matrix"));
    }
    Ok(DMatrix::from_row_slice(nrows, ncols, &values))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// One compact JSON document per line.
pub fn write_json_lines<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("serializable value"));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}
