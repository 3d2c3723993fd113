//! Matrix files: the `KMAT1` binary layout and rectangular CSV.
//!
//! `KMAT1` is the five magic bytes, `rows` and `cols` as little-endian `u64`,
//! then `rows·cols` little-endian `f64` in column-major order.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use tskit::tensor::DenseMatrix;

use crate::error::CliError;

pub const MAGIC: &[u8; 5] = b"KMAT1";
const HEADER_LEN: usize = 5 + 8 + 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Kmat,
    Csv,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Kmat => "kmat",
            Format::Csv => "csv",
        }
    }
}

pub fn encode_kmat(m: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_kmat(bytes: &[u8]) -> Result<DenseMatrix, CliError> {
    if bytes.len() < HEADER_LEN || &bytes[..5] != MAGIC {
        return Err(CliError::Io("not a KMAT1 file".into()));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let (rows, cols) = (word(5), word(13));
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| CliError::Io(format!("KMAT1 header {rows}x{cols} overflows")))?;
    if (bytes.len() - HEADER_LEN) as u64 != count {
        return Err(CliError::Io(format!(
            "KMAT1 payload holds {} bytes, header {rows}x{cols} needs {count}",
            bytes.len() - HEADER_LEN
        )));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(DenseMatrix::new(rows as usize, cols as usize, data)?)
}

/// One row per line; `{}` formatting of `f64` round-trips exactly.
pub fn encode_csv(m: &DenseMatrix) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..m.rows() {
        w.write_record((0..m.cols()).map(|j| m.get(i, j).to_string()))
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn decode_csv(bytes: &[u8]) -> Result<DenseMatrix, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| CliError::Io(format!("CSV: {e}")))?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| CliError::Io(format!("CSV line {}: cannot parse {f:?}", line + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Io("CSV rows have different lengths".into()));
    }
    Ok(DenseMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Reads either format, choosing by the magic bytes.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(MAGIC) {
        decode_kmat(&bytes)
    } else {
        decode_csv(&bytes)
    }
    .map_err(|e| match e {
        CliError::Io(msg) => CliError::Io(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &Path, m: &DenseMatrix, format: Format) -> Result<(), CliError> {
    let bytes = match format {
        Format::Kmat => encode_kmat(m),
        Format::Csv => encode_csv(m)?,
    };
    write_bytes(path, &bytes)
}
