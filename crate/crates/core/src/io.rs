//! Matrix and model file formats.
//!
//! * CSV: one matrix row (dimension) per line, one column per example, no
//!   header.
//! * raw-f64: `d: u64 LE`, `n: u64 LE`, then `d·n` little-endian binary64
//!   values in column-major order.
//! * model: five `u64 LE` (`version = 1`, `d`, `k`, `data_rank`, fit kind
//!   code), `alpha` and `m` as binary64 (NaN = absent), the `d` mean values,
//!   then the `d × k` basis column-major.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::dataset::DataMatrix;
use crate::error::{bail, Result};
use crate::linalg::orthonormality_defect;
use crate::pca::{FitKind, Hyperparams, SubspaceModel};

pub const MODEL_FORMAT_VERSION: u64 = 1;
const MODEL_HEADER_BYTES: usize = 5 * 8 + 2 * 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    RawF64,
}

impl MatrixFormat {
    /// Guesses from the extension: `.csv` is CSV, anything else raw-f64.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::RawF64,
        }
    }
}

/// Renders a fraction with 10 significant digits.
pub fn fmt_fraction(x: f64) -> String {
    format!("{x:.9e}")
}

pub fn parse_csv(text: &str) -> Result<DataMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                let v: f64 = tok
                    .parse()
                    .map_err(|_| crate::Error::Parse(format!("line {}: not a number: {tok:?}", lineno + 1)))?;
                if !v.is_finite() {
                    bail!(Parse, "line {}: non-finite value {tok:?}", lineno + 1);
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                bail!(Parse, "line {}: {} fields, expected {}", lineno + 1, row.len(), first.len());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!(Parse, "CSV contains no rows");
    }
    let d = rows.len();
    let n = rows[0].len();
    DataMatrix::new(DMatrix::from_fn(d, n, |i, j| rows[i][j]))
}

pub fn to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn read_u64(bytes: &[u8], offset: usize) -> u64 {
    u64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("8-byte slice"))
}

fn read_f64(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("8-byte slice"))
}

fn usize_from(v: u64, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| crate::Error::Parse(format!("{what} {v} does not fit in memory")))
}

pub fn decode_raw(bytes: &[u8]) -> Result<DataMatrix> {
    if bytes.len() < 16 {
        bail!(Parse, "raw-f64 header needs 16 bytes, file has {}", bytes.len());
    }
    let d = usize_from(read_u64(bytes, 0), "d")?;
    let n = usize_from(read_u64(bytes, 8), "n")?;
    let payload = &bytes[16..];
    if !payload.len().is_multiple_of(8) {
        bail!(Parse, "raw-f64 payload length {} is not a multiple of 8", payload.len());
    }
    let count = payload.len() / 8;
    if d.checked_mul(n) != Some(count) {
        bail!(Dimension, "header declares {d}x{n} but payload holds {count} values");
    }
    let values: Vec<f64> = (0..count).map(|i| read_f64(payload, 8 * i)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        bail!(Parse, "raw-f64 payload contains non-finite values");
    }
    DataMatrix::new(DMatrix::from_vec(d, n, values))
}

pub fn encode_raw(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * m.len());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Reads a matrix; with `transpose` the file is taken as examples-by-rows.
pub fn load_matrix(path: &Path, format: MatrixFormat, transpose: bool) -> Result<DataMatrix> {
    let m = match format {
        MatrixFormat::Csv => parse_csv(&fs::read_to_string(path)?)?,
        MatrixFormat::RawF64 => decode_raw(&fs::read(path)?)?,
    };
    Ok(if transpose { m.transpose() } else { m })
}

pub fn save_matrix(path: &Path, m: &DMatrix<f64>, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Csv => fs::write(path, to_csv(m))?,
        MatrixFormat::RawF64 => fs::write(path, encode_raw(m))?,
    }
    Ok(())
}

pub fn encode_model(model: &SubspaceModel) -> Vec<u8> {
    let d = model.d();
    let k = model.k();
    let mut out = Vec::with_capacity(MODEL_HEADER_BYTES + 8 * (d + d * k));
    for v in [MODEL_FORMAT_VERSION, d as u64, k as u64, model.data_rank as u64, model.fit_kind.code()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let (alpha, m) = match model.hyperparams {
        Some(h) => (h.alpha, h.m.map_or(f64::NAN, |m| m as f64)),
        None => (f64::NAN, f64::NAN),
    };
    out.extend_from_slice(&alpha.to_le_bytes());
    out.extend_from_slice(&m.to_le_bytes());
    for v in model.mean.iter().chain(model.basis.iter()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<SubspaceModel> {
    if bytes.len() < MODEL_HEADER_BYTES {
        bail!(Parse, "model header needs {MODEL_HEADER_BYTES} bytes, file has {}", bytes.len());
    }
    let version = read_u64(bytes, 0);
    if version != MODEL_FORMAT_VERSION {
        bail!(Parse, "unsupported model format version {version}");
    }
    let d = usize_from(read_u64(bytes, 8), "d")?;
    let k = usize_from(read_u64(bytes, 16), "k")?;
    let data_rank = usize_from(read_u64(bytes, 24), "data_rank")?;
    let code = read_u64(bytes, 32);
    let fit_kind = FitKind::from_code(code).ok_or_else(|| crate::Error::Parse(format!("unknown fit kind {code}")))?;
    let alpha = read_f64(bytes, 40);
    let m = read_f64(bytes, 48);
    if d == 0 || k == 0 || k > d || data_rank > k {
        bail!(Parse, "inconsistent model header d = {d}, k = {k}, data_rank = {data_rank}");
    }
    let expected = MODEL_HEADER_BYTES + 8 * (d + d * k);
    if bytes.len() != expected {
        bail!(Dimension, "model declares d = {d}, k = {k}: expected {expected} bytes, found {}", bytes.len());
    }
    let values: Vec<f64> = (0..d + d * k).map(|i| read_f64(bytes, MODEL_HEADER_BYTES + 8 * i)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        bail!(Parse, "model contains non-finite values");
    }
    let mean = DVector::from_column_slice(&values[..d]);
    let basis = DMatrix::from_column_slice(d, k, &values[d..]);
    if orthonormality_defect(&basis) > 1e-8 {
        bail!(Numeric, "model basis is not orthonormal");
    }
    let hyperparams = if alpha.is_nan() {
        None
    } else {
        let m = if m.is_nan() {
            None
        } else if m >= 1.0 && m.fract() == 0.0 {
            Some(m as usize)
        } else {
            bail!(Parse, "invalid transferred dimension {m}");
        };
        Some(Hyperparams { alpha, m })
    };
    Ok(SubspaceModel { basis, mean, data_rank, fit_kind, hyperparams, eigenvalues: Vec::new() })
}

pub fn save_model(path: &Path, model: &SubspaceModel) -> Result<()> {
    fs::write(path, encode_model(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<SubspaceModel> {
    decode_model(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn csv_basic() {
        let m = parse_csv("1,2\n3,4\n").unwrap();
        assert_eq!(m.values(), &dmatrix![1.0, 2.0; 3.0, 4.0]);
        assert_eq!((m.d(), m.n()), (2, 2));
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(parse_csv("1,abc"), Err(crate::Error::Parse(_))));
        assert!(matches!(parse_csv("1,2\n3"), Err(crate::Error::Parse(_))));
        assert!(matches!(parse_csv("1,NaN"), Err(crate::Error::Parse(_))));
        assert!(matches!(parse_csv("inf,1"), Err(crate::Error::Parse(_))));
        assert!(matches!(parse_csv("\n"), Err(crate::Error::Parse(_))));
    }

    #[test]
    fn raw_shape_mismatch() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&3u64.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        for i in 0..5 {
            bytes.extend_from_slice(&(i as f64).to_le_bytes());
        }
        assert!(matches!(decode_raw(&bytes), Err(crate::Error::Dimension(_))));
        assert!(matches!(decode_raw(&bytes[..10]), Err(crate::Error::Parse(_))));
    }

    #[test]
    fn raw_is_column_major() {
        let m = dmatrix![1.0, 2.0, 3.0; 4.0, 5.0, 6.0];
        let bytes = encode_raw(&m);
        assert_eq!(bytes.len(), 16 + 6 * 8);
        assert_eq!(read_f64(&bytes, 16 + 8), 4.0);
        assert_eq!(decode_raw(&bytes).unwrap().values(), &m);
    }

    #[test]
    fn model_layout() {
        let model = SubspaceModel {
            basis: dmatrix![0.0; 1.0],
            mean: nalgebra::dvector![0.5, -0.5],
            data_rank: 1,
            fit_kind: FitKind::TlpcaP,
            hyperparams: Some(Hyperparams { alpha: 2.0, m: Some(3) }),
            eigenvalues: vec![1.0],
        };
        let bytes = encode_model(&model);
        assert_eq!(bytes.len(), 56 + 8 * 4);
        assert_eq!(read_u64(&bytes, 32), 1);
        assert_eq!(read_f64(&bytes, 40), 2.0);
        assert_eq!(read_f64(&bytes, 48), 3.0);
        let back = decode_model(&bytes).unwrap();
        assert_eq!(back.basis, model.basis);
        assert_eq!(back.hyperparams, model.hyperparams);
        assert!(back.eigenvalues.is_empty());

        let pca = SubspaceModel { fit_kind: FitKind::Pca, hyperparams: None, ..model };
        let bytes = encode_model(&pca);
        assert!(read_f64(&bytes, 40).is_nan() && read_f64(&bytes, 48).is_nan());
        assert_eq!(decode_model(&bytes).unwrap().hyperparams, None);
        assert!(matches!(decode_model(&bytes[..bytes.len() - 8]), Err(crate::Error::Dimension(_))));
    }
}
