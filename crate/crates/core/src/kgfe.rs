//! Binary matrix file format used for embedding matrices and checkpoints.
//!
//! Layout: magic bytes `KGFE`, `u16` version (currently 1), `u64` row count,
//! `u32` column count, then row-major little-endian `f32` values. Rows are
//! ordered by entity id when the matrix holds per-entity vectors.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

const MAGIC: [u8; 4] = *b"KGFE";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum KgfeError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: bad magic bytes (not a KGFE file)")]
    BadMagic { path: String },
    #[error("{path}: unsupported version {found} (expected {VERSION})")]
    BadVersion { path: String, found: u16 },
    #[error("{path}: truncated payload (expected {expected} values)")]
    Truncated { path: String, expected: usize },
}

fn io_err(path: &Path, source: std::io::Error) -> KgfeError {
    KgfeError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes a matrix, converting values to `f32`.
pub fn write_matrix(path: &Path, matrix: &Array2<f64>) -> Result<(), KgfeError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut inner = || -> std::io::Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(matrix.nrows() as u64).to_le_bytes())?;
        w.write_all(&(matrix.ncols() as u32).to_le_bytes())?;
        for row in matrix.rows() {
            for &v in row.iter() {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        w.flush()
    };
    inner().map_err(|e| io_err(path, e))
}

/// Reads a matrix, widening values to `f64`.
pub fn read_matrix(path: &Path) -> Result<Array2<f64>, KgfeError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| io_err(path, e))?;
    if magic != MAGIC {
        return Err(KgfeError::BadMagic {
            path: path.display().to_string(),
        });
    }
    let mut buf2 = [0u8; 2];
    r.read_exact(&mut buf2).map_err(|e| io_err(path, e))?;
    let version = u16::from_le_bytes(buf2);
    if version != VERSION {
        return Err(KgfeError::BadVersion {
            path: path.display().to_string(),
            found: version,
        });
    }
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8).map_err(|e| io_err(path, e))?;
    let rows = u64::from_le_bytes(buf8) as usize;
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4).map_err(|e| io_err(path, e))?;
    let cols = u32::from_le_bytes(buf4) as usize;

    let total = rows * cols;
    let mut data = Vec::with_capacity(total);
    let mut val = [0u8; 4];
    for _ in 0..total {
        if r.read_exact(&mut val).is_err() {
            return Err(KgfeError::Truncated {
                path: path.display().to_string(),
                expected: total,
            });
        }
        data.push(f32::from_le_bytes(val) as f64);
    }
    Ok(Array2::from_shape_vec((rows, cols), data).expect("shape matches data length"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn round_trip_preserves_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.kgfe");
        let m = array![[1.0, -2.5, 0.0], [3.25, 4.0, f32::MIN_POSITIVE as f64]];
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn empty_matrix_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.kgfe");
        let m = Array2::<f64>::zeros((0, 7));
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.nrows(), 0);
        assert_eq!(back.ncols(), 7);
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.kgfe");
        std::fs::write(&path, b"NOPE\x01\x00").unwrap();
        assert!(matches!(read_matrix(&path), Err(KgfeError::BadMagic { .. })));
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.kgfe");
        let m = array![[1.0, 2.0], [3.0, 4.0]];
        write_matrix(&path, &m).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
        assert!(matches!(
            read_matrix(&path),
            Err(KgfeError::Truncated { .. })
        ));
    }
}
