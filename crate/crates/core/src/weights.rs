//! Versioned flat binary container for model weights.
//!
//! Layout: magic `PXWB`, format version (u32 LE), model kind (u8), matrix
//! count (u32 LE), then per matrix a length-prefixed ASCII name, row and
//! column counts (u32 LE each), and row-major 64-bit little-endian floats.
//! Both the layout encoder and the Q-network persist through this format.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"PXWB";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    LayoutEncoder = 1,
    QNetwork = 2,
}

impl ModelKind {
    fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(ModelKind::LayoutEncoder),
            2 => Some(ModelKind::QNetwork),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("bad magic bytes (not a weights file)")]
    BadMagic,
    #[error("unsupported weights version {0}")]
    BadVersion(u32),
    #[error("unknown model kind {0}")]
    BadKind(u8),
    #[error("expected model kind {expected:?}, found {found:?}")]
    KindMismatch {
        expected: ModelKind,
        found: ModelKind,
    },
    #[error("malformed weights file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense row-major f64 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// y = A x (rows -> output dimension).
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            out[r] = acc;
        }
    }

    /// y = A^T x (cols -> output dimension).
    pub fn mul_vec_transposed(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let xr = x[r];
            for (o, a) in out.iter_mut().zip(row.iter()) {
                *o += a * xr;
            }
        }
    }
}

/// Named matrix list as stored on disk.
pub struct WeightsFile {
    pub kind: ModelKind,
    pub matrices: Vec<(String, Matrix)>,
}

impl WeightsFile {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), WeightsError> {
        out.write_all(&MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&[self.kind as u8])?;
        out.write_all(&(self.matrices.len() as u32).to_le_bytes())?;
        for (name, m) in &self.matrices {
            let name_bytes = name.as_bytes();
            if name_bytes.len() > u8::MAX as usize {
                return Err(WeightsError::Malformed("matrix name too long".into()));
            }
            out.write_all(&[name_bytes.len() as u8])?;
            out.write_all(name_bytes)?;
            out.write_all(&(m.rows as u32).to_le_bytes())?;
            out.write_all(&(m.cols as u32).to_le_bytes())?;
            for v in &m.data {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self, WeightsError> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(WeightsError::BadMagic);
        }
        let mut u32buf = [0u8; 4];
        input.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != VERSION {
            return Err(WeightsError::BadVersion(version));
        }
        let mut kind_byte = [0u8; 1];
        input.read_exact(&mut kind_byte)?;
        let kind = ModelKind::from_u8(kind_byte[0]).ok_or(WeightsError::BadKind(kind_byte[0]))?;
        input.read_exact(&mut u32buf)?;
        let count = u32::from_le_bytes(u32buf) as usize;
        let mut matrices = Vec::with_capacity(count);
        for _ in 0..count {
            let mut len_byte = [0u8; 1];
            input.read_exact(&mut len_byte)?;
            let mut name_bytes = vec![0u8; len_byte[0] as usize];
            input.read_exact(&mut name_bytes)?;
            let name = String::from_utf8(name_bytes)
                .map_err(|_| WeightsError::Malformed("non-utf8 matrix name".into()))?;
            input.read_exact(&mut u32buf)?;
            let rows = u32::from_le_bytes(u32buf) as usize;
            input.read_exact(&mut u32buf)?;
            let cols = u32::from_le_bytes(u32buf) as usize;
            let mut data = vec![0.0f64; rows * cols];
            let mut f64buf = [0u8; 8];
            for v in data.iter_mut() {
                input.read_exact(&mut f64buf)?;
                *v = f64::from_le_bytes(f64buf);
            }
            matrices.push((name, Matrix { rows, cols, data }));
        }
        Ok(WeightsFile { kind, matrices })
    }

    pub fn save(&self, path: &Path) -> Result<(), WeightsError> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path, expected: ModelKind) -> Result<Self, WeightsError> {
        let file = std::fs::File::open(path)?;
        let loaded = Self::read_from(std::io::BufReader::new(file))?;
        if loaded.kind != expected {
            return Err(WeightsError::KindMismatch {
                expected,
                found: loaded.kind,
            });
        }
        Ok(loaded)
    }

    pub fn take(&mut self, name: &str) -> Result<Matrix, WeightsError> {
        let idx = self
            .matrices
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| WeightsError::Malformed(format!("missing matrix {name:?}")))?;
        Ok(self.matrices.remove(idx).1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_bits() {
        let m1 = Matrix::from_rows(vec![vec![1.5, -2.25], vec![0.0, f64::MIN_POSITIVE]]);
        let m2 = Matrix::from_rows(vec![vec![std::f64::consts::PI]]);
        let wf = WeightsFile {
            kind: ModelKind::QNetwork,
            matrices: vec![("w0".into(), m1.clone()), ("b0".into(), m2.clone())],
        };
        let mut buf = Vec::new();
        wf.write_to(&mut buf).unwrap();
        let back = WeightsFile::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.kind, ModelKind::QNetwork);
        assert_eq!(back.matrices[0].1, m1);
        assert_eq!(back.matrices[1].1, m2);
    }

    #[test]
    fn rejects_bad_magic() {
        let buf = b"NOPE\x01\x00\x00\x00".to_vec();
        assert!(matches!(
            WeightsFile::read_from(buf.as_slice()),
            Err(WeightsError::BadMagic)
        ));
    }

    #[test]
    fn matvec_agrees_with_hand_arithmetic() {
        let m = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        let mut out = vec![0.0; 3];
        m.mul_vec(&[10.0, 1.0], &mut out);
        assert_eq!(out, vec![12.0, 34.0, 56.0]);
        let mut back = vec![0.0; 2];
        m.mul_vec_transposed(&[1.0, 1.0, 1.0], &mut back);
        assert_eq!(back, vec![9.0, 12.0]);
    }
}
