//! The replicated store: K files, each split into L layers of S field
//! elements, plus the brute-force oracle every decoder is checked against.
//!
//! # File format
//!
//! ```text
//! "PFRD"  u8 version=1  u8 p  u8 m  u16 K  u32 L  u32 S
//! K*L*S elements as u16, ordered file-major, then layer, then position
//! ```
//!
//! All integers are little-endian.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{CodecError, Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::projspace::CoeffVector;

pub const DB_MAGIC: &[u8; 4] = b"PFRD";
pub const DB_VERSION: u8 = 1;
const DB_HEADER_LEN: usize = 4 + 1 + 1 + 1 + 2 + 4 + 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Database {
    field: FieldSpec,
    files: usize,
    layers: usize,
    record_len: usize,
    cells: Vec<FieldElement>,
}

/// The retrieved function `v^T W[t]` for every layer t, in original layer order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedStream {
    pub values: Vec<Vec<FieldElement>>,
}

impl DecodedStream {
    pub fn layers(&self) -> usize {
        self.values.len()
    }

    /// SHA-256 over the elements as little-endian u16, layer-major.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for rec in &self.values {
            for e in rec {
                h.update(e.0.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

impl Database {
    pub fn from_cells(
        field: FieldSpec,
        files: usize,
        layers: usize,
        record_len: usize,
        cells: Vec<FieldElement>,
    ) -> Result<Self> {
        check_dims(files, layers, record_len)?;
        let expected = files * layers * record_len;
        if cells.len() != expected {
            return Err(Error::LengthMismatch { expected, found: cells.len() });
        }
        if let Some(bad) = cells.iter().find(|&&c| !field.contains(c)) {
            return Err(Error::ElementOutOfField { value: bad.0 as u32, order: field.order() });
        }
        Ok(Database { field, files, layers, record_len, cells })
    }

    /// Uniformly random cells from a ChaCha20 stream keyed by `seed`.
    pub fn generate(field: &FieldSpec, files: usize, layers: usize, record_len: usize, seed: u64) -> Result<Self> {
        check_dims(files, layers, record_len)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let q = field.order();
        let cells = (0..files * layers * record_len).map(|_| FieldElement(rng.random_range(0..q) as u16)).collect();
        Ok(Database { field: field.clone(), files, layers, record_len, cells })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// K.
    pub fn files(&self) -> usize {
        self.files
    }

    /// L.
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// S.
    pub fn record_len(&self) -> usize {
        self.record_len
    }

    pub fn cells(&self) -> &[FieldElement] {
        &self.cells
    }

    /// `W_file[layer]`, both 0-based.
    pub fn segment(&self, file: usize, layer: usize) -> &[FieldElement] {
        let start = (file * self.layers + layer) * self.record_len;
        &self.cells[start..start + self.record_len]
    }

    /// `v^T W[layer]` for a 0-based layer.
    pub fn combine_layer(&self, v: &CoeffVector, layer: usize) -> Result<Vec<FieldElement>> {
        if v.len() != self.files {
            return Err(Error::LengthMismatch { expected: self.files, found: v.len() });
        }
        let mut acc = vec![FieldElement::ZERO; self.record_len];
        for (k, &c) in v.entries().iter().enumerate() {
            self.field.axpy(&mut acc, c, self.segment(k, layer));
        }
        Ok(acc)
    }

    /// Ground truth: `v^T W[t]` for all t.
    pub fn oracle(&self, v: &CoeffVector) -> Result<DecodedStream> {
        if v.len() != self.files {
            return Err(Error::LengthMismatch { expected: self.files, found: v.len() });
        }
        let values = (0..self.layers).map(|t| self.combine_layer(v, t)).collect::<Result<_>>()?;
        Ok(DecodedStream { values })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let p = u8::try_from(self.field.p())
            .map_err(|_| Error::InvalidParameter(format!("p = {} does not fit the file header", self.field.p())))?;
        let files = u16::try_from(self.files)
            .map_err(|_| Error::InvalidParameter(format!("K = {} does not fit the file header", self.files)))?;
        let layers = u32::try_from(self.layers)
            .map_err(|_| Error::InvalidParameter(format!("L = {} does not fit the file header", self.layers)))?;
        let record_len = u32::try_from(self.record_len)
            .map_err(|_| Error::InvalidParameter(format!("S = {} does not fit the file header", self.record_len)))?;

        let mut out = Vec::with_capacity(DB_HEADER_LEN + 2 * self.cells.len());
        out.extend_from_slice(DB_MAGIC);
        out.push(DB_VERSION);
        out.push(p);
        out.push(self.field.m() as u8);
        out.extend_from_slice(&files.to_le_bytes());
        out.extend_from_slice(&layers.to_le_bytes());
        out.extend_from_slice(&record_len.to_le_bytes());
        for c in &self.cells {
            out.extend_from_slice(&c.0.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(CodecError::Truncated.into());
        }
        if &bytes[..4] != DB_MAGIC {
            return Err(CodecError::BadMagic.into());
        }
        if bytes.len() < DB_HEADER_LEN {
            return Err(CodecError::Truncated.into());
        }
        if bytes[4] != DB_VERSION {
            return Err(CodecError::BadVersion(bytes[4]).into());
        }
        let (p, m) = (bytes[5] as u32, bytes[6] as u32);
        let files = u16::from_le_bytes([bytes[7], bytes[8]]) as usize;
        let layers = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
        let record_len = u32::from_le_bytes(bytes[13..17].try_into().unwrap()) as usize;
        let field = FieldSpec::new(p, m).map_err(|e| CodecError::BadHeader(e.to_string()))?;
        check_dims(files, layers, record_len).map_err(|e| CodecError::BadHeader(e.to_string()))?;

        let count = files
            .checked_mul(layers)
            .and_then(|n| n.checked_mul(record_len))
            .ok_or_else(|| CodecError::BadHeader("dimensions overflow".into()))?;
        let body = &bytes[DB_HEADER_LEN..];
        if body.len() / 2 < count {
            return Err(CodecError::Truncated.into());
        }
        if body.len() != 2 * count {
            return Err(CodecError::TrailingBytes.into());
        }
        let q = field.order();
        let cells = body
            .chunks_exact(2)
            .map(|c| {
                let v = u16::from_le_bytes([c[0], c[1]]);
                if (v as u32) < q {
                    Ok(FieldElement(v))
                } else {
                    Err(CodecError::ElementOutOfField { value: v, order: q })
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Database { field, files, layers, record_len, cells })
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn check_dims(files: usize, layers: usize, record_len: usize) -> Result<()> {
    if files == 0 || layers == 0 || record_len == 0 {
        return Err(Error::InvalidParameter(format!(
            "database dimensions must be positive (K={files}, L={layers}, S={record_len})"
        )));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Two 8-layer binary files with S = 1.
    pub(crate) fn xor_example() -> Database {
        let f = FieldSpec::new(2, 1).unwrap();
        let w1 = [1, 0, 1, 1, 0, 0, 1, 0];
        let w2 = [0, 1, 1, 0, 1, 0, 0, 1];
        let cells = w1.iter().chain(&w2).map(|&b| FieldElement(b)).collect();
        Database::from_cells(f, 2, 8, 1, cells).unwrap()
    }

    fn bits(values: &[u16]) -> Vec<Vec<FieldElement>> {
        values.iter().map(|&b| vec![FieldElement(b)]).collect()
    }

    #[test]
    fn oracle_xor_of_two_files() {
        let db = xor_example();
        let out = db.oracle(&CoeffVector::from_values(&[1, 1])).unwrap();
        assert_eq!(out.values, bits(&[1, 1, 0, 1, 1, 0, 1, 1]));
    }

    #[test]
    fn oracle_unit_vector_copies_file() {
        let db = xor_example();
        let out = db.oracle(&CoeffVector::unit(2, 1)).unwrap();
        assert_eq!(out.values, bits(&[0, 1, 1, 0, 1, 0, 0, 1]));
        assert!(matches!(
            db.oracle(&CoeffVector::from_values(&[1, 1, 1])),
            Err(Error::LengthMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn generation_is_seeded() {
        let f2 = FieldSpec::new(2, 1).unwrap();
        let a = Database::generate(&f2, 2, 8, 1, 7).unwrap();
        let b = Database::generate(&f2, 2, 8, 1, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells().len(), 16);
        let f3 = FieldSpec::new(3, 1).unwrap();
        let c = Database::generate(&f3, 2, 132, 4, 1).unwrap();
        let d = Database::generate(&f3, 2, 132, 4, 2).unwrap();
        assert_eq!(c.cells().len(), 1056);
        assert_ne!(c, d);
        assert!(Database::generate(&f3, 2, 0, 4, 1).is_err());
    }

    #[test]
    fn file_header_layout() {
        let db = xor_example();
        let bytes = db.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"PFRD");
        assert_eq!(&bytes[4..17], &[1, 2, 1, 2, 0, 8, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(bytes.len(), 17 + 2 * 16);
        assert_eq!(Database::from_bytes(&bytes).unwrap(), db);
    }

    #[test]
    fn rejects_malformed_files() {
        let mut bytes = xor_example().to_bytes().unwrap();
        assert!(matches!(Database::from_bytes(&bytes[..10]), Err(Error::Codec(CodecError::Truncated))));
        assert!(matches!(Database::from_bytes(&bytes[..20]), Err(Error::Codec(CodecError::Truncated))));
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(matches!(Database::from_bytes(&longer), Err(Error::Codec(CodecError::TrailingBytes))));
        bytes[17] = 2;
        assert!(matches!(
            Database::from_bytes(&bytes),
            Err(Error::Codec(CodecError::ElementOutOfField { value: 2, order: 2 }))
        ));
        bytes[4] = 9;
        assert!(matches!(Database::from_bytes(&bytes), Err(Error::Codec(CodecError::BadVersion(9)))));
        bytes[0] = b'X';
        assert!(matches!(Database::from_bytes(&bytes), Err(Error::Codec(CodecError::BadMagic))));
    }
}
