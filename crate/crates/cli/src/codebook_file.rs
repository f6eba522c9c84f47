//! Binary codebook files. Layout: 4-byte magic `VQCB`, u32 codeword count,
//! u32 dimension (both little-endian), then `k * dim` f32 centroid values
//! little-endian in row-major order. The training seed is not recorded;
//! loaded codebooks report a seed of zero.

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;
use vqbic_core::codebook::Codebook;

pub const MAGIC: &[u8; 4] = b"VQCB";

#[derive(Debug, Error)]
pub enum CodebookFileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: bad magic, not a codebook file")]
    BadMagic { path: PathBuf },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CodebookFileError + '_ {
    move |source| CodebookFileError::Io { path: path.into(), source }
}

pub fn write_codebook(path: &Path, cb: &Codebook) -> Result<(), CodebookFileError> {
    let mut buf = Vec::with_capacity(12 + cb.centroids.len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(cb.k as u32).to_le_bytes());
    buf.extend_from_slice(&(cb.dim as u32).to_le_bytes());
    for &v in &cb.centroids {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&buf).map_err(io_err(path))
}

pub fn read_codebook(path: &Path) -> Result<Codebook, CodebookFileError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    if bytes.len() < 12 || &bytes[0..4] != MAGIC {
        return Err(CodebookFileError::BadMagic { path: path.into() });
    }
    let k = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if k == 0 || dim == 0 {
        return Err(CodebookFileError::Malformed {
            path: path.into(),
            detail: "zero codewords or zero dimension".into(),
        });
    }
    let expected = k
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(12))
        .ok_or_else(|| CodebookFileError::Malformed {
            path: path.into(),
            detail: "header sizes overflow".into(),
        })?;
    if bytes.len() != expected {
        return Err(CodebookFileError::Malformed {
            path: path.into(),
            detail: format!(
                "payload is {} bytes, header implies {}",
                bytes.len() - 12,
                expected - 12
            ),
        });
    }
    let mut centroids = Vec::with_capacity(k * dim);
    for chunk in bytes[12..].chunks_exact(4) {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(CodebookFileError::Malformed {
                path: path.into(),
                detail: "non-finite centroid value".into(),
            });
        }
        centroids.push(v);
    }
    Ok(Codebook { centroids, k, dim, train_seed: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_centroids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cb.vqcb");
        let cb = Codebook {
            centroids: (0..12).map(|i| i as f32 * 0.25 - 1.0).collect(),
            k: 4,
            dim: 3,
            train_seed: 99,
        };
        write_codebook(&path, &cb).unwrap();
        let back = read_codebook(&path).unwrap();
        assert_eq!(back.centroids, cb.centroids);
        assert_eq!((back.k, back.dim), (4, 3));
        assert_eq!(back.train_seed, 0); // seed is not persisted
    }

    #[test]
    fn rejects_bad_magic_truncation_and_zero_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.vqcb");
        std::fs::write(&bad, b"FEA1\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x80\x3f").unwrap();
        assert!(matches!(read_codebook(&bad), Err(CodebookFileError::BadMagic { .. })));

        let short = dir.path().join("short.vqcb");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 4]); // needs 16 payload bytes
        std::fs::write(&short, bytes).unwrap();
        assert!(matches!(read_codebook(&short), Err(CodebookFileError::Malformed { .. })));

        let zero = dir.path().join("zero.vqcb");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&0u32.to_le_bytes());
        bytes.extend_from_slice(&3u32.to_le_bytes());
        std::fs::write(&zero, bytes).unwrap();
        assert!(matches!(read_codebook(&zero), Err(CodebookFileError::Malformed { .. })));
    }

    #[test]
    fn missing_file_is_io() {
        assert!(matches!(
            read_codebook(Path::new("/nonexistent/cb.vqcb")),
            Err(CodebookFileError::Io { .. })
        ));
    }
}
