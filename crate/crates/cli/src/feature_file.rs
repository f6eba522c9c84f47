//! Binary feature files. Layout: 4-byte magic `FEA1`, u32 frame count,
//! u32 feature dimension (both little-endian), then `frames * dim` f32
//! values little-endian in row-major order.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;
use vqbic_core::features::FeatureMatrix;

pub const MAGIC: &[u8; 4] = b"FEA1";

#[derive(Debug, Error)]
pub enum FeatureFileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: bad magic, not a feature file")]
    BadMagic { path: PathBuf },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> FeatureFileError + '_ {
    move |source| FeatureFileError::Io { path: path.into(), source }
}

pub fn write_features(path: &Path, features: &FeatureMatrix) -> Result<(), FeatureFileError> {
    let frames = features.num_frames() as u32;
    let dim = features.dim as u32;
    let mut buf = Vec::with_capacity(12 + features.data.len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&frames.to_le_bytes());
    buf.extend_from_slice(&dim.to_le_bytes());
    for &v in &features.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&buf).map_err(io_err(path))
}

/// Reads only the `(frames, dim)` header, without touching the payload.
pub fn read_feature_header(path: &Path) -> Result<(u32, u32), FeatureFileError> {
    let mut file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut header = [0u8; 12];
    file.read_exact(&mut header).map_err(|_| FeatureFileError::BadMagic { path: path.into() })?;
    if &header[0..4] != MAGIC {
        return Err(FeatureFileError::BadMagic { path: path.into() });
    }
    let frames = u32::from_le_bytes(header[4..8].try_into().unwrap());
    let dim = u32::from_le_bytes(header[8..12].try_into().unwrap());
    Ok((frames, dim))
}

pub fn read_features(path: &Path, segment_id: u64) -> Result<FeatureMatrix, FeatureFileError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    if bytes.len() < 12 || &bytes[0..4] != MAGIC {
        return Err(FeatureFileError::BadMagic { path: path.into() });
    }
    let frames = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if dim == 0 {
        return Err(FeatureFileError::Malformed {
            path: path.into(),
            detail: "zero feature dimension".into(),
        });
    }
    let expected = frames
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(12))
        .ok_or_else(|| FeatureFileError::Malformed {
            path: path.into(),
            detail: "header sizes overflow".into(),
        })?;
    if bytes.len() != expected {
        return Err(FeatureFileError::Malformed {
            path: path.into(),
            detail: format!(
                "payload is {} bytes, header implies {}",
                bytes.len() - 12,
                expected - 12
            ),
        });
    }
    let mut data = Vec::with_capacity(frames * dim);
    for chunk in bytes[12..].chunks_exact(4) {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(FeatureFileError::Malformed {
                path: path.into(),
                detail: "non-finite feature value".into(),
            });
        }
        data.push(v);
    }
    Ok(FeatureMatrix::new(segment_id, dim, data))
}

pub fn segment_file_name(id: u64) -> String {
    format!("seg_{id:06}.fea")
}

/// Inverse of [`segment_file_name`]; returns `None` for foreign files.
pub fn parse_segment_file_name(name: &str) -> Option<u64> {
    let digits = name.strip_prefix("seg_")?.strip_suffix(".fea")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Lists `(segment_id, path)` for every feature file in `dir`, sorted by id.
pub fn scan_feature_dir(dir: &Path) -> Result<Vec<(u64, PathBuf)>, FeatureFileError> {
    let entries = std::fs::read_dir(dir).map_err(io_err(dir))?;
    let mut found = Vec::new();
    for entry in entries {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name();
        if let Some(id) = name.to_str().and_then(parse_segment_file_name) {
            found.push((id, entry.path()));
        }
    }
    found.sort_by_key(|(id, _)| *id);
    Ok(found)
}
