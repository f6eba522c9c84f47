//! Vector-quantization codebooks and codeword histograms.
//!
//! The fast-match stage of clustering compares segments by the distribution
//! of codewords their frames quantize to, instead of by their Gaussians. A
//! codebook is trained once on the pooled frames of all segments (seeded
//! k-means++ followed by Lloyd iterations), then every segment gets a
//! normalized histogram over the K codewords.
//!
//! Training is deliberately deterministic: a fixed seed, a fixed iteration
//! cap, ties broken toward the lowest index, and empty clusters re-seeded
//! from the farthest point of the largest cluster.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::FeatureMatrix;

/// Lloyd iteration cap.
pub const MAX_LLOYD_ITERS: usize = 50;
/// Convergence test: stop when inertia improves by less than this fraction.
pub const INERTIA_REL_TOL: f64 = 1e-4;
/// Upper bound for the automatic codebook size.
pub const MAX_AUTO_K: usize = 1024;

/// Trained codebook: `k` centroids of dimension `dim`, row-major f32 (the
/// serialized form is f32, so keeping f32 here makes cache round-trips
/// lossless).
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    pub centroids: Vec<f32>,
    pub k: usize,
    pub dim: usize,
    /// Seed used for training. Zero for codebooks loaded from cache files,
    /// which do not record it.
    pub train_seed: u64,
}

impl Codebook {
    pub fn centroid(&self, i: usize) -> &[f32] {
        &self.centroids[i * self.dim..(i + 1) * self.dim]
    }
}

/// Normalized codeword histogram of one segment (or cluster): `weights`
/// sums to 1 over the K codewords.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramVec {
    pub segment_id: u64,
    pub weights: Vec<f64>,
}

impl HistogramVec {
    pub fn k(&self) -> usize {
        self.weights.len()
    }
}

/// Codebook size when the caller does not fix one: small corpora are capped
/// by the segment count, big ones by `MAX_AUTO_K`, and in between we keep at
/// least ten training frames per codeword.
pub fn auto_codebook_size(n_segments: usize, pooled_frames: usize) -> usize {
    n_segments
        .min(MAX_AUTO_K)
        .min(pooled_frames / 10)
        .clamp(1, pooled_frames.max(1))
}

/// Trains a `k`-word codebook on `frames` (row-major, `dim` columns) with
/// k-means++ seeding and at most [`MAX_LLOYD_ITERS`] Lloyd iterations.
pub fn train_codebook(frames: &[f32], dim: usize, k: usize, seed: u64) -> Result<Codebook, CodebookError> {
    if dim == 0 || !frames.len().is_multiple_of(dim) {
        return Err(CodebookError::DimensionMismatch { left: dim, right: frames.len() });
    }
    let n = frames.len() / dim;
    if k == 0 {
        return Err(CodebookError::InvalidK { k });
    }
    if n < k {
        return Err(CodebookError::TooFewFrames { frames: n, k });
    }
    let row = |i: usize| &frames[i * dim..(i + 1) * dim];

    // --- k-means++ seeding ---------------------------------------------
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<f64> = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend(row(first).iter().map(|&v| v as f64));

    let mut d2 = vec![0.0f64; n];
    for (i, slot) in d2.iter_mut().enumerate() {
        *slot = dist2_f32(row(i), &centroids[0..dim]);
    }
    while centroids.len() < k * dim {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 || total.is_nan() {
            // Fewer distinct points than requested codewords.
            return Err(CodebookError::DegenerateData);
        }
        let mut target = rng.random::<f64>() * total;
        let mut chosen = n - 1;
        for (i, &w) in d2.iter().enumerate() {
            target -= w;
            if target <= 0.0 {
                chosen = i;
                break;
            }
        }
        let base = centroids.len();
        centroids.extend(row(chosen).iter().map(|&v| v as f64));
        for (i, slot) in d2.iter_mut().enumerate() {
            let d = dist2_f32(row(i), &centroids[base..base + dim]);
            if d < *slot {
                *slot = d;
            }
        }
    }

    // --- Lloyd refinement ------------------------------------------------
    let mut assign = vec![0usize; n];
    let mut prev_inertia = f64::INFINITY;
    for _iter in 0..MAX_LLOYD_ITERS {
        // Assignment step; ties go to the lowest centroid index.
        let mut inertia = 0.0;
        for (i, slot) in assign.iter_mut().enumerate() {
            let mut best = 0;
            let mut best_d = dist2_f32(row(i), &centroids[0..dim]);
            for c in 1..k {
                let d = dist2_f32(row(i), &centroids[c * dim..(c + 1) * dim]);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            *slot = best;
            inertia += best_d;
        }

        // Update step.
        let mut counts = vec![0usize; k];
        let mut sums = vec![0.0f64; k * dim];
        for (i, &c) in assign.iter().enumerate() {
            counts[c] += 1;
            for (s, &v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(row(i)) {
                *s += v as f64;
            }
        }

        // Re-seed empty clusters from the farthest member of the largest
        // cluster, one point each.
        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut largest = 0;
            for x in 1..k {
                if counts[x] > counts[largest] {
                    largest = x;
                }
            }
            let mut far = None;
            let mut far_d = -1.0;
            for i in 0..n {
                if assign[i] == largest && !taken[i] {
                    let d = dist2_f32(row(i), &centroids[largest * dim..(largest + 1) * dim]);
                    if d > far_d {
                        far_d = d;
                        far = Some(i);
                    }
                }
            }
            let i = far.ok_or(CodebookError::DegenerateData)?;
            taken[i] = true;
            counts[largest] -= 1;
            counts[c] = 1;
            for (s, &v) in sums[largest * dim..(largest + 1) * dim].iter_mut().zip(row(i)) {
                *s -= v as f64;
            }
            for (s, &v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(row(i)) {
                *s = v as f64;
            }
        }

        for c in 0..k {
            if counts[c] > 0 {
                for (ctr, s) in centroids[c * dim..(c + 1) * dim].iter_mut().zip(&sums[c * dim..]) {
                    *ctr = s / counts[c] as f64;
                }
            }
        }

        if inertia == 0.0
            || (prev_inertia.is_finite() && prev_inertia - inertia <= INERTIA_REL_TOL * prev_inertia)
        {
            break;
        }
        prev_inertia = inertia;
    }

    let centroids_f32: Vec<f32> = centroids.iter().map(|&v| v as f32).collect();
    // Identical codewords would make histogram comparisons ill-defined.
    for a in 0..k {
        for b in a + 1..k {
            if centroids_f32[a * dim..(a + 1) * dim] == centroids_f32[b * dim..(b + 1) * dim] {
                return Err(CodebookError::DegenerateData);
            }
        }
    }
    Ok(Codebook { centroids: centroids_f32, k, dim, train_seed: seed })
}

/// Maps every frame of `m` to its nearest codeword (squared Euclidean, ties
/// to the lowest index). An empty matrix yields an empty index list.
pub fn quantize(m: &FeatureMatrix, cb: &Codebook) -> Result<Vec<u32>, CodebookError> {
    if m.dim != cb.dim {
        return Err(CodebookError::DimensionMismatch { left: m.dim, right: cb.dim });
    }
    let mut out = Vec::with_capacity(m.num_frames());
    for frame in m.rows() {
        let mut best = 0u32;
        let mut best_d = dist2(frame, cb.centroid(0));
        for c in 1..cb.k {
            let d = dist2(frame, cb.centroid(c));
            if d < best_d {
                best_d = d;
                best = c as u32;
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Turns codeword indices into a normalized histogram over `k` codewords.
pub fn build_histogram(indices: &[u32], k: usize, segment_id: u64) -> Result<HistogramVec, CodebookError> {
    if indices.is_empty() {
        return Err(CodebookError::EmptySegment);
    }
    let mut weights = vec![0.0f64; k];
    for &idx in indices {
        let slot = weights
            .get_mut(idx as usize)
            .ok_or(CodebookError::IndexOutOfRange { index: idx, k })?;
        *slot += 1.0;
    }
    let total = indices.len() as f64;
    for w in &mut weights {
        *w /= total;
    }
    Ok(HistogramVec { segment_id, weights })
}

/// Count-weighted mean of two normalized histograms — the histogram the
/// merged cluster would have counted directly. A zero-count side leaves the
/// other unchanged.
pub fn merge_histograms(
    a: &HistogramVec,
    n_a: usize,
    b: &HistogramVec,
    n_b: usize,
) -> Result<HistogramVec, CodebookError> {
    if a.k() != b.k() {
        return Err(CodebookError::DimensionMismatch { left: a.k(), right: b.k() });
    }
    if n_a + n_b == 0 {
        return Err(CodebookError::EmptySegment);
    }
    if n_a == 0 {
        return Ok(b.clone());
    }
    if n_b == 0 {
        return Ok(a.clone());
    }
    let total = (n_a + n_b) as f64;
    let weights = a
        .weights
        .iter()
        .zip(&b.weights)
        .map(|(x, y)| (n_a as f64 * x + n_b as f64 * y) / total)
        .collect();
    Ok(HistogramVec { segment_id: a.segment_id, weights })
}

#[inline]
fn dist2_f32(a: &[f32], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y;
            d * d
        })
        .sum()
}

#[inline]
fn dist2(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodebookError {
    InvalidK { k: usize },
    TooFewFrames { frames: usize, k: usize },
    DimensionMismatch { left: usize, right: usize },
    EmptySegment,
    IndexOutOfRange { index: u32, k: usize },
    /// Not enough distinct data to support the requested codebook.
    DegenerateData,
}

impl core::error::Error for CodebookError {}

impl core::fmt::Display for CodebookError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CodebookError::InvalidK { k } => write!(f, "codebook size {k} is invalid"),
            CodebookError::TooFewFrames { frames, k } => {
                write!(f, "{frames} frames cannot support {k} codewords")
            }
            CodebookError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            CodebookError::EmptySegment => write!(f, "segment has no frames to histogram"),
            CodebookError::IndexOutOfRange { index, k } => {
                write!(f, "codeword index {index} out of range for k={k}")
            }
            CodebookError::DegenerateData => write!(f, "too few distinct frames for the codebook"),
        }
    }
}
