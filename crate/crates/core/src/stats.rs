//! Gaussian sufficient statistics for segments and clusters.
//!
//! A segment is modelled as a full-covariance Gaussian; all the clustering
//! math needs from it is the frame count, per-dimension sum, and the raw
//! second-moment (scatter) matrix. Keeping those three makes merging two
//! clusters an O(d^2) addition instead of a re-pass over frames; the merged
//! statistics agree with accumulating the concatenated frames up to f64
//! summation order, which the tests pin down at 1e-9 relative.

use alloc::vec;
use alloc::vec::Vec;

use crate::features::FeatureMatrix;
use crate::math;

/// Scale of the diagonal ridge added before log-determinants:
/// `ridge = RIDGE_SCALE * trace(cov) / d`.
pub const RIDGE_SCALE: f64 = 1e-6;

/// Frame count, sum vector, and scatter matrix (row-major `d x d`) of one
/// segment or cluster. Accumulation is f64 regardless of feature storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentStats {
    n: usize,
    sum: Vec<f64>,
    scatter: Vec<f64>,
}

impl SegmentStats {
    pub fn empty(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        SegmentStats { n: 0, sum: vec![0.0; dim], scatter: vec![0.0; dim * dim] }
    }

    /// Accumulates every frame of `m`. Errors on an empty matrix — a segment
    /// with no frames has no statistics.
    pub fn from_frames(m: &FeatureMatrix) -> Result<Self, StatsError> {
        Self::from_frame_range(m, 0, m.num_frames())
    }

    /// Accumulates frames `start..end` of `m` (used for the half-segment
    /// splits in threshold estimation).
    pub fn from_frame_range(m: &FeatureMatrix, start: usize, end: usize) -> Result<Self, StatsError> {
        assert!(start <= end && end <= m.num_frames(), "frame range out of bounds");
        if start == end {
            return Err(StatsError::EmptySegment);
        }
        let mut s = SegmentStats::empty(m.dim);
        for t in start..end {
            s.add_frame(m.frame(t));
        }
        Ok(s)
    }

    fn add_frame(&mut self, row: &[f32]) {
        let d = self.dim();
        debug_assert_eq!(row.len(), d);
        self.n += 1;
        for i in 0..d {
            let xi = row[i] as f64;
            self.sum[i] += xi;
            let base = i * d;
            // Fill the upper triangle and mirror it so the scatter stays
            // exactly symmetric.
            for (j, &xj) in row.iter().enumerate().skip(i) {
                let p = xi * xj as f64;
                self.scatter[base + j] += p;
                if j != i {
                    self.scatter[j * d + i] += p;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    /// Number of accumulated frames.
    pub fn count(&self) -> usize {
        self.n
    }

    /// Pools two statistics. Exactly commutative, and equal to accumulating
    /// the concatenation of the underlying frames.
    pub fn merge(&self, other: &SegmentStats) -> Result<SegmentStats, StatsError> {
        if self.dim() != other.dim() {
            return Err(StatsError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        let mut out = self.clone();
        out.n += other.n;
        for (a, b) in out.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in out.scatter.iter_mut().zip(&other.scatter) {
            *a += b;
        }
        Ok(out)
    }

    pub fn mean(&self) -> Result<Vec<f64>, StatsError> {
        if self.n == 0 {
            return Err(StatsError::EmptySegment);
        }
        Ok(self.sum.iter().map(|s| s / self.n as f64).collect())
    }

    /// Maximum-likelihood covariance: `scatter/n - mean*mean^T`, row-major.
    pub fn covariance(&self) -> Result<Vec<f64>, StatsError> {
        let mean = self.mean()?;
        let d = self.dim();
        let n = self.n as f64;
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] = self.scatter[i * d + j] / n - mean[i] * mean[j];
            }
        }
        Ok(cov)
    }

    /// The ridge actually used by [`Self::log_det_cov`] callers:
    /// `RIDGE_SCALE * trace(cov)/d`, or zero for a zero-variance segment.
    pub fn relative_ridge(&self) -> Result<f64, StatsError> {
        let cov = self.covariance()?;
        let d = self.dim();
        let trace: f64 = (0..d).map(|i| cov[i * d + i]).sum();
        Ok(RIDGE_SCALE * trace / d as f64)
    }

    /// `ln |cov + ridge*I|` via Cholesky. Fails with
    /// [`StatsError::NotPosDef`] when the ridged covariance is not positive
    /// definite (too few frames, or collinear features).
    pub fn log_det_cov(&self, ridge: f64) -> Result<f64, StatsError> {
        let mut cov = self.covariance()?;
        let d = self.dim();
        for i in 0..d {
            cov[i * d + i] += ridge;
        }
        cholesky_log_det(&mut cov, d).ok_or(StatsError::NotPosDef)
    }
}

/// In-place Cholesky of a symmetric matrix, returning `ln det` or `None` if
/// a pivot is non-positive (or non-finite).
fn cholesky_log_det(a: &mut [f64], d: usize) -> Option<f64> {
    let mut log_det = 0.0;
    for j in 0..d {
        for i in j..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                a[j * d + j] = math::sqrt(s);
                log_det += math::ln(s); // ln det = sum ln L_jj^2 = sum ln pivots
            } else {
                a[i * d + j] = s / a[j * d + j];
            }
        }
    }
    Some(log_det)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatsError {
    EmptySegment,
    DimensionMismatch { left: usize, right: usize },
    /// Covariance (plus ridge) is not positive definite.
    NotPosDef,
}

impl core::error::Error for StatsError {}

impl core::fmt::Display for StatsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StatsError::EmptySegment => write!(f, "segment has no frames"),
            StatsError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            StatsError::NotPosDef => write!(f, "covariance is not positive definite"),
        }
    }
}
