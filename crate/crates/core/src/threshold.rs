//! Data-driven estimation of the BIC penalty weight `lambda`.
//!
//! Every input segment is speaker-homogeneous, so splitting one in half
//! yields two clusters that *must* merge. Requiring a positive merge score
//! for the halves puts a lower bound on lambda:
//!
//! ```text
//! lambda_i = (0.5*n*ln|S| - 0.5*n1*ln|S1| - 0.5*n2*ln|S2|) / P
//! ```
//!
//! (`S` the segment covariance, `S1`/`S2` the half covariances, `P` the
//! penalty for `n` frames). The working threshold aggregates the per-segment
//! bounds as `lambda_act = alpha*mean + beta*stddev`, by default
//! `2*mean + 0.5*stddev`, sitting safely above the typical same-speaker
//! bound without chasing outliers.

use alloc::vec::Vec;

use crate::bic;
use crate::features::FeatureMatrix;
use crate::stats::{SegmentStats, StatsError};

/// Aggregation knobs for [`estimate_lambda`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdOptions {
    /// Weight on the mean of the per-segment bounds.
    pub alpha: f64,
    /// Weight on their (population) standard deviation.
    pub beta: f64,
    /// Fraction of the largest bounds to drop before aggregating, in
    /// `[0, 0.5]`. Zero (the default) keeps everything.
    pub trim_fraction: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions { alpha: 2.0, beta: 0.5, trim_fraction: 0.0 }
    }
}

impl ThresholdOptions {
    fn validate(&self) -> Result<(), ThresholdError> {
        if self.alpha <= 0.0 || !self.alpha.is_finite() {
            return Err(ThresholdError::InvalidOptions("alpha must be positive"));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(ThresholdError::InvalidOptions("beta must be non-negative"));
        }
        if !(0.0..=0.5).contains(&self.trim_fraction) {
            return Err(ThresholdError::InvalidOptions("trim_fraction must lie in [0, 0.5]"));
        }
        Ok(())
    }
}

/// Everything [`estimate_lambda`] derives, kept for reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdEstimate {
    pub lambda_act: f64,
    pub lambda_bar: f64,
    pub sigma: f64,
    /// Per-segment bounds that entered the aggregate, sorted ascending
    /// (after trimming).
    pub bounds: Vec<f64>,
    /// Segments that could not contribute: too short to split, or a
    /// degenerate half covariance.
    pub skipped: Vec<u64>,
}

/// The lambda bound implied by one segment and its two halves: the smallest
/// penalty weight that would let the halves re-merge.
///
/// `full` must be exactly the pool of `left` and `right`; each half needs at
/// least `d + 1` frames for a full-rank covariance to be possible at all.
pub fn segment_lambda_bound(
    full: &SegmentStats,
    left: &SegmentStats,
    right: &SegmentStats,
) -> Result<f64, ThresholdError> {
    let d = full.dim();
    if left.dim() != d || right.dim() != d {
        return Err(ThresholdError::DimensionMismatch { left: left.dim(), right: right.dim() });
    }
    if left.count() + right.count() != full.count() {
        return Err(ThresholdError::SplitMismatch {
            full: full.count(),
            parts: left.count() + right.count(),
        });
    }
    let need = d + 1;
    let have = left.count().min(right.count());
    if have < need {
        return Err(ThresholdError::HalfTooShort { have, need });
    }
    let ld_full = full.log_det_cov(full.relative_ridge()?)?;
    let ld_left = left.log_det_cov(left.relative_ridge()?)?;
    let ld_right = right.log_det_cov(right.relative_ridge()?)?;
    let numerator = 0.5 * full.count() as f64 * ld_full
        - 0.5 * left.count() as f64 * ld_left
        - 0.5 * right.count() as f64 * ld_right;
    Ok(numerator / bic::penalty(d, full.count()))
}

/// Estimates the working threshold from per-segment half-split bounds.
///
/// Segments are split at `floor(T/2)` frames. Ones that are too short or
/// numerically degenerate are skipped and reported; at least two segments
/// must survive. Fails if the aggregate is not strictly positive — a
/// non-positive lambda cannot weight the penalty.
pub fn estimate_lambda(
    segments: &[FeatureMatrix],
    opts: &ThresholdOptions,
) -> Result<ThresholdEstimate, ThresholdError> {
    opts.validate()?;
    let mut bounds = Vec::new();
    let mut skipped = Vec::new();
    let mut dim = None;
    for m in segments {
        match dim {
            None => dim = Some(m.dim),
            Some(d) if d != m.dim => {
                return Err(ThresholdError::DimensionMismatch { left: d, right: m.dim })
            }
            _ => {}
        }
        let t = m.num_frames();
        let split = t / 2;
        if split < m.dim + 1 || t - split < m.dim + 1 {
            skipped.push(m.segment_id);
            continue;
        }
        let left = SegmentStats::from_frame_range(m, 0, split)?;
        let right = SegmentStats::from_frame_range(m, split, t)?;
        let full = left.merge(&right)?;
        match segment_lambda_bound(&full, &left, &right) {
            Ok(b) => bounds.push(b),
            Err(ThresholdError::Degenerate) => skipped.push(m.segment_id),
            Err(e) => return Err(e),
        }
    }

    bounds.sort_by(f64::total_cmp);
    let drop = (opts.trim_fraction * bounds.len() as f64) as usize;
    bounds.truncate(bounds.len() - drop);
    if bounds.len() < 2 {
        return Err(ThresholdError::TooFewUsableSegments { usable: bounds.len() });
    }

    let n = bounds.len() as f64;
    let lambda_bar = bounds.iter().sum::<f64>() / n;
    // Identical bounds have zero spread by definition; skipping the sum
    // avoids a spurious epsilon from the rounded mean.
    let sigma = if bounds.first() == bounds.last() {
        0.0
    } else {
        let var = bounds.iter().map(|b| (b - lambda_bar) * (b - lambda_bar)).sum::<f64>() / n;
        crate::math::sqrt(var.max(0.0))
    };
    let lambda_act = opts.alpha * lambda_bar + opts.beta * sigma;
    if lambda_act <= 0.0 || !lambda_act.is_finite() {
        return Err(ThresholdError::NotPositive { lambda_act });
    }
    Ok(ThresholdEstimate { lambda_act, lambda_bar, sigma, bounds, skipped })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdError {
    InvalidOptions(&'static str),
    DimensionMismatch { left: usize, right: usize },
    /// The halves do not add up to the full segment.
    SplitMismatch { full: usize, parts: usize },
    /// A half has fewer than `d + 1` frames.
    HalfTooShort { have: usize, need: usize },
    /// A covariance stayed degenerate after ridging.
    Degenerate,
    EmptySegment,
    TooFewUsableSegments { usable: usize },
    /// The aggregate came out non-positive; the corpus cannot support
    /// automatic estimation.
    NotPositive { lambda_act: f64 },
}

impl From<StatsError> for ThresholdError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::EmptySegment => ThresholdError::EmptySegment,
            StatsError::DimensionMismatch { left, right } => {
                ThresholdError::DimensionMismatch { left, right }
            }
            StatsError::NotPosDef => ThresholdError::Degenerate,
        }
    }
}

impl core::error::Error for ThresholdError {}

impl core::fmt::Display for ThresholdError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ThresholdError::InvalidOptions(what) => write!(f, "invalid threshold options: {what}"),
            ThresholdError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            ThresholdError::SplitMismatch { full, parts } => {
                write!(f, "halves hold {parts} frames but the segment has {full}")
            }
            ThresholdError::HalfTooShort { have, need } => {
                write!(f, "half segment has {have} frames, needs at least {need}")
            }
            ThresholdError::Degenerate => write!(f, "covariance is degenerate even after ridging"),
            ThresholdError::EmptySegment => write!(f, "segment has no frames"),
            ThresholdError::TooFewUsableSegments { usable } => {
                write!(f, "only {usable} segment(s) usable for threshold estimation, need 2")
            }
            ThresholdError::NotPositive { lambda_act } => {
                write!(f, "estimated lambda {lambda_act} is not positive")
            }
        }
    }
}
