//! Bayesian information criterion scoring for cluster merges.
//!
//! For clusters `i` and `j` with frame counts `n` and MLE covariances `S`:
//!
//! ```text
//! delta = 0.5*n_i*ln|S_i| + 0.5*n_j*ln|S_j| - 0.5*n_ij*ln|S_ij| + lambda*P
//! P     = 0.5*(d + 0.5*d*(d+1)) * ln(n_ij)
//! ```
//!
//! where `n_ij = n_i + n_j` and `S_ij` is the covariance of the pooled
//! frames. A *positive* delta means the one-Gaussian explanation of the pool
//! wins, i.e. the clusters are statistically similar and should merge; the
//! agglomeration stops when no pair scores positive. `lambda` trades off the
//! model-complexity penalty and is either fixed or estimated from the data
//! (see [`crate::threshold`]). Natural logs throughout.

use crate::math;
use crate::stats::{SegmentStats, StatsError};

/// Fixed inputs of the merge score: the penalty weight and expected feature
/// dimensionality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BicParams {
    pub lambda: f64,
    pub dim: usize,
}

impl BicParams {
    pub fn new(lambda: f64, dim: usize) -> Result<Self, BicError> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(BicError::InvalidLambda { lambda });
        }
        if dim == 0 {
            return Err(BicError::DimensionMismatch { left: 0, right: 0 });
        }
        Ok(BicParams { lambda, dim })
    }
}

/// Complexity penalty `P` for merging into `n_total` frames in `d`
/// dimensions: half the free-parameter count of a full-covariance Gaussian
/// (`d` means + `d(d+1)/2` covariances) times `ln(n_total)`.
pub fn penalty(dim: usize, n_total: usize) -> f64 {
    let d = dim as f64;
    0.5 * (d + 0.5 * d * (d + 1.0)) * math::ln(n_total as f64)
}

/// The cacheable per-cluster half of the score: `0.5 * n * ln|cov + ridge|`,
/// with the cluster's own relative ridge.
pub fn half_n_log_det(s: &SegmentStats) -> Result<f64, BicError> {
    let ld = s.log_det_cov(s.relative_ridge()?)?;
    Ok(0.5 * s.count() as f64 * ld)
}

/// Assembles the score from precomputed parts. Kept separate so the
/// clustering drivers (which cache `half_n_log_det` per cluster) and
/// [`delta_bic`] produce bit-identical numbers.
pub fn delta_bic_from_parts(
    half_i: f64,
    half_j: f64,
    n_total: usize,
    log_det_pooled: f64,
    lambda: f64,
    dim: usize,
) -> f64 {
    half_i + half_j - 0.5 * n_total as f64 * log_det_pooled + lambda * penalty(dim, n_total)
}

/// Merge score for two clusters. Symmetric in its arguments; errors if the
/// dimensions disagree with `params.dim`, either side is empty, or a (ridged)
/// covariance is degenerate.
pub fn delta_bic(a: &SegmentStats, b: &SegmentStats, params: &BicParams) -> Result<f64, BicError> {
    if a.dim() != params.dim || b.dim() != params.dim {
        return Err(BicError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let pooled = a.merge(b)?;
    let log_det_pooled = pooled.log_det_cov(pooled.relative_ridge()?)?;
    Ok(delta_bic_from_parts(
        half_n_log_det(a)?,
        half_n_log_det(b)?,
        pooled.count(),
        log_det_pooled,
        params.lambda,
        params.dim,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BicError {
    InvalidLambda { lambda: f64 },
    DimensionMismatch { left: usize, right: usize },
    EmptySegment,
    /// A covariance stayed non-positive-definite even after its ridge.
    DegenerateCovariance,
}

impl From<StatsError> for BicError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::EmptySegment => BicError::EmptySegment,
            StatsError::DimensionMismatch { left, right } => BicError::DimensionMismatch { left, right },
            StatsError::NotPosDef => BicError::DegenerateCovariance,
        }
    }
}

impl core::error::Error for BicError {}

impl core::fmt::Display for BicError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BicError::InvalidLambda { lambda } => write!(f, "lambda must be positive and finite, got {lambda}"),
            BicError::DimensionMismatch { left, right } => write!(f, "dimension mismatch: {left} vs {right}"),
            BicError::EmptySegment => write!(f, "cannot score an empty cluster"),
            BicError::DegenerateCovariance => write!(f, "covariance is degenerate even after ridging"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureMatrix;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_stats(rng: &mut ChaCha8Rng, frames: usize, dim: usize) -> SegmentStats {
        let data = (0..frames * dim).map(|_| rng.random_range(-2.0f32..2.0)).collect();
        SegmentStats::from_frames(&FeatureMatrix::new(0, dim, data)).unwrap()
    }

    #[test]
    fn penalty_matches_hand_computation() {
        // d=2: 0.5*(2 + 3) * ln(100) = 2.5 * ln(100).
        assert!((penalty(2, 100) - 11.512925464970229).abs() < 1e-3);
        // ln(1) = 0 zeroes the penalty regardless of dimension.
        assert_eq!(penalty(1, 1), 0.0);
        assert_eq!(penalty(13, 1), 0.0);
    }

    #[test]
    fn penalty_grows_with_dim_and_count() {
        assert!(penalty(13, 1000) > penalty(13, 100));
        assert!(penalty(26, 100) > penalty(13, 100));
    }

    #[test]
    fn lambda_enters_linearly_through_the_penalty() {
        // delta(lambda2) - delta(lambda1) == (lambda2 - lambda1) * P, so the
        // data term cancels exactly between two lambdas.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let dim = rng.random_range(2..6);
            let (na, nb) = (rng.random_range(20..60), rng.random_range(20..60));
            let a = random_stats(&mut rng, na, dim);
            let b = random_stats(&mut rng, nb, dim);
            let (l1, l2) = (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
            let d1 = delta_bic(&a, &b, &BicParams::new(l1, dim).unwrap()).unwrap();
            let d2 = delta_bic(&a, &b, &BicParams::new(l2, dim).unwrap()).unwrap();
            let p = penalty(dim, a.count() + b.count());
            assert!(((d2 - d1) - (l2 - l1) * p).abs() < 1e-9);
        }
    }

    #[test]
    fn score_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let dim = rng.random_range(2..7);
            let (na, nb) = (rng.random_range(10..80), rng.random_range(10..80));
            let a = random_stats(&mut rng, na, dim);
            let b = random_stats(&mut rng, nb, dim);
            let params = BicParams::new(rng.random_range(0.2..4.0), dim).unwrap();
            let ab = delta_bic(&a, &b, &params).unwrap();
            let ba = delta_bic(&b, &a, &params).unwrap();
            assert_eq!(ab.to_bits(), ba.to_bits(), "delta must be bitwise symmetric");
        }
    }

    #[test]
    fn same_distribution_scores_positive_distinct_scores_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let dim = 5;
        // Two draws from the same unit Gaussian: similar -> positive.
        let a = random_stats(&mut rng, 200, dim);
        let b = random_stats(&mut rng, 200, dim);
        let params = BicParams::new(1.0, dim).unwrap();
        assert!(delta_bic(&a, &b, &params).unwrap() > 0.0);

        // Shift one far away: dissimilar -> negative.
        let data: Vec<f32> = (0..200 * dim).map(|_| 50.0 + rng.random_range(-2.0f32..2.0)).collect();
        let far = SegmentStats::from_frames(&FeatureMatrix::new(0, dim, data)).unwrap();
        assert!(delta_bic(&a, &far, &params).unwrap() < 0.0);
    }

    #[test]
    fn cached_parts_reproduce_the_direct_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let dim = 4;
        let a = random_stats(&mut rng, 33, dim);
        let b = random_stats(&mut rng, 47, dim);
        let params = BicParams::new(1.3, dim).unwrap();
        let direct = delta_bic(&a, &b, &params).unwrap();
        let pooled = a.merge(&b).unwrap();
        let via_parts = delta_bic_from_parts(
            half_n_log_det(&a).unwrap(),
            half_n_log_det(&b).unwrap(),
            pooled.count(),
            pooled.log_det_cov(pooled.relative_ridge().unwrap()).unwrap(),
            params.lambda,
            dim,
        );
        assert_eq!(direct.to_bits(), via_parts.to_bits());
    }

    #[test]
    fn invalid_lambda_is_rejected() {
        assert!(BicParams::new(0.0, 3).is_err());
        assert!(BicParams::new(-1.0, 3).is_err());
        assert!(BicParams::new(f64::NAN, 3).is_err());
        assert!(BicParams::new(f64::INFINITY, 3).is_err());
        assert!(BicParams::new(1.0, 3).is_ok());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_stats(&mut rng, 30, 3);
        let b = random_stats(&mut rng, 30, 4);
        let params = BicParams::new(1.0, 3).unwrap();
        assert!(matches!(
            delta_bic(&a, &b, &params),
            Err(BicError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_side_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_stats(&mut rng, 30, 3);
        let e = SegmentStats::empty(3);
        let params = BicParams::new(1.0, 3).unwrap();
        assert_eq!(delta_bic(&a, &e, &params), Err(BicError::EmptySegment));
    }
}
