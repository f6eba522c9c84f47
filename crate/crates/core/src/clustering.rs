//! Agglomerative speaker clustering.
//!
//! Both drivers start from one cluster per segment and repeatedly merge the
//! pair with the highest (positive) merge score, stopping when no candidate
//! pair scores positive. They differ only in which pairs get scored:
//!
//! * [`cluster_baseline`] scores **every** pair, every iteration. Quadratic
//!   per step, but the unambiguous reference answer.
//! * [`cluster_two_stage`] keeps a pool of cluster pairs ranked by the
//!   cosine distance between codeword histograms (cheap, O(K) per pair) and
//!   scores only the `n_best` closest with the expensive BIC test. With
//!   `n_best >= C(n,2)` it degenerates to the baseline and must produce the
//!   identical merge sequence — a property the tests lean on hard.
//!
//! Determinism contract: clusters are kept sorted by id, a merged cluster
//! adopts the smaller id, and every tie (cosine rank or score) breaks toward
//! the lexicographically smallest `(id_a, id_b)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::bic;
use crate::codebook::{merge_histograms, HistogramVec};
use crate::math;
use crate::stats::{SegmentStats, StatsError};

/// One input segment: its Gaussian statistics plus, for the two-stage
/// driver, its codeword histogram.
#[derive(Clone, Debug)]
pub struct SegmentModel {
    pub id: u64,
    pub stats: SegmentStats,
    pub histogram: Option<HistogramVec>,
}

/// A live cluster. `members` lists the original segment ids, sorted.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub id: u64,
    pub members: Vec<u64>,
    pub stats: SegmentStats,
    pub histogram: Option<HistogramVec>,
    /// Cached `0.5 * n * ln|cov|` so re-scoring a surviving cluster never
    /// repeats its Cholesky.
    half_n_log_det: f64,
}

impl Cluster {
    fn from_model(m: SegmentModel) -> Result<Self, ClusteringError> {
        let half = bic::half_n_log_det(&m.stats).map_err(|e| attribute(e, m.id))?;
        Ok(Cluster {
            id: m.id,
            members: alloc::vec![m.id],
            stats: m.stats,
            histogram: m.histogram,
            half_n_log_det: half,
        })
    }

    pub fn half_n_log_det(&self) -> f64 {
        self.half_n_log_det
    }
}

/// One merge taken, in order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeRecord {
    /// 1-based merge index.
    pub iteration: usize,
    /// The surviving (smaller) cluster id.
    pub a: u64,
    /// The absorbed cluster id.
    pub b: u64,
    pub delta_bic: f64,
    /// Rank of the pair in the cosine shortlist (0 = closest); `None` for
    /// the baseline driver.
    pub cosine_rank: Option<usize>,
}

/// Why the agglomeration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Everything merged into one cluster.
    SingleCluster,
    /// No remaining pair scored positive.
    NoPositivePair,
    /// Two-stage only: none of the `n_best` cosine candidates scored
    /// positive, but unexamined pairs remained. Worth flagging in reports —
    /// a larger `n_best` might have kept merging.
    NoPositiveCandidate,
}

/// Work counters for the speed comparisons.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalCounters {
    pub cosine_evals: u64,
    pub bic_evals: u64,
}

/// Final clustering plus its full audit trail.
#[derive(Clone, Debug)]
pub struct ClusterState {
    /// Remaining clusters, sorted by id.
    pub clusters: Vec<Cluster>,
    pub merge_log: Vec<MergeRecord>,
    pub counters: EvalCounters,
    pub stop: StopReason,
}

impl ClusterState {
    /// `segment id -> cluster id`, covering every input segment.
    pub fn assignments(&self) -> BTreeMap<u64, u64> {
        let mut map = BTreeMap::new();
        for c in &self.clusters {
            for &m in &c.members {
                map.insert(m, c.id);
            }
        }
        map
    }
}

/// `1 - cos(a, b)`. Histograms are non-negative, so this lands in `[0, 1]`.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64, CosineError> {
    if a.len() != b.len() {
        return Err(CosineError::DimensionMismatch { left: a.len(), right: b.len() });
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(CosineError::ZeroVector);
    }
    Ok(1.0 - dot / (math::sqrt(na) * math::sqrt(nb)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosineError {
    DimensionMismatch { left: usize, right: usize },
    ZeroVector,
}

impl core::error::Error for CosineError {}

impl core::fmt::Display for CosineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CosineError::DimensionMismatch { left, right } => {
                write!(f, "vector length mismatch: {left} vs {right}")
            }
            CosineError::ZeroVector => write!(f, "cosine distance of a zero vector is undefined"),
        }
    }
}

/// Reference driver: every pair is BIC-scored at every iteration.
pub fn cluster_baseline(models: Vec<SegmentModel>, lambda: f64) -> Result<ClusterState, ClusteringError> {
    let (mut clusters, dim) = prepare(models, lambda, false)?;
    let mut merge_log = Vec::new();
    let mut counters = EvalCounters::default();

    let stop = loop {
        if clusters.len() < 2 {
            break StopReason::SingleCluster;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..clusters.len() - 1 {
            for j in i + 1..clusters.len() {
                let v = pair_delta_bic(&clusters[i], &clusters[j], lambda, dim)?;
                counters.bic_evals += 1;
                // Strict '>' keeps the first maximum; clusters are sorted by
                // id, so that is the lexicographically smallest pair.
                if best.is_none_or(|(bv, _, _)| v > bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let (value, i, j) = best.expect("at least one pair");
        // NaN counts as non-positive so a degenerate score stops the pass.
        if value.is_nan() || value <= 0.0 {
            break StopReason::NoPositivePair;
        }
        let absorbed = clusters.remove(j);
        let survivor = clusters.remove(i);
        merge_log.push(MergeRecord {
            iteration: merge_log.len() + 1,
            a: survivor.id,
            b: absorbed.id,
            delta_bic: value,
            cosine_rank: None,
        });
        clusters.insert(i, merge_clusters(survivor, absorbed)?);
    };

    Ok(ClusterState { clusters, merge_log, counters, stop })
}

/// Fast driver: rank pairs by codeword-histogram cosine distance, BIC-score
/// only the `n_best` closest, merge the best positive one.
pub fn cluster_two_stage(
    models: Vec<SegmentModel>,
    lambda: f64,
    n_best: usize,
) -> Result<ClusterState, ClusteringError> {
    if n_best == 0 {
        return Err(ClusteringError::InvalidNBest);
    }
    let (mut clusters, dim) = prepare(models, lambda, true)?;
    let mut merge_log = Vec::new();
    let mut counters = EvalCounters::default();

    // Persistent pair pool. Merges only invalidate pairs touching the two
    // merged clusters, so the rest carry over between iterations.
    #[derive(Clone, Copy)]
    struct Pair {
        a: u64,
        b: u64,
        dist: f64,
        /// Memoized ΔBIC. A merge never changes the statistics of the
        /// clusters that survive it, so a pair's score stays valid for as
        /// long as the pair itself does.
        bic: Option<f64>,
    }
    let pair_cmp = |x: &Pair, y: &Pair| {
        x.dist.total_cmp(&y.dist).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b))
    };

    let mut pairs: Vec<Pair> = Vec::with_capacity(clusters.len() * (clusters.len() - 1) / 2);
    for i in 0..clusters.len().saturating_sub(1) {
        for j in i + 1..clusters.len() {
            let dist = histogram_distance(&clusters[i], &clusters[j])?;
            counters.cosine_evals += 1;
            pairs.push(Pair { a: clusters[i].id, b: clusters[j].id, dist, bic: None });
        }
    }

    let stop = loop {
        if clusters.len() < 2 {
            break StopReason::SingleCluster;
        }
        let shortlist_len = n_best.min(pairs.len());
        if pairs.len() > shortlist_len {
            pairs.select_nth_unstable_by(shortlist_len - 1, pair_cmp);
        }
        let shortlist = &mut pairs[..shortlist_len];
        shortlist.sort_unstable_by(pair_cmp);

        let mut best: Option<(f64, usize)> = None;
        for rank in 0..shortlist_len {
            let (pa, pb) = (shortlist[rank].a, shortlist[rank].b);
            let v = match shortlist[rank].bic {
                Some(v) => v,
                None => {
                    let ia = index_of(&clusters, pa);
                    let ib = index_of(&clusters, pb);
                    let v = pair_delta_bic(&clusters[ia], &clusters[ib], lambda, dim)?;
                    counters.bic_evals += 1;
                    shortlist[rank].bic = Some(v);
                    v
                }
            };
            let better = match best {
                None => true,
                Some((bv, bidx)) => {
                    let bp = shortlist[bidx];
                    v > bv || (v == bv && (pa, pb) < (bp.a, bp.b))
                }
            };
            if better {
                best = Some((v, rank));
            }
        }
        let (value, rank) = best.expect("shortlist is non-empty");
        // NaN counts as non-positive so a degenerate score stops the pass.
        if value.is_nan() || value <= 0.0 {
            break if pairs.len() > shortlist_len {
                StopReason::NoPositiveCandidate
            } else {
                StopReason::NoPositivePair
            };
        }

        let chosen = shortlist[rank];
        let ia = index_of(&clusters, chosen.a);
        let ib = index_of(&clusters, chosen.b);
        debug_assert!(ia < ib);
        let absorbed = clusters.remove(ib);
        let survivor = clusters.remove(ia);
        merge_log.push(MergeRecord {
            iteration: merge_log.len() + 1,
            a: survivor.id,
            b: absorbed.id,
            delta_bic: value,
            cosine_rank: Some(rank),
        });
        let merged = merge_clusters(survivor, absorbed)?;
        pairs.retain(|p| {
            p.a != chosen.a && p.a != chosen.b && p.b != chosen.a && p.b != chosen.b
        });
        for other in &clusters {
            let dist = histogram_distance(other, &merged)?;
            counters.cosine_evals += 1;
            let (a, b) = if other.id < merged.id { (other.id, merged.id) } else { (merged.id, other.id) };
            pairs.push(Pair { a, b, dist, bic: None });
        }
        let at = clusters
            .binary_search_by_key(&merged.id, |c| c.id)
            .expect_err("merged id cannot already exist");
        clusters.insert(at, merged);
    };

    Ok(ClusterState { clusters, merge_log, counters, stop })
}

/// Validates input models and turns them into single-member clusters,
/// sorted by id.
fn prepare(
    models: Vec<SegmentModel>,
    lambda: f64,
    need_histograms: bool,
) -> Result<(Vec<Cluster>, usize), ClusteringError> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(ClusteringError::InvalidLambda { lambda });
    }
    if models.is_empty() {
        return Err(ClusteringError::EmptyInput);
    }
    let dim = models[0].stats.dim();
    let mut hist_k = None;
    for m in &models {
        if m.stats.dim() != dim {
            return Err(ClusteringError::DimensionMismatch { left: dim, right: m.stats.dim() });
        }
        if need_histograms {
            let h = m.histogram.as_ref().ok_or(ClusteringError::MissingHistogram { id: m.id })?;
            match hist_k {
                None => hist_k = Some(h.k()),
                Some(k) if k != h.k() => {
                    return Err(ClusteringError::HistogramSizeMismatch { left: k, right: h.k() })
                }
                _ => {}
            }
        }
    }
    let mut clusters = models
        .into_iter()
        .map(Cluster::from_model)
        .collect::<Result<Vec<_>, _>>()?;
    clusters.sort_by_key(|c| c.id);
    for w in clusters.windows(2) {
        if w[0].id == w[1].id {
            return Err(ClusteringError::DuplicateId { id: w[0].id });
        }
    }
    Ok((clusters, dim))
}

/// Merge score using each cluster's cached half-log-det. Produces exactly
/// the same f64 as [`bic::delta_bic`] on the same statistics.
fn pair_delta_bic(a: &Cluster, b: &Cluster, lambda: f64, dim: usize) -> Result<f64, ClusteringError> {
    let low_id = a.id.min(b.id);
    let pooled = a.stats.merge(&b.stats).map_err(|e| attribute(e, low_id))?;
    let ridge = pooled.relative_ridge().map_err(|e| attribute(e, low_id))?;
    let ld = pooled.log_det_cov(ridge).map_err(|e| attribute(e, low_id))?;
    Ok(bic::delta_bic_from_parts(
        a.half_n_log_det,
        b.half_n_log_det,
        pooled.count(),
        ld,
        lambda,
        dim,
    ))
}

fn merge_clusters(survivor: Cluster, absorbed: Cluster) -> Result<Cluster, ClusteringError> {
    debug_assert!(survivor.id < absorbed.id);
    let id = survivor.id;
    let stats = survivor.stats.merge(&absorbed.stats).map_err(|e| attribute(e, id))?;
    let histogram = match (&survivor.histogram, &absorbed.histogram) {
        (Some(ha), Some(hb)) => {
            let mut h = merge_histograms(ha, survivor.stats.count(), hb, absorbed.stats.count())
                .map_err(|_| ClusteringError::HistogramSizeMismatch { left: ha.k(), right: hb.k() })?;
            h.segment_id = id;
            Some(h)
        }
        _ => None,
    };
    let mut members = survivor.members;
    members.extend_from_slice(&absorbed.members);
    members.sort_unstable();
    let half = bic::half_n_log_det(&stats).map_err(|e| attribute(e, id))?;
    Ok(Cluster { id, members, stats, histogram, half_n_log_det: half })
}

fn histogram_distance(a: &Cluster, b: &Cluster) -> Result<f64, ClusteringError> {
    let ha = a.histogram.as_ref().ok_or(ClusteringError::MissingHistogram { id: a.id })?;
    let hb = b.histogram.as_ref().ok_or(ClusteringError::MissingHistogram { id: b.id })?;
    cosine_distance(&ha.weights, &hb.weights).map_err(|e| match e {
        CosineError::DimensionMismatch { left, right } => {
            ClusteringError::HistogramSizeMismatch { left, right }
        }
        CosineError::ZeroVector => ClusteringError::ZeroVector { id: a.id },
    })
}

fn index_of(clusters: &[Cluster], id: u64) -> usize {
    clusters
        .binary_search_by_key(&id, |c| c.id)
        .expect("pair refers to a live cluster")
}

fn attribute(e: impl Into<ScoreFailure>, id: u64) -> ClusteringError {
    match e.into() {
        ScoreFailure::Stats(StatsError::EmptySegment) => ClusteringError::EmptyCluster { id },
        ScoreFailure::Stats(StatsError::DimensionMismatch { left, right }) => {
            ClusteringError::DimensionMismatch { left, right }
        }
        ScoreFailure::Stats(StatsError::NotPosDef) => ClusteringError::DegenerateCovariance { id },
        ScoreFailure::Bic(b) => match b {
            bic::BicError::EmptySegment => ClusteringError::EmptyCluster { id },
            bic::BicError::DimensionMismatch { left, right } => {
                ClusteringError::DimensionMismatch { left, right }
            }
            bic::BicError::DegenerateCovariance => ClusteringError::DegenerateCovariance { id },
            bic::BicError::InvalidLambda { lambda } => ClusteringError::InvalidLambda { lambda },
        },
    }
}

enum ScoreFailure {
    Stats(StatsError),
    Bic(bic::BicError),
}

impl From<StatsError> for ScoreFailure {
    fn from(e: StatsError) -> Self {
        ScoreFailure::Stats(e)
    }
}

impl From<bic::BicError> for ScoreFailure {
    fn from(e: bic::BicError) -> Self {
        ScoreFailure::Bic(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClusteringError {
    EmptyInput,
    InvalidLambda { lambda: f64 },
    InvalidNBest,
    DuplicateId { id: u64 },
    DimensionMismatch { left: usize, right: usize },
    MissingHistogram { id: u64 },
    HistogramSizeMismatch { left: usize, right: usize },
    EmptyCluster { id: u64 },
    /// Covariance degenerate even after ridging; `id` names the cluster (or
    /// the smaller id of the failing pair).
    DegenerateCovariance { id: u64 },
    ZeroVector { id: u64 },
}

impl core::error::Error for ClusteringError {}

impl core::fmt::Display for ClusteringError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ClusteringError::EmptyInput => write!(f, "no segments to cluster"),
            ClusteringError::InvalidLambda { lambda } => {
                write!(f, "lambda must be positive and finite, got {lambda}")
            }
            ClusteringError::InvalidNBest => write!(f, "n_best must be at least 1"),
            ClusteringError::DuplicateId { id } => write!(f, "duplicate segment id {id}"),
            ClusteringError::DimensionMismatch { left, right } => {
                write!(f, "feature dimension mismatch: {left} vs {right}")
            }
            ClusteringError::MissingHistogram { id } => {
                write!(f, "segment {id} has no codeword histogram (two-stage needs one)")
            }
            ClusteringError::HistogramSizeMismatch { left, right } => {
                write!(f, "histogram size mismatch: {left} vs {right}")
            }
            ClusteringError::EmptyCluster { id } => write!(f, "cluster {id} has no frames"),
            ClusteringError::DegenerateCovariance { id } => {
                write!(f, "cluster {id}: covariance degenerate even after ridging")
            }
            ClusteringError::ZeroVector { id } => {
                write!(f, "cluster {id}: zero histogram vector")
            }
        }
    }
}
