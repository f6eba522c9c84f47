//! Cluster-purity evaluation against reference speaker labels.
//!
//! Two complementary rates over a cluster/speaker contingency table:
//!
//! * **cluster purity** (cp): of each cluster's mass, the share belonging to
//!   its dominant speaker — does a cluster hold one speaker?
//! * **speaker purity** (sp): of each speaker's mass, the share landing in
//!   their dominant cluster — does a speaker stay in one cluster?
//!
//! Both are mass-weighted averages in `(0, 1]`. "Mass" is 1 per segment at
//! segment level and the frame count at frame level, so long segments count
//! for more in the frame-level rates.

use alloc::collections::BTreeMap;
use alloc::string::String;

/// Contingency table and the purity rates derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct PurityReport {
    pub cluster_purity: f64,
    pub speaker_purity: f64,
    pub n_clusters: usize,
    pub n_speakers: usize,
    pub total_mass: f64,
    /// `(cluster, speaker) -> mass`, only non-zero cells.
    pub table: BTreeMap<(u64, String), f64>,
}

/// Mass-weighted purity of `assignment` against `reference`.
///
/// All three maps must share exactly the same segment-id keys; evaluation
/// with partially labelled data is the caller's filtering problem, not a
/// silent default here.
pub fn purity(
    assignment: &BTreeMap<u64, u64>,
    reference: &BTreeMap<u64, String>,
    masses: &BTreeMap<u64, f64>,
) -> Result<PurityReport, MetricsError> {
    if assignment.is_empty() {
        return Err(MetricsError::EmptyAssignment);
    }
    check_same_keys(assignment, reference)?;
    check_same_keys(assignment, masses)?;

    let mut table: BTreeMap<(u64, String), f64> = BTreeMap::new();
    let mut total = 0.0;
    for (seg, &cluster) in assignment {
        let speaker = &reference[seg];
        let mass = masses[seg];
        if mass <= 0.0 || !mass.is_finite() {
            return Err(MetricsError::BadMass { segment: *seg, mass });
        }
        *table.entry((cluster, speaker.clone())).or_insert(0.0) += mass;
        total += mass;
    }

    // Dominant-speaker mass per cluster, dominant-cluster mass per speaker.
    let mut by_cluster: BTreeMap<u64, f64> = BTreeMap::new();
    let mut by_speaker: BTreeMap<&str, f64> = BTreeMap::new();
    for ((cluster, speaker), &mass) in &table {
        let c = by_cluster.entry(*cluster).or_insert(0.0);
        *c = c.max(mass);
        let s = by_speaker.entry(speaker.as_str()).or_insert(0.0);
        *s = s.max(mass);
    }

    let cluster_purity = by_cluster.values().sum::<f64>() / total;
    let speaker_purity = by_speaker.values().sum::<f64>() / total;
    Ok(PurityReport {
        cluster_purity,
        speaker_purity,
        n_clusters: by_cluster.len(),
        n_speakers: by_speaker.len(),
        total_mass: total,
        table,
    })
}

/// Purity with every segment weighing 1.
pub fn purity_segment_level(
    assignment: &BTreeMap<u64, u64>,
    reference: &BTreeMap<u64, String>,
) -> Result<PurityReport, MetricsError> {
    let masses = assignment.keys().map(|&k| (k, 1.0)).collect();
    purity(assignment, reference, &masses)
}

/// Purity weighted by per-segment frame counts.
pub fn purity_frame_level(
    assignment: &BTreeMap<u64, u64>,
    reference: &BTreeMap<u64, String>,
    frame_counts: &BTreeMap<u64, usize>,
) -> Result<PurityReport, MetricsError> {
    let masses = frame_counts.iter().map(|(&k, &n)| (k, n as f64)).collect();
    purity(assignment, reference, &masses)
}

fn check_same_keys<A, B>(
    left: &BTreeMap<u64, A>,
    right: &BTreeMap<u64, B>,
) -> Result<(), MetricsError> {
    if left.len() != right.len() {
        return Err(MetricsError::KeyMismatch {
            only_left: left.keys().filter(|k| !right.contains_key(k)).count(),
            only_right: right.keys().filter(|k| !left.contains_key(k)).count(),
        });
    }
    for k in left.keys() {
        if !right.contains_key(k) {
            return Err(MetricsError::KeyMismatch { only_left: 1, only_right: 1 });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricsError {
    /// Purity of nothing is undefined, not 1.0.
    EmptyAssignment,
    /// Assignment, reference, and masses must cover identical segment sets.
    KeyMismatch { only_left: usize, only_right: usize },
    BadMass { segment: u64, mass: f64 },
}

impl core::error::Error for MetricsError {}

impl core::fmt::Display for MetricsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MetricsError::EmptyAssignment => write!(f, "cannot evaluate an empty assignment"),
            MetricsError::KeyMismatch { only_left, only_right } => write!(
                f,
                "segment sets differ: {only_left} only in assignment, {only_right} only in reference/masses"
            ),
            MetricsError::BadMass { segment, mass } => {
                write!(f, "segment {segment} has non-positive mass {mass}")
            }
        }
    }
}
