//! Glue between loaded feature matrices and the core clusterers: threshold
//! estimation, codebook training, model assembly, and timing.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use vqbic_core::clustering::{cluster_baseline, cluster_two_stage, ClusterState, SegmentModel};
use vqbic_core::codebook::{
    auto_codebook_size, build_histogram, quantize, train_codebook, Codebook,
};
use vqbic_core::features::{frame_count, FeatureConfig, FeatureMatrix};
use vqbic_core::stats::SegmentStats;
use vqbic_core::threshold::{estimate_lambda, ThresholdEstimate, ThresholdOptions};

use crate::config::{ClusterMode, CodebookSize, LambdaSetting, RunConfig};
use crate::error::CliError;

/// Everything a clustering run produced, for writing and reporting.
#[derive(Debug)]
pub struct ClusterOutcome {
    pub state: ClusterState,
    pub assignments: BTreeMap<u64, u64>,
    pub lambda_used: f64,
    /// Present when lambda came from the estimator rather than a flag.
    pub lambda_estimate: Option<ThresholdEstimate>,
    /// Present in two-stage mode: the codebook actually used.
    pub codebook: Option<Codebook>,
    /// Segments dropped for having no frames; they get no cluster.
    pub skipped: Vec<u64>,
    pub n_segments: usize,
    /// Model assembly: statistics, threshold fit, codebook, histograms.
    pub prep_wall: Duration,
    /// The agglomeration loop alone.
    pub cluster_wall: Duration,
}

pub fn run_cluster(
    features: &[FeatureMatrix],
    cfg: &RunConfig,
    codebook_in: Option<Codebook>,
) -> Result<ClusterOutcome, CliError> {
    let prep_start = Instant::now();
    let mut usable: Vec<&FeatureMatrix> = Vec::new();
    let mut skipped = Vec::new();
    for m in features {
        if m.is_empty() {
            skipped.push(m.segment_id);
        } else {
            usable.push(m);
        }
    }
    if usable.len() < 2 {
        return Err(CliError::validation(format!(
            "need at least 2 non-empty segments to cluster, got {}",
            usable.len()
        )));
    }
    let dim = usable[0].dim;
    if let Some(m) = usable.iter().find(|m| m.dim != dim) {
        return Err(CliError::validation(format!(
            "segment {} has dimension {}, expected {}",
            m.segment_id, m.dim, dim
        )));
    }

    let (lambda_used, lambda_estimate) = match cfg.lambda {
        LambdaSetting::Fixed(v) => (v, None),
        LambdaSetting::Auto => {
            let owned: Vec<FeatureMatrix> = usable.iter().map(|m| (*m).clone()).collect();
            let opts = ThresholdOptions {
                alpha: cfg.alpha,
                beta: cfg.beta,
                trim_fraction: cfg.lambda_trim,
            };
            let est = estimate_lambda(&owned, &opts)?;
            (est.lambda_act, Some(est))
        }
    };

    let codebook = match cfg.mode {
        ClusterMode::Baseline => None,
        ClusterMode::TwoStage => Some(match codebook_in {
            Some(cb) => cb,
            None => {
                let pooled: Vec<f32> =
                    usable.iter().flat_map(|m| m.data.iter().copied()).collect();
                let k = match cfg.codebook_size {
                    CodebookSize::Fixed(k) => k,
                    CodebookSize::Auto => auto_codebook_size(usable.len(), pooled.len() / dim),
                };
                train_codebook(&pooled, dim, k, cfg.seed)?
            }
        }),
    };

    let mut models = Vec::with_capacity(usable.len());
    for m in &usable {
        let stats = SegmentStats::from_frames(m)?;
        let histogram = match &codebook {
            Some(cb) => {
                let indices = quantize(m, cb)?;
                Some(build_histogram(&indices, cb.k, m.segment_id)?)
            }
            None => None,
        };
        models.push(SegmentModel { id: m.segment_id, stats, histogram });
    }
    let prep_wall = prep_start.elapsed();

    let cluster_start = Instant::now();
    let state = match cfg.mode {
        ClusterMode::Baseline => cluster_baseline(models, lambda_used)?,
        ClusterMode::TwoStage => cluster_two_stage(models, lambda_used, cfg.n_best)?,
    };
    let cluster_wall = cluster_start.elapsed();

    let assignments = state.assignments();
    Ok(ClusterOutcome {
        state,
        assignments,
        lambda_used,
        lambda_estimate,
        codebook,
        skipped,
        n_segments: usable.len(),
        prep_wall,
        cluster_wall,
    })
}

/// Frame count implied by a span duration under the given front end — the
/// mass a segment would carry in frame-weighted purity when its feature
/// file is not at hand.
pub fn frames_for_duration(duration_secs: f64, cfg: &FeatureConfig, sample_rate: u32) -> usize {
    let samples = (duration_secs * sample_rate as f64).round() as usize;
    frame_count(samples, cfg.window_len(sample_rate), cfg.hop_len(sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthSpec};
    use vqbic_core::clustering::StopReason;

    fn corpus(seed: u64) -> Vec<FeatureMatrix> {
        generate(&SynthSpec {
            n_speakers: 3,
            segments_per_speaker: 5,
            frames_min: 120,
            frames_max: 160,
            dim: 6,
            spread: 10.0,
            seed,
        })
        .unwrap()
        .features
    }

    fn base_cfg() -> RunConfig {
        RunConfig { lambda: LambdaSetting::Fixed(2.0), ..RunConfig::default() }
    }

    #[test]
    fn both_modes_recover_well_separated_speakers() {
        let features = corpus(11);
        let baseline =
            run_cluster(&features, &RunConfig { mode: ClusterMode::Baseline, ..base_cfg() }, None)
                .unwrap();
        let two_stage =
            run_cluster(&features, &RunConfig { mode: ClusterMode::TwoStage, ..base_cfg() }, None)
                .unwrap();
        assert_eq!(baseline.state.clusters.len(), 3);
        assert_eq!(two_stage.state.clusters.len(), 3);
        assert_eq!(baseline.assignments.len(), 15);
        assert!(baseline.codebook.is_none());
        assert!(two_stage.codebook.is_some());
        assert!(two_stage.state.counters.cosine_evals > 0);
    }

    #[test]
    fn auto_lambda_is_estimated_and_reported() {
        let features = corpus(5);
        let cfg = RunConfig { lambda: LambdaSetting::Auto, ..RunConfig::default() };
        let out = run_cluster(&features, &cfg, None).unwrap();
        let est = out.lambda_estimate.expect("auto mode keeps the estimate");
        assert_eq!(est.lambda_act, out.lambda_used);
        assert!(out.lambda_used > 0.0);
    }

    #[test]
    fn empty_segments_are_skipped_not_clustered() {
        let mut features = corpus(3);
        features.push(FeatureMatrix::empty(99, 6));
        let out = run_cluster(&features, &base_cfg(), None).unwrap();
        assert_eq!(out.skipped, vec![99]);
        assert!(!out.assignments.contains_key(&99));
        assert_eq!(out.n_segments, 15);
    }

    #[test]
    fn too_few_segments_is_a_validation_error() {
        let features = vec![corpus(1).remove(0), FeatureMatrix::empty(50, 6)];
        let err = run_cluster(&features, &base_cfg(), None).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let mut features = corpus(1);
        features.push(FeatureMatrix::new(99, 2, vec![0.0; 8]));
        let err = run_cluster(&features, &base_cfg(), None).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn supplied_codebook_is_reused_verbatim() {
        let features = corpus(9);
        let cfg = base_cfg();
        let first = run_cluster(&features, &cfg, None).unwrap();
        let cb = first.codebook.clone().unwrap();
        let second = run_cluster(&features, &cfg, Some(cb.clone())).unwrap();
        assert_eq!(second.codebook.as_ref().unwrap().centroids, cb.centroids);
        assert_eq!(second.assignments, first.assignments);
    }

    #[test]
    fn two_stage_scoring_stays_under_a_tenth_of_baseline_at_scale() {
        let features = generate(&SynthSpec {
            n_speakers: 8,
            segments_per_speaker: 12,
            frames_min: 150,
            frames_max: 250,
            dim: 8,
            spread: 10.0,
            seed: 6,
        })
        .unwrap()
        .features;
        let base = run_cluster(
            &features,
            &RunConfig { mode: ClusterMode::Baseline, ..base_cfg() },
            None,
        )
        .unwrap();
        let fast = run_cluster(
            &features,
            &RunConfig { mode: ClusterMode::TwoStage, n_best: 200, ..base_cfg() },
            None,
        )
        .unwrap();
        let (b, f) = (base.state.counters.bic_evals, fast.state.counters.bic_evals);
        assert!(f * 10 < b, "two-stage scored {f} pairs vs baseline {b}");
        assert_eq!(base.state.clusters.len(), 8);
        assert_eq!(fast.state.clusters.len(), 8);
    }

    #[test]
    fn indistinguishable_speakers_blur_toward_chance_purity() {
        // Four "speakers" that are really one distribution: segments from a
        // single synthetic speaker, labelled round-robin. Clustering cannot
        // beat chance, so cluster purity lands near 1/4. (Merely shrinking
        // the mean spread is not enough — per-speaker covariance shapes
        // still identify speakers to a covariance-based score.)
        let corpus = generate(&SynthSpec {
            n_speakers: 1,
            segments_per_speaker: 20,
            frames_min: 150,
            frames_max: 200,
            dim: 6,
            spread: 0.0,
            seed: 13,
        })
        .unwrap();
        let out = run_cluster(&corpus.features, &RunConfig::default(), None).unwrap();
        let reference: std::collections::BTreeMap<u64, String> = corpus
            .spans
            .iter()
            .map(|s| (s.id, format!("spk{:02}", s.id % 4)))
            .collect();
        let report =
            vqbic_core::metrics::purity_segment_level(&out.assignments, &reference).unwrap();
        assert!(
            report.cluster_purity < 0.6,
            "cluster purity {} suspiciously high for indistinguishable speakers",
            report.cluster_purity
        );
    }

    #[test]
    fn same_speaker_corpus_collapses_to_one_cluster() {
        let features = generate(&SynthSpec {
            n_speakers: 1,
            segments_per_speaker: 6,
            frames_min: 150,
            frames_max: 150,
            dim: 4,
            spread: 0.0,
            seed: 2,
        })
        .unwrap()
        .features;
        let out = run_cluster(&features, &base_cfg(), None).unwrap();
        assert_eq!(out.state.clusters.len(), 1);
        assert_eq!(out.state.stop, StopReason::SingleCluster);
    }

    #[test]
    fn duration_masses_invert_the_frame_count() {
        let cfg = FeatureConfig::default();
        for frames in [1usize, 2, 50, 499] {
            let samples = (frames - 1) * 160 + 400;
            let dur = samples as f64 / 16_000.0;
            assert_eq!(frames_for_duration(dur, &cfg, 16_000), frames);
        }
        assert_eq!(frames_for_duration(0.01, &cfg, 16_000), 0);
    }
}
