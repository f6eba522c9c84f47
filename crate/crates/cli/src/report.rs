//! Human-readable, machine-greppable run reports: one `key = value` line
//! per fact, then one line per merge. Timing lines vary run to run; the
//! assignment file, not the report, is the determinism surface.

use std::fmt::Write as _;

use vqbic_core::clustering::StopReason;
use vqbic_core::metrics::PurityReport;

use crate::config::{LambdaSetting, RunConfig};
use crate::pipeline::ClusterOutcome;

pub fn stop_reason_str(stop: StopReason) -> &'static str {
    match stop {
        StopReason::SingleCluster => "single-cluster",
        StopReason::NoPositivePair => "no-positive-pair",
        StopReason::NoPositiveCandidate => "no-positive-candidate",
    }
}

/// Report for a clustering run. `audio_secs` (when the span list is at
/// hand) adds processing-time-per-audio-time lines.
pub fn cluster_report(out: &ClusterOutcome, cfg: &RunConfig, audio_secs: Option<f64>) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "mode = {}", cfg.mode.as_str());
    let _ = writeln!(r, "seed = {}", cfg.seed);
    let _ = writeln!(r, "n_segments = {}", out.n_segments);
    let _ = writeln!(r, "segments_skipped = {}", out.skipped.len());
    if !out.skipped.is_empty() {
        let ids: Vec<String> = out.skipped.iter().map(|id| id.to_string()).collect();
        let _ = writeln!(r, "skipped_ids = {}", ids.join(","));
    }
    let source = match cfg.lambda {
        LambdaSetting::Auto => "auto",
        LambdaSetting::Fixed(_) => "fixed",
    };
    let _ = writeln!(r, "lambda_source = {source}");
    let _ = writeln!(r, "lambda = {:.6}", out.lambda_used);
    if let Some(est) = &out.lambda_estimate {
        let _ = writeln!(r, "lambda_bar = {:.6}", est.lambda_bar);
        let _ = writeln!(r, "lambda_sigma = {:.6}", est.sigma);
        let _ = writeln!(r, "lambda_bounds_used = {}", est.bounds.len());
        let _ = writeln!(r, "lambda_bounds_skipped = {}", est.skipped.len());
        if let (Some(first), Some(last)) = (est.bounds.first(), est.bounds.last()) {
            let _ = writeln!(r, "lambda_bound_min = {first:.6}");
            let _ = writeln!(r, "lambda_bound_max = {last:.6}");
        }
    }
    if let Some(cb) = &out.codebook {
        let _ = writeln!(r, "codebook_size = {}", cb.k);
        let _ = writeln!(r, "n_best = {}", cfg.n_best);
    }
    let _ = writeln!(r, "n_clusters = {}", out.state.clusters.len());
    let _ = writeln!(r, "n_merges = {}", out.state.merge_log.len());
    let _ = writeln!(r, "stop_reason = {}", stop_reason_str(out.state.stop));
    let _ = writeln!(r, "cosine_evals = {}", out.state.counters.cosine_evals);
    let _ = writeln!(r, "bic_evals = {}", out.state.counters.bic_evals);
    let _ = writeln!(r, "prep_wall_s = {:.6}", out.prep_wall.as_secs_f64());
    let _ = writeln!(r, "cluster_wall_s = {:.6}", out.cluster_wall.as_secs_f64());
    if let Some(secs) = audio_secs {
        let _ = writeln!(r, "audio_secs = {secs:.3}");
        if secs > 0.0 {
            let total = out.prep_wall.as_secs_f64() + out.cluster_wall.as_secs_f64();
            let _ = writeln!(r, "xrt = {:.6}", total / secs);
        }
    }
    for m in &out.state.merge_log {
        let rank = match m.cosine_rank {
            Some(k) => k.to_string(),
            None => "-".to_string(),
        };
        let _ = writeln!(
            r,
            "merge {} a={} b={} rank={} delta={:.6}",
            m.iteration, m.a, m.b, rank, m.delta_bic
        );
    }
    r
}

/// Report for an evaluation run: both weightings plus the frame-level
/// cluster/speaker mass table.
pub fn eval_report(segment: &PurityReport, frame: &PurityReport) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "n_segments = {}", segment.total_mass as u64);
    let _ = writeln!(r, "n_clusters = {}", frame.n_clusters);
    let _ = writeln!(r, "n_speakers = {}", frame.n_speakers);
    let _ = writeln!(r, "segment_cluster_purity = {:.6}", segment.cluster_purity);
    let _ = writeln!(r, "segment_speaker_purity = {:.6}", segment.speaker_purity);
    let _ = writeln!(r, "frame_cluster_purity = {:.6}", frame.cluster_purity);
    let _ = writeln!(r, "frame_speaker_purity = {:.6}", frame.speaker_purity);
    let _ = writeln!(r, "frame_mass = {:.0}", frame.total_mass);
    for ((cluster, speaker), mass) in &frame.table {
        let _ = writeln!(r, "confusion cluster={cluster} speaker={speaker} mass={mass:.0}");
    }
    r
}
