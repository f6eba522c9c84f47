//! The four subcommands behind the binary, as plain functions over resolved
//! arguments so tests can drive them without a process boundary.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use vqbic_core::audio::SegmentSpan;
use vqbic_core::features::{extract_features, FeatureConfig, FeatureMatrix};
use vqbic_core::metrics::{purity_frame_level, purity_segment_level};

use crate::assignment::{read_assignment, write_assignment};
use crate::codebook_file::{read_codebook, write_codebook};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::feature_file::{
    read_feature_header, read_features, scan_feature_dir, segment_file_name, write_features,
};
use crate::pipeline::{frames_for_duration, run_cluster};
use crate::report::{cluster_report, eval_report};
use crate::segments::{load_segments, write_segments};
use crate::synth::{generate, SynthSpec};
use crate::wav::read_wav;

pub struct SynthArgs {
    pub spec: SynthSpec,
    pub out_dir: PathBuf,
}

/// Generates a synthetic corpus: one feature file per segment plus a
/// labelled `segments.txt` usable as an evaluation reference.
pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let corpus = generate(&args.spec).map_err(CliError::validation)?;
    std::fs::create_dir_all(&args.out_dir)?;
    for m in &corpus.features {
        let path = args.out_dir.join(segment_file_name(m.segment_id));
        write_features(&path, m)?;
    }
    write_segments(&args.out_dir.join("segments.txt"), &corpus.spans)?;
    println!(
        "wrote {} feature files and segments.txt to {}",
        corpus.features.len(),
        args.out_dir.display()
    );
    Ok(())
}

pub struct ExtractArgs {
    pub wav: PathBuf,
    pub segments: PathBuf,
    pub out_dir: PathBuf,
    pub features: FeatureConfig,
    /// Extraction worker threads; 0 uses one per core.
    pub threads: usize,
}

pub fn cmd_extract(args: &ExtractArgs) -> Result<(), CliError> {
    args.features.validate()?;
    let audio = read_wav(&args.wav)?;
    let spans = load_segments(&args.segments)?;
    if spans.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no segments to extract",
            args.segments.display()
        )));
    }
    let slices = spans
        .iter()
        .map(|s| Ok((s.id, audio.slice_segment(s)?)))
        .collect::<Result<Vec<_>, vqbic_core::audio::AudioError>>()?;

    let extract_all = || {
        slices
            .par_iter()
            .map(|(id, buf)| extract_features(buf, &args.features, *id))
            .collect::<Result<Vec<FeatureMatrix>, _>>()
    };
    let matrices = if args.threads == 0 {
        extract_all()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| CliError::validation(e.to_string()))?;
        pool.install(extract_all)
    }?;

    std::fs::create_dir_all(&args.out_dir)?;
    let mut empty = 0usize;
    for m in &matrices {
        if m.is_empty() {
            empty += 1;
            eprintln!(
                "warning: segment {} is shorter than one analysis window; wrote an empty feature file",
                m.segment_id
            );
        }
        write_features(&args.out_dir.join(segment_file_name(m.segment_id)), m)?;
    }
    println!(
        "extracted {} segments ({} empty) to {}",
        matrices.len(),
        empty,
        args.out_dir.display()
    );
    Ok(())
}

pub struct ClusterArgs {
    pub features_dir: PathBuf,
    /// Optional span list; supplies audio duration for timing lines.
    pub segments: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub run: RunConfig,
    /// Reuse a saved codebook instead of training one.
    pub codebook_in: Option<PathBuf>,
    /// Save the codebook used (two-stage mode only).
    pub codebook_out: Option<PathBuf>,
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<(), CliError> {
    args.run.validate().map_err(CliError::validation)?;
    let found = scan_feature_dir(&args.features_dir)?;
    if found.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no feature files (seg_*.fea) found",
            args.features_dir.display()
        )));
    }
    let mut features = Vec::with_capacity(found.len());
    for (id, path) in &found {
        features.push(read_features(path, *id)?);
    }
    let codebook_in = match &args.codebook_in {
        Some(path) => Some(read_codebook(path)?),
        None => None,
    };
    let audio_secs = match &args.segments {
        Some(path) => Some(load_segments(path)?.iter().map(|s| s.duration()).sum()),
        None => None,
    };

    let outcome = run_cluster(&features, &args.run, codebook_in)?;

    std::fs::create_dir_all(&args.out_dir)?;
    write_assignment(&args.out_dir.join("assignment.txt"), &outcome.assignments)?;
    let report = cluster_report(&outcome, &args.run, audio_secs);
    std::fs::write(args.out_dir.join("report.txt"), &report)?;
    if let Some(path) = &args.codebook_out {
        match &outcome.codebook {
            Some(cb) => write_codebook(path, cb)?,
            None => eprintln!("warning: baseline mode uses no codebook; nothing saved"),
        }
    }
    print!("{report}");
    Ok(())
}

pub struct EvalArgs {
    pub assignment: PathBuf,
    /// Labelled span list; every evaluated segment needs a speaker.
    pub reference: PathBuf,
    /// When given, frame masses come from the feature-file headers instead
    /// of being derived from span durations.
    pub features_dir: Option<PathBuf>,
    pub features: FeatureConfig,
    pub report_out: Option<PathBuf>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let assignment = read_assignment(&args.assignment)?;
    let spans = load_segments(&args.reference)?;
    let mut reference: BTreeMap<u64, String> = BTreeMap::new();
    for s in &spans {
        match &s.speaker {
            Some(spk) => {
                reference.insert(s.id, spk.clone());
            }
            None => {
                return Err(CliError::validation(format!(
                    "{}: segment {} has no speaker label",
                    args.reference.display(),
                    s.id
                )))
            }
        }
    }

    // Score the common segments; report anything one-sided.
    let mut shared_assignment: BTreeMap<u64, u64> = BTreeMap::new();
    for (&id, &cluster) in &assignment {
        if reference.contains_key(&id) {
            shared_assignment.insert(id, cluster);
        } else {
            eprintln!("warning: segment {id} is clustered but not in the reference; skipping");
        }
    }
    for id in reference.keys() {
        if !assignment.contains_key(id) {
            eprintln!("warning: segment {id} is in the reference but not clustered; skipping");
        }
    }
    reference.retain(|id, _| shared_assignment.contains_key(id));

    let span_of: BTreeMap<u64, &SegmentSpan> = spans.iter().map(|s| (s.id, s)).collect();
    let mut frames: BTreeMap<u64, usize> = BTreeMap::new();
    for &id in shared_assignment.keys() {
        let n = match &args.features_dir {
            Some(dir) => {
                let (n, _dim) = read_feature_header(&dir.join(segment_file_name(id)))?;
                n as usize
            }
            None => frames_for_duration(span_of[&id].duration(), &args.features, 16_000),
        };
        frames.insert(id, n);
    }
    for (&id, &n) in &frames {
        if n == 0 {
            eprintln!("warning: segment {id} has no frames; skipping");
            shared_assignment.remove(&id);
            reference.remove(&id);
        }
    }
    frames.retain(|_, &mut n| n > 0);

    if shared_assignment.is_empty() {
        return Err(CliError::validation(
            "no segments shared between assignment and reference".to_string(),
        ));
    }

    let segment = purity_segment_level(&shared_assignment, &reference)?;
    let frame = purity_frame_level(&shared_assignment, &reference, &frames)?;
    let report = eval_report(&segment, &frame);
    if let Some(path) = &args.report_out {
        std::fs::write(path, &report)?;
    }
    print!("{report}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ClusterMode, LambdaSetting};
    use std::path::Path;

    fn synth_dir(dir: &Path, seed: u64) -> SynthArgs {
        SynthArgs {
            spec: SynthSpec {
                n_speakers: 3,
                segments_per_speaker: 4,
                frames_min: 100,
                frames_max: 140,
                dim: 6,
                spread: 10.0,
                seed,
            },
            out_dir: dir.to_path_buf(),
        }
    }

    #[test]
    fn synth_cluster_eval_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let data = tmp.path().join("data");
        let out = tmp.path().join("out");
        cmd_synth(&synth_dir(&data, 21)).unwrap();
        assert!(data.join("seg_000000.fea").exists());
        assert!(data.join("segments.txt").exists());

        cmd_cluster(&ClusterArgs {
            features_dir: data.clone(),
            segments: Some(data.join("segments.txt")),
            out_dir: out.clone(),
            run: RunConfig::default(),
            codebook_in: None,
            codebook_out: Some(out.join("codebook.vqcb")),
        })
        .unwrap();
        assert!(out.join("assignment.txt").exists());
        let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
        assert!(report.contains("n_clusters = 3"), "report:\n{report}");

        cmd_eval(&EvalArgs {
            assignment: out.join("assignment.txt"),
            reference: data.join("segments.txt"),
            features_dir: Some(data.clone()),
            features: FeatureConfig::default(),
            report_out: Some(out.join("eval.txt")),
        })
        .unwrap();
        let eval = std::fs::read_to_string(out.join("eval.txt")).unwrap();
        assert!(eval.contains("frame_cluster_purity = 1.000000"), "eval:\n{eval}");
        assert!(eval.contains("frame_speaker_purity = 1.000000"), "eval:\n{eval}");
    }

    #[test]
    fn eval_duration_masses_match_feature_headers() {
        let tmp = tempfile::tempdir().unwrap();
        let data = tmp.path().join("data");
        let out = tmp.path().join("out");
        cmd_synth(&synth_dir(&data, 8)).unwrap();
        cmd_cluster(&ClusterArgs {
            features_dir: data.clone(),
            segments: None,
            out_dir: out.clone(),
            run: RunConfig {
                mode: ClusterMode::Baseline,
                lambda: LambdaSetting::Fixed(2.5),
                ..RunConfig::default()
            },
            codebook_in: None,
            codebook_out: None,
        })
        .unwrap();

        // Same evaluation twice: masses from headers vs from durations.
        cmd_eval(&EvalArgs {
            assignment: out.join("assignment.txt"),
            reference: data.join("segments.txt"),
            features_dir: Some(data.clone()),
            features: FeatureConfig::default(),
            report_out: Some(out.join("eval_headers.txt")),
        })
        .unwrap();
        cmd_eval(&EvalArgs {
            assignment: out.join("assignment.txt"),
            reference: data.join("segments.txt"),
            features_dir: None,
            features: FeatureConfig::default(),
            report_out: Some(out.join("eval_durations.txt")),
        })
        .unwrap();
        assert_eq!(
            std::fs::read_to_string(out.join("eval_headers.txt")).unwrap(),
            std::fs::read_to_string(out.join("eval_durations.txt")).unwrap()
        );
    }

    #[test]
    fn eval_rejects_unlabelled_reference() {
        let tmp = tempfile::tempdir().unwrap();
        let assignment = tmp.path().join("assignment.txt");
        let reference = tmp.path().join("ref.txt");
        std::fs::write(&assignment, "0 0\n1 0\n").unwrap();
        std::fs::write(&reference, "0 0.0 1.0 a\n1 1.0 2.0\n").unwrap();
        let err = cmd_eval(&EvalArgs {
            assignment,
            reference,
            features_dir: None,
            features: FeatureConfig::default(),
            report_out: None,
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn cluster_rejects_an_empty_directory() {
        let tmp = tempfile::tempdir().unwrap();
        let err = cmd_cluster(&ClusterArgs {
            features_dir: tmp.path().to_path_buf(),
            segments: None,
            out_dir: tmp.path().join("out"),
            run: RunConfig::default(),
            codebook_in: None,
            codebook_out: None,
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
