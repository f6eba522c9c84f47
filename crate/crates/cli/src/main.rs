//! `vqbic` binary: speaker indexing over segment feature files.
//!
//! Exit codes: 0 success, 1 invalid request (flags, config, malformed text
//! input), 2 file problems (missing, unreadable, bad binary format).

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use vqbic::commands::{cmd_cluster, cmd_eval, cmd_extract, cmd_synth};
use vqbic::commands::{ClusterArgs, EvalArgs, ExtractArgs, SynthArgs};
use vqbic::config::{load_config, ClusterMode, CodebookSize, FileConfig, LambdaSetting};
use vqbic::synth::SynthSpec;
use vqbic::CliError;

#[derive(Parser)]
#[command(
    name = "vqbic",
    version,
    about = "Speaker indexing: cluster audio segments by speaker with BIC, \
             optionally pre-filtered by a vector-quantization fast match"
)]
struct Cli {
    /// Flat `key = value` config file; command-line flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for everything randomized (synthesis, codebook training).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for extraction; 0 means one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Clustering driver: `two-stage` or `baseline-bic`.
    #[arg(long, global = true, value_parser = ClusterMode::parse)]
    mode: Option<ClusterMode>,
    /// Candidate pairs re-scored per two-stage iteration.
    #[arg(long, global = true)]
    n_best: Option<usize>,
    /// Merge threshold scale: `auto` or a positive number.
    #[arg(long, global = true, value_parser = LambdaSetting::parse)]
    lambda: Option<LambdaSetting>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus: feature files plus a labelled
    /// segments.txt usable as ground truth.
    Synth {
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        n_speakers: Option<usize>,
        #[arg(long)]
        segments_per_speaker: Option<usize>,
        /// Frames per segment, lower bound.
        #[arg(long)]
        frames_min: Option<usize>,
        /// Frames per segment, upper bound.
        #[arg(long)]
        frames_max: Option<usize>,
        /// Feature dimension.
        #[arg(long)]
        dim: Option<usize>,
        /// Speaker-mean scale relative to unit within-speaker deviation.
        #[arg(long)]
        spread: Option<f64>,
    },
    /// Slice a 16 kHz PCM WAV by a segment list and write feature files.
    Extract {
        #[arg(long, value_name = "FILE")]
        wav: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        segments: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Cluster the segments in a feature directory by speaker.
    Cluster {
        #[arg(long, value_name = "DIR")]
        features_dir: Option<PathBuf>,
        /// Span list for the clustered segments; enables timing-vs-audio
        /// lines in the report.
        #[arg(long, value_name = "FILE")]
        segments: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
        /// Codewords for the fast match: `auto` or a positive integer.
        #[arg(long, value_parser = CodebookSize::parse)]
        codebook_size: Option<CodebookSize>,
        /// Reuse a saved codebook instead of training one.
        #[arg(long, value_name = "FILE")]
        codebook: Option<PathBuf>,
        /// Save the trained codebook here.
        #[arg(long, value_name = "FILE")]
        save_codebook: Option<PathBuf>,
    },
    /// Score an assignment against a labelled segment list.
    Eval {
        #[arg(long, value_name = "FILE")]
        assignment: Option<PathBuf>,
        /// Labelled span list giving the true speaker of every segment.
        #[arg(long, value_name = "FILE")]
        reference: Option<PathBuf>,
        /// Take frame masses from these feature files instead of deriving
        /// them from span durations.
        #[arg(long, value_name = "DIR")]
        features_dir: Option<PathBuf>,
        /// Also write the report here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
}

fn resolve_config(cli: &Cli) -> Result<FileConfig, CliError> {
    let mut file = match &cli.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };
    if let Some(seed) = cli.seed {
        file.run.seed = seed;
    }
    if let Some(threads) = cli.threads {
        file.run.threads = threads;
    }
    if let Some(mode) = cli.mode {
        file.run.mode = mode;
    }
    if let Some(n_best) = cli.n_best {
        file.run.n_best = n_best;
    }
    if let Some(lambda) = cli.lambda {
        file.run.lambda = lambda;
    }
    Ok(file)
}

/// Flag beats config; something must supply the path.
fn require(
    flag: Option<PathBuf>,
    from_config: Option<PathBuf>,
    flag_name: &str,
) -> Result<PathBuf, CliError> {
    flag.or(from_config).ok_or_else(|| {
        CliError::validation(format!(
            "missing --{flag_name} (or `{}` in the config file)",
            flag_name.replace('-', "_")
        ))
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = resolve_config(&cli)?;
    file.run.validate().map_err(CliError::validation)?;
    match cli.command {
        Command::Synth {
            out_dir,
            n_speakers,
            segments_per_speaker,
            frames_min,
            frames_max,
            dim,
            spread,
        } => {
            let defaults = SynthSpec::default();
            let spec = SynthSpec {
                n_speakers: n_speakers.unwrap_or(defaults.n_speakers),
                segments_per_speaker: segments_per_speaker
                    .unwrap_or(defaults.segments_per_speaker),
                frames_min: frames_min.unwrap_or(defaults.frames_min),
                frames_max: frames_max.unwrap_or(defaults.frames_max),
                dim: dim.unwrap_or(defaults.dim),
                spread: spread.unwrap_or(defaults.spread),
                seed: file.run.seed,
            };
            let out_dir = require(out_dir, file.paths.out_dir.clone(), "out-dir")?;
            cmd_synth(&SynthArgs { spec, out_dir })
        }
        Command::Extract { wav, segments, out_dir } => cmd_extract(&ExtractArgs {
            wav: require(wav, file.paths.wav.clone(), "wav")?,
            segments: require(segments, file.paths.segments.clone(), "segments")?,
            out_dir: require(out_dir, file.paths.features_dir.clone(), "out-dir")?,
            features: file.run.features.clone(),
            threads: file.run.threads,
        }),
        Command::Cluster {
            features_dir,
            segments,
            out_dir,
            codebook_size,
            codebook,
            save_codebook,
        } => {
            let mut run_cfg = file.run.clone();
            if let Some(k) = codebook_size {
                run_cfg.codebook_size = k;
            }
            cmd_cluster(&ClusterArgs {
                features_dir: require(
                    features_dir,
                    file.paths.features_dir.clone(),
                    "features-dir",
                )?,
                segments: segments.or(file.paths.segments.clone()),
                out_dir: require(out_dir, file.paths.out_dir.clone(), "out-dir")?,
                run: run_cfg,
                codebook_in: codebook,
                codebook_out: save_codebook,
            })
        }
        Command::Eval { assignment, reference, features_dir, report } => cmd_eval(&EvalArgs {
            assignment: require(assignment, file.paths.assignment.clone(), "assignment")?,
            reference: require(reference, file.paths.reference.clone(), "reference")?,
            features_dir: features_dir.or(file.paths.features_dir.clone()),
            features: file.run.features.clone(),
            report_out: report.or(file.paths.report.clone()),
        }),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successes; anything else is a bad request.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
