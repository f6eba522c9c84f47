//! Flat `key = value` run configuration. `#` starts a full-line comment,
//! blank lines are skipped, unknown keys are rejected, and a repeated key
//! takes its last value. Command-line flags override file values.

use std::path::{Path, PathBuf};

use thiserror::Error;
use vqbic_core::features::FeatureConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {detail}")]
    Parse { path: PathBuf, line: usize, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterMode {
    Baseline,
    TwoStage,
}

impl ClusterMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterMode::Baseline => "baseline-bic",
            ClusterMode::TwoStage => "two-stage",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "baseline-bic" => Ok(ClusterMode::Baseline),
            "two-stage" => Ok(ClusterMode::TwoStage),
            other => Err(format!("bad mode `{other}` (expected `two-stage` or `baseline-bic`)")),
        }
    }
}

/// Merge threshold scale: estimated from the data, or pinned to a value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaSetting {
    Auto,
    Fixed(f64),
}

impl LambdaSetting {
    pub fn parse(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(LambdaSetting::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(LambdaSetting::Fixed(v)),
            _ => Err(format!("bad lambda `{s}` (expected `auto` or a positive number)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodebookSize {
    Auto,
    Fixed(usize),
}

impl CodebookSize {
    pub fn parse(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(CodebookSize::Auto);
        }
        match s.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(CodebookSize::Fixed(v)),
            _ => Err(format!("bad codebook_size `{s}` (expected `auto` or a positive integer)")),
        }
    }
}

/// Everything that shapes a run's numbers, independent of file locations.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub features: FeatureConfig,
    pub mode: ClusterMode,
    /// Candidate pairs re-scored per two-stage iteration.
    pub n_best: usize,
    pub lambda: LambdaSetting,
    pub codebook_size: CodebookSize,
    /// Threshold fit: lambda_act = alpha * mean + beta * stddev.
    pub alpha: f64,
    pub beta: f64,
    /// Fraction of the largest per-segment bounds dropped before the fit.
    pub lambda_trim: f64,
    pub seed: u64,
    /// Worker threads for feature extraction; 0 means one per core.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            features: FeatureConfig::default(),
            mode: ClusterMode::TwoStage,
            n_best: 200,
            lambda: LambdaSetting::Auto,
            codebook_size: CodebookSize::Auto,
            alpha: 2.0,
            beta: 0.5,
            lambda_trim: 0.0,
            seed: 42,
            threads: 0,
        }
    }
}

impl RunConfig {
    /// Cross-field checks beyond what parsing enforces.
    pub fn validate(&self) -> Result<(), String> {
        self.features.validate().map_err(|e| e.to_string())?;
        if self.n_best == 0 {
            return Err("n_best must be at least 1".into());
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err("alpha and beta must be finite".into());
        }
        if !(0.0..1.0).contains(&self.lambda_trim) {
            return Err("lambda_trim must be in [0, 1)".into());
        }
        Ok(())
    }
}

/// File locations a config may pin down; flags take precedence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunPaths {
    pub wav: Option<PathBuf>,
    pub segments: Option<PathBuf>,
    pub features_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub assignment: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub reference: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileConfig {
    pub run: RunConfig,
    pub paths: RunPaths,
}

pub fn load_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let mut cfg = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |detail: String| ConfigError::Parse {
            path: path.into(),
            line: idx + 1,
            detail,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse("expected `key = value`".into()))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(parse(format!("empty value for `{key}`")));
        }
        apply_key(&mut cfg, key, value).map_err(parse)?;
    }
    cfg.run.validate().map_err(|detail| ConfigError::Parse {
        path: path.into(),
        line: 0,
        detail,
    })?;
    Ok(cfg)
}

fn apply_key(cfg: &mut FileConfig, key: &str, value: &str) -> Result<(), String> {
    fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
        value.parse().map_err(|_| format!("bad value `{value}` for `{key}`"))
    }
    fn flag(key: &str, value: &str) -> Result<bool, String> {
        match value {
            "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            _ => Err(format!("bad value `{value}` for `{key}` (expected true/false)")),
        }
    }
    let run = &mut cfg.run;
    match key {
        "frame_len_ms" => run.features.frame_len_ms = num(key, value)?,
        "frame_shift_ms" => run.features.frame_shift_ms = num(key, value)?,
        "n_mfcc" => run.features.n_mfcc = num(key, value)?,
        "n_mel_filters" => run.features.n_mel_filters = num(key, value)?,
        "preemphasis" => run.features.preemphasis = num(key, value)?,
        "include_energy" => run.features.include_energy = flag(key, value)?,
        "include_delta" => run.features.include_delta = flag(key, value)?,
        "include_delta_delta" => run.features.include_delta_delta = flag(key, value)?,
        "mode" => run.mode = ClusterMode::parse(value)?,
        "n_best" => run.n_best = num(key, value)?,
        "lambda" => run.lambda = LambdaSetting::parse(value)?,
        "codebook_size" => run.codebook_size = CodebookSize::parse(value)?,
        "alpha" => run.alpha = num(key, value)?,
        "beta" => run.beta = num(key, value)?,
        "lambda_trim" => run.lambda_trim = num(key, value)?,
        "seed" => run.seed = num(key, value)?,
        "threads" => run.threads = num(key, value)?,
        "wav" => cfg.paths.wav = Some(value.into()),
        "segments" => cfg.paths.segments = Some(value.into()),
        "features_dir" => cfg.paths.features_dir = Some(value.into()),
        "out_dir" => cfg.paths.out_dir = Some(value.into()),
        "assignment" => cfg.paths.assignment = Some(value.into()),
        "report" => cfg.paths.report = Some(value.into()),
        "reference" => cfg.paths.reference = Some(value.into()),
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(contents: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, contents).unwrap();
        (dir, path)
    }

    #[test]
    fn empty_file_gives_defaults() {
        let (_dir, path) = write_temp("# nothing but comments\n\n");
        let cfg = load_config(&path).unwrap();
        assert_eq!(cfg, FileConfig::default());
        assert_eq!(cfg.run.mode, ClusterMode::TwoStage);
        assert_eq!(cfg.run.n_best, 200);
        assert_eq!(cfg.run.seed, 42);
    }

    #[test]
    fn parses_every_key_kind() {
        let (_dir, path) = write_temp(
            "mode = baseline-bic\n\
             n_best = 64\n\
             lambda = 1.75\n\
             codebook_size = 128\n\
             alpha = 1.5\n\
             beta = 0.25\n\
             lambda_trim = 0.1\n\
             seed = 7\n\
             threads = 2\n\
             frame_len_ms = 20\n\
             frame_shift_ms = 10\n\
             n_mfcc = 10\n\
             n_mel_filters = 24\n\
             preemphasis = 0.95\n\
             include_energy = false\n\
             include_delta = off\n\
             include_delta_delta = no\n\
             wav = /data/call.wav\n\
             segments = /data/spans.txt\n\
             features_dir = feats\n\
             out_dir = out\n",
        );
        let cfg = load_config(&path).unwrap();
        assert_eq!(cfg.run.mode, ClusterMode::Baseline);
        assert_eq!(cfg.run.n_best, 64);
        assert_eq!(cfg.run.lambda, LambdaSetting::Fixed(1.75));
        assert_eq!(cfg.run.codebook_size, CodebookSize::Fixed(128));
        assert_eq!(cfg.run.seed, 7);
        assert_eq!(cfg.run.threads, 2);
        assert_eq!(cfg.run.features.n_mfcc, 10);
        assert!(!cfg.run.features.include_energy);
        assert!(!cfg.run.features.include_delta);
        assert_eq!(cfg.paths.wav.as_deref(), Some(Path::new("/data/call.wav")));
        assert_eq!(cfg.paths.features_dir.as_deref(), Some(Path::new("feats")));
    }

    #[test]
    fn last_value_wins_for_repeated_keys() {
        let (_dir, path) = write_temp("seed = 1\nseed = 2\nseed = 3\n");
        assert_eq!(load_config(&path).unwrap().run.seed, 3);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let (_dir, path) = write_temp("speling = 3\n");
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { line: 1, .. })));
        let (_dir, path) = write_temp("seed = banana\n");
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { .. })));
        let (_dir, path) = write_temp("mode = kmeans\n");
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { .. })));
        let (_dir, path) = write_temp("lambda = -1\n");
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { .. })));
        let (_dir, path) = write_temp("lambda =\n");
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { .. })));
        let (_dir, path) = write_temp("just a line\n");
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn rejects_inconsistent_combinations() {
        // Keeping fewer mel filters than cepstra is a cross-field error the
        // per-line parser cannot see.
        let (_dir, path) = write_temp("n_mfcc = 30\nn_mel_filters = 20\n");
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { line: 0, .. })));
        let (_dir, path) = write_temp("lambda_trim = 1.0\n");
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { .. })));
        let (_dir, path) = write_temp("n_best = 0\n");
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn missing_file_is_io() {
        assert!(matches!(
            load_config(Path::new("/nonexistent/run.conf")),
            Err(ConfigError::Io { .. })
        ));
    }

    #[test]
    fn lambda_and_mode_parsers() {
        assert_eq!(LambdaSetting::parse("auto").unwrap(), LambdaSetting::Auto);
        assert_eq!(LambdaSetting::parse("2.5").unwrap(), LambdaSetting::Fixed(2.5));
        assert!(LambdaSetting::parse("0").is_err());
        assert!(LambdaSetting::parse("inf").is_err());
        assert_eq!(ClusterMode::parse("two-stage").unwrap(), ClusterMode::TwoStage);
        assert_eq!(ClusterMode::Baseline.as_str(), "baseline-bic");
        assert_eq!(CodebookSize::parse("auto").unwrap(), CodebookSize::Auto);
        assert!(CodebookSize::parse("0").is_err());
    }
}
