//! Top-level error type and the exit-code policy.
//!
//! Two classes, two exit codes:
//!
//! * **Validation** (exit 1): the request itself is wrong — bad flags or
//!   config values, malformed text input, overlapping spans, too few
//!   segments, a non-positive lambda.
//! * **Io** (exit 2): a file could not be read, written, or understood —
//!   missing paths, permission problems, bad magic bytes, truncated or
//!   unsupported binary payloads.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<crate::wav::WavError> for CliError {
    fn from(e: crate::wav::WavError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<crate::segments::SegmentFileError> for CliError {
    fn from(e: crate::segments::SegmentFileError) -> Self {
        match e {
            crate::segments::SegmentFileError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<crate::feature_file::FeatureFileError> for CliError {
    fn from(e: crate::feature_file::FeatureFileError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<crate::codebook_file::CodebookFileError> for CliError {
    fn from(e: crate::codebook_file::CodebookFileError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<crate::assignment::AssignmentError> for CliError {
    fn from(e: crate::assignment::AssignmentError) -> Self {
        match e {
            crate::assignment::AssignmentError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        match e {
            crate::config::ConfigError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

macro_rules! validation_from {
    ($($ty:ty),+ $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Validation(e.to_string())
            }
        })+
    };
}

validation_from!(
    vqbic_core::audio::AudioError,
    vqbic_core::features::FeatureError,
    vqbic_core::stats::StatsError,
    vqbic_core::bic::BicError,
    vqbic_core::codebook::CodebookError,
    vqbic_core::threshold::ThresholdError,
    vqbic_core::clustering::ClusteringError,
    vqbic_core::metrics::MetricsError,
);
