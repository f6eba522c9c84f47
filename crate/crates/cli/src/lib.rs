//! Command-line companion to `vqbic-core`: everything that touches files or
//! the OS. File formats (WAV, segment lists, feature and codebook blobs,
//! assignments), the flat config format, the synthetic-corpus generator, and
//! the command implementations behind the `vqbic` binary.

pub mod assignment;
pub mod codebook_file;
pub mod commands;
pub mod config;
pub mod error;
pub mod feature_file;
pub mod pipeline;
pub mod report;
pub mod segments;
pub mod synth;
pub mod wav;

pub use error::CliError;
