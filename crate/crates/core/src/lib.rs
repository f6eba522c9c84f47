//! Core library for speaker indexing: slicing speaker-homogeneous segments out
//! of audio, turning them into MFCC features, and agglomeratively clustering
//! them by speaker.
//!
//! The clustering decision is a Bayesian information criterion (BIC) test on
//! full-covariance Gaussian segment models. Two drivers are provided:
//!
//! * [`clustering::cluster_baseline`] scores every cluster pair with the BIC
//!   at every iteration (quadratic per step, the reference answer), and
//! * [`clustering::cluster_two_stage`] first ranks pairs by the cosine
//!   distance between their vector-quantization codeword histograms and only
//!   runs the BIC on the N best, which is much cheaper and — given enough
//!   candidates — picks the same merges.
//!
//! The merge threshold inside the BIC can be fixed or estimated from the data
//! itself ([`threshold::estimate_lambda`]), exploiting that each input segment
//! is single-speaker: splitting a segment in half gives a pair that *must*
//! merge, which bounds the usable threshold.
//!
//! The crate is `no_std` (with `alloc`); everything file- or OS-shaped lives
//! in the companion CLI crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

mod fft;
mod math;

pub mod audio;
pub mod bic;
pub mod clustering;
pub mod codebook;
pub mod features;
pub mod metrics;
pub mod stats;
pub mod threshold;
