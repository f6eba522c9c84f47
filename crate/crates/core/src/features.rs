//! MFCC front end.
//!
//! Converts a 16-bit PCM buffer into rows of mel-frequency cepstral
//! coefficients plus log energy, with optional delta (and delta-delta)
//! appendices. The exact recipe, in frame order:
//!
//! 1. samples scaled to `[-1, 1)`, framed (default 25 ms window / 10 ms hop);
//! 2. log energy of the raw frame (before any filtering);
//! 3. per-frame pre-emphasis `y[n] = x[n] - a*x[n-1]` with `x[-1] = 0`;
//! 4. Hamming window, FFT at the next power of two >= window length;
//! 5. triangular mel filterbank (default 26 bands, 0 Hz to Nyquist) applied
//!    to the magnitude spectrum, then a floored natural log;
//! 6. orthonormal DCT-II keeping coefficients 1..=n_mfcc (c0 is dropped —
//!    the raw-energy term replaces it).
//!
//! All math is f64 internally; rows are stored as f32.

use alloc::vec;
use alloc::vec::Vec;

use crate::fft::Fft;
use crate::math;

/// Spectral floor applied before every log: `ln(max(e, LOG_FLOOR))`.
pub const LOG_FLOOR: f64 = 1e-10;

/// Half-width of the delta regression window (frames on each side).
pub const DELTA_HALF_WIDTH: usize = 2;

/// Front-end knobs. `Default` is the standard 13-dimensional MFCC+energy
/// setup with deltas appended (26 dimensions total).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureConfig {
    pub frame_len_ms: u32,
    pub frame_shift_ms: u32,
    /// Cepstral coefficients kept (c1..=c`n_mfcc`).
    pub n_mfcc: usize,
    pub n_mel_filters: usize,
    pub preemphasis: f64,
    pub include_energy: bool,
    pub include_delta: bool,
    pub include_delta_delta: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            frame_len_ms: 25,
            frame_shift_ms: 10,
            n_mfcc: 12,
            n_mel_filters: 26,
            preemphasis: 0.97,
            include_energy: true,
            include_delta: true,
            include_delta_delta: false,
        }
    }
}

impl FeatureConfig {
    /// Dimensionality of one static row (cepstra plus optional energy).
    pub fn base_dim(&self) -> usize {
        self.n_mfcc + usize::from(self.include_energy)
    }

    /// Full row dimensionality including delta blocks.
    pub fn dim(&self) -> usize {
        let blocks = 1 + usize::from(self.include_delta) + usize::from(self.include_delta_delta);
        self.base_dim() * blocks
    }

    /// Analysis window length in samples at `sample_rate`.
    pub fn window_len(&self, sample_rate: u32) -> usize {
        (sample_rate as usize * self.frame_len_ms as usize) / 1000
    }

    /// Hop length in samples at `sample_rate`.
    pub fn hop_len(&self, sample_rate: u32) -> usize {
        (sample_rate as usize * self.frame_shift_ms as usize) / 1000
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.frame_len_ms == 0 || self.frame_shift_ms == 0 {
            return Err(FeatureError::InvalidConfig("frame_len_ms and frame_shift_ms must be positive"));
        }
        if self.n_mfcc == 0 {
            return Err(FeatureError::InvalidConfig("n_mfcc must be at least 1"));
        }
        if self.n_mel_filters <= self.n_mfcc {
            return Err(FeatureError::InvalidConfig("n_mel_filters must exceed n_mfcc (c0 is dropped)"));
        }
        if !(0.0..1.0).contains(&self.preemphasis) {
            return Err(FeatureError::InvalidConfig("preemphasis must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Row-major `num_frames x dim` feature block for one segment.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub segment_id: u64,
    pub dim: usize,
    pub data: Vec<f32>,
}

impl FeatureMatrix {
    /// Panics if `data` is not a whole number of `dim`-sized rows.
    pub fn new(segment_id: u64, dim: usize, data: Vec<f32>) -> Self {
        assert!(dim > 0, "feature dimension must be positive");
        assert!(data.len().is_multiple_of(dim), "feature data is not a whole number of rows");
        FeatureMatrix { segment_id, dim, data }
    }

    pub fn empty(segment_id: u64, dim: usize) -> Self {
        FeatureMatrix::new(segment_id, dim, Vec::new())
    }

    pub fn num_frames(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, t: usize) -> &[f32] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Frames obtainable from `num_samples` with the given window/hop:
/// `floor((S - W)/H) + 1`, or zero when the signal is shorter than one window.
pub fn frame_count(num_samples: usize, window: usize, hop: usize) -> usize {
    if num_samples < window {
        0
    } else {
        (num_samples - window) / hop + 1
    }
}

/// Runs the full front end on one segment's audio.
///
/// A buffer shorter than one analysis window (including an empty one) yields
/// an empty matrix rather than an error; callers decide whether that is worth
/// a warning. Output rows are `[c1..cN, logE?]` then optional delta and
/// delta-delta copies of that block.
pub fn extract_features(
    buf: &crate::audio::AudioBuffer,
    cfg: &FeatureConfig,
    segment_id: u64,
) -> Result<FeatureMatrix, FeatureError> {
    cfg.validate()?;
    let window = cfg.window_len(buf.sample_rate);
    let hop = cfg.hop_len(buf.sample_rate);
    if window < 2 || hop == 0 {
        return Err(FeatureError::InvalidConfig("frame length/shift too short for this sample rate"));
    }

    let frames = frame_count(buf.len(), window, hop);
    if frames == 0 {
        return Ok(FeatureMatrix::empty(segment_id, cfg.dim()));
    }

    let fft = Fft::new(window.next_power_of_two().max(2));
    let bank = MelBank::new(buf.sample_rate, fft.size(), cfg.n_mel_filters);
    let dct = DctRows::new(cfg.n_mel_filters, cfg.n_mfcc);
    let hamming: Vec<f64> = (0..window)
        .map(|n| 0.54 - 0.46 * math::cos(2.0 * core::f64::consts::PI * n as f64 / (window - 1) as f64))
        .collect();

    let signal: Vec<f64> = buf.samples.iter().map(|&s| s as f64 / 32768.0).collect();
    let base_dim = cfg.base_dim();
    let mut statics = Vec::with_capacity(frames * base_dim);
    let mut work = vec![0.0f64; window];
    for t in 0..frames {
        let frame = &signal[t * hop..t * hop + window];
        let energy = floored_ln(frame.iter().map(|v| v * v).sum());

        work[0] = frame[0] * hamming[0];
        for n in 1..window {
            work[n] = (frame[n] - cfg.preemphasis * frame[n - 1]) * hamming[n];
        }
        let mags = fft.magnitude_spectrum(&work);
        let log_mel: Vec<f64> = bank.filters.iter().map(|f| floored_ln(f.apply(&mags))).collect();
        statics.extend(dct.rows.iter().map(|row| dot(row, &log_mel)));
        if cfg.include_energy {
            statics.push(energy);
        }
    }

    let mut blocks: Vec<Vec<f64>> = vec![statics];
    if cfg.include_delta || cfg.include_delta_delta {
        let delta = compute_deltas(&blocks[0], base_dim, DELTA_HALF_WIDTH);
        if cfg.include_delta_delta {
            blocks.push(compute_deltas(&delta, base_dim, DELTA_HALF_WIDTH));
        }
        if cfg.include_delta {
            blocks.insert(1, delta);
        }
    }

    let dim = cfg.dim();
    let mut data = Vec::with_capacity(frames * dim);
    for t in 0..frames {
        for block in &blocks {
            data.extend(block[t * base_dim..(t + 1) * base_dim].iter().map(|&v| v as f32));
        }
    }
    Ok(FeatureMatrix::new(segment_id, dim, data))
}

/// Regression deltas over a `2*half_width + 1` frame window with replicated
/// edges: `d[t] = sum_k k*(x[t+k] - x[t-k]) / (2*sum_k k^2)`. A single-frame
/// input yields all zeros.
pub fn compute_deltas(data: &[f64], dim: usize, half_width: usize) -> Vec<f64> {
    assert!(dim > 0 && data.len().is_multiple_of(dim), "data is not a whole number of rows");
    assert!(half_width >= 1, "delta window must cover at least one neighbour");
    let frames = data.len() / dim;
    let denom: f64 = 2.0 * (1..=half_width).map(|k| (k * k) as f64).sum::<f64>();
    let row = |t: usize| {
        let t = t.min(frames - 1);
        &data[t * dim..(t + 1) * dim]
    };
    let mut out = Vec::with_capacity(data.len());
    for t in 0..frames {
        for c in 0..dim {
            let mut num = 0.0;
            for k in 1..=half_width {
                let ahead = row(t + k)[c];
                let behind = row(t.saturating_sub(k))[c];
                num += k as f64 * (ahead - behind);
            }
            out.push(num / denom);
        }
    }
    out
}

fn floored_ln(e: f64) -> f64 {
    if e > LOG_FLOOR {
        math::ln(e)
    } else {
        math::ln(LOG_FLOOR)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * math::log10(1.0 + hz / 700.0)
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (math::powf(10.0, mel / 2595.0) - 1.0)
}

struct MelFilter {
    first_bin: usize,
    weights: Vec<f64>,
}

impl MelFilter {
    fn apply(&self, mags: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&mags[self.first_bin..])
            .map(|(w, m)| w * m)
            .sum()
    }
}

struct MelBank {
    filters: Vec<MelFilter>,
}

impl MelBank {
    /// Triangular filters with centers equally spaced on the mel scale from
    /// 0 Hz to Nyquist; weights evaluated at the FFT bin frequencies.
    fn new(sample_rate: u32, fft_size: usize, n_filters: usize) -> Self {
        let nyquist = sample_rate as f64 / 2.0;
        let top_mel = hz_to_mel(nyquist);
        let edges: Vec<f64> = (0..n_filters + 2)
            .map(|i| mel_to_hz(top_mel * i as f64 / (n_filters + 1) as f64))
            .collect();
        let bin_hz = sample_rate as f64 / fft_size as f64;
        let n_bins = fft_size / 2 + 1;

        let mut filters = Vec::with_capacity(n_filters);
        for f in 0..n_filters {
            let (left, center, right) = (edges[f], edges[f + 1], edges[f + 2]);
            let mut first_bin = 0;
            let mut weights = Vec::new();
            for bin in 0..n_bins {
                let hz = bin as f64 * bin_hz;
                let w = if hz <= left || hz >= right {
                    0.0
                } else if hz <= center {
                    (hz - left) / (center - left)
                } else {
                    (right - hz) / (right - center)
                };
                if w > 0.0 {
                    if weights.is_empty() {
                        first_bin = bin;
                    }
                    weights.push(w);
                } else if !weights.is_empty() {
                    break;
                }
            }
            filters.push(MelFilter { first_bin, weights });
        }
        MelBank { filters }
    }
}

struct DctRows {
    /// Orthonormal DCT-II basis rows for coefficients 1..=n_keep.
    rows: Vec<Vec<f64>>,
}

impl DctRows {
    fn new(n_input: usize, n_keep: usize) -> Self {
        let scale = math::sqrt(2.0 / n_input as f64);
        let rows = (1..=n_keep)
            .map(|m| {
                (0..n_input)
                    .map(|j| {
                        scale * math::cos(core::f64::consts::PI * m as f64 * (j as f64 + 0.5) / n_input as f64)
                    })
                    .collect()
            })
            .collect();
        DctRows { rows }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeatureError {
    InvalidConfig(&'static str),
}

impl core::error::Error for FeatureError {}

impl core::fmt::Display for FeatureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FeatureError::InvalidConfig(what) => write!(f, "invalid feature config: {what}"),
        }
    }
}
