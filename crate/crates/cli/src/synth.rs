//! Synthetic speaker corpora for benchmarks and self-tests. Each speaker is
//! a fixed Gaussian in feature space: a mean drawn as `spread * N(0, I)` and
//! a random lower-triangular shaping transform. Segments draw i.i.d. frames
//! `x = mu + L z` and are labelled round-robin so segment ids interleave
//! speakers the way turns interleave in a conversation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vqbic_core::audio::SegmentSpan;
use vqbic_core::features::FeatureMatrix;

/// Matches the default front end: 400-sample windows, 160-sample hop, 16 kHz.
const WINDOW: u64 = 400;
const HOP: u64 = 160;
const SAMPLE_RATE: f64 = 16_000.0;

#[derive(Clone, Debug)]
pub struct SynthSpec {
    pub n_speakers: usize,
    pub segments_per_speaker: usize,
    /// Frames per segment, drawn uniformly from `frames_min..=frames_max`.
    pub frames_min: usize,
    pub frames_max: usize,
    pub dim: usize,
    /// Scale of speaker means relative to unit within-speaker variance.
    pub spread: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_speakers: 8,
            segments_per_speaker: 12,
            frames_min: 300,
            frames_max: 600,
            dim: 13,
            spread: 10.0,
            seed: 42,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_speakers == 0 || self.segments_per_speaker == 0 {
            return Err("need at least one speaker and one segment per speaker".into());
        }
        if self.dim == 0 {
            return Err("dim must be at least 1".into());
        }
        if self.frames_min == 0 || self.frames_min > self.frames_max {
            return Err("need 1 <= frames_min <= frames_max".into());
        }
        if !self.spread.is_finite() || self.spread < 0.0 {
            return Err("spread must be finite and non-negative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SynthCorpus {
    /// One matrix per segment, ids 0..n, in id order.
    pub features: Vec<FeatureMatrix>,
    /// Matching labelled spans with durations consistent with frame counts.
    pub spans: Vec<SegmentSpan>,
}

struct Speaker {
    mean: Vec<f64>,
    /// Row-major lower-triangular transform applied to N(0, I) draws.
    shape: Vec<f64>,
}

pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus, String> {
    spec.validate()?;
    let d = spec.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let speakers: Vec<Speaker> = (0..spec.n_speakers)
        .map(|_| {
            let mean = (0..d)
                .map(|_| spec.spread * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let off_scale = 0.3 / (d as f64).sqrt();
            let mut shape = vec![0.0; d * d];
            for r in 0..d {
                for c in 0..r {
                    shape[r * d + c] = rng.random_range(-off_scale..off_scale);
                }
                shape[r * d + r] = rng.random_range(0.7..1.3);
            }
            Speaker { mean, shape }
        })
        .collect();

    let n_segments = spec.n_speakers * spec.segments_per_speaker;
    let mut features = Vec::with_capacity(n_segments);
    let mut spans = Vec::with_capacity(n_segments);
    let mut cursor = 0.0f64;
    let mut z = vec![0.0f64; d];
    for id in 0..n_segments as u64 {
        let speaker_idx = id as usize % spec.n_speakers;
        let speaker = &speakers[speaker_idx];
        let frames = rng.random_range(spec.frames_min..=spec.frames_max);
        let mut data = Vec::with_capacity(frames * d);
        for _ in 0..frames {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            for r in 0..d {
                let row = &speaker.shape[r * d..r * d + r + 1];
                let x: f64 = speaker.mean[r]
                    + row.iter().zip(&z).map(|(l, zi)| l * zi).sum::<f64>();
                data.push(x as f32);
            }
        }
        features.push(FeatureMatrix::new(id, d, data));

        // A duration whose sample count frames back to exactly `frames`.
        let samples = (frames as u64 - 1) * HOP + WINDOW;
        let dur = samples as f64 / SAMPLE_RATE;
        spans.push(SegmentSpan::new(
            id,
            cursor,
            cursor + dur,
            Some(format!("spk{speaker_idx:02}")),
        ));
        cursor += dur + 0.01;
    }
    Ok(SynthCorpus { features, spans })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(seed: u64) -> SynthSpec {
        SynthSpec {
            n_speakers: 3,
            segments_per_speaker: 4,
            frames_min: 50,
            frames_max: 80,
            dim: 5,
            spread: 10.0,
            seed,
        }
    }

    #[test]
    fn same_seed_is_identical_different_seed_is_not() {
        let a = generate(&small_spec(7)).unwrap();
        let b = generate(&small_spec(7)).unwrap();
        let c = generate(&small_spec(8)).unwrap();
        for (x, y) in a.features.iter().zip(&b.features) {
            assert_eq!(x, y);
        }
        assert_eq!(a.spans, b.spans);
        assert_ne!(a.features[0].data, c.features[0].data);
    }

    #[test]
    fn labels_are_round_robin_and_counts_in_range() {
        let corpus = generate(&small_spec(1)).unwrap();
        assert_eq!(corpus.features.len(), 12);
        for (i, span) in corpus.spans.iter().enumerate() {
            assert_eq!(span.id, i as u64);
            assert_eq!(span.speaker.as_deref(), Some(format!("spk{:02}", i % 3).as_str()));
        }
        for m in &corpus.features {
            let t = m.num_frames();
            assert!((50..=80).contains(&t), "frame count {t} outside spec");
        }
    }

    #[test]
    fn durations_invert_to_frame_counts() {
        let corpus = generate(&small_spec(2)).unwrap();
        for (m, span) in corpus.features.iter().zip(&corpus.spans) {
            let samples = (span.duration() * SAMPLE_RATE).round() as usize;
            let frames = (samples - WINDOW as usize) / HOP as usize + 1;
            assert_eq!(frames, m.num_frames());
        }
    }

    #[test]
    fn speakers_are_separated_when_spread_out() {
        let corpus = generate(&small_spec(3)).unwrap();
        let mean_of = |m: &FeatureMatrix| -> Vec<f64> {
            let t = m.num_frames() as f64;
            let mut mu = vec![0.0; m.dim];
            for row in m.rows() {
                for (acc, v) in mu.iter_mut().zip(row) {
                    *acc += *v as f64 / t;
                }
            }
            mu
        };
        let dist = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        };
        // Same-speaker segment means should sit much closer together than
        // different-speaker ones at spread 10.
        let m0 = mean_of(&corpus.features[0]); // spk00
        let m3 = mean_of(&corpus.features[3]); // spk00
        let m1 = mean_of(&corpus.features[1]); // spk01
        assert!(dist(&m0, &m3) < dist(&m0, &m1) / 2.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&SynthSpec { n_speakers: 0, ..small_spec(0) }).is_err());
        assert!(generate(&SynthSpec { frames_min: 0, ..small_spec(0) }).is_err());
        assert!(generate(&SynthSpec { frames_min: 9, frames_max: 8, ..small_spec(0) }).is_err());
        assert!(generate(&SynthSpec { dim: 0, ..small_spec(0) }).is_err());
        assert!(generate(&SynthSpec { spread: f64::NAN, ..small_spec(0) }).is_err());
    }
}
