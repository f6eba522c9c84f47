//! In-memory audio and the segment spans that index into it.
//!
//! A segment span is a half-open time interval `[start, end)` in seconds that
//! is assumed to contain speech from exactly one speaker. File parsing lives
//! in the CLI crate; this module only validates spans and slices sample
//! buffers.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math;

/// PCM audio held as 16-bit samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AudioBuffer {
    /// Interleaving is the caller's problem: this buffer is always mono.
    pub samples: Vec<i16>,
    /// Samples per second (the pipeline standardizes on 16 kHz).
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> Self {
        AudioBuffer { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Extracts the samples covered by `span`. Sample indices are
    /// `floor(t * sample_rate)` at both ends, so `[0, duration_secs()]`
    /// returns the whole buffer and adjacent spans never share a sample.
    pub fn slice_segment(&self, span: &SegmentSpan) -> Result<AudioBuffer, AudioError> {
        span.validate()?;
        let start = (math::floor(span.start * self.sample_rate as f64)) as usize;
        let end = (math::floor(span.end * self.sample_rate as f64)) as usize;
        if end > self.samples.len() {
            return Err(AudioError::OutOfRange {
                id: span.id,
                end: span.end,
                duration: self.duration_secs(),
            });
        }
        Ok(AudioBuffer::new(self.samples[start..end].to_vec(), self.sample_rate))
    }
}

/// One speaker-homogeneous stretch of audio: `[start, end)` seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentSpan {
    pub id: u64,
    pub start: f64,
    pub end: f64,
    /// Ground-truth speaker label, when known. Only evaluation uses it.
    pub speaker: Option<String>,
}

impl SegmentSpan {
    pub fn new(id: u64, start: f64, end: f64, speaker: Option<String>) -> Self {
        SegmentSpan { id, start, end, speaker }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    fn validate(&self) -> Result<(), AudioError> {
        let ok = self.start.is_finite() && self.end.is_finite() && self.start >= 0.0 && self.end > self.start;
        if ok {
            Ok(())
        } else {
            Err(AudioError::BadSpan { id: self.id })
        }
    }
}

/// Checks a whole segment list: every span well-formed, ids unique, and no
/// two spans overlapping in time (they may touch).
pub fn validate_spans(spans: &[SegmentSpan]) -> Result<(), AudioError> {
    for span in spans {
        span.validate()?;
    }
    let mut ids: Vec<u64> = spans.iter().map(|s| s.id).collect();
    ids.sort_unstable();
    for pair in ids.windows(2) {
        if pair[0] == pair[1] {
            return Err(AudioError::DuplicateId { id: pair[0] });
        }
    }
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by(|&a, &b| {
        spans[a]
            .start
            .total_cmp(&spans[b].start)
            .then_with(|| spans[a].id.cmp(&spans[b].id))
    });
    for pair in order.windows(2) {
        let (a, b) = (&spans[pair[0]], &spans[pair[1]]);
        if b.start < a.end {
            return Err(AudioError::Overlap { first: a.id, second: b.id });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum AudioError {
    /// Span is degenerate: non-finite endpoints, negative start, or end <= start.
    BadSpan { id: u64 },
    /// Span reaches past the end of the audio it indexes into.
    OutOfRange { id: u64, end: f64, duration: f64 },
    DuplicateId { id: u64 },
    /// Two spans overlap in time; segments must be disjoint.
    Overlap { first: u64, second: u64 },
}

impl core::error::Error for AudioError {}

impl core::fmt::Display for AudioError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AudioError::BadSpan { id } => write!(f, "segment {id}: start/end do not form a valid span"),
            AudioError::OutOfRange { id, end, duration } => {
                write!(f, "segment {id}: end {end}s is past the audio duration {duration}s")
            }
            AudioError::DuplicateId { id } => write!(f, "segment id {id} appears more than once"),
            AudioError::Overlap { first, second } => {
                write!(f, "segments {first} and {second} overlap in time")
            }
        }
    }
}
