//! Minimal iterative radix-2 FFT. Only power-of-two sizes are needed (the
//! front end rounds the analysis window up to one), so a full FFT crate would
//! be overkill here — and the usual ones are not `no_std`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Precomputed plan for a fixed power-of-two transform size.
pub(crate) struct Fft {
    size: usize,
    // exp(-2*pi*i*k/size) for k in 0..size/2
    twiddle_re: Vec<f64>,
    twiddle_im: Vec<f64>,
}

impl Fft {
    pub(crate) fn new(size: usize) -> Self {
        assert!(size.is_power_of_two() && size >= 2, "fft size must be a power of two >= 2");
        let half = size / 2;
        let mut twiddle_re = Vec::with_capacity(half);
        let mut twiddle_im = Vec::with_capacity(half);
        for k in 0..half {
            let angle = -2.0 * core::f64::consts::PI * (k as f64) / (size as f64);
            twiddle_re.push(math::cos(angle));
            twiddle_im.push(math::sin(angle));
        }
        Fft { size, twiddle_re, twiddle_im }
    }

    pub(crate) fn size(&self) -> usize {
        self.size
    }

    /// In-place forward transform of `re`/`im` (both of length `size`).
    pub(crate) fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        let n = self.size;
        assert_eq!(re.len(), n);
        assert_eq!(im.len(), n);

        // Bit-reversal permutation.
        let shift = n.leading_zeros() + 1;
        for i in 0..n {
            let j = i.reverse_bits() >> shift;
            if j > i {
                re.swap(i, j);
                im.swap(i, j);
            }
        }

        // Butterflies, doubling the block length each stage.
        let mut len = 2;
        while len <= n {
            let stride = n / len; // twiddle index step for this stage
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let w_re = self.twiddle_re[k * stride];
                    let w_im = self.twiddle_im[k * stride];
                    let a = start + k;
                    let b = start + k + len / 2;
                    let t_re = re[b] * w_re - im[b] * w_im;
                    let t_im = re[b] * w_im + im[b] * w_re;
                    re[b] = re[a] - t_re;
                    im[b] = im[a] - t_im;
                    re[a] += t_re;
                    im[a] += t_im;
                }
            }
            len *= 2;
        }
    }

    /// Magnitude spectrum of a real frame, zero-padded to the plan size.
    /// Returns `size/2 + 1` values (DC through Nyquist).
    pub(crate) fn magnitude_spectrum(&self, frame: &[f64]) -> Vec<f64> {
        assert!(frame.len() <= self.size, "frame longer than fft size");
        let mut re = vec![0.0; self.size];
        let mut im = vec![0.0; self.size];
        re[..frame.len()].copy_from_slice(frame);
        self.forward(&mut re, &mut im);
        (0..=self.size / 2)
            .map(|k| math::sqrt(re[k] * re[k] + im[k] * im[k]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook O(n^2) DFT used as the oracle.
    fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (t, &v) in x.iter().enumerate() {
                    let angle = -2.0 * core::f64::consts::PI * (k * t) as f64 / n as f64;
                    re += v * math::cos(angle);
                    im += v * math::sin(angle);
                }
                (re, im)
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &n in &[2usize, 8, 64, 512] {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let oracle = naive_dft(&x);
            let plan = Fft::new(n);
            let mut re = x.clone();
            let mut im = vec![0.0; n];
            plan.forward(&mut re, &mut im);
            for k in 0..n {
                assert!((re[k] - oracle[k].0).abs() < 1e-9, "re mismatch at {k} (n={n})");
                assert!((im[k] - oracle[k].1).abs() < 1e-9, "im mismatch at {k} (n={n})");
            }
        }
    }

    #[test]
    fn magnitude_of_pure_tone() {
        // A full-cycle cosine at bin 4 puts energy only at bins 4 (and its
        // mirror, which the half-spectrum omits): |X[4]| = n/2.
        let n = 64;
        let x: Vec<f64> = (0..n)
            .map(|t| math::cos(2.0 * core::f64::consts::PI * 4.0 * t as f64 / n as f64))
            .collect();
        let mags = Fft::new(n).magnitude_spectrum(&x);
        assert_eq!(mags.len(), n / 2 + 1);
        for (k, &m) in mags.iter().enumerate() {
            if k == 4 {
                assert!((m - n as f64 / 2.0).abs() < 1e-9);
            } else {
                assert!(m < 1e-9, "leakage at bin {k}: {m}");
            }
        }
    }

    #[test]
    fn zero_padding_matches_explicit_padding() {
        let x = [0.3, -0.7, 0.2];
        let plan = Fft::new(8);
        let padded: Vec<f64> = x.iter().copied().chain(core::iter::repeat(0.0)).take(8).collect();
        let from_short = plan.magnitude_spectrum(&x);
        let from_padded = plan.magnitude_spectrum(&padded);
        assert_eq!(from_short, from_padded);
    }
}
