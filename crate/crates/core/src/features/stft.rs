use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::ingest::AudioClip;

/// Magnitude spectrogram, `n_fft/2 + 1` bins by frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub magnitudes: Array2<f64>,
    pub n_fft: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl Spectrogram {
    pub fn n_bins(&self) -> usize {
        self.magnitudes.nrows()
    }

    pub fn n_frames(&self) -> usize {
        self.magnitudes.ncols()
    }

    /// Centre frequency of each bin in Hz.
    pub fn bin_frequencies(&self) -> Vec<f64> {
        fft_frequencies(self.sample_rate, self.n_fft)
    }

    pub fn power(&self) -> Array2<f64> {
        self.magnitudes.mapv(|m| m * m)
    }
}

pub fn fft_frequencies(sample_rate: u32, n_fft: usize) -> Vec<f64> {
    (0..=n_fft / 2)
        .map(|k| k as f64 * sample_rate as f64 / n_fft as f64)
        .collect()
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Reflect-pad index: maps any integer onto `[0, len)` by mirroring about
/// the end samples (the end samples themselves are not repeated).
fn reflect_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = i.rem_euclid(period);
    if m < len as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Reusable short-time Fourier transform with a fixed size and hop.
pub struct Stft {
    n_fft: usize,
    hop: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(n_fft: usize, hop: usize) -> Result<Self> {
        if n_fft < 2 || !n_fft.is_power_of_two() {
            return Err(Error::invalid(format!("n_fft {n_fft} must be a power of two ≥ 2")));
        }
        if hop == 0 {
            return Err(Error::invalid("hop must be positive"));
        }
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        Ok(Stft {
            n_fft,
            hop,
            window: hann_window(n_fft),
            fft,
        })
    }

    /// Hann-windowed, reflect-centred magnitude spectrogram with
    /// `1 + len / hop` frames.
    pub fn compute(&self, clip: &AudioClip) -> Result<Spectrogram> {
        let x = clip.samples();
        if x.len() < 2 {
            return Err(Error::invalid("clip needs at least 2 samples for an STFT"));
        }
        let n_frames = 1 + x.len() / self.hop;
        let n_bins = self.n_fft / 2 + 1;
        let pad = (self.n_fft / 2) as isize;
        let mut mags = Array2::zeros((n_bins, n_frames));
        let mut buf = vec![Complex::new(0.0, 0.0); self.n_fft];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];

        for frame in 0..n_frames {
            let start = (frame * self.hop) as isize - pad;
            for (j, slot) in buf.iter_mut().enumerate() {
                let idx = start + j as isize;
                let sample = if idx >= 0 && (idx as usize) < x.len() {
                    x[idx as usize]
                } else {
                    x[reflect_index(idx, x.len())]
                };
                *slot = Complex::new(sample * self.window[j], 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (k, c) in buf.iter().take(n_bins).enumerate() {
                mags[[k, frame]] = c.norm();
            }
        }
        Ok(Spectrogram {
            magnitudes: mags,
            n_fft: self.n_fft,
            hop: self.hop,
            sample_rate: clip.sample_rate(),
        })
    }
}

pub fn stft(clip: &AudioClip, n_fft: usize, hop: usize) -> Result<Spectrogram> {
    Stft::new(n_fft, hop)?.compute(clip)
}
