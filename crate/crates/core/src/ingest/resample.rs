use std::f64::consts::PI;

use super::AudioClip;
use crate::error::{Error, Result};

/// Zero crossings of the sinc kernel on each side of the centre tap.
const KERNEL_ZEROS: f64 = 24.0;
/// Passband edge as a fraction of the output Nyquist when downsampling.
const DOWNSAMPLE_ROLLOFF: f64 = 0.97;

/// Resample `clip` to `target_rate` with a Blackman-windowed sinc kernel.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    if target_rate == 0 {
        return Err(Error::invalid("target sample rate must be positive"));
    }
    if target_rate == clip.sample_rate() {
        return Ok(clip.clone());
    }
    let ratio = target_rate as f64 / clip.sample_rate() as f64;
    AudioClip::new(resample_by_ratio(clip.samples(), ratio), target_rate)
}

/// Band-limited resampling of a raw sample buffer.
///
/// `ratio` is output samples per input sample; the output holds
/// `round(len * ratio)` samples (at least one for non-empty input).
pub fn resample_by_ratio(samples: &[f64], ratio: f64) -> Vec<f64> {
    assert!(ratio > 0.0 && ratio.is_finite(), "ratio must be positive");
    if samples.is_empty() {
        return Vec::new();
    }
    if ratio == 1.0 {
        return samples.to_vec();
    }
    let out_len = ((samples.len() as f64 * ratio).round() as usize).max(1);
    let cutoff = if ratio < 1.0 {
        ratio * DOWNSAMPLE_ROLLOFF
    } else {
        1.0
    };
    let half_width = KERNEL_ZEROS / cutoff;
    let n = samples.len() as isize;

    (0..out_len)
        .map(|j| {
            let t = j as f64 / ratio;
            let lo = ((t - half_width).ceil() as isize).max(0);
            let hi = ((t + half_width).floor() as isize).min(n - 1);
            let mut acc = 0.0;
            for i in lo..=hi {
                let x = t - i as f64;
                acc += samples[i as usize] * cutoff * sinc(cutoff * x) * blackman(x / half_width);
            }
            acc
        })
        .collect()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Symmetric Blackman window on `u` in [-1, 1].
fn blackman(u: f64) -> f64 {
    if u.abs() > 1.0 {
        0.0
    } else {
        0.42 + 0.5 * (PI * u).cos() + 0.08 * (2.0 * PI * u).cos()
    }
}
