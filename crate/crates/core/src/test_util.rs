//! Oracles and signal generators shared by unit tests.

use std::f64::consts::PI;

pub fn sine(freq: f64, sample_rate: u32, n: usize, amp: f64) -> Vec<f64> {
    (0..n)
        .map(|i| amp * (2.0 * PI * freq * i as f64 / sample_rate as f64).sin())
        .collect()
}

/// Magnitudes of the full DFT by direct summation.
pub fn brute_dft_magnitudes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let phase = -2.0 * PI * (k * t % n) as f64 / n as f64;
                re += v * phase.cos();
                im += v * phase.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

/// Frequency of the largest non-DC bin of the whole-signal spectrum.
pub fn fft_peak_hz(x: &[f64], sample_rate: u32) -> f64 {
    use rustfft::{num_complex::Complex, FftPlanner};
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let k = (1..=n / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .unwrap();
    k as f64 * sample_rate as f64 / n as f64
}

/// `per` rows around each of `n_classes` centres spaced `spacing` apart on
/// the diagonal, with uniform jitter in [-1, 1) per coordinate.
pub fn blobs(
    n_classes: usize,
    per: usize,
    dim: usize,
    spacing: f64,
    seed: u64,
) -> (ndarray::Array2<f64>, Vec<usize>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = n_classes * per;
    let mut x = ndarray::Array2::zeros((n, dim));
    let mut y = Vec::with_capacity(n);
    for r in 0..n {
        let c = r % n_classes;
        for j in 0..dim {
            let offset = if j % n_classes == c { spacing } else { 0.0 };
            x[[r, j]] = offset + rng.random_range(-1.0..1.0);
        }
        y.push(c);
    }
    (x, y)
}
