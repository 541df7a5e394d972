use ndarray::Array2;

use super::mel::DB_AMIN;
use super::stft::Spectrogram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastParams {
    pub n_bands: usize,
    pub fmin: f64,
    /// Fraction of a band's bins averaged for the peak and for the valley.
    pub alpha: f64,
}

impl Default for ContrastParams {
    fn default() -> Self {
        ContrastParams {
            n_bands: 6,
            fmin: 200.0,
            alpha: 0.02,
        }
    }
}

/// Bin index ranges for the sub-`fmin` band followed by `n_bands` octave
/// bands; the last octave band runs to Nyquist.
pub fn contrast_bands(
    sample_rate: u32,
    n_fft: usize,
    params: &ContrastParams,
) -> Result<Vec<std::ops::Range<usize>>> {
    let ContrastParams {
        n_bands,
        fmin,
        alpha,
    } = *params;
    if n_bands < 1 {
        return Err(Error::invalid("spectral contrast needs at least one band"));
    }
    if fmin <= 0.0 {
        return Err(Error::invalid("spectral contrast fmin must be positive"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("spectral contrast alpha must lie in (0, 1)"));
    }
    let nyquist = sample_rate as f64 / 2.0;
    let top_edge = fmin * 2f64.powi(n_bands as i32 - 1);
    if top_edge >= nyquist {
        return Err(Error::invalid(format!(
            "octave band starting at {top_edge} Hz lies above Nyquist ({nyquist} Hz)"
        )));
    }
    let bin_hz = sample_rate as f64 / n_fft as f64;
    let n_bins = n_fft / 2 + 1;
    // First bin at or above frequency f.
    let first_at = |f: f64| ((f / bin_hz).ceil() as usize).min(n_bins);

    let mut edges = vec![0usize];
    edges.extend((0..n_bands).map(|k| first_at(fmin * 2f64.powi(k as i32))));
    edges.push(n_bins);
    let bands: Vec<_> = edges.windows(2).map(|w| w[0]..w[1]).collect();
    if let Some((k, _)) = bands.iter().enumerate().find(|(_, b)| b.is_empty()) {
        return Err(Error::invalid(format!(
            "spectral contrast band {k} contains no FFT bins at n_fft={n_fft}"
        )));
    }
    Ok(bands)
}

/// Per band and frame: mean dB power of the top `ceil(alpha·m)` bins minus
/// mean dB power of the bottom `ceil(alpha·m)` bins.
pub fn spectral_contrast(spec: &Spectrogram, params: &ContrastParams) -> Result<Array2<f64>> {
    let bands = contrast_bands(spec.sample_rate, spec.n_fft, params)?;
    let power = spec.power();
    let mut out = Array2::zeros((bands.len(), spec.n_frames()));
    let mut sorted = Vec::new();
    for (b, band) in bands.iter().enumerate() {
        let m = band.len();
        let take = ((params.alpha * m as f64).ceil() as usize).clamp(1, m);
        for frame in 0..spec.n_frames() {
            sorted.clear();
            sorted.extend(band.clone().map(|k| power[[k, frame]]));
            sorted.sort_by(f64::total_cmp);
            let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
            let valley = mean(&sorted[..take]);
            let peak = mean(&sorted[m - take..]);
            out[[b, frame]] =
                10.0 * peak.max(DB_AMIN).log10() - 10.0 * valley.max(DB_AMIN).log10();
        }
    }
    Ok(out)
}
