//! Mel filterbank, mel power spectrogram and MFCCs.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};

use super::stft::{fft_frequencies, Spectrogram};
use crate::error::{Error, Result};

/// Power floor applied before taking logarithms.
pub const DB_AMIN: f64 = 1e-10;
/// Dynamic range kept below the loudest mel cell.
pub const DB_TOP: f64 = 80.0;

const MEL_F_SP: f64 = 200.0 / 3.0;
const MEL_MIN_LOG_HZ: f64 = 1000.0;
const MEL_MIN_LOG_MEL: f64 = MEL_MIN_LOG_HZ / MEL_F_SP;

fn mel_logstep() -> f64 {
    6.4f64.ln() / 27.0
}

/// Slaney mel scale: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    if hz >= MEL_MIN_LOG_HZ {
        MEL_MIN_LOG_MEL + (hz / MEL_MIN_LOG_HZ).ln() / mel_logstep()
    } else {
        hz / MEL_F_SP
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    if mel >= MEL_MIN_LOG_MEL {
        MEL_MIN_LOG_HZ * (mel_logstep() * (mel - MEL_MIN_LOG_MEL)).exp()
    } else {
        MEL_F_SP * mel
    }
}

/// Triangular, area-normalised mel filters over the rfft bins.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    /// `n_mels` rows by `n_fft/2 + 1` bins.
    pub weights: Array2<f64>,
    pub fmin: f64,
    pub fmax: f64,
}

impl MelFilterbank {
    pub fn new(sample_rate: u32, n_fft: usize, n_mels: usize, fmin: f64, fmax: f64) -> Result<Self> {
        if n_mels < 1 {
            return Err(Error::invalid("n_mels must be at least 1"));
        }
        if !(0.0..fmax).contains(&fmin) || fmax > sample_rate as f64 / 2.0 + 1e-9 {
            return Err(Error::invalid(format!(
                "mel band [{fmin}, {fmax}] Hz invalid for sample rate {sample_rate}"
            )));
        }
        let bins = fft_frequencies(sample_rate, n_fft);
        let (lo, hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
            .collect();

        let mut weights = Array2::zeros((n_mels, bins.len()));
        for m in 0..n_mels {
            let (left, centre, right) = (edges[m], edges[m + 1], edges[m + 2]);
            let norm = 2.0 / (right - left);
            for (k, &f) in bins.iter().enumerate() {
                let rising = (f - left) / (centre - left);
                let falling = (right - f) / (right - centre);
                let w = rising.min(falling).max(0.0);
                weights[[m, k]] = w * norm;
            }
            if weights.row(m).iter().all(|&w| w == 0.0) {
                return Err(Error::invalid(format!(
                    "mel filter {m} covers no FFT bin; use fewer mels or a larger n_fft"
                )));
            }
        }
        Ok(MelFilterbank {
            weights,
            fmin,
            fmax,
        })
    }

    /// Filterbank covering `[0, sample_rate/2]`.
    pub fn full_band(sample_rate: u32, n_fft: usize, n_mels: usize) -> Result<Self> {
        Self::new(sample_rate, n_fft, n_mels, 0.0, sample_rate as f64 / 2.0)
    }

    pub fn n_mels(&self) -> usize {
        self.weights.nrows()
    }

    /// Apply to a power spectrogram (bins × frames).
    pub fn apply(&self, power: &Array2<f64>) -> Result<Array2<f64>> {
        if power.nrows() != self.weights.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.ncols(),
                got: power.nrows(),
            });
        }
        Ok(self.weights.dot(power))
    }
}

/// Mel power spectrogram (`n_mels` × frames) over the full band.
pub fn mel_spectrogram(spec: &Spectrogram, n_mels: usize) -> Result<Array2<f64>> {
    let bank = MelFilterbank::full_band(spec.sample_rate, spec.n_fft, n_mels)?;
    bank.apply(&spec.power())
}

/// `10·log10(max(S, amin))`, floored at `max - top_db` over the whole matrix.
pub fn power_to_db(power: &Array2<f64>) -> Array2<f64> {
    let mut db = power.mapv(|p| 10.0 * p.max(DB_AMIN).log10());
    let peak = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = peak - DB_TOP;
    db.mapv_inplace(|v| v.max(floor));
    db
}

/// Orthonormal DCT-II along the rows of `input`, keeping the first `n_out`
/// coefficients.
pub fn dct2_ortho(input: &Array2<f64>, n_out: usize) -> Array2<f64> {
    let n = input.nrows();
    let mut basis = Array2::zeros((n_out, n));
    for k in 0..n_out {
        let scale = if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        for i in 0..n {
            basis[[k, i]] = scale * (PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64).cos();
        }
    }
    basis.dot(input)
}

/// MFCCs from a mel power spectrogram.
pub fn mfcc_from_mel(mel: &Array2<f64>, n_mfcc: usize) -> Result<Array2<f64>> {
    if n_mfcc == 0 || n_mfcc > mel.nrows() {
        return Err(Error::invalid(format!(
            "n_mfcc {n_mfcc} must be in 1..={}",
            mel.nrows()
        )));
    }
    Ok(dct2_ortho(&power_to_db(mel), n_mfcc))
}

/// Per-row mean over frames.
pub(crate) fn row_means(m: &Array2<f64>) -> Vec<f64> {
    m.mean_axis(Axis(1))
        .map(|a| a.to_vec())
        .unwrap_or_else(|| vec![0.0; m.nrows()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    #[test]
    fn slaney_scale_round_trips() {
        for hz in [0.0, 100.0, 999.0, 1000.0, 4000.0, 11025.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(1000.0) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn filterbank_is_nonnegative_unimodal_contiguous() {
        let bank = MelFilterbank::full_band(22050, 2048, 128).unwrap();
        assert_eq!(bank.weights.dim(), (128, 1025));
        for row in bank.weights.rows() {
            assert!(row.iter().all(|&w| w >= 0.0));
            assert!(row.sum() > 0.0);
            let nz: Vec<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(nz.last().unwrap() - nz[0] + 1, nz.len(), "support not contiguous");
            // Rises then falls.
            let vals: Vec<f64> = nz.iter().map(|&i| row[i]).collect();
            let peak = vals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert!(vals[..=peak].windows(2).all(|w| w[0] <= w[1]));
            assert!(vals[peak..].windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_zero_mels_and_empty_filters() {
        assert!(MelFilterbank::full_band(22050, 2048, 0).is_err());
        assert!(MelFilterbank::full_band(22050, 64, 128).is_err());
    }

    #[test]
    fn zero_power_gives_zero_mel() {
        let bank = MelFilterbank::full_band(22050, 512, 40).unwrap();
        let out = bank.apply(&Array2::zeros((257, 3))).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_db_column_has_only_dc_coefficient() {
        let mel = Array2::from_elem((128, 2), 0.01);
        let c = mfcc_from_mel(&mel, 40).unwrap();
        assert_eq!(c.nrows(), 40);
        let expected_c0 = -20.0 * (128f64).sqrt();
        for f in 0..2 {
            assert!((c[[0, f]] - expected_c0).abs() < 1e-9);
            for k in 1..40 {
                assert!(c[[k, f]].abs() < 1e-9, "coef {k} = {}", c[[k, f]]);
            }
        }
    }

    #[test]
    fn dct_is_orthonormal() {
        let eye = Array2::<f64>::eye(16);
        let basis = dct2_ortho(&eye, 16);
        let gram = basis.dot(&basis.t());
        for i in 0..16 {
            for j in 0..16 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn db_floor_is_relative_to_peak() {
        let p = Array2::from_shape_vec((1, 3), vec![1.0, 1e-12, 0.0]).unwrap();
        let db = power_to_db(&p);
        assert_eq!(db.row(0).to_vec(), vec![0.0, -80.0, -80.0]);
        let means = row_means(&Array2::from_shape_vec((2, 2), vec![1.0, 3.0, 2.0, 2.0]).unwrap());
        assert_eq!(Array1::from(means), Array1::from(vec![2.0, 2.0]));
    }
}
