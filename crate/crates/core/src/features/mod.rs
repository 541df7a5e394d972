//! Per-clip feature extraction.
//!
//! Five families are computed from one STFT and averaged over frames, then
//! concatenated in a fixed order:
//!
//! | columns     | family                     |
//! |-------------|----------------------------|
//! | `0..40`     | MFCC                       |
//! | `40..52`    | chromagram                 |
//! | `52..180`   | mel power spectrogram      |
//! | `180..187`  | spectral contrast          |
//! | `187..193`  | tonnetz                    |
//!
//! The ranges above are for the default configuration (40 MFCCs, 128 mel
//! bands). Serialized feature tables depend on this order.

mod chroma;
mod contrast;
mod mel;
mod stft;
mod tonnetz;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AudioClip;

pub use chroma::{chromagram, pitch_class};
pub use contrast::{contrast_bands, spectral_contrast, ContrastParams};
pub use mel::{
    dct2_ortho, hz_to_mel, mel_spectrogram, mel_to_hz, mfcc_from_mel, power_to_db, MelFilterbank,
    DB_AMIN, DB_TOP,
};
pub use stft::{fft_frequencies, hann_window, stft, Spectrogram, Stft};
pub use tonnetz::{tonnetz, tonnetz_basis};

/// Length of the default feature vector.
pub const FEATURE_DIM: usize = 193;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub n_fft: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub n_mfcc: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            n_fft: 2048,
            hop: 512,
            n_mels: 128,
            n_mfcc: 40,
        }
    }
}

/// Column ranges of each family inside a feature vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    pub mfcc: Range<usize>,
    pub chroma: Range<usize>,
    pub mel: Range<usize>,
    pub contrast: Range<usize>,
    pub tonnetz: Range<usize>,
}

impl FeatureLayout {
    pub fn new(config: &FeatureConfig) -> Self {
        let contrast_rows = ContrastParams::default().n_bands + 1;
        let mfcc = 0..config.n_mfcc;
        let chroma = mfcc.end..mfcc.end + 12;
        let mel = chroma.end..chroma.end + config.n_mels;
        let contrast = mel.end..mel.end + contrast_rows;
        let tonnetz = contrast.end..contrast.end + 6;
        FeatureLayout {
            mfcc,
            chroma,
            mel,
            contrast,
            tonnetz,
        }
    }

    pub fn dim(&self) -> usize {
        self.tonnetz.end
    }
}

/// Time-averaged features of one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Extractor with the STFT plan and mel filterbank built once.
pub struct FeatureExtractor {
    config: FeatureConfig,
    sample_rate: u32,
    stft: Stft,
    mel_bank: MelFilterbank,
    contrast: ContrastParams,
}

impl FeatureExtractor {
    pub fn new(config: FeatureConfig, sample_rate: u32) -> Result<Self> {
        if config.n_mfcc == 0 || config.n_mfcc > config.n_mels {
            return Err(Error::invalid(format!(
                "n_mfcc {} must be in 1..={}",
                config.n_mfcc, config.n_mels
            )));
        }
        let contrast = ContrastParams::default();
        contrast_bands(sample_rate, config.n_fft, &contrast)?;
        Ok(FeatureExtractor {
            stft: Stft::new(config.n_fft, config.hop)?,
            mel_bank: MelFilterbank::full_band(sample_rate, config.n_fft, config.n_mels)?,
            config,
            sample_rate,
            contrast,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn layout(&self) -> FeatureLayout {
        FeatureLayout::new(&self.config)
    }

    fn check_rate(&self, clip: &AudioClip) -> Result<()> {
        if clip.sample_rate() != self.sample_rate {
            return Err(Error::invalid(format!(
                "clip at {} Hz given to a {} Hz extractor",
                clip.sample_rate(),
                self.sample_rate
            )));
        }
        Ok(())
    }

    pub fn spectrogram(&self, clip: &AudioClip) -> Result<Spectrogram> {
        self.check_rate(clip)?;
        self.stft.compute(clip)
    }

    pub fn mel(&self, spec: &Spectrogram) -> Result<ndarray::Array2<f64>> {
        self.mel_bank.apply(&spec.power())
    }

    /// MFCC matrix (`n_mfcc` × frames) for a clip.
    pub fn mfcc(&self, clip: &AudioClip) -> Result<ndarray::Array2<f64>> {
        let spec = self.spectrogram(clip)?;
        mfcc_from_mel(&self.mel(&spec)?, self.config.n_mfcc)
    }

    pub fn extract(&self, clip: &AudioClip) -> Result<FeatureVector> {
        let spec = self.spectrogram(clip)?;
        let mel_power = self.mel(&spec)?;
        let mfcc = mfcc_from_mel(&mel_power, self.config.n_mfcc)?;
        let chroma = chromagram(&spec);
        let contrast = spectral_contrast(&spec, &self.contrast)?;
        let tonnetz = tonnetz(&chroma)?;

        let mut values = Vec::with_capacity(self.layout().dim());
        for family in [&mfcc, &chroma, &mel_power, &contrast, &tonnetz] {
            values.extend(mel::row_means(family));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("feature {i} is not finite")));
        }
        Ok(FeatureVector { values })
    }
}

/// MFCCs of a clip with default STFT and mel settings.
pub fn mfcc(clip: &AudioClip, n_mfcc: usize) -> Result<ndarray::Array2<f64>> {
    let config = FeatureConfig {
        n_mfcc,
        ..FeatureConfig::default()
    };
    FeatureExtractor::new(config, clip.sample_rate())?.mfcc(clip)
}

/// Default-configuration feature vector of a clip.
pub fn extract_feature_vector(clip: &AudioClip) -> Result<FeatureVector> {
    FeatureExtractor::new(FeatureConfig::default(), clip.sample_rate())?.extract(clip)
}
