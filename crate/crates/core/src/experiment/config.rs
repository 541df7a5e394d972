use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::augment::AugmentSpec;
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::ingest::{VocalChannel, DEFAULT_SAMPLE_RATE};
use crate::model_select::default_fractions;
use crate::preprocess::ScalerKind;

/// Scaling applied before the classifiers of stages 2 to 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerChoice {
    None,
    Standard,
    #[serde(rename = "minmax")]
    MinMax,
}

impl ScalerChoice {
    pub const ALL: [ScalerChoice; 3] = [ScalerChoice::None, ScalerChoice::Standard, ScalerChoice::MinMax];

    pub fn kind(self) -> Option<ScalerKind> {
        match self {
            ScalerChoice::None => None,
            ScalerChoice::Standard => Some(ScalerKind::Standard),
            ScalerChoice::MinMax => Some(ScalerKind::MinMax),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalerChoice::None => "none",
            ScalerChoice::Standard => "standard",
            ScalerChoice::MinMax => "minmax",
        }
    }
}

impl fmt::Display for ScalerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScalerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScalerChoice::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scaler {s:?} (none, standard, minmax)")))
    }
}

/// Which vocal channel the rows of a run come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelChoice {
    All,
    Speech,
    Song,
}

impl ChannelChoice {
    pub fn channel(self) -> Option<VocalChannel> {
        match self {
            ChannelChoice::All => None,
            ChannelChoice::Speech => Some(VocalChannel::Speech),
            ChannelChoice::Song => Some(VocalChannel::Song),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelChoice::All => "all",
            ChannelChoice::Speech => "speech",
            ChannelChoice::Song => "song",
        }
    }
}

impl fmt::Display for ChannelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ChannelChoice::All, ChannelChoice::Speech, ChannelChoice::Song]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown channel {s:?} (all, speech, song)")))
    }
}

/// Every knob of a run. Missing JSON fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub sample_rate: u32,
    pub n_fft: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub scaler: ScalerChoice,
    pub test_fraction: f64,
    pub search_n_iter: usize,
    pub search_k: usize,
    pub augmentations: Vec<AugmentSpec>,
    pub smote: bool,
    pub smote_k: usize,
    pub channel: ChannelChoice,
    /// Fit scalers on all rows before splitting and oversample before the
    /// train/test split, as the literal reading of the original study does.
    pub paper_faithful: bool,
    pub learning_curve_fractions: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let f = FeatureConfig::default();
        ExperimentConfig {
            seed: 42,
            sample_rate: DEFAULT_SAMPLE_RATE,
            n_fft: f.n_fft,
            hop: f.hop,
            n_mels: f.n_mels,
            n_mfcc: f.n_mfcc,
            scaler: ScalerChoice::Standard,
            test_fraction: 0.2,
            search_n_iter: 10,
            search_k: 3,
            augmentations: AugmentSpec::defaults(),
            smote: true,
            smote_k: 5,
            channel: ChannelChoice::All,
            paper_faithful: false,
            learning_curve_fractions: default_fractions(),
        }
    }
}

impl ExperimentConfig {
    /// Defaults with the search budget of the full-corpus study.
    pub fn paper() -> Self {
        ExperimentConfig {
            search_n_iter: 50,
            ..ExperimentConfig::default()
        }
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            n_fft: self.n_fft,
            hop: self.hop,
            n_mels: self.n_mels,
            n_mfcc: self.n_mfcc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sample_rate", self.sample_rate as usize),
            ("n_fft", self.n_fft),
            ("hop", self.hop),
            ("n_mels", self.n_mels),
            ("n_mfcc", self.n_mfcc),
            ("search_n_iter", self.search_n_iter),
            ("smote_k", self.smote_k),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::invalid(format!("config field {name} must be positive")));
            }
        }
        if self.search_k < 2 {
            return Err(Error::invalid("config field search_k must be at least 2"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "config field test_fraction {} must lie in (0, 1)",
                self.test_fraction
            )));
        }
        for s in &self.augmentations {
            s.validate()?;
        }
        if self.learning_curve_fractions.is_empty() {
            return Err(Error::invalid("config field learning_curve_fractions is empty"));
        }
        if let Some(bad) = self.learning_curve_fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::invalid(format!("learning-curve fraction {bad} must lie in (0, 1]")));
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}
