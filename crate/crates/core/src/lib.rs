//! Vocal emotion recognition from audio features.
//!
//! The crate covers the whole pipeline: WAV ingest and RAVDESS metadata
//! ([`ingest`]), per-clip feature vectors ([`features`]), waveform
//! augmentation ([`augment`]), scaling and resampling of feature tables
//! ([`preprocess`]), SMO-trained kernel SVMs ([`svm`]), a softmax MLP
//! ([`mlp`]), cross-validation and randomized search ([`model_select`]),
//! metrics and report files ([`evaluation`]) and the staged experiment
//! runner ([`experiment`]).

pub mod augment;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod features;
pub mod ingest;
pub mod mlp;
pub mod model_select;
pub mod preprocess;
pub mod svm;

#[cfg(test)]
mod test_util;

pub use error::{Error, Result};
pub use features::{FeatureConfig, FeatureVector, FEATURE_DIM};
pub use ingest::{AudioClip, ClipMetadata, Corpus, Emotion, VocalChannel};
pub use preprocess::LabeledDataset;
