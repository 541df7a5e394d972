//! The staged study: configuration, feature tables from a corpus, the four
//! experiment stages, model files and the synthetic demo corpus.

mod config;
mod demo;
mod extract;
mod model_io;
mod stages;

pub use config::{ChannelChoice, ExperimentConfig, ScalerChoice};
pub use demo::{demo_corpus, DEMO_CLIPS_PER_CELL, DEMO_EMOTIONS, DEMO_SECONDS};
pub use extract::{base_path, extract_augmented, extract_manifest, row_meta, write_augmented_corpus, FeatureTable};
pub use model_io::{load_model, save_model, ModelKind, SavedModel, TrainedModel, MODEL_FORMAT_VERSION};
pub use stages::{
    manifest_path, reproduce, run_stage, smote_scaled, ModelRecord, RunManifest, SearchRecord, Stage, StageInputs,
    MANIFEST_FORMAT_VERSION,
};
