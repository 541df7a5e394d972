//! Feature-table preprocessing: scaling, label encoding, stratified
//! splitting and SMOTE oversampling.

mod dataset;
mod labels;
mod scaler;
mod smote;
mod split;

pub use dataset::{
    class_counts, feature_column_name, read_feature_csv, write_feature_csv, LabeledDataset,
    RowMeta,
};
pub use labels::{encode_labels, LabelCodec};
pub use scaler::{fit_scaler, ScalerKind, ScalerParams};
pub use smote::{smote, SMOTE_TAG};
pub use split::{
    stratified_split, stratified_split_indices, stratified_subsample, stratified_test_counts,
};

pub(crate) use dataset::format_float;
pub(crate) use split::shuffled_class_indices;
