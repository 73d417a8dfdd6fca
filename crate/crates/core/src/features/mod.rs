//! Feature importance, top-k selection, and min-max scaling.

mod importance;
mod scaler;
mod selection;

use thiserror::Error;

pub use importance::{fit_importance, ForestConfig, ImportanceReport};
pub use scaler::{fit_scaler, transform, ScaledColumn, ScalerParams};
pub use selection::{select_top_k, FeatureSelection};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("label {0} is not binary")]
    Label(u8),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("k = {k} out of range 1..={available}")]
    KOutOfRange { k: usize, available: usize },
    #[error("column `{0}` missing")]
    MissingColumn(String),
    #[error("{0}")]
    Kv(#[from] crate::kv::KvError),
}
