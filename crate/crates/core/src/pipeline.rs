//! The source-domain workflow end to end: fit preprocessing on the training
//! split, train a network, and package both as a bundle.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::RunConfig;
use crate::dataset::{fit_encoding, to_matrix, DatasetError, EncodingMap, FlowRecord};
use crate::features::{
    fit_importance, fit_scaler, select_top_k, transform, FeatureError, FeatureSelection, ImportanceReport,
    ScalerParams,
};
use crate::matrix::{FeatureMatrix, LabelVector};
use crate::model::{build, train, Family, Labeled, ModelError, TrainReport};
use crate::schema::Schema;
use crate::transfer::{Bundle, TransferError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

/// Preprocessing fitted on training records only.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessing {
    pub encoding: EncodingMap,
    pub importance: ImportanceReport,
    pub selection: FeatureSelection,
    pub scaler: ScalerParams,
}

impl Preprocessing {
    /// Encodes, selects and scales labeled records.
    pub fn apply(&self, records: &[FlowRecord], schema: &Schema) -> Result<(FeatureMatrix, LabelVector), PipelineError> {
        let (raw, y) = to_matrix(records, schema, &self.encoding)?;
        Ok((transform(&raw, &self.selection, &self.scaler)?, y))
    }
}

pub fn fit_preprocessing(
    train_records: &[FlowRecord],
    schema: &Schema,
    config: &RunConfig,
) -> Result<Preprocessing, PipelineError> {
    let encoding = fit_encoding(train_records, schema, &schema.categorical_names())?;
    let (raw, y) = to_matrix(train_records, schema, &encoding)?;
    let importance = fit_importance(&raw, &y, &config.forest_config())?;
    let selection = select_top_k(&importance, config.k)?;
    let mut scaler = fit_scaler(&raw, &selection)?;
    scaler.clamp = config.clamp;
    Ok(Preprocessing { encoding, importance, selection, scaler })
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub bundle: Bundle,
    pub report: TrainReport,
    pub preprocessing: Preprocessing,
}

/// Fits preprocessing, trains `family`, and bundles the result.
pub fn train_bundle(
    family: Family,
    train_records: &[FlowRecord],
    val_records: &[FlowRecord],
    schema: &Schema,
    config: &RunConfig,
) -> Result<TrainOutcome, PipelineError> {
    let prep = fit_preprocessing(train_records, schema, config)?;
    let (x_train, y_train) = prep.apply(train_records, schema)?;
    let (x_val, y_val) = prep.apply(val_records, schema)?;
    let model = build(family, prep.selection.k(), config.seed)?;
    let (model, report) = train(
        model,
        Labeled { x: &x_train, y: &y_train },
        Labeled { x: &x_val, y: &y_val },
        &config.train_config(),
    )?;
    let mut metadata = BTreeMap::new();
    metadata.insert("family".to_string(), family.to_string());
    metadata.insert("seed".to_string(), config.seed.to_string());
    metadata.insert("train_records".to_string(), train_records.len().to_string());
    metadata.insert("val_records".to_string(), val_records.len().to_string());
    if let Some(e) = report.chosen_epoch {
        metadata.insert("chosen_epoch".to_string(), e.to_string());
    }
    if let Some(acc) = report.best_val_acc() {
        metadata.insert("val_accuracy".to_string(), acc.to_string());
    }
    let bundle = Bundle::new(
        model,
        prep.selection.clone(),
        prep.scaler.clone(),
        prep.encoding.clone(),
        schema.clone(),
        metadata,
    )?;
    Ok(TrainOutcome { bundle, report, preprocessing: prep })
}
