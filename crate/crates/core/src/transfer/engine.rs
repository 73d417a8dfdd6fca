use std::path::Path;

use super::{load_bundle, Bundle, BundleHeader, TransferError};
use crate::dataset::{feature_matrix, RecordValues};
use crate::features::transform;
use crate::matrix::FeatureMatrix;
use crate::model::{classify, with_threads, Model};

/// Read-only scorer built from a bundle. Nothing it exposes can change the
/// weights or preprocessing, so every call with the same rows gives the same
/// scores regardless of thread count.
#[derive(Debug, Clone)]
pub struct InferenceEngine {
    bundle: Bundle,
}

impl InferenceEngine {
    pub fn new(bundle: Bundle) -> Self {
        Self { bundle }
    }

    pub fn load(path: &Path) -> Result<Self, TransferError> {
        Ok(Self::new(load_bundle(path)?))
    }

    pub fn header(&self) -> &BundleHeader {
        &self.bundle.header
    }

    pub fn model(&self) -> &Model {
        &self.bundle.model
    }

    /// Encodes, selects and scales raw rows into network inputs.
    pub fn preprocess<R: RecordValues>(&self, rows: &[R]) -> Result<FeatureMatrix, TransferError> {
        let h = &self.bundle.header;
        let raw = feature_matrix(rows, &h.schema, &h.encoding)?;
        self.preprocess_matrix(&raw)
    }

    /// Selects and scales an already encoded feature matrix.
    pub fn preprocess_matrix(&self, raw: &FeatureMatrix) -> Result<FeatureMatrix, TransferError> {
        let h = &self.bundle.header;
        Ok(transform(raw, &h.selection, &h.scaler)?)
    }

    /// Attack probabilities using all cores.
    pub fn infer<R: RecordValues + Sync>(&self, rows: &[R]) -> Result<Vec<f32>, TransferError> {
        self.infer_threads(rows, 0)
    }

    /// Attack probabilities on `threads` workers (`0` = all cores).
    pub fn infer_threads<R: RecordValues + Sync>(&self, rows: &[R], threads: usize) -> Result<Vec<f32>, TransferError> {
        let x = self.preprocess(rows)?;
        Ok(with_threads(threads, || self.bundle.model.predict_proba(&x))??)
    }

    pub fn infer_matrix(&self, raw: &FeatureMatrix, threads: usize) -> Result<Vec<f32>, TransferError> {
        let x = self.preprocess_matrix(raw)?;
        Ok(with_threads(threads, || self.bundle.model.predict_proba(&x))??)
    }

    pub fn classify<R: RecordValues + Sync>(&self, rows: &[R], threshold: f64) -> Result<Vec<u8>, TransferError> {
        Ok(classify(&self.infer(rows)?, threshold))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FieldValue, RawRow};
    use crate::model::Family;

    fn row(proto: &str, base: f64) -> RawRow {
        let mut values = vec![FieldValue::Text(proto.into())];
        values.extend((0..8).map(|i| FieldValue::Num(base + i as f64)));
        RawRow { values, label: None }
    }

    #[test]
    fn scores_rows_and_ignores_thread_count() {
        let b = super::super::bundle::tests::tiny_bundle(Family::CnnLstm);
        let engine = InferenceEngine::new(b.clone());
        let rows = vec![row("tcp", 0.0), row("udp", 0.5), row("icmp", -3.0)];
        let one = engine.infer_threads(&rows, 1).unwrap();
        let all = engine.infer(&rows).unwrap();
        assert_eq!(one.len(), 3);
        assert_eq!(one.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), all.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(engine.model(), &b.model);
        assert_eq!(engine.classify(&rows, 0.0).unwrap(), vec![1, 1, 1]);
    }
}
