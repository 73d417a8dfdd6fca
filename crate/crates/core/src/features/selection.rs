use serde::{Deserialize, Serialize};

use super::{FeatureError, ImportanceReport};
use crate::kv::KvDocument;

/// Ordered list of kept feature names, most important first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub kept: Vec<String>,
}

impl FeatureSelection {
    pub fn k(&self) -> usize {
        self.kept.len()
    }

    pub fn to_kv(&self) -> KvDocument {
        let mut doc = KvDocument::new();
        doc.set("k", self.kept.len());
        for (i, name) in self.kept.iter().enumerate() {
            doc.set(&format!("feature.{i}"), name);
        }
        doc
    }

    pub fn from_kv(doc: &KvDocument) -> Result<Self, FeatureError> {
        let k: usize = doc.parse_value("k")?;
        if k.checked_add(1) != Some(doc.len()) {
            return Err(FeatureError::Config("unexpected keys in selection file".into()));
        }
        let mut kept = Vec::with_capacity(k);
        for i in 0..k {
            kept.push(doc.require(&format!("feature.{i}"))?.to_string());
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = kept.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(FeatureError::Config(format!("duplicate feature `{dup}`")));
        }
        Ok(Self { kept })
    }
}

/// The `k` highest-scoring features; equal scores are ordered by name.
pub fn select_top_k(report: &ImportanceReport, k: usize) -> Result<FeatureSelection, FeatureError> {
    let available = report.names.len();
    if k == 0 || k > available {
        return Err(FeatureError::KOutOfRange { k, available });
    }
    let kept = report
        .ranked()
        .into_iter()
        .take(k)
        .map(|(n, _)| n.to_string())
        .collect();
    Ok(FeatureSelection { kept })
}
