use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{auc, confusion, roc, BenchmarkResult, ConfusionMatrix, EvalError, RocCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub records: u64,
    pub threshold: f64,
    pub accuracy_pct: f64,
    pub confusion: ConfusionMatrix,
    pub tpr_pct: f64,
    /// False alarms over actual normal records.
    pub fpr_pct: f64,
    /// Missed attacks over actual attack records.
    pub fnr_pct: f64,
    /// False alarms over all records.
    pub fpr_overall_pct: f64,
    /// Missed attacks over all records.
    pub fnr_overall_pct: f64,
    /// Names of rates whose denominator was zero.
    pub degenerate: Vec<String>,
    /// `None` when only one class is present.
    pub auc: Option<f64>,
    pub timing: Option<BenchmarkResult>,
}

/// Metrics for `scores` thresholded at `threshold`, plus the ROC curve.
pub fn evaluate(labels: &[u8], scores: &[f64], threshold: f64) -> Result<(EvalReport, RocCurve), EvalError> {
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    let curve = roc(labels, scores)?;
    // Same rule as `model::classify`: a score equal to the threshold is an attack.
    let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    let cm = confusion(labels, &preds)?;
    let rates = [
        ("accuracy", cm.accuracy()),
        ("tpr", cm.tpr()),
        ("fpr", cm.fpr()),
        ("fnr", cm.fnr()),
        ("fpr_overall", cm.fpr_overall()),
        ("fnr_overall", cm.fnr_overall()),
    ];
    let report = EvalReport {
        records: cm.total(),
        threshold,
        accuracy_pct: rates[0].1.pct(),
        confusion: cm,
        tpr_pct: rates[1].1.pct(),
        fpr_pct: rates[2].1.pct(),
        fnr_pct: rates[3].1.pct(),
        fpr_overall_pct: rates[4].1.pct(),
        fnr_overall_pct: rates[5].1.pct(),
        degenerate: rates.iter().filter(|(_, r)| r.degenerate()).map(|(n, _)| n.to_string()).collect(),
        auc: auc(&curve),
        timing: None,
    };
    Ok((report, curve))
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "records            {}", self.records);
        let _ = writeln!(s, "threshold          {}", self.threshold);
        let _ = writeln!(s, "accuracy           {:.2}%", self.accuracy_pct);
        let _ = writeln!(s, "TPR                {:.2}%", self.tpr_pct);
        let _ = writeln!(s, "FPR (of normal)    {:.2}%", self.fpr_pct);
        let _ = writeln!(s, "FNR (of attack)    {:.2}%", self.fnr_pct);
        let _ = writeln!(s, "FPR (of all)       {:.2}%", self.fpr_overall_pct);
        let _ = writeln!(s, "FNR (of all)       {:.2}%", self.fnr_overall_pct);
        match self.auc {
            Some(a) => {
                let _ = writeln!(s, "AUC                {a:.6}");
            }
            None => {
                let _ = writeln!(s, "AUC                undefined (single class)");
            }
        }
        if !self.degenerate.is_empty() {
            let _ = writeln!(s, "zero denominator   {}", self.degenerate.join(", "));
        }
        if let Some(t) = &self.timing {
            let _ = writeln!(
                s,
                "timing             {:.3}s, {:.1} records/s, {} threads",
                t.wall_seconds, t.records_per_second, t.thread_count
            );
        }
        s.push('\n');
        s.push_str(&self.confusion.grid());
        s
    }
}
