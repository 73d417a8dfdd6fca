use serde::{Deserialize, Serialize};

use super::metrics::check_labels;
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Scores `>= threshold` count as attacks.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    /// Only one class was present; the curve is the diagonal and has no AUC.
    pub degenerate: bool,
}

/// One point per distinct score, swept from high to low, after a leading
/// `+inf` threshold at (0, 0).
pub fn roc(labels: &[u8], scores: &[f64]) -> Result<RocCurve, EvalError> {
    if labels.len() != scores.len() {
        return Err(EvalError::LengthMismatch { labels: labels.len(), predictions: scores.len() });
    }
    check_labels(labels)?;
    if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::BadScore { index });
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    let start = RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 };
    if pos == 0 || neg == 0 {
        let end = RocPoint { threshold: f64::NEG_INFINITY, fpr: 1.0, tpr: 1.0 };
        return Ok(RocCurve { points: vec![start, end], degenerate: true });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![start];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint { threshold: t, fpr: fp as f64 / neg as f64, tpr: tp as f64 / pos as f64 });
    }
    Ok(RocCurve { points, degenerate: false })
}

/// Trapezoidal area under the curve; `None` for a degenerate curve.
pub fn auc(curve: &RocCurve) -> Option<f64> {
    if curve.degenerate {
        return None;
    }
    Some(
        curve
            .points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum(),
    )
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{}\n", p.threshold, p.fpr, p.tpr));
        }
        s
    }
}
