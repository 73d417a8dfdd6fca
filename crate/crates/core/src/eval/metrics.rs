use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// A count ratio. A zero denominator yields 0 and marks the rate degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    fn of(num: u64, den: u64) -> Self {
        Self { num, den }
    }

    pub fn degenerate(self) -> bool {
        self.den == 0
    }

    pub fn value(self) -> f64 {
        if self.den == 0 { 0.0 } else { self.num as f64 / self.den as f64 }
    }

    /// `100 * num / den`, evaluated in that order.
    pub fn pct(self) -> f64 {
        if self.den == 0 { 0.0 } else { 100.0 * self.num as f64 / self.den as f64 }
    }
}

pub(super) fn check_labels(labels: &[u8]) -> Result<(), EvalError> {
    match labels.iter().position(|&v| v > 1) {
        Some(index) => Err(EvalError::NonBinary { index, value: labels[index] }),
        None => Ok(()),
    }
}

pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix, EvalError> {
    if labels.len() != predictions.len() {
        return Err(EvalError::LengthMismatch { labels: labels.len(), predictions: predictions.len() });
    }
    check_labels(labels)?;
    check_labels(predictions)?;
    let mut cm = ConfusionMatrix::default();
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (0, 0) => cm.tn += 1,
            _ => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    /// Fraction correct; multiply by 100 (or use [`Rate::pct`]) for percent.
    pub fn accuracy(&self) -> Rate {
        Rate::of(self.tp + self.tn, self.total())
    }

    pub fn tpr(&self) -> Rate {
        Rate::of(self.tp, self.positives())
    }

    pub fn fpr(&self) -> Rate {
        Rate::of(self.fp, self.negatives())
    }

    /// Missed attacks over actual attacks.
    pub fn fnr(&self) -> Rate {
        Rate::of(self.fn_, self.positives())
    }

    /// False alarms over all records.
    pub fn fpr_overall(&self) -> Rate {
        Rate::of(self.fp, self.total())
    }

    /// Missed attacks over all records.
    pub fn fnr_overall(&self) -> Rate {
        Rate::of(self.fn_, self.total())
    }

    /// 2x2 grid, rows = actual class, columns = predicted class.
    pub fn grid(&self) -> String {
        let w = [self.tp, self.fp, self.tn, self.fn_]
            .iter()
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(1)
            .max("attack".len());
        format!(
            "{:>14}  {:>w$}  {:>w$}\n{:>14}  {:>w$}  {:>w$}\n{:>14}  {:>w$}  {:>w$}\n",
            "actual\\pred", "normal", "attack",
            "normal", self.tn, self.fp,
            "attack", self.fn_, self.tp,
        )
    }
}
