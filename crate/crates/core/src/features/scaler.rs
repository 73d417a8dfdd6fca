use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureSelection};
use crate::kv::KvDocument;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledColumn {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Training-set min/max per kept feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub columns: Vec<ScaledColumn>,
    /// Clamp transformed values into [0, 1].
    pub clamp: bool,
}

impl ScalerParams {
    pub fn get(&self, name: &str) -> Option<&ScaledColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn to_kv(&self) -> KvDocument {
        let mut doc = KvDocument::new();
        doc.set("clamp", self.clamp);
        doc.set("columns", self.columns.len());
        for (i, c) in self.columns.iter().enumerate() {
            doc.set(&format!("column.{i}.name"), &c.name);
            // Debug formatting is the shortest string that parses back to
            // the same bits.
            doc.set(&format!("column.{i}.min"), format!("{:?}", c.min));
            doc.set(&format!("column.{i}.max"), format!("{:?}", c.max));
        }
        doc
    }

    pub fn from_kv(doc: &KvDocument) -> Result<Self, FeatureError> {
        let clamp: bool = doc.parse_value("clamp")?;
        let n: usize = doc.parse_value("columns")?;
        if n.checked_mul(3).and_then(|v| v.checked_add(2)) != Some(doc.len()) {
            return Err(FeatureError::Config("unexpected keys in scaler file".into()));
        }
        let mut columns = Vec::with_capacity(n);
        for i in 0..n {
            let c = ScaledColumn {
                name: doc.require(&format!("column.{i}.name"))?.to_string(),
                min: doc.parse_value(&format!("column.{i}.min"))?,
                max: doc.parse_value(&format!("column.{i}.max"))?,
            };
            if !(c.min <= c.max) || !c.min.is_finite() || !c.max.is_finite() {
                return Err(FeatureError::Config(format!("column `{}`: bad range", c.name)));
            }
            columns.push(c);
        }
        Ok(Self { columns, clamp })
    }
}

fn column_of(x: &FeatureMatrix, name: &str) -> Result<usize, FeatureError> {
    x.column_index(name).ok_or_else(|| FeatureError::MissingColumn(name.to_string()))
}

/// Per-column min and max over the training rows. Clamping defaults to on.
pub fn fit_scaler(x_train: &FeatureMatrix, selection: &FeatureSelection) -> Result<ScalerParams, FeatureError> {
    if x_train.rows() == 0 {
        return Err(FeatureError::Shape("cannot fit a scaler on zero rows".into()));
    }
    let mut columns = Vec::with_capacity(selection.k());
    for name in &selection.kept {
        let c = column_of(x_train, name)?;
        let (min, max) = x_train
            .column(c)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        columns.push(ScaledColumn { name: name.clone(), min, max });
    }
    Ok(ScalerParams { columns, clamp: true })
}

/// Selects `selection.kept` columns in order and maps each value to
/// `(x - min) / (max - min)`. Constant columns map to 0.
pub fn transform(
    x: &FeatureMatrix,
    selection: &FeatureSelection,
    scaler: &ScalerParams,
) -> Result<FeatureMatrix, FeatureError> {
    let mut plan = Vec::with_capacity(selection.k());
    for name in &selection.kept {
        let src = column_of(x, name)?;
        let p = scaler
            .get(name)
            .ok_or_else(|| FeatureError::MissingColumn(format!("{name} (scaler)")))?;
        plan.push((src, p.min, p.max - p.min));
    }
    let mut data = Vec::with_capacity(x.rows() * plan.len());
    for row in x.row_iter() {
        for &(src, min, range) in &plan {
            let v = if range > 0.0 { (row[src] - min) / range } else { 0.0 };
            data.push(if scaler.clamp { v.clamp(0.0, 1.0) } else { v });
        }
    }
    Ok(FeatureMatrix::new(selection.kept.clone(), x.rows(), data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_col(vals: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(vec!["a".into()], vals.len(), vals.to_vec())
    }

    fn sel() -> FeatureSelection {
        FeatureSelection { kept: vec!["a".into()] }
    }

    #[test]
    fn fit_examples() {
        let s = fit_scaler(&one_col(&[2.0, 4.0, 6.0]), &sel()).unwrap();
        assert_eq!((s.columns[0].min, s.columns[0].max), (2.0, 6.0));
        let s = fit_scaler(&one_col(&[5.0, 5.0]), &sel()).unwrap();
        assert_eq!((s.columns[0].min, s.columns[0].max), (5.0, 5.0));
        let s = fit_scaler(&one_col(&[-3.5]), &sel()).unwrap();
        assert_eq!((s.columns[0].min, s.columns[0].max), (-3.5, -3.5));
        assert!(fit_scaler(&one_col(&[]), &sel()).is_err());
    }

    #[test]
    fn transform_examples() {
        let x = one_col(&[2.0, 4.0, 6.0, 10.0, 0.0]);
        let s = ScalerParams { columns: vec![ScaledColumn { name: "a".into(), min: 2.0, max: 6.0 }], clamp: true };
        let t = transform(&x, &sel(), &s).unwrap();
        assert_eq!(t.data(), &[0.0, 0.5, 1.0, 1.0, 0.0]);

        let unclamped = ScalerParams { clamp: false, ..s };
        let t = transform(&x, &sel(), &unclamped).unwrap();
        assert_eq!(t.data()[3], 2.0);
        assert_eq!(t.data()[4], -0.5);

        let constant = ScalerParams { columns: vec![ScaledColumn { name: "a".into(), min: 5.0, max: 5.0 }], clamp: true };
        let t = transform(&one_col(&[5.0, 7.0, -1.0]), &sel(), &constant).unwrap();
        assert_eq!(t.data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn missing_column() {
        let s = fit_scaler(&one_col(&[1.0]), &sel()).unwrap();
        let other = FeatureMatrix::new(vec!["b".into()], 1, vec![1.0]);
        assert_eq!(transform(&other, &sel(), &s), Err(FeatureError::MissingColumn("a".into())));
    }

    #[test]
    fn kv_round_trip_is_bit_exact() {
        let s = ScalerParams {
            columns: vec![
                ScaledColumn { name: "a".into(), min: 0.1 + 0.2, max: 1e300 },
                ScaledColumn { name: "b".into(), min: -0.0, max: 3.0 },
            ],
            clamp: false,
        };
        let back = ScalerParams::from_kv(&KvDocument::parse(&s.to_kv().to_string()).unwrap()).unwrap();
        assert_eq!(back.columns[0].min.to_bits(), s.columns[0].min.to_bits());
        assert_eq!(back, s);
    }
}
