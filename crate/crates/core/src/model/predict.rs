use rayon::prelude::*;

use super::{Model, ModelError};
use crate::matrix::FeatureMatrix;
use crate::nn::Tensor;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

impl Model {
    /// Network input for one scaled feature row.
    pub fn input_tensor(&self, row: &[f64]) -> Result<Tensor<f32>, ModelError> {
        if row.len() != self.arch.input_features {
            return Err(ModelError::Shape(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.arch.input_features
            )));
        }
        let data = row.iter().map(|&v| v as f32).collect();
        Ok(Tensor::new(self.arch.input_shape(), data)?)
    }

    pub fn score_row(&self, row: &[f64]) -> Result<f32, ModelError> {
        let y = self.network.forward(&self.input_tensor(row)?)?;
        Ok(y.data()[0])
    }

    /// Attack probability per row, dropout disabled. Rows are scored
    /// independently, so the result does not depend on the thread count.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f32>, ModelError> {
        if x.cols() != self.arch.input_features {
            return Err(ModelError::Shape(format!(
                "matrix has {} columns, model expects {}",
                x.cols(),
                self.arch.input_features
            )));
        }
        (0..x.rows()).into_par_iter().map(|i| self.score_row(x.row(i))).collect()
    }

    /// Same as [`Model::predict_proba`] inside a pool of `threads` workers
    /// (`0` = all cores).
    pub fn predict_proba_threads(&self, x: &FeatureMatrix, threads: usize) -> Result<Vec<f32>, ModelError> {
        with_threads(threads, || self.predict_proba(x))?
    }
}

/// Runs `f` in a dedicated rayon pool of `threads` workers, or in the global
/// pool when `threads == 0`.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, ModelError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ModelError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// `score >= threshold` is an attack.
pub fn classify(scores: &[f32], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(f64::from(s) >= threshold)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build, Family};

    #[test]
    fn threshold_is_inclusive() {
        assert_eq!(classify(&[0.5, 0.49, 0.9], 0.5), vec![1, 0, 1]);
    }

    #[test]
    fn zeroed_output_layer_gives_half() {
        let mut m = build(Family::CnnLstm, 8, 0).unwrap();
        let mut params = m.network.params_mut();
        let n = params.len();
        params[n - 2].fill(0.0);
        params[n - 1].fill(0.0);
        let x = FeatureMatrix::new((0..8).map(|i| format!("f{i}")).collect(), 2, (0..16).map(|v| v as f64 / 16.0).collect());
        assert_eq!(m.predict_proba(&x).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn scores_in_range_and_pure() {
        let m = build(Family::Cnn, 8, 3).unwrap();
        let x = FeatureMatrix::new((0..8).map(|i| format!("f{i}")).collect(), 5, (0..40).map(|v| (v % 7) as f64 / 7.0).collect());
        let a = m.predict_proba(&x).unwrap();
        let b = m.predict_proba_threads(&x, 2).unwrap();
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|s| (0.0..=1.0).contains(s)));
        assert_eq!(a.iter().map(|s| s.to_bits()).collect::<Vec<_>>(), b.iter().map(|s| s.to_bits()).collect::<Vec<_>>());
        let wrong = FeatureMatrix::new(vec!["a".into()], 1, vec![0.0]);
        assert!(m.predict_proba(&wrong).is_err());
    }
}
