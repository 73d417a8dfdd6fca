use serde::{Deserialize, Serialize};

/// Dense row-major design matrix with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    names: Vec<String>,
    rows: usize,
    data: Vec<f64>,
}

/// 0 = normal, 1 = attack, in row order.
pub type LabelVector = Vec<u8>;

impl FeatureMatrix {
    /// Panics if `data.len() != rows * names.len()`.
    pub fn new(names: Vec<String>, rows: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * names.len(), "matrix data length");
        Self { names, rows, data }
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Self {
        let cols = names.len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "row width");
            data.extend_from_slice(r);
        }
        Self::new(names, rows.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols() + col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        let c = self.cols();
        self.data.iter().skip(col).step_by(c.max(1)).copied().take(self.rows)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// New matrix holding the given rows, in the given order.
    pub fn take_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols());
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self::new(self.names.clone(), idx.len(), data)
    }

    /// Multiplies one column in place.
    pub fn scale_column(&mut self, col: usize, factor: f64) {
        let c = self.cols();
        for r in 0..self.rows {
            self.data[r * c + col] *= factor;
        }
    }
}
