use serde::{Deserialize, Serialize};

use super::NnError;

/// Weight-free description of one layer. Input widths are inferred from the
/// preceding layer's output shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d { filters: usize, kernel: usize },
    Relu,
    #[serde(rename = "maxpool1d")]
    MaxPool1d { pool: usize },
    Lstm { units: usize },
    Dense { units: usize },
    Dropout { rate: f64 },
    Sigmoid,
    Flatten,
}

impl LayerSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Conv1d { .. } => "conv1d",
            Self::Relu => "relu",
            Self::MaxPool1d { .. } => "maxpool1d",
            Self::Lstm { .. } => "lstm",
            Self::Dense { .. } => "dense",
            Self::Dropout { .. } => "dropout",
            Self::Sigmoid => "sigmoid",
            Self::Flatten => "flatten",
        }
    }

    /// Elementwise activations have no row of their own in a model summary.
    pub fn is_activation(&self) -> bool {
        matches!(self, Self::Relu | Self::Sigmoid)
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, NnError> {
        let bad = |what: &str| NnError::Shape(format!("{} {what}, input {input:?}", self.kind_name()));
        match *self {
            Self::Conv1d { filters, kernel } => match input {
                [l, _] if filters > 0 && kernel % 2 == 1 => Ok(vec![*l, filters]),
                _ => Err(bad("needs [L, C] input, odd kernel, filters > 0")),
            },
            Self::MaxPool1d { pool } => match input {
                [l, c] if pool > 0 && *l >= pool => Ok(vec![l / pool, *c]),
                _ => Err(bad("needs [L >= pool, C] input")),
            },
            Self::Lstm { units } => match input {
                [t, _] if *t > 0 && units > 0 => Ok(vec![units]),
                _ => Err(bad("needs [T, C] input")),
            },
            Self::Dense { units } => match input {
                [_] if units > 0 => Ok(vec![units]),
                _ => Err(bad("needs 1-D input")),
            },
            Self::Dropout { rate } => {
                if (0.0..1.0).contains(&rate) {
                    Ok(input.to_vec())
                } else {
                    Err(bad("rate must be in [0, 1)"))
                }
            }
            Self::Relu | Self::Sigmoid => Ok(input.to_vec()),
            Self::Flatten => Ok(vec![input.iter().product()]),
        }
    }

    /// Parameter tensor shapes for the given (already validated) input shape.
    pub fn param_shapes(&self, input: &[usize]) -> Vec<Vec<usize>> {
        match *self {
            Self::Conv1d { filters, kernel } => vec![vec![kernel, input[1], filters], vec![filters]],
            Self::Lstm { units } => vec![
                vec![input[1], 4 * units],
                vec![units, 4 * units],
                vec![4 * units],
            ],
            Self::Dense { units } => vec![vec![input[0], units], vec![units]],
            _ => Vec::new(),
        }
    }

    pub fn param_count(&self, input: &[usize]) -> usize {
        self.param_shapes(input).iter().map(|s| s.iter().product::<usize>()).sum()
    }
}

/// Shapes after each layer, failing on the first layer that cannot accept
/// its input.
pub fn shape_chain(input: &[usize], layers: &[LayerSpec]) -> Result<Vec<Vec<usize>>, NnError> {
    let mut shapes = Vec::with_capacity(layers.len());
    let mut cur = input.to_vec();
    for (i, l) in layers.iter().enumerate() {
        cur = l
            .output_shape(&cur)
            .map_err(|e| NnError::Shape(format!("layer {i}: {e}")))?;
        shapes.push(cur.clone());
    }
    Ok(shapes)
}
