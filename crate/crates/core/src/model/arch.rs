use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::nn::{shape_chain, LayerSpec, LayerSummary, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Dnn,
    Cnn,
    CnnLstm,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dnn => "dnn",
            Self::Cnn => "cnn",
            Self::CnnLstm => "cnn-lstm",
        }
    }

    fn is_convolutional(self) -> bool {
        !matches!(self, Self::Dnn)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "dnn" => Ok(Self::Dnn),
            "cnn" => Ok(Self::Cnn),
            "cnn-lstm" => Ok(Self::CnnLstm),
            other => Err(ModelError::Config(format!("unknown model family `{other}`"))),
        }
    }
}

pub const DEFAULT_INPUT_FEATURES: usize = 32;
pub const DEFAULT_DROPOUT: f64 = 0.5;

/// Three length-halving pools need at least this many input positions.
pub const MIN_CONV_INPUT: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub family: Family,
    pub input_features: usize,
    pub layers: Vec<LayerSpec>,
}

fn conv_block(filters: usize) -> [LayerSpec; 5] {
    [
        LayerSpec::Conv1d { filters, kernel: 3 },
        LayerSpec::Relu,
        LayerSpec::Conv1d { filters, kernel: 3 },
        LayerSpec::Relu,
        LayerSpec::MaxPool1d { pool: 2 },
    ]
}

fn dense_tail(dropout: f64) -> [LayerSpec; 8] {
    [
        LayerSpec::Dense { units: 256 },
        LayerSpec::Relu,
        LayerSpec::Dropout { rate: dropout },
        LayerSpec::Dense { units: 128 },
        LayerSpec::Relu,
        LayerSpec::Dropout { rate: dropout },
        LayerSpec::Dense { units: 1 },
        LayerSpec::Sigmoid,
    ]
}

impl ArchitectureSpec {
    /// The layer stack for `family`:
    ///
    /// * `CnnLstm`: conv(64) conv(64) pool conv(128) conv(128) pool
    ///   conv(256) conv(256) pool lstm(100) dense(256) dropout dense(128)
    ///   dropout dense(1, sigmoid)
    /// * `Cnn`: the same with the LSTM replaced by a flatten
    /// * `Dnn`: only the dense tail, on the flat input
    ///
    /// ReLU follows every conv and hidden dense layer.
    pub fn new(family: Family, input_features: usize, dropout: f64) -> Result<Self, ModelError> {
        if family.is_convolutional() && input_features < MIN_CONV_INPUT {
            return Err(ModelError::InputTooShort { family, input_features, min: MIN_CONV_INPUT });
        }
        if input_features == 0 {
            return Err(ModelError::InputTooShort { family, input_features, min: 1 });
        }
        let mut layers = Vec::new();
        if family.is_convolutional() {
            for filters in [64, 128, 256] {
                layers.extend(conv_block(filters));
            }
            layers.push(match family {
                Family::CnnLstm => LayerSpec::Lstm { units: 100 },
                _ => LayerSpec::Flatten,
            });
        }
        layers.extend(dense_tail(dropout));
        let spec = Self { family, input_features, layers };
        spec.validate()?;
        Ok(spec)
    }

    pub fn input_shape(&self) -> Vec<usize> {
        if self.family.is_convolutional() {
            vec![self.input_features, 1]
        } else {
            vec![self.input_features]
        }
    }

    /// Checks that consecutive layers compose and the output is one sigmoid
    /// probability.
    pub fn validate(&self) -> Result<(), ModelError> {
        let shapes = shape_chain(&self.input_shape(), &self.layers)?;
        if shapes.last().map(Vec::as_slice) != Some(&[1][..]) || self.layers.last() != Some(&LayerSpec::Sigmoid) {
            return Err(ModelError::Config("network must end in a single sigmoid unit".into()));
        }
        Ok(())
    }

    pub fn summary(&self) -> Vec<LayerSummary> {
        crate::nn::summarize(&self.input_shape(), &self.layers).expect("validated architecture")
    }

    pub fn param_count(&self) -> usize {
        self.summary().iter().map(|r| r.params).sum()
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        for l in &mut self.layers {
            if let LayerSpec::Dropout { rate: r } = l {
                *r = rate;
            }
        }
        self
    }
}

/// Architecture plus learned weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub arch: ArchitectureSpec,
    pub network: Network<f32>,
}

impl Model {
    pub fn from_parts(arch: ArchitectureSpec, network: Network<f32>) -> Result<Self, ModelError> {
        arch.validate()?;
        if network.specs() != arch.layers.as_slice() || network.input_shape() != arch.input_shape().as_slice() {
            return Err(ModelError::Config("network does not match architecture".into()));
        }
        Ok(Self { arch, network })
    }

    pub fn input_features(&self) -> usize {
        self.arch.input_features
    }

    /// Replaces every dropout rate, keeping the weights.
    pub fn set_dropout(&mut self, rate: f64) -> Result<(), ModelError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(ModelError::Config(format!("dropout rate {rate} outside [0, 1)")));
        }
        let arch = self.arch.clone().with_dropout(rate);
        let params = self.network.params().into_iter().cloned().collect();
        self.network = Network::from_params(&arch.input_shape(), &arch.layers, params)?;
        self.arch = arch;
        Ok(())
    }
}

/// Builds `family` with Glorot-uniform weights drawn from `seed`.
pub fn build(family: Family, input_features: usize, seed: u64) -> Result<Model, ModelError> {
    let arch = ArchitectureSpec::new(family, input_features, DEFAULT_DROPOUT)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let network = Network::init(&arch.input_shape(), &arch.layers, &mut rng)?;
    Ok(Model { arch, network })
}
