use rand::distributions::{Distribution, Uniform};
use rand::Rng;

use super::activation::{
    apply_mask, dropout_mask, relu_backward, relu_forward, sigmoid_backward, sigmoid_forward,
};
use super::conv::Conv1d;
use super::dense::Dense;
use super::lstm::{Lstm, LstmCache};
use super::pool::{maxpool1d_backward, maxpool1d_forward};
use super::spec::{shape_chain, LayerSpec};
use super::tensor::{cst, Scalar, Tensor};
use super::NnError;

#[derive(Debug, Clone, PartialEq)]
pub enum Layer<T> {
    Conv1d(Conv1d<T>),
    Relu,
    MaxPool1d { pool: usize },
    Lstm(Lstm<T>),
    Dense(Dense<T>),
    Dropout { rate: f64 },
    Sigmoid,
    Flatten,
}

/// Forward intermediates a layer needs for its backward pass.
#[derive(Debug, Clone)]
pub enum Cache<T> {
    Input(Tensor<T>),
    Pool { argmax: Vec<usize>, input_shape: Vec<usize> },
    Lstm(LstmCache<T>),
    Dropout(Option<Vec<T>>),
    Output(Tensor<T>),
    Shape(Vec<usize>),
}

impl<T: Scalar> Layer<T> {
    pub fn params(&self) -> Vec<&Tensor<T>> {
        match self {
            Self::Conv1d(c) => vec![&c.weight, &c.bias],
            Self::Lstm(l) => vec![&l.w_input, &l.w_recurrent, &l.bias],
            Self::Dense(d) => vec![&d.weight, &d.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        match self {
            Self::Conv1d(c) => vec![&mut c.weight, &mut c.bias],
            Self::Lstm(l) => vec![&mut l.w_input, &mut l.w_recurrent, &mut l.bias],
            Self::Dense(d) => vec![&mut d.weight, &mut d.bias],
            _ => Vec::new(),
        }
    }

    fn from_params(spec: &LayerSpec, mut params: Vec<Tensor<T>>) -> Result<Self, NnError> {
        let mut next = || params.remove(0);
        Ok(match *spec {
            LayerSpec::Conv1d { .. } => Self::Conv1d(Conv1d::new(next(), next())?),
            LayerSpec::Lstm { .. } => Self::Lstm(Lstm::new(next(), next(), next())?),
            LayerSpec::Dense { .. } => Self::Dense(Dense::new(next(), next())?),
            LayerSpec::Relu => Self::Relu,
            LayerSpec::MaxPool1d { pool } => Self::MaxPool1d { pool },
            LayerSpec::Dropout { rate } => Self::Dropout { rate },
            LayerSpec::Sigmoid => Self::Sigmoid,
            LayerSpec::Flatten => Self::Flatten,
        })
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        match self {
            Self::Conv1d(c) => c.forward(x),
            Self::Relu => Ok(relu_forward(x)),
            Self::MaxPool1d { pool } => maxpool1d_forward(x, *pool).map(|(y, _)| y),
            Self::Lstm(l) => l.forward(x),
            Self::Dense(d) => d.forward(x),
            Self::Dropout { .. } => Ok(x.clone()),
            Self::Sigmoid => Ok(sigmoid_forward(x)),
            Self::Flatten => x.clone().reshape(vec![x.len()]),
        }
    }

    /// Training-mode forward. Dropout draws its mask from `rng`.
    pub fn forward_train<R: Rng + ?Sized>(&self, x: &Tensor<T>, rng: &mut R) -> Result<(Tensor<T>, Cache<T>), NnError> {
        Ok(match self {
            Self::Conv1d(c) => (c.forward(x)?, Cache::Input(x.clone())),
            Self::Relu => (relu_forward(x), Cache::Input(x.clone())),
            Self::MaxPool1d { pool } => {
                let (y, argmax) = maxpool1d_forward(x, *pool)?;
                (y, Cache::Pool { argmax, input_shape: x.shape().to_vec() })
            }
            Self::Lstm(l) => {
                let (y, c) = l.forward_cached(x)?;
                (y, Cache::Lstm(c))
            }
            Self::Dense(d) => (d.forward(x)?, Cache::Input(x.clone())),
            Self::Dropout { rate } => {
                if *rate == 0.0 {
                    (x.clone(), Cache::Dropout(None))
                } else {
                    let mask = dropout_mask(x.len(), *rate, rng);
                    (apply_mask(x, &mask)?, Cache::Dropout(Some(mask)))
                }
            }
            Self::Sigmoid => {
                let y = sigmoid_forward(x);
                (y.clone(), Cache::Output(y))
            }
            Self::Flatten => (x.clone().reshape(vec![x.len()])?, Cache::Shape(x.shape().to_vec())),
        })
    }

    /// Returns the input gradient and one gradient per parameter tensor.
    pub fn backward(&self, cache: &Cache<T>, grad: &Tensor<T>) -> Result<(Tensor<T>, Vec<Tensor<T>>), NnError> {
        let mismatch = || NnError::Cache(format!("cache does not belong to a {} layer", self.name()));
        Ok(match (self, cache) {
            (Self::Conv1d(c), Cache::Input(x)) => {
                let g = c.backward(x, grad)?;
                (g.input, vec![g.weight, g.bias])
            }
            (Self::Relu, Cache::Input(x)) => (relu_backward(x, grad)?, Vec::new()),
            (Self::MaxPool1d { .. }, Cache::Pool { argmax, input_shape }) => {
                (maxpool1d_backward(grad, argmax, input_shape)?, Vec::new())
            }
            (Self::Lstm(l), Cache::Lstm(c)) => {
                let g = l.backward(c, grad)?;
                (g.input, vec![g.w_input, g.w_recurrent, g.bias])
            }
            (Self::Dense(d), Cache::Input(x)) => {
                let g = d.backward(x, grad)?;
                (g.input, vec![g.weight, g.bias])
            }
            (Self::Dropout { .. }, Cache::Dropout(mask)) => match mask {
                Some(m) => (apply_mask(grad, m)?, Vec::new()),
                None => (grad.clone(), Vec::new()),
            },
            (Self::Sigmoid, Cache::Output(y)) => (sigmoid_backward(y, grad)?, Vec::new()),
            (Self::Flatten, Cache::Shape(s)) => (grad.clone().reshape(s.clone())?, Vec::new()),
            _ => return Err(mismatch()),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Conv1d(_) => "conv1d",
            Self::Relu => "relu",
            Self::MaxPool1d { .. } => "maxpool1d",
            Self::Lstm(_) => "lstm",
            Self::Dense(_) => "dense",
            Self::Dropout { .. } => "dropout",
            Self::Sigmoid => "sigmoid",
            Self::Flatten => "flatten",
        }
    }
}

/// Glorot-uniform fan sizes for a parameter tensor; biases are zero-filled.
fn glorot<T: Scalar, R: Rng + ?Sized>(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor<T> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit);
    let n = shape.iter().product();
    Tensor::raw(shape.to_vec(), (0..n).map(|_| cst(dist.sample(rng))).collect())
}

/// Sequential stack of layers with a fixed input shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    input_shape: Vec<usize>,
    specs: Vec<LayerSpec>,
    layers: Vec<Layer<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSummary {
    pub name: String,
    pub kind: &'static str,
    pub output_shape: Vec<usize>,
    pub params: usize,
}

impl<T: Scalar> Network<T> {
    /// Glorot-uniform weights, zero biases, LSTM forget-gate bias 1.
    pub fn init<R: Rng + ?Sized>(input_shape: &[usize], specs: &[LayerSpec], rng: &mut R) -> Result<Self, NnError> {
        let shapes = shape_chain(input_shape, specs)?;
        let mut layers = Vec::with_capacity(specs.len());
        let mut cur = input_shape.to_vec();
        for (spec, out) in specs.iter().zip(&shapes) {
            let ps = spec.param_shapes(&cur);
            let params = match *spec {
                LayerSpec::Conv1d { filters, kernel } => {
                    let cin = cur[1];
                    vec![glorot(&ps[0], kernel * cin, kernel * filters, rng), Tensor::zeros(&ps[1])]
                }
                LayerSpec::Lstm { units } => {
                    let mut bias = Tensor::zeros(&ps[2]);
                    bias.data_mut()[units..2 * units].iter_mut().for_each(|b| *b = T::one());
                    vec![
                        glorot(&ps[0], cur[1], 4 * units, rng),
                        glorot(&ps[1], units, 4 * units, rng),
                        bias,
                    ]
                }
                LayerSpec::Dense { units } => {
                    vec![glorot(&ps[0], cur[0], units, rng), Tensor::zeros(&ps[1])]
                }
                _ => Vec::new(),
            };
            layers.push(Layer::from_params(spec, params)?);
            cur = out.clone();
        }
        Ok(Self { input_shape: input_shape.to_vec(), specs: specs.to_vec(), layers })
    }

    /// Rebuilds a network from explicit parameter tensors in layer order.
    pub fn from_params(input_shape: &[usize], specs: &[LayerSpec], params: Vec<Tensor<T>>) -> Result<Self, NnError> {
        let expected = Self::expected_param_shapes(input_shape, specs)?;
        if expected.len() != params.len() {
            return Err(NnError::Shape(format!(
                "expected {} parameter tensors, got {}",
                expected.len(),
                params.len()
            )));
        }
        for (i, (e, p)) in expected.iter().zip(&params).enumerate() {
            if e.as_slice() != p.shape() {
                return Err(NnError::Shape(format!("parameter {i}: expected {e:?}, got {:?}", p.shape())));
            }
        }
        let mut it = params.into_iter();
        let mut cur = input_shape.to_vec();
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            let n = spec.param_shapes(&cur).len();
            layers.push(Layer::from_params(spec, it.by_ref().take(n).collect())?);
            cur = spec.output_shape(&cur)?;
        }
        Ok(Self { input_shape: input_shape.to_vec(), specs: specs.to_vec(), layers })
    }

    pub fn expected_param_shapes(input_shape: &[usize], specs: &[LayerSpec]) -> Result<Vec<Vec<usize>>, NnError> {
        let shapes = shape_chain(input_shape, specs)?;
        let mut out = Vec::new();
        let mut cur = input_shape.to_vec();
        for (spec, next) in specs.iter().zip(shapes) {
            out.extend(spec.param_shapes(&cur));
            cur = next;
        }
        Ok(out)
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn params(&self) -> Vec<&Tensor<T>> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn cast<U: Scalar>(&self) -> Network<U> {
        let params = self.params().into_iter().map(Tensor::cast).collect();
        Network::from_params(&self.input_shape, &self.specs, params).expect("same architecture")
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<(), NnError> {
        if x.shape() != self.input_shape.as_slice() {
            return Err(NnError::Shape(format!(
                "network expects {:?}, got {:?}",
                self.input_shape,
                x.shape()
            )));
        }
        if !x.is_finite() {
            return Err(NnError::NonFinite("network input".into()));
        }
        Ok(())
    }

    /// Inference forward pass: dropout is the identity.
    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        self.check_input(x)?;
        let mut cur = self.layers[0].forward(x)?;
        for (i, layer) in self.layers.iter().enumerate() {
            if i > 0 {
                cur = layer.forward(&cur)?;
            }
            if !cur.is_finite() {
                return Err(NnError::NonFinite(format!("output of layer {i} ({})", layer.name())));
            }
        }
        Ok(cur)
    }

    pub fn forward_train<R: Rng + ?Sized>(&self, x: &Tensor<T>, rng: &mut R) -> Result<(Tensor<T>, Vec<Cache<T>>), NnError> {
        self.check_input(x)?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let (y, c) = layer.forward_train(&cur, rng)?;
            if !y.is_finite() {
                return Err(NnError::NonFinite(format!("output of layer {i} ({})", layer.name())));
            }
            caches.push(c);
            cur = y;
        }
        Ok((cur, caches))
    }

    /// Backward pass from `grad_out` through every layer. Returns the input
    /// gradient and parameter gradients aligned with [`Network::params`].
    pub fn backward(&self, caches: &[Cache<T>], grad_out: &Tensor<T>) -> Result<(Tensor<T>, Vec<Tensor<T>>), NnError> {
        self.backward_from(self.layers.len(), caches, grad_out)
    }

    /// Like [`Network::backward`] but starting below layer `end`, i.e. with
    /// `grad_out` being the gradient of layer `end - 1`'s output.
    pub fn backward_from(&self, end: usize, caches: &[Cache<T>], grad_out: &Tensor<T>) -> Result<(Tensor<T>, Vec<Tensor<T>>), NnError> {
        if caches.len() != self.layers.len() || end > self.layers.len() {
            return Err(NnError::Cache("cache count does not match network".into()));
        }
        let mut per_layer: Vec<Vec<Tensor<T>>> = vec![Vec::new(); self.layers.len()];
        let mut g = grad_out.clone();
        for i in (0..end).rev() {
            let (gx, gp) = self.layers[i].backward(&caches[i], &g)?;
            per_layer[i] = gp;
            g = gx;
        }
        // Layers above `end` contribute zero gradients.
        for i in end..self.layers.len() {
            per_layer[i] = self.layers[i].params().iter().map(|p| Tensor::zeros(p.shape())).collect();
        }
        Ok((g, per_layer.into_iter().flatten().collect()))
    }

    /// Per-layer summary rows, named in the `<kind>_<n>` convention.
    pub fn summary(&self) -> Vec<LayerSummary> {
        summarize(&self.input_shape, &self.specs).expect("network specs are validated")
    }
}

pub fn summarize(input_shape: &[usize], specs: &[LayerSpec]) -> Result<Vec<LayerSummary>, NnError> {
    let shapes = shape_chain(input_shape, specs)?;
    let mut counters = std::collections::HashMap::new();
    let mut cur = input_shape.to_vec();
    let mut rows = Vec::with_capacity(specs.len());
    for (spec, out) in specs.iter().zip(shapes) {
        let prefix = match spec {
            LayerSpec::MaxPool1d { .. } => "max_pooling1d",
            other => other.kind_name(),
        };
        let n = counters.entry(prefix).or_insert(0);
        *n += 1;
        rows.push(LayerSummary {
            name: format!("{prefix}_{n}"),
            kind: spec.kind_name(),
            output_shape: out.clone(),
            params: spec.param_count(&cur),
        });
        cur = out;
    }
    Ok(rows)
}
