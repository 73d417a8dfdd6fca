//! Central finite-difference oracle for layer gradients.
//!
//! Everything here uses only forward passes; the analytic side comes from
//! `Network::backward` and is compared against it.

use nidt::nn::{bce_batch, LayerSpec, Network, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

/// Relative error; values whose magnitudes are both below 1e-6 are compared
/// absolutely instead, since relative error is meaningless there.
pub fn rel_err(a: f64, n: f64) -> f64 {
    let scale = a.abs().max(n.abs());
    if scale < 1e-6 {
        (a - n).abs()
    } else {
        (a - n).abs() / scale
    }
}

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng, scale: f64) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-scale..scale)).collect()).unwrap()
}

pub enum Objective {
    /// `L = sum(r * y)` for a fixed random `r`.
    Linear,
    /// Mean binary cross-entropy of the (probability) outputs against labels.
    Bce(Vec<u8>),
}

pub struct Report {
    pub max_err: f64,
    pub checked: usize,
}

/// Builds a one-or-more-layer network, randomizes every parameter (biases
/// included), and compares analytic gradients of the objective with respect
/// to the input and all parameters against central differences.
pub fn check(input_shape: &[usize], specs: &[LayerSpec], objective: Objective, seed: u64, input_scale: f64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::<f64>::init(input_shape, specs, &mut rng).unwrap();
    for p in net.params_mut() {
        let r = random_tensor(p.shape(), &mut rng, 0.5);
        p.data_mut().copy_from_slice(r.data());
    }
    let x = random_tensor(input_shape, &mut rng, input_scale);
    let out_shape = nidt::nn::shape_chain(input_shape, specs).unwrap().pop().unwrap();
    let r = random_tensor(&out_shape, &mut rng, 1.0);
    let dropout_seed = rng.gen::<u64>();

    let loss = |net: &Network<f64>, x: &Tensor<f64>| -> f64 {
        let mut drng = ChaCha8Rng::seed_from_u64(dropout_seed);
        let (y, _) = net.forward_train(x, &mut drng).unwrap();
        match &objective {
            Objective::Linear => y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum(),
            Objective::Bce(labels) => bce_batch(y.data(), labels).unwrap().0,
        }
    };

    let mut drng = ChaCha8Rng::seed_from_u64(dropout_seed);
    let (y, caches) = net.forward_train(&x, &mut drng).unwrap();
    let upstream = match &objective {
        Objective::Linear => r.clone(),
        Objective::Bce(labels) => {
            let (_, g) = bce_batch(y.data(), labels).unwrap();
            Tensor::new(y.shape().to_vec(), g).unwrap()
        }
    };
    let (gx, gparams) = net.backward(&caches, &upstream).unwrap();

    let mut max_err: f64 = 0.0;
    let mut checked = 0;

    for i in 0..x.len() {
        let mut xp = x.clone();
        xp.data_mut()[i] += STEP;
        let mut xm = x.clone();
        xm.data_mut()[i] -= STEP;
        let num = (loss(&net, &xp) - loss(&net, &xm)) / (2.0 * STEP);
        max_err = max_err.max(rel_err(gx.data()[i], num));
        checked += 1;
    }

    let n_params = net.params().len();
    for t in 0..n_params {
        for i in 0..net.params()[t].len() {
            let orig = net.params()[t].data()[i];
            net.params_mut()[t].data_mut()[i] = orig + STEP;
            let lp = loss(&net, &x);
            net.params_mut()[t].data_mut()[i] = orig - STEP;
            let lm = loss(&net, &x);
            net.params_mut()[t].data_mut()[i] = orig;
            let num = (lp - lm) / (2.0 * STEP);
            max_err = max_err.max(rel_err(gparams[t].data()[i], num));
            checked += 1;
        }
    }
    Report { max_err, checked }
}

/// Random binary labels, at least one of each class when `n >= 2`.
pub fn labels(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
    if n >= 2 {
        y[0] = 0;
        y[1] = 1;
    }
    y
}

/// One named layer-kind check over many seeds; returns the worst error.
pub struct Case {
    pub name: &'static str,
    pub input_shape: Vec<usize>,
    pub specs: Vec<LayerSpec>,
    pub bce_outputs: Option<usize>,
    pub input_scale: f64,
}

pub fn cases() -> Vec<Case> {
    vec![
        Case {
            name: "conv1d",
            input_shape: vec![6, 2],
            specs: vec![LayerSpec::Conv1d { filters: 3, kernel: 3 }],
            bce_outputs: None,
            input_scale: 1.0,
        },
        Case {
            name: "relu",
            input_shape: vec![10],
            specs: vec![LayerSpec::Relu],
            bce_outputs: None,
            input_scale: 1.0,
        },
        Case {
            name: "maxpool1d",
            input_shape: vec![8, 3],
            specs: vec![LayerSpec::MaxPool1d { pool: 2 }],
            bce_outputs: None,
            input_scale: 1.0,
        },
        Case {
            name: "lstm",
            input_shape: vec![4, 3],
            specs: vec![LayerSpec::Lstm { units: 2 }],
            bce_outputs: None,
            input_scale: 1.0,
        },
        Case {
            name: "dense",
            input_shape: vec![5],
            specs: vec![LayerSpec::Dense { units: 4 }],
            bce_outputs: None,
            input_scale: 1.0,
        },
        Case {
            name: "dropout-eval",
            input_shape: vec![7],
            specs: vec![LayerSpec::Dropout { rate: 0.0 }],
            bce_outputs: None,
            input_scale: 1.0,
        },
        Case {
            name: "dropout-train",
            input_shape: vec![7],
            specs: vec![LayerSpec::Dropout { rate: 0.5 }],
            bce_outputs: None,
            input_scale: 1.0,
        },
        Case {
            name: "sigmoid+bce",
            input_shape: vec![6],
            specs: vec![LayerSpec::Sigmoid],
            bce_outputs: Some(6),
            input_scale: 3.0,
        },
        Case {
            name: "stack",
            input_shape: vec![8, 1],
            specs: vec![
                LayerSpec::Conv1d { filters: 3, kernel: 3 },
                LayerSpec::Relu,
                LayerSpec::MaxPool1d { pool: 2 },
                LayerSpec::Lstm { units: 3 },
                LayerSpec::Dense { units: 4 },
                LayerSpec::Relu,
                LayerSpec::Dense { units: 1 },
                LayerSpec::Sigmoid,
            ],
            bce_outputs: Some(1),
            input_scale: 1.0,
        },
    ]
}

pub fn run_case(case: &Case, seed: u64) -> Report {
    let objective = match case.bce_outputs {
        Some(n) => Objective::Bce(labels(n, seed)),
        None => Objective::Linear,
    };
    check(&case.input_shape, &case.specs, objective, seed, case.input_scale)
}
