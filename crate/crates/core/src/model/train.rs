use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::predict::{classify, DEFAULT_THRESHOLD};
use super::{Model, ModelError};
use crate::matrix::FeatureMatrix;
use crate::nn::{bce, bce_logit_grad, Tensor};

/// Per-example gradients are summed in fixed groups of this size, then the
/// group sums are added in order. The grouping never depends on the thread
/// count, so parallel and sequential runs produce identical weights.
const GRAD_GROUP: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation-accuracy improvement before stopping.
    pub patience: usize,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 256,
            max_epochs: 50,
            patience: 5,
            dropout_rate: 0.5,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if !(self.lr > 0.0) {
            return bad("lr must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout rate must be in [0, 1)");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return bad("adam betas must be in [0, 1) and epsilon positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    /// Epoch whose weights were kept; `None` if no epoch ran.
    pub chosen_epoch: Option<usize>,
    pub wall_seconds: f64,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,train_acc,val_acc\n");
        for e in &self.epochs {
            s.push_str(&format!("{},{},{},{}\n", e.epoch, e.train_loss, e.train_acc, e.val_acc));
        }
        s
    }

    pub fn best_val_acc(&self) -> Option<f64> {
        let chosen = self.chosen_epoch?;
        self.epochs.iter().find(|e| e.epoch == chosen).map(|e| e.val_acc)
    }
}

/// A labeled, already selected and scaled dataset.
#[derive(Clone, Copy)]
pub struct Labeled<'a> {
    pub x: &'a FeatureMatrix,
    pub y: &'a [u8],
}

struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Vec<Vec<f32>>,
    v: Vec<Vec<f32>>,
}

impl Adam {
    fn new(cfg: &TrainConfig, shapes: &[usize]) -> Self {
        Self {
            lr: cfg.lr,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.epsilon,
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    fn update(&mut self, params: Vec<&mut Tensor<f32>>, grads: &[Tensor<f32>]) {
        self.step += 1;
        let b1 = self.beta1 as f32;
        let b2 = self.beta2 as f32;
        let c1 = (1.0 - self.beta1.powi(self.step)) as f32;
        let c2 = (1.0 - self.beta2.powi(self.step)) as f32;
        let lr = self.lr as f32;
        let eps = self.eps as f32;
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for (((w, &gi), mi), vi) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = b1 * *mi + (1.0 - b1) * gi;
                *vi = b2 * *vi + (1.0 - b2) * gi * gi;
                let mhat = *mi / c1;
                let vhat = *vi / c2;
                *w -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}

struct GroupResult {
    grads: Vec<Tensor<f32>>,
    loss: f64,
    correct: usize,
}

fn zero_grads(model: &Model) -> Vec<Tensor<f32>> {
    model.network.params().iter().map(|p| Tensor::zeros(p.shape())).collect()
}

/// Forward/backward for one group of examples, gradients scaled by
/// `1 / batch_len` so the group sums add up to the batch mean.
fn group_gradients(
    model: &Model,
    data: Labeled<'_>,
    rows: &[usize],
    positions: std::ops::Range<usize>,
    batch_len: usize,
    seed: u64,
    epoch: usize,
) -> Result<GroupResult, ModelError> {
    let net = &model.network;
    let last = net.layers().len() - 1;
    let mut acc = zero_grads(model);
    let mut loss = 0.0;
    let mut correct = 0;
    for (&row, pos) in rows.iter().zip(positions) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((epoch as u64) << 32) | pos as u64);
        let x = model.input_tensor(data.x.row(row))?;
        let (out, caches) = net.forward_train(&x, &mut rng)?;
        let p = out.data()[0];
        let y = data.y[row];
        loss += f64::from(bce(p, y)?);
        correct += usize::from(classify(&[p], DEFAULT_THRESHOLD)[0] == y);
        let dz = bce_logit_grad(p, y)? / batch_len as f32;
        let (_, grads) = net.backward_from(last, &caches, &Tensor::new(vec![1], vec![dz])?)?;
        for (a, g) in acc.iter_mut().zip(&grads) {
            a.add_assign(g);
        }
    }
    Ok(GroupResult { grads: acc, loss, correct })
}

fn accuracy(model: &Model, data: Labeled<'_>) -> Result<f64, ModelError> {
    let scores = model.predict_proba(data.x)?;
    let preds = classify(&scores, DEFAULT_THRESHOLD);
    let hits = preds.iter().zip(data.y).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / data.y.len() as f64)
}

fn check_data(model: &Model, d: Labeled<'_>, what: &str) -> Result<(), ModelError> {
    if d.x.rows() == 0 {
        return Err(ModelError::EmptyData(what.to_string()));
    }
    if d.x.rows() != d.y.len() {
        return Err(ModelError::Shape(format!("{what}: {} rows, {} labels", d.x.rows(), d.y.len())));
    }
    if d.x.cols() != model.input_features() {
        return Err(ModelError::Shape(format!(
            "{what}: {} columns, model expects {}",
            d.x.cols(),
            model.input_features()
        )));
    }
    if let Some(&bad) = d.y.iter().find(|&&v| v > 1) {
        return Err(ModelError::Config(format!("{what}: label {bad} is not binary")));
    }
    Ok(())
}

/// Mini-batch Adam training with per-epoch validation, early stopping, and
/// restoration of the best-validation-accuracy weights.
pub fn train(
    mut model: Model,
    train_data: Labeled<'_>,
    val_data: Labeled<'_>,
    config: &TrainConfig,
) -> Result<(Model, TrainReport), ModelError> {
    config.validate()?;
    model.set_dropout(config.dropout_rate)?;
    let start = Instant::now();
    let mut report = TrainReport::default();
    if config.max_epochs == 0 {
        return Ok((model, report));
    }
    check_data(&model, train_data, "training data")?;
    check_data(&model, val_data, "validation data")?;

    let sizes: Vec<usize> = model.network.params().iter().map(|p| p.len()).collect();
    let mut adam = Adam::new(config, &sizes);
    let mut order: Vec<usize> = (0..train_data.x.rows()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(u64::MAX);

    let mut best: Option<(f64, usize, Vec<Tensor<f32>>)> = None;
    let mut since_best = 0;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let batch_start = b * config.batch_size;
            let groups: Vec<GroupResult> = batch
                .par_chunks(GRAD_GROUP)
                .enumerate()
                .map(|(g, rows)| {
                    let from = batch_start + g * GRAD_GROUP;
                    group_gradients(&model, train_data, rows, from..from + rows.len(), batch.len(), config.seed, epoch)
                })
                .collect::<Result<_, _>>()?;
            let mut grads = zero_grads(&model);
            let mut batch_loss = 0.0;
            for g in &groups {
                for (a, t) in grads.iter_mut().zip(&g.grads) {
                    a.add_assign(t);
                }
                batch_loss += g.loss;
                correct += g.correct;
            }
            if !batch_loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(ModelError::Diverged { epoch, batch: b });
            }
            loss_sum += batch_loss;
            adam.update(model.network.params_mut(), &grads);
        }
        let n = train_data.x.rows() as f64;
        let val_acc = accuracy(&model, val_data)?;
        report.epochs.push(EpochStats {
            epoch,
            train_loss: loss_sum / n,
            train_acc: correct as f64 / n,
            val_acc,
        });
        if best.as_ref().map_or(true, |(acc, _, _)| val_acc > *acc) {
            best = Some((val_acc, epoch, model.network.params().into_iter().cloned().collect()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
    }

    if let Some((_, epoch, params)) = best {
        for (p, saved) in model.network.params_mut().into_iter().zip(params) {
            *p = saved;
        }
        report.chosen_epoch = Some(epoch);
    }
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok((model, report))
}
