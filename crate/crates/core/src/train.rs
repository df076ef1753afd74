//! Mini-batch training shared by the quantum and classical autoencoders.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pipeline::WindowSet;

/// A model trained by minimizing a per-window loss over a flat parameter vector.
pub trait Model: Sync {
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    /// Training loss of one window and its gradient.
    fn loss_and_grad(&self, window: &[f64]) -> Result<(f64, Vec<f64>)>;
    fn loss(&self, window: &[f64]) -> Result<f64>;
    /// Anomaly score of one window; larger means more anomalous.
    fn score(&self, window: &[f64]) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub early_stop_threshold: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            learning_rate: 1e-3,
            early_stop_threshold: 1e-5,
            patience: 10,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.patience == 0 {
            return Err(Error::Config("patience must be positive".into()));
        }
        if self.epochs > 0 && self.patience > self.epochs {
            return Err(Error::Config(format!(
                "patience {} exceeds epochs {}",
                self.patience, self.epochs
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.early_stop_threshold.is_finite() && self.early_stop_threshold >= 0.0) {
            return Err(Error::Config(
                "early_stop_threshold must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Moment estimates of the Adam optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Input(format!(
            "adam shapes disagree: {} params, {} grads, {} moments",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxEpochs,
    EarlyStop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean batch loss of each completed epoch.
    pub epoch_losses: Vec<f64>,
    pub stopped_epoch: usize,
    pub stop_reason: StopReason,
}

impl TrainHistory {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("epoch,loss\n");
        for (i, l) in self.epoch_losses.iter().enumerate() {
            out.push_str(&format!("{},{l}\n", i + 1));
        }
        crate::report::write_text(path, &out)
    }
}

/// Trains `model` on normal windows with seeded per-epoch shuffling.
///
/// Early stopping watches the training loss: the run ends once `patience`
/// consecutive epochs fail to beat the best loss so far by more than
/// `early_stop_threshold`. The last partial batch is kept.
pub fn train_model<M: Model>(
    model: &mut M,
    data: &WindowSet,
    config: &TrainConfig,
    exec: Execution,
) -> Result<TrainHistory> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Dataset("no training windows".into()));
    }
    if data.n_anomalous() > 0 {
        return Err(Error::Contract(format!(
            "{} anomalous windows in training data",
            data.n_anomalous()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = AdamState::new(model.params().len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = TrainHistory {
        epoch_losses: Vec::new(),
        stopped_epoch: 0,
        stop_reason: StopReason::MaxEpochs,
    };
    let mut best = f64::INFINITY;
    let mut stale = 0;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut batch_losses = Vec::new();
        for batch in order.chunks(config.batch_size) {
            let windows: Vec<&[f64]> = batch.iter().map(|&i| data.window(i)).collect();
            let (loss, grad) = batch_loss_and_grad(model, &windows, exec)?;
            adam_step(model.params_mut(), &grad, &mut adam, config.learning_rate)?;
            batch_losses.push(loss);
        }
        let epoch_loss = batch_losses.iter().sum::<f64>() / batch_losses.len() as f64;
        history.epoch_losses.push(epoch_loss);
        history.stopped_epoch = epoch;
        log::debug!("epoch {epoch}: loss {epoch_loss:.6e}");

        if best - epoch_loss > config.early_stop_threshold {
            best = epoch_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                history.stop_reason = StopReason::EarlyStop;
                break;
            }
        }
    }
    Ok(history)
}

/// Mean loss and mean gradient over a batch. Per-window results are summed
/// in batch order, so the outcome does not depend on the execution strategy.
pub fn batch_loss_and_grad<M: Model>(
    model: &M,
    windows: &[&[f64]],
    exec: Execution,
) -> Result<(f64, Vec<f64>)> {
    let parts = exec.map(windows, |w| model.loss_and_grad(w));
    let mut grad = vec![0.0; model.params().len()];
    let mut loss = 0.0;
    for part in parts {
        let (l, g) = part?;
        loss += l;
        for (acc, v) in grad.iter_mut().zip(&g) {
            *acc += v;
        }
    }
    let n = windows.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

/// Anomaly score of every window, in order.
pub fn score_windows<M: Model>(model: &M, data: &WindowSet, exec: Execution) -> Result<Vec<f64>> {
    let windows: Vec<&[f64]> = data.windows().collect();
    exec.map(&windows, |w| model.score(w)).into_iter().collect()
}

/// Mean training loss over a window set.
pub fn mean_loss<M: Model>(model: &M, data: &WindowSet, exec: Execution) -> Result<f64> {
    let windows: Vec<&[f64]> = data.windows().collect();
    let losses: Result<Vec<f64>> = exec.map(&windows, |w| model.loss(w)).into_iter().collect();
    let losses = losses?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}
