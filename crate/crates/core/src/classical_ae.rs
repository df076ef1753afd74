//! Fully connected autoencoder baseline.
//!
//! The decoder mirrors the encoder, so hidden sizes `[16, 8]` on a 500-wide
//! input give the layer chain `500→16→8→16→500`. Hidden layers use ReLU and
//! the output layer is linear. The reconstruction loss is the mean squared
//! error over input dimensions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::train::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeConfig {
    pub input_dim: usize,
    pub hidden_sizes: Vec<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_seed() -> u64 {
    42
}

fn default_init_scale() -> f64 {
    1e-2
}

impl AeConfig {
    pub fn new(input_dim: usize, hidden_sizes: Vec<usize>) -> Self {
        Self {
            input_dim,
            hidden_sizes,
            seed: default_seed(),
            init_scale: default_init_scale(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input_dim must be positive".into()));
        }
        let Some(&bottleneck) = self.hidden_sizes.last() else {
            return Err(Error::Config(
                "at least one hidden layer is required".into(),
            ));
        };
        if self.hidden_sizes.contains(&0) {
            return Err(Error::Config("hidden sizes must be positive".into()));
        }
        if bottleneck >= self.input_dim {
            return Err(Error::Config(format!(
                "bottleneck {bottleneck} is not smaller than input_dim {}",
                self.input_dim
            )));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::Config(
                "init_scale must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Widths from input to reconstruction, e.g. `[d, 16, 8, 16, d]`.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(2 * self.hidden_sizes.len() + 1);
        dims.push(self.input_dim);
        dims.extend(&self.hidden_sizes);
        dims.extend(self.hidden_sizes.iter().rev().skip(1));
        dims.push(self.input_dim);
        dims
    }

    /// Short tag like `ae-16-8`, used for directory and report names.
    pub fn tag(&self) -> String {
        let sizes: Vec<String> = self.hidden_sizes.iter().map(|h| h.to_string()).collect();
        format!("ae-{}", sizes.join("-"))
    }
}

/// Encoder and mirrored decoder parameters, flattened layer by layer as
/// `W` (row-major, `out × in`) followed by `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AeWeights {
    dims: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct LayerSpan {
    n_in: usize,
    n_out: usize,
    w: usize,
    b: usize,
}

impl AeWeights {
    pub fn zeros(config: &AeConfig) -> Self {
        let dims = config.layer_dims();
        let len = dims.windows(2).map(|p| p[0] * p[1] + p[1]).sum();
        Self {
            dims,
            values: vec![0.0; len],
        }
    }

    pub fn from_values(config: &AeConfig, values: Vec<f64>) -> Result<Self> {
        let mut w = Self::zeros(config);
        if values.len() != w.values.len() {
            return Err(Error::Config(format!(
                "expected {} autoencoder parameters, got {}",
                w.values.len(),
                values.len()
            )));
        }
        w.values = values;
        Ok(w)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn spans(&self) -> Vec<LayerSpan> {
        let mut offset = 0;
        self.dims
            .windows(2)
            .map(|p| {
                let span = LayerSpan {
                    n_in: p[0],
                    n_out: p[1],
                    w: offset,
                    b: offset + p[0] * p[1],
                };
                offset += p[0] * p[1] + p[1];
                span
            })
            .collect()
    }

    /// Weight matrix of layer `i`, row-major `out × in`.
    pub fn layer_weights(&self, i: usize) -> &[f64] {
        let s = self.spans()[i];
        &self.values[s.w..s.b]
    }

    pub fn layer_weights_mut(&mut self, i: usize) -> &mut [f64] {
        let s = self.spans()[i];
        &mut self.values[s.w..s.b]
    }

    pub fn layer_bias(&self, i: usize) -> &[f64] {
        let s = self.spans()[i];
        &self.values[s.b..s.b + s.n_out]
    }

    pub fn layer_bias_mut(&mut self, i: usize) -> &mut [f64] {
        let s = self.spans()[i];
        &mut self.values[s.b..s.b + s.n_out]
    }

    /// Pre-activations and activations of every layer; `acts[0]` is the input.
    fn forward_trace(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let spans = self.spans();
        let last = spans.len() - 1;
        let mut pre = Vec::with_capacity(spans.len());
        let mut acts = Vec::with_capacity(spans.len() + 1);
        acts.push(x.to_vec());
        for (i, s) in spans.iter().enumerate() {
            let input = &acts[i];
            let w = &self.values[s.w..s.b];
            let b = &self.values[s.b..s.b + s.n_out];
            let z: Vec<f64> = (0..s.n_out)
                .map(|o| {
                    let row = &w[o * s.n_in..(o + 1) * s.n_in];
                    b[o] + row.iter().zip(input).map(|(a, v)| a * v).sum::<f64>()
                })
                .collect();
            let a = if i == last {
                z.clone()
            } else {
                z.iter().map(|&v| v.max(0.0)).collect()
            };
            pre.push(z);
            acts.push(a);
        }
        (pre, acts)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dims[0] {
            return Err(Error::Config(format!(
                "input has {} features, network expects {}",
                x.len(),
                self.dims[0]
            )));
        }
        Ok(())
    }
}

pub fn init_weights(config: &AeConfig) -> AeWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w = AeWeights::zeros(config);
    for v in w.as_mut_slice() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v = config.init_scale * z;
    }
    w
}

/// Reconstruction `x′` of `x`.
pub fn ae_forward(x: &[f64], weights: &AeWeights) -> Result<Vec<f64>> {
    weights.check_input(x)?;
    let (_, mut acts) = weights.forward_trace(x);
    Ok(acts.pop().expect("at least one layer"))
}

/// Mean squared error between `x` and `x′`.
pub fn ae_loss(x: &[f64], reconstruction: &[f64]) -> Result<f64> {
    if x.len() != reconstruction.len() {
        return Err(Error::Input(format!(
            "length mismatch: {} vs {}",
            x.len(),
            reconstruction.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Input("empty vectors".into()));
    }
    Ok(x.iter()
        .zip(reconstruction)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / x.len() as f64)
}

/// Loss of `x` and its gradient over the flat parameter vector. The ReLU
/// derivative at zero is taken as zero.
pub fn ae_backward(x: &[f64], weights: &AeWeights) -> Result<(f64, Vec<f64>)> {
    weights.check_input(x)?;
    let (pre, acts) = weights.forward_trace(x);
    let out = acts.last().expect("at least one layer");
    let loss = ae_loss(x, out)?;
    let scale = 2.0 / x.len() as f64;
    let mut delta: Vec<f64> = out.iter().zip(x).map(|(o, t)| scale * (o - t)).collect();

    let spans = weights.spans();
    let mut grad = vec![0.0; weights.values.len()];
    for (i, s) in spans.iter().enumerate().rev() {
        let input = &acts[i];
        for o in 0..s.n_out {
            let d = delta[o];
            grad[s.b + o] = d;
            if d != 0.0 {
                let row = &mut grad[s.w + o * s.n_in..s.w + (o + 1) * s.n_in];
                for (g, v) in row.iter_mut().zip(input) {
                    *g = d * v;
                }
            }
        }
        if i > 0 {
            let w = &weights.values[s.w..s.b];
            let mut prev = vec![0.0; s.n_in];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (p, a) in prev.iter_mut().zip(&w[o * s.n_in..(o + 1) * s.n_in]) {
                    *p += a * d;
                }
            }
            for (p, z) in prev.iter_mut().zip(&pre[i - 1]) {
                if *z <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }
    Ok((loss, grad))
}

/// Reported parameter count: weight-matrix entries of encoder and decoder,
/// biases excluded.
pub fn count_ae_params(config: &AeConfig) -> usize {
    config.layer_dims().windows(2).map(|p| p[0] * p[1]).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeModel {
    pub config: AeConfig,
    pub weights: AeWeights,
}

impl AeModel {
    pub fn new(config: AeConfig) -> Result<Self> {
        config.validate()?;
        let weights = init_weights(&config);
        Ok(Self { config, weights })
    }

    pub fn with_weights(config: AeConfig, weights: AeWeights) -> Result<Self> {
        config.validate()?;
        if weights.dims != config.layer_dims() {
            return Err(Error::Config(
                "weights do not match the configured layer sizes".into(),
            ));
        }
        Ok(Self { config, weights })
    }
}

impl Model for AeModel {
    fn params(&self) -> &[f64] {
        self.weights.as_slice()
    }

    fn params_mut(&mut self) -> &mut [f64] {
        self.weights.as_mut_slice()
    }

    fn loss_and_grad(&self, window: &[f64]) -> Result<(f64, Vec<f64>)> {
        ae_backward(window, &self.weights)
    }

    fn loss(&self, window: &[f64]) -> Result<f64> {
        ae_loss(window, &ae_forward(window, &self.weights)?)
    }

    fn score(&self, window: &[f64]) -> Result<f64> {
        self.loss(window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrored_dims() {
        assert_eq!(
            AeConfig::new(500, vec![16, 8]).layer_dims(),
            vec![500, 16, 8, 16, 500]
        );
        assert_eq!(AeConfig::new(10, vec![3]).layer_dims(), vec![10, 3, 10]);
    }

    #[test]
    fn config_requires_bottleneck() {
        assert!(AeConfig::new(3, vec![3]).validate().is_err());
        assert!(AeConfig::new(3, vec![]).validate().is_err());
        assert!(AeConfig::new(3, vec![0]).validate().is_err());
        AeConfig::new(4, vec![8, 3]).validate().unwrap();
    }

    #[test]
    fn zero_network_reconstructs_zero() {
        let c = AeConfig::new(5, vec![2]);
        let out = ae_forward(&[1.0, 2.0, 3.0, 4.0, 5.0], &AeWeights::zeros(&c)).unwrap();
        assert_eq!(out, vec![0.0; 5]);
    }

    #[test]
    fn unit_identity_network() {
        // 1-1-1 is not a valid bottleneck config, so build the weights directly.
        let w = AeWeights {
            dims: vec![1, 1, 1],
            values: vec![1.0, 0.0, 1.0, 0.0],
        };
        assert_eq!(ae_forward(&[0.7], &w).unwrap(), vec![0.7]);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let c = AeConfig::new(5, vec![2]);
        assert!(matches!(
            ae_forward(&[1.0], &init_weights(&c)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn loss_examples() {
        assert_eq!(ae_loss(&[0.3, 0.2], &[0.3, 0.2]).unwrap(), 0.0);
        assert_eq!(ae_loss(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(ae_loss(&[0.0, 2.0], &[1.0, 0.0]).unwrap(), 2.5);
        assert!(matches!(ae_loss(&[0.0], &[1.0, 0.0]), Err(Error::Input(_))));
    }

    #[test]
    fn perfect_reconstruction_zeroes_output_gradients() {
        // x = [0.5, 0]: a single positive hidden unit copies x[0] through.
        let c = AeConfig::new(2, vec![1]);
        let w = AeWeights::from_values(&c, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let x = [0.5, 0.0];
        assert_eq!(ae_forward(&x, &w).unwrap(), x.to_vec());
        let (loss, g) = ae_backward(&x, &w).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dead_relu_unit_gets_no_gradient() {
        let c = AeConfig::new(3, vec![2]);
        let mut w = init_weights(&AeConfig {
            init_scale: 0.5,
            ..c.clone()
        });
        // hidden unit 1: negative bias, non-positive weights => never active on x ≥ 0
        w.layer_weights_mut(0)[3..6].copy_from_slice(&[-1.0, -1.0, -1.0]);
        w.layer_bias_mut(0)[1] = -0.5;
        let (_, g) = ae_backward(&[0.2, 0.9, 0.4], &w).unwrap();
        let first = AeWeights::from_values(&c, g).unwrap();
        assert!(first.layer_weights(0)[3..6].iter().all(|&v| v == 0.0));
        assert_eq!(first.layer_bias(0)[1], 0.0);
    }

    #[test]
    fn table_counts() {
        assert_eq!(count_ae_params(&AeConfig::new(500, vec![16, 8])), 16256);
        assert_eq!(count_ae_params(&AeConfig::new(10, vec![3])), 60);
        assert_eq!(count_ae_params(&AeConfig::new(420, vec![3])), 2520);
    }
}
