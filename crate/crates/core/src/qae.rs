//! Re-upload quantum autoencoder.
//!
//! Each of the `L` layers applies a general rotation to every qubit, with
//! angles `w ∘ x + b` for a slice `x` of the input window, followed by a
//! linear CNOT chain `0→1→…→n-1`. The model output is the summed probability
//! that the trash qubits read `|0⟩`; training pushes it towards zero (trash
//! qubits in `|1⟩`) on normal data, and the same value is the anomaly score.
//!
//! Angle slot `(l, q, r)` (layer, qubit, rotation axis) reads feature
//! `x[((l·n + q)·3 + r) mod D]`, so windows shorter than the `3·L·n` slots are
//! tiled cyclically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{
    adjoint_angle_gradient, run_circuit, AngleBinding, GateOp, ParamCircuit, ParamGate,
    TrashObservable, MAX_QUBITS,
};
use crate::train::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaeConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub trash_qubits: Vec<usize>,
    pub reg_weights: f64,
    pub reg_bias: f64,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for QaeConfig {
    fn default() -> Self {
        Self {
            n_qubits: 8,
            n_layers: 100,
            trash_qubits: vec![0, 1],
            reg_weights: 1e-2,
            reg_bias: 1e-4,
            init_scale: 1e-2,
            seed: 42,
        }
    }
}

impl QaeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return Err(Error::Config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        if self.n_layers == 0 {
            return Err(Error::Config("n_layers must be positive".into()));
        }
        if self.trash_qubits.is_empty() {
            return Err(Error::Config("trash qubit set is empty".into()));
        }
        if self.trash_qubits.len() >= self.n_qubits {
            return Err(Error::Config(format!(
                "{} trash qubits leave no latent qubits out of {}",
                self.trash_qubits.len(),
                self.n_qubits
            )));
        }
        let mut seen = vec![false; self.n_qubits];
        for &q in &self.trash_qubits {
            if q >= self.n_qubits {
                return Err(Error::Config(format!(
                    "trash qubit {q} out of range for {} qubits",
                    self.n_qubits
                )));
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::Config(format!("trash qubit {q} listed twice")));
            }
        }
        for (name, v) in [
            ("reg_weights", self.reg_weights),
            ("reg_bias", self.reg_bias),
            ("init_scale", self.init_scale),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    /// Number of angle slots, `3·L·n`.
    pub fn n_slots(&self) -> usize {
        self.n_layers * self.n_qubits * 3
    }

    pub fn observable(&self) -> TrashObservable {
        TrashObservable::new(self.trash_qubits.clone())
    }
}

/// Weights and biases of shape `L×n×3`, stored flat: all weights, then all
/// biases, each in `(layer, qubit, axis)` row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitParams {
    n_layers: usize,
    n_qubits: usize,
    values: Vec<f64>,
}

impl CircuitParams {
    pub fn zeros(config: &QaeConfig) -> Self {
        Self {
            n_layers: config.n_layers,
            n_qubits: config.n_qubits,
            values: vec![0.0; 2 * config.n_slots()],
        }
    }

    pub fn from_parts(config: &QaeConfig, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        let n = config.n_slots();
        if weights.len() != n || biases.len() != n {
            return Err(Error::Config(format!(
                "expected {n} weights and biases, got {} and {}",
                weights.len(),
                biases.len()
            )));
        }
        let mut values = weights;
        values.extend(biases);
        Ok(Self {
            n_layers: config.n_layers,
            n_qubits: config.n_qubits,
            values,
        })
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_slots(&self) -> usize {
        self.values.len() / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.values[..self.n_slots()]
    }

    pub fn biases(&self) -> &[f64] {
        &self.values[self.n_slots()..]
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        let n = self.n_slots();
        &mut self.values[..n]
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        let n = self.n_slots();
        &mut self.values[n..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn check(&self, config: &QaeConfig) -> Result<()> {
        if self.n_layers != config.n_layers || self.n_qubits != config.n_qubits {
            return Err(Error::Config(format!(
                "parameters are {}x{}x3, configuration expects {}x{}x3",
                self.n_layers, self.n_qubits, config.n_layers, config.n_qubits
            )));
        }
        Ok(())
    }
}

#[inline]
pub fn slot_index(n_qubits: usize, layer: usize, qubit: usize, axis: usize) -> usize {
    (layer * n_qubits + qubit) * 3 + axis
}

/// Cyclic tiling of the window onto the `L×n×3` angle slots.
pub fn map_features(window: &[f64], config: &QaeConfig) -> Result<Vec<f64>> {
    if window.is_empty() {
        return Err(Error::Input("empty window".into()));
    }
    let d = window.len();
    Ok((0..config.n_slots()).map(|s| window[s % d]).collect())
}

/// Gate list for one window: per layer, `n` rotations then the CNOT chain.
pub fn build_circuit(
    angle_inputs: &[f64],
    params: &CircuitParams,
    config: &QaeConfig,
) -> Result<Vec<GateOp>> {
    config.validate()?;
    params.check(config)?;
    if angle_inputs.len() != config.n_slots() {
        return Err(Error::Config(format!(
            "expected {} angle inputs, got {}",
            config.n_slots(),
            angle_inputs.len()
        )));
    }
    let n = config.n_qubits;
    let (w, b) = (params.weights(), params.biases());
    let mut gates = Vec::with_capacity(config.n_layers * (2 * n - 1));
    for l in 0..config.n_layers {
        for q in 0..n {
            let angle = |r: usize| {
                let s = slot_index(n, l, q, r);
                w[s] * angle_inputs[s] + b[s]
            };
            gates.push(GateOp::rotation(q, angle(0), angle(1), angle(2)));
        }
        for q in 0..n - 1 {
            gates.push(GateOp::cnot(q, q + 1));
        }
    }
    Ok(gates)
}

/// The same circuit with every angle bound to its weight and bias, over a
/// parameter vector laid out like [`CircuitParams::as_slice`].
pub fn param_circuit(window: &[f64], config: &QaeConfig) -> Result<ParamCircuit> {
    config.validate()?;
    let inputs = map_features(window, config)?;
    let n = config.n_qubits;
    let n_slots = config.n_slots();
    let mut gates = Vec::with_capacity(config.n_layers * (2 * n - 1));
    for l in 0..config.n_layers {
        for q in 0..n {
            let angles = std::array::from_fn(|r| {
                let s = slot_index(n, l, q, r);
                AngleBinding::affine(s, inputs[s], n_slots + s)
            });
            gates.push(ParamGate::Rotation { qubit: q, angles });
        }
        for q in 0..n - 1 {
            gates.push(ParamGate::Cnot {
                control: q,
                target: q + 1,
            });
        }
    }
    Ok(ParamCircuit {
        n_qubits: n,
        n_params: 2 * n_slots,
        gates,
    })
}

/// `⟨Z_s⟩` for each trash qubit, in configuration order.
pub fn trash_z_expectations(
    window: &[f64],
    params: &CircuitParams,
    config: &QaeConfig,
) -> Result<Vec<f64>> {
    let inputs = map_features(window, config)?;
    let gates = build_circuit(&inputs, params, config)?;
    let state = run_circuit(&gates, config.n_qubits)?;
    config
        .trash_qubits
        .iter()
        .map(|&q| state.z_expectation(q))
        .collect()
}

/// `f = Σ_{s∈S} (1 + ⟨Z_s⟩)/2`, in `[0, |S|]`. This is also the anomaly score.
pub fn qae_output(window: &[f64], params: &CircuitParams, config: &QaeConfig) -> Result<f64> {
    Ok(trash_z_expectations(window, params, config)?
        .iter()
        .map(|z| 0.5 * (1.0 + z))
        .sum())
}

/// `λ_w·mean(w²) + λ_b·mean(b²)`.
pub fn regularization(params: &CircuitParams, config: &QaeConfig) -> f64 {
    let mean_sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    config.reg_weights * mean_sq(params.weights()) + config.reg_bias * mean_sq(params.biases())
}

pub fn qae_training_loss(
    window: &[f64],
    params: &CircuitParams,
    config: &QaeConfig,
) -> Result<f64> {
    Ok(qae_output(window, params, config)? + regularization(params, config))
}

/// Training loss and its gradient over the flat parameter vector.
pub fn qae_loss_and_grad(
    window: &[f64],
    params: &CircuitParams,
    config: &QaeConfig,
) -> Result<(f64, Vec<f64>)> {
    let inputs = map_features(window, config)?;
    let gates = build_circuit(&inputs, params, config)?;
    let (f, angle_grads) = adjoint_angle_gradient(&gates, config.n_qubits, &config.observable())?;

    let n_slots = config.n_slots();
    let mut grad = vec![0.0; 2 * n_slots];
    let (gw, gb) = grad.split_at_mut(n_slots);
    let d_angle = angle_grads.iter().flatten();
    for (s, &d) in d_angle.enumerate() {
        gw[s] = d * inputs[s];
        gb[s] = d;
    }
    let cw = 2.0 * config.reg_weights / n_slots as f64;
    let cb = 2.0 * config.reg_bias / n_slots as f64;
    for (g, w) in gw.iter_mut().zip(params.weights()) {
        *g += cw * w;
    }
    for (g, b) in gb.iter_mut().zip(params.biases()) {
        *g += cb * b;
    }
    Ok((f + regularization(params, config), grad))
}

/// `∂f/∂x` for the (unscaled) window features, summed over every slot the
/// feature is tiled into.
pub fn input_gradient(
    window: &[f64],
    params: &CircuitParams,
    config: &QaeConfig,
) -> Result<Vec<f64>> {
    let inputs = map_features(window, config)?;
    let gates = build_circuit(&inputs, params, config)?;
    let (_, angle_grads) = adjoint_angle_gradient(&gates, config.n_qubits, &config.observable())?;
    let mut grad = vec![0.0; window.len()];
    for (s, (&d, &w)) in angle_grads
        .iter()
        .flatten()
        .zip(params.weights())
        .enumerate()
    {
        grad[s % window.len()] += w * d;
    }
    Ok(grad)
}

/// Near-zero Gaussian initialization, `N(0, init_scale²)` per entry,
/// weights drawn before biases from a ChaCha8 stream seeded by `config.seed`.
pub fn init_params(config: &QaeConfig) -> CircuitParams {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = CircuitParams::zeros(config);
    for v in params.as_mut_slice() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v = config.init_scale * z;
    }
    params
}

/// Reported parameter count: the multiplicative weights only, `L·n·3`.
pub fn count_qae_params(config: &QaeConfig) -> usize {
    config.n_slots()
}

/// A configured circuit with its current parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct QaeModel {
    pub config: QaeConfig,
    pub params: CircuitParams,
}

impl QaeModel {
    pub fn new(config: QaeConfig) -> Result<Self> {
        config.validate()?;
        let params = init_params(&config);
        Ok(Self { config, params })
    }

    pub fn with_params(config: QaeConfig, params: CircuitParams) -> Result<Self> {
        config.validate()?;
        params.check(&config)?;
        Ok(Self { config, params })
    }
}

impl Model for QaeModel {
    fn params(&self) -> &[f64] {
        self.params.as_slice()
    }

    fn params_mut(&mut self) -> &mut [f64] {
        self.params.as_mut_slice()
    }

    fn loss_and_grad(&self, window: &[f64]) -> Result<(f64, Vec<f64>)> {
        qae_loss_and_grad(window, &self.params, &self.config)
    }

    fn loss(&self, window: &[f64]) -> Result<f64> {
        qae_training_loss(window, &self.params, &self.config)
    }

    fn score(&self, window: &[f64]) -> Result<f64> {
        qae_output(window, &self.params, &self.config)
    }
}
