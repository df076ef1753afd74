mod common;

use common::{finite_difference, max_abs_diff, relative_error};
use qae::classical_ae::{ae_backward, ae_forward, ae_loss, init_weights, AeConfig, AeWeights};
use qae::qae::{
    init_params, param_circuit, qae_loss_and_grad, qae_training_loss, CircuitParams, QaeConfig,
};
use qae::simulator::{
    adjoint_gradient, param_shift_gradient, AngleBinding, ParamCircuit, ParamGate, TrashObservable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_binding(rng: &mut impl Rng, n_params: usize) -> AngleBinding {
    let mut b = AngleBinding::constant(rng.random_range(-1.0..1.0));
    for _ in 0..rng.random_range(0..3) {
        b.terms
            .push((rng.random_range(0..n_params), rng.random_range(-2.0..2.0)));
    }
    b
}

/// Circuits whose angles share parameters with arbitrary coefficients.
#[test]
fn shared_parameters_chain_correctly() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let n = rng.random_range(2..=4);
        let n_params = rng.random_range(1..8);
        let mut gates = Vec::new();
        for _ in 0..rng.random_range(1..4) {
            for q in 0..n {
                let angles = std::array::from_fn(|_| random_binding(&mut rng, n_params));
                gates.push(ParamGate::Rotation { qubit: q, angles });
            }
            gates.push(ParamGate::Cnot {
                control: n - 1,
                target: 0,
            });
        }
        let circuit = ParamCircuit {
            n_qubits: n,
            n_params,
            gates,
        };
        let obs = TrashObservable::new(vec![0, n - 1]);
        let params: Vec<f64> = (0..n_params).map(|_| rng.random_range(-3.0..3.0)).collect();

        let (f, adj) = adjoint_gradient(&circuit, &params, &obs).unwrap();
        assert!((f - circuit.expectation(&params, &obs).unwrap()).abs() < 1e-12);
        let shift = param_shift_gradient(&circuit, &params, &obs).unwrap();
        assert!(max_abs_diff(&adj, &shift) < 1e-10);
        let fd = finite_difference(&params, 1e-5, |p| circuit.expectation(p, &obs).unwrap());
        assert!(max_abs_diff(&adj, &fd) < 1e-8);
    }
}

fn qae_instance(seed: u64) -> (QaeConfig, CircuitParams, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = QaeConfig {
        n_qubits: 4,
        n_layers: 3,
        init_scale: 1.0,
        seed,
        reg_weights: 0.3,
        reg_bias: 0.1,
        ..QaeConfig::default()
    };
    let params = init_params(&config);
    let window: Vec<f64> = (0..rng.random_range(5..40)).map(|_| rng.random()).collect();
    (config, params, window)
}

#[test]
fn training_loss_gradient_includes_penalties() {
    for seed in 0..10 {
        let (config, params, window) = qae_instance(seed);
        let (loss, grad) = qae_loss_and_grad(&window, &params, &config).unwrap();
        assert!((loss - qae_training_loss(&window, &params, &config).unwrap()).abs() < 1e-12);
        let fd = finite_difference(params.as_slice(), 1e-5, |p| {
            let n = p.len() / 2;
            let cp = CircuitParams::from_parts(&config, p[..n].to_vec(), p[n..].to_vec()).unwrap();
            qae_training_loss(&window, &cp, &config).unwrap()
        });
        assert!(relative_error(&grad, &fd) < 1e-6, "seed {seed}");
    }
}

#[test]
fn bound_circuit_matches_model_gradient_without_penalties() {
    for seed in 0..5 {
        let (mut config, params, window) = qae_instance(seed);
        config.reg_weights = 0.0;
        config.reg_bias = 0.0;
        let (_, grad) = qae_loss_and_grad(&window, &params, &config).unwrap();
        let circuit = param_circuit(&window, &config).unwrap();
        let (_, adj) = adjoint_gradient(&circuit, params.as_slice(), &config.observable()).unwrap();
        assert!(max_abs_diff(&grad, &adj) < 1e-13);
    }
}

#[test]
fn autoencoder_backprop_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let shapes: [(usize, &[usize]); 12] = [
        (2, &[1]),
        (3, &[2]),
        (5, &[3]),
        (6, &[4, 2]),
        (8, &[5, 3]),
        (10, &[16, 8]),
        (7, &[3, 2, 1]),
        (12, &[6]),
        (9, &[9, 4]),
        (4, &[8, 8, 2]),
        (15, &[7, 3]),
        (20, &[10, 5]),
    ];
    for (d, hidden) in shapes {
        let config = AeConfig {
            init_scale: 0.7,
            seed: rng.random(),
            ..AeConfig::new(d, hidden.to_vec())
        };
        let weights = init_weights(&config);
        let x: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let (loss, grad) = ae_backward(&x, &weights).unwrap();
        assert!((loss - ae_loss(&x, &ae_forward(&x, &weights).unwrap()).unwrap()).abs() < 1e-14);
        let fd = finite_difference(weights.as_slice(), 1e-6, |p| {
            let w = AeWeights::from_values(&config, p.to_vec()).unwrap();
            ae_loss(&x, &ae_forward(&x, &w).unwrap()).unwrap()
        });
        // ReLU kinks are measure-zero; random weights keep pre-activations off zero
        assert!(max_abs_diff(&grad, &fd) < 1e-7, "shape {d} {hidden:?}");
    }
}
