//! The whole pipeline on a synthetic three-channel series with injected
//! level shifts in the test half.

use qae::eval::{compute_threshold, evaluate, violin_summary, ScoreSet};
use qae::pipeline::{
    drop_anomalous_train_windows, fit_scaler, make_windows, split_series, MtsRecord, Split,
    WindowSet,
};
use qae::train::{score_windows, train_model};
use qae::{AeConfig, AeModel, Execution, Model, QaeConfig, QaeModel, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic() -> MtsRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = 1200;
    let mut values = Vec::with_capacity(t * 3);
    let mut labels = vec![0u8; t];
    for (i, label) in labels.iter_mut().enumerate() {
        let phase = i as f64 * 0.2;
        let mut row = [phase.sin(), (0.5 * phase).cos(), (phase + 1.0).sin() * 0.5];
        if i >= 600 && (i / 60) % 3 == 0 {
            row[0] += 2.5;
            row[2] -= 1.5;
            *label = 1;
        }
        for v in row {
            values.push(v + 0.05 * rng.random::<f64>());
        }
    }
    MtsRecord::new(values, 3, Some(labels)).unwrap()
}

fn prepared() -> (WindowSet, WindowSet) {
    let (train, test) = split_series(&synthetic(), 0.5, 10).unwrap();
    let scaler = fit_scaler(&train);
    let train = make_windows(&scaler.apply(&train).unwrap(), 10, 5, Split::Train).unwrap();
    let test = make_windows(&scaler.apply(&test).unwrap(), 10, 5, Split::Test).unwrap();
    (drop_anomalous_train_windows(&train).unwrap(), test)
}

fn run<M: Model>(model: &mut M, train: &WindowSet, test: &WindowSet, cfg: &TrainConfig) -> f64 {
    let history = train_model(model, train, cfg, Execution::default()).unwrap();
    assert!(history.epoch_losses.last().unwrap() < &history.epoch_losses[0]);
    let train_scores = score_windows(model, train, Execution::default()).unwrap();
    let test_scores = score_windows(model, test, Execution::default()).unwrap();
    let threshold = compute_threshold(&train_scores, 95.0).unwrap();
    let report = evaluate(test.labels(), &test_scores, threshold).unwrap();
    let violins = violin_summary(&ScoreSet::standard_groups(
        &train_scores,
        &test_scores,
        test.labels(),
    ));
    assert_eq!(violins.len(), 3);
    report.auc.unwrap()
}

#[test]
fn autoencoder_separates_level_shifts() {
    let (train, test) = prepared();
    assert!(test.n_anomalous() > 0 && test.n_anomalous() < test.len());
    let mut model = AeModel::new(AeConfig {
        init_scale: 0.3,
        ..AeConfig::new(train.dim(), vec![8, 4])
    })
    .unwrap();
    let cfg = TrainConfig {
        epochs: 150,
        batch_size: 16,
        learning_rate: 1e-2,
        ..TrainConfig::default()
    };
    let auc = run(&mut model, &train, &test, &cfg);
    assert!(auc > 0.9, "AUC {auc}");
}

#[test]
fn quantum_model_trains_and_scores() {
    let (train, test) = prepared();
    let mut model = QaeModel::new(QaeConfig {
        n_qubits: 4,
        n_layers: 8,
        init_scale: 0.1,
        ..QaeConfig::default()
    })
    .unwrap();
    let cfg = TrainConfig {
        epochs: 20,
        batch_size: 16,
        learning_rate: 2e-2,
        ..TrainConfig::default()
    };
    let auc = run(&mut model, &train, &test, &cfg);
    assert!((0.0..=1.0).contains(&auc));
}

#[test]
fn execution_strategy_does_not_change_results() {
    let (train, _) = prepared();
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 7,
        learning_rate: 1e-2,
        patience: 3,
        ..TrainConfig::default()
    };
    let config = QaeConfig {
        n_qubits: 3,
        n_layers: 4,
        init_scale: 0.2,
        ..QaeConfig::default()
    };
    let mut a = QaeModel::new(config.clone()).unwrap();
    let mut b = QaeModel::new(config).unwrap();
    let ha = train_model(&mut a, &train, &cfg, Execution::Sequential).unwrap();
    let hb = train_model(&mut b, &train, &cfg, Execution::Parallel).unwrap();
    assert_eq!(ha, hb);
    assert_eq!(a.params, b.params);
}
