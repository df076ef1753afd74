use std::path::{Path, PathBuf};

use anyhow::Context;
use log::info;
use qae::eval::{compute_threshold, evaluate, violin_summary, MetricsReport, ScoreSet};
use qae::model_io::{self, SavedModel};
use qae::pipeline::{
    make_windows, prepare_windows, read_windows, require_file, write_windows, Scaler, Split,
    WindowSet,
};
use qae::report::{
    metrics_csv_row, read_json, render_violin_svg, violin_density_csv, violin_summary_csv,
    write_json, write_text, BenchmarkTable, RunReport, METRICS_CSV_HEADER,
};
use qae::train::{score_windows, train_model, TrainHistory};
use qae::{AeModel, Execution, Model, QaeModel};
use serde::{Deserialize, Serialize};

use crate::config::{DatasetConfig, ModelKind, RunConfig};

/// Which model a command acts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    Qae,
    Ae(Vec<usize>),
}

impl ModelSpec {
    pub fn from_config(config: &RunConfig) -> Self {
        match config.model {
            ModelKind::Qae => ModelSpec::Qae,
            ModelKind::Ae => ModelSpec::Ae(config.ae.hidden_sizes.clone()),
        }
    }

    /// Directory and table name: `qae` or `ae-16-8`.
    pub fn tag(&self) -> String {
        match self {
            ModelSpec::Qae => "qae".into(),
            ModelSpec::Ae(h) => std::iter::once("ae".to_string())
                .chain(h.iter().map(usize::to_string))
                .collect::<Vec<_>>()
                .join("-"),
        }
    }

    /// The benchmark grid: QAE and three autoencoder sizes.
    pub fn grid() -> Vec<ModelSpec> {
        vec![
            ModelSpec::Qae,
            ModelSpec::Ae(vec![3]),
            ModelSpec::Ae(vec![16, 8]),
            ModelSpec::Ae(vec![256, 128]),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Dataset settings the cache was built from; a mismatch forces a rebuild.
    pub source: DatasetConfig,
    pub subset: String,
    pub window_len: usize,
    pub stride: usize,
    pub n_features: usize,
    pub train_steps: usize,
    pub test_steps: usize,
    /// Training windows before anomalous ones were dropped.
    pub train_windows_total: usize,
    pub train_windows: usize,
    pub test_windows: usize,
    pub test_anomalous: usize,
    pub scaler: Scaler,
}

pub struct Prepared {
    pub train: WindowSet,
    pub test: WindowSet,
    pub manifest: Manifest,
}

fn prepared_dir(config: &RunConfig, subset: &str) -> PathBuf {
    config.subset_dir(subset).join("prepared")
}

fn model_dir(config: &RunConfig, subset: &str, model: &ModelSpec) -> PathBuf {
    config.subset_dir(subset).join(model.tag())
}

/// Builds (or reuses) the windowed cache of one subset.
pub fn prepare(config: &RunConfig, subset: &str) -> anyhow::Result<Prepared> {
    let dir = prepared_dir(config, subset);
    let manifest_path = dir.join("manifest.json");
    if manifest_path.exists() {
        if let Ok(m) = read_json::<Manifest>(&manifest_path) {
            if m.source == config.dataset && m.subset == subset {
                if let Ok(p) = load_prepared(config, subset) {
                    info!("{subset}: prepared cache is current");
                    return Ok(p);
                }
            }
        }
    }

    let d = &config.dataset;
    let (train, test) = d
        .load(subset)
        .with_context(|| format!("loading subset {subset}"))?;
    let total = make_windows(&train, d.window_len, d.stride, Split::Train)?.len();
    let (train_w, test_w, scaler) = prepare_windows(&train, &test, d.window_len, d.stride)
        .with_context(|| format!("windowing subset {subset}"))?;
    let manifest = Manifest {
        source: d.clone(),
        subset: subset.to_string(),
        window_len: d.window_len,
        stride: d.stride,
        n_features: train.n_features(),
        train_steps: train.len(),
        test_steps: test.len(),
        train_windows_total: total,
        train_windows: train_w.len(),
        test_windows: test_w.len(),
        test_anomalous: test_w.n_anomalous(),
        scaler,
    };
    write_windows(&dir.join("train.win"), &train_w)?;
    write_windows(&dir.join("test.win"), &test_w)?;
    write_json(&manifest_path, &manifest)?;
    info!(
        "{subset}: {} train windows ({} before filtering), {} test windows ({} anomalous)",
        manifest.train_windows, total, manifest.test_windows, manifest.test_anomalous
    );
    Ok(Prepared {
        train: train_w,
        test: test_w,
        manifest,
    })
}

pub fn load_prepared(config: &RunConfig, subset: &str) -> anyhow::Result<Prepared> {
    let dir = prepared_dir(config, subset);
    let missing = || format!("no prepared data for {subset}; run `qae prepare` first");
    let manifest = read_json(&require_file(&dir.join("manifest.json")).with_context(missing)?)?;
    Ok(Prepared {
        train: read_windows(&require_file(&dir.join("train.win")).with_context(missing)?)?,
        test: read_windows(&require_file(&dir.join("test.win")).with_context(missing)?)?,
        manifest,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub percentile: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub model: String,
    pub n_params: usize,
    pub n_trainable: usize,
    pub history: TrainHistory,
}

fn build_model(
    config: &RunConfig,
    spec: &ModelSpec,
    input_dim: usize,
) -> anyhow::Result<SavedModel> {
    Ok(match spec {
        ModelSpec::Qae => SavedModel::Qae(QaeModel::new(config.qae.clone())?),
        ModelSpec::Ae(h) => SavedModel::Ae(AeModel::new(config.ae_config(input_dim, h))?),
    })
}

fn reported_params(model: &SavedModel) -> usize {
    match model {
        SavedModel::Qae(m) => qae::qae::count_qae_params(&m.config),
        SavedModel::Ae(m) => qae::classical_ae::count_ae_params(&m.config),
    }
}

fn fit(model: &mut SavedModel, data: &WindowSet, config: &RunConfig) -> qae::Result<TrainHistory> {
    let exec = Execution::default();
    match model {
        SavedModel::Qae(m) => train_model(m, data, &config.train, exec),
        SavedModel::Ae(m) => train_model(m, data, &config.train, exec),
    }
}

fn scores(model: &SavedModel, data: &WindowSet) -> qae::Result<Vec<f64>> {
    let exec = Execution::default();
    match model {
        SavedModel::Qae(m) => score_windows(m, data, exec),
        SavedModel::Ae(m) => score_windows(m, data, exec),
    }
}

fn n_trainable(model: &SavedModel) -> usize {
    match model {
        SavedModel::Qae(m) => m.params().len(),
        SavedModel::Ae(m) => m.params().len(),
    }
}

/// Trains one model on a prepared subset and stores its parameters,
/// history and train-score threshold.
pub fn train(config: &RunConfig, subset: &str, spec: &ModelSpec) -> anyhow::Result<PathBuf> {
    let data = load_prepared(config, subset)?;
    let mut model = build_model(config, spec, data.train.dim())?;
    info!(
        "{subset}/{}: training on {} windows",
        spec.tag(),
        data.train.len()
    );
    let history = fit(&mut model, &data.train, config)?;
    let train_scores = scores(&model, &data.train)?;
    let threshold = compute_threshold(&train_scores, config.eval.percentile)?;

    let dir = model_dir(config, subset, spec);
    model_io::save(&dir.join("params.txt"), &model)?;
    history.write_csv(&dir.join("history.csv"))?;
    write_json(
        &dir.join("threshold.json"),
        &ThresholdRecord {
            percentile: config.eval.percentile,
            threshold,
        },
    )?;
    write_json(
        &dir.join("train_summary.json"),
        &TrainSummary {
            model: spec.tag(),
            n_params: reported_params(&model),
            n_trainable: n_trainable(&model),
            history,
        },
    )?;
    Ok(dir)
}

fn scores_csv(train: &[f64], test: &[f64], labels: &[u8]) -> String {
    let mut out = String::from("split,index,label,score\n");
    for (i, s) in train.iter().enumerate() {
        out.push_str(&format!("train,{i},0,{s}\n"));
    }
    for (i, (s, l)) in test.iter().zip(labels).enumerate() {
        out.push_str(&format!("test,{i},{l},{s}\n"));
    }
    out
}

/// Scores the test windows with a trained model, applies its stored
/// threshold and writes the report, scores and violin data.
pub fn eval(config: &RunConfig, subset: &str, spec: &ModelSpec) -> anyhow::Result<MetricsReport> {
    let data = load_prepared(config, subset)?;
    let dir = model_dir(config, subset, spec);
    let params = require_file(&dir.join("params.txt")).with_context(|| {
        format!(
            "no trained {} model for {subset}; run `qae train` first",
            spec.tag()
        )
    })?;
    let model = model_io::load(&params)?;
    let threshold: ThresholdRecord = read_json(&require_file(&dir.join("threshold.json"))?)?;

    let train_scores = scores(&model, &data.train)?;
    let test_scores = scores(&model, &data.test)?;
    let metrics = evaluate(data.test.labels(), &test_scores, threshold.threshold)?;
    if metrics.auc.is_none() {
        log::warn!("{subset}: test labels hold a single class; AUC is undefined");
    }
    let violins = violin_summary(&ScoreSet::standard_groups(
        &train_scores,
        &test_scores,
        data.test.labels(),
    ));

    let report = RunReport {
        dataset: config.dataset.name.clone(),
        subset: subset.to_string(),
        model: spec.tag(),
        n_params: reported_params(&model),
        optimizer: format!("adam(lr={})", config.train.learning_rate),
        metrics: metrics.clone(),
        violins,
    };
    write_json(&dir.join("report.json"), &report)?;
    write_text(
        &dir.join("report.csv"),
        &format!(
            "{METRICS_CSV_HEADER}\n{}\n",
            metrics_csv_row(&report.dataset, subset, &report.model, &metrics)
        ),
    )?;
    write_text(
        &dir.join("scores.csv"),
        &scores_csv(&train_scores, &test_scores, data.test.labels()),
    )?;
    write_plots(&dir, &report)?;
    Ok(metrics)
}

fn write_plots(dir: &Path, report: &RunReport) -> anyhow::Result<()> {
    write_text(
        &dir.join("violin_summary.csv"),
        &violin_summary_csv(&report.violins),
    )?;
    write_text(
        &dir.join("violin_density.csv"),
        &violin_density_csv(&report.violins),
    )?;
    let title = format!("{} {} {}", report.dataset, report.subset, report.model);
    write_text(
        &dir.join("violin.svg"),
        &render_violin_svg(&report.violins, Some(report.metrics.threshold), &title),
    )?;
    Ok(())
}

/// Re-renders the violin files of an evaluated model from its report.
pub fn plot(config: &RunConfig, subset: &str, spec: &ModelSpec) -> anyhow::Result<PathBuf> {
    let dir = model_dir(config, subset, spec);
    let report: RunReport =
        read_json(&require_file(&dir.join("report.json")).with_context(|| {
            format!(
                "no report for {subset}/{}; run `qae eval` first",
                spec.tag()
            )
        })?)?;
    write_plots(&dir, &report)?;
    Ok(dir.join("violin.svg"))
}

/// The error chain on one line. Causes already spelled out by their parent
/// (as `qae::Error` does for i/o errors) are not repeated.
pub fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain().map(ToString::to_string) {
        if !out.ends_with(&cause) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&cause);
        }
    }
    out
}

/// Runs prepare, train and eval for every subset × grid model. Failing cells
/// are recorded in the table and the grid continues.
pub fn benchmark(config: &RunConfig) -> anyhow::Result<BenchmarkTable> {
    let grid = ModelSpec::grid();
    let subsets = config.dataset.subsets.clone();
    let mut table = BenchmarkTable::new(
        &config.dataset.name,
        grid.iter().map(ModelSpec::tag).collect(),
        subsets.clone(),
    );
    for subset in &subsets {
        if let Err(e) = prepare(config, subset) {
            log::error!("{subset}: {}", describe(&e));
            for spec in &grid {
                table.fail(&spec.tag(), subset, describe(&e));
            }
            continue;
        }
        for spec in &grid {
            let outcome = train(config, subset, spec).and_then(|_| eval(config, subset, spec));
            match outcome {
                Ok(m) => table.set(&spec.tag(), subset, m)?,
                Err(e) => {
                    log::error!("{subset}/{}: {}", spec.tag(), describe(&e));
                    table.fail(&spec.tag(), subset, describe(&e));
                }
            }
        }
    }
    let dir = config.out.join(&config.dataset.name);
    write_text(&dir.join("benchmark.csv"), &table.to_csv())?;
    write_json(&dir.join("benchmark.json"), &table)?;
    Ok(table)
}
