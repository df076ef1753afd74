//! Run configuration: a TOML file with flag overrides on top.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use qae::pipeline::{
    load_dataset, load_smd_machine, pasta_brand_columns, read_header, split_series, MtsRecord,
    Schema, SMD_FEATURE_COLUMNS,
};
use qae::{AeConfig, QaeConfig, TrainConfig};
use serde::{Deserialize, Serialize};

/// Where the raw series of one subset come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Source {
    /// `root/{train,test,test_label}/<subset>.txt`, native train/test split.
    Smd,
    /// One CSV holding every brand; the subset names the brand.
    Pasta { file: PathBuf },
    /// `root/<subset>.csv` with `timestamp,value,label` columns.
    Mscm,
    /// `root/<subset>.csv`.
    Csv {
        #[serde(default)]
        has_header: bool,
        #[serde(default)]
        label_column: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub name: String,
    pub root: PathBuf,
    pub source: Source,
    pub subsets: Vec<String>,
    /// Empty selects the source default.
    pub feature_columns: Vec<usize>,
    pub window_len: usize,
    pub stride: usize,
    /// Leading share of each series used for training, for sources without
    /// a native split.
    pub train_fraction: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            name: "smd".into(),
            root: PathBuf::from("data/ServerMachineDataset"),
            source: Source::Smd,
            subsets: (1..=8).map(|i| format!("machine-1-{i}")).collect(),
            feature_columns: SMD_FEATURE_COLUMNS.to_vec(),
            window_len: 100,
            stride: 50,
            train_fraction: 0.5,
        }
    }
}

impl DatasetConfig {
    /// Loads a subset and splits it into train and test series.
    pub fn load(&self, subset: &str) -> anyhow::Result<(MtsRecord, MtsRecord)> {
        let split = |record: MtsRecord| -> anyhow::Result<(MtsRecord, MtsRecord)> {
            Ok(split_series(&record, self.train_fraction, self.window_len)?)
        };
        let parts = match &self.source {
            Source::Smd => load_smd_machine(&self.root, subset, &self.feature_columns)?,
            Source::Pasta { file } => {
                let path = self.root.join(file);
                let header = read_header(&path)?;
                let (qty, promo) = pasta_brand_columns(&header, subset)?;
                let features = if self.feature_columns.is_empty() {
                    qty
                } else {
                    self.feature_columns.clone()
                };
                let schema = Schema::Pasta {
                    promo_columns: promo,
                };
                split(load_dataset(&path, &schema, &features)?)?
            }
            Source::Mscm => {
                let path = self.root.join(format!("{subset}.csv"));
                split(load_dataset(&path, &Schema::Mscm, &self.feature_columns)?)?
            }
            Source::Csv {
                has_header,
                label_column,
            } => {
                let path = self.root.join(format!("{subset}.csv"));
                let schema = Schema::GenericCsv {
                    has_header: *has_header,
                    label_column: *label_column,
                };
                split(load_dataset(&path, &schema, &self.feature_columns)?)?
            }
        };
        Ok(parts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AeSection {
    pub hidden_sizes: Vec<usize>,
    pub init_scale: f64,
}

impl Default for AeSection {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![16, 8],
            init_scale: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub percentile: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { percentile: 99.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qae,
    Ae,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub model: ModelKind,
    pub dataset: DatasetConfig,
    pub qae: QaeConfig,
    pub ae: AeSection,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            out: PathBuf::from("runs"),
            model: ModelKind::Qae,
            dataset: DatasetConfig::default(),
            qae: QaeConfig::default(),
            ae: AeSection::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

/// Flag values that replace file values when given.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dataset: Option<String>,
    pub subset: Option<String>,
    pub model: Option<ModelKind>,
    pub hidden: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub percentile: Option<f64>,
    pub epochs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> anyhow::Result<Self> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text)
                    .map_err(|e| qae::Error::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.dataset {
            self.dataset.name = v.clone();
        }
        if let Some(v) = &o.subset {
            self.dataset.subsets = vec![v.clone()];
        }
        if let Some(v) = o.model {
            self.model = v;
        }
        if let Some(v) = &o.hidden {
            self.ae.hidden_sizes = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.percentile {
            self.eval.percentile = v;
        }
        if let Some(v) = o.epochs {
            self.train.epochs = v;
            if v > 0 && self.train.patience > v {
                log::warn!(
                    "patience {} clamped to the {v} requested epochs",
                    self.train.patience
                );
                self.train.patience = v;
            }
        }
        // one seed drives every stochastic component
        self.qae.seed = self.seed;
        self.train.seed = self.seed;
    }

    fn validate(&self) -> anyhow::Result<()> {
        let d = &self.dataset;
        if d.name.is_empty() || d.name.contains(['/', '\\']) {
            bail!(qae::Error::Config(format!(
                "invalid dataset name {:?}",
                d.name
            )));
        }
        if d.subsets.is_empty() {
            bail!(qae::Error::Config("no subsets configured".into()));
        }
        if d.window_len == 0 || d.stride == 0 {
            bail!(qae::Error::Config(
                "window_len and stride must be positive".into()
            ));
        }
        if !(0.0..=100.0).contains(&self.eval.percentile) {
            bail!(qae::Error::Config(format!(
                "percentile {} is not in [0, 100]",
                self.eval.percentile
            )));
        }
        self.qae.validate()?;
        self.train.validate()?;
        Ok(())
    }

    pub fn ae_config(&self, input_dim: usize, hidden: &[usize]) -> AeConfig {
        AeConfig {
            seed: self.seed,
            init_scale: self.ae.init_scale,
            ..AeConfig::new(input_dim, hidden.to_vec())
        }
    }

    pub fn subset_dir(&self, subset: &str) -> PathBuf {
        self.out.join(&self.dataset.name).join(subset)
    }
}
