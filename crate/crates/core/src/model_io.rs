//! Plain-text parameter files.
//!
//! ```text
//! qae-params v1
//! kind qae
//! n_qubits 8
//! n_layers 100
//! trash 0,1
//! seed 42
//! reg_weights 1e-2
//! reg_bias 1e-4
//! init_scale 1e-2
//! weights 2400
//! <one value per line, (layer, qubit, axis) row-major>
//! biases 2400
//! <one value per line>
//! ```
//!
//! Autoencoders use `kind ae` with `input_dim`, `hidden` (comma separated),
//! `seed` and `init_scale`, then `params <count>` followed by the flat
//! parameter vector (per layer: weight matrix row-major, then bias).
//! Values are written in shortest round-trip form, so loading reproduces the
//! saved model exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::classical_ae::{AeConfig, AeModel, AeWeights};
use crate::error::{Error, Result};
use crate::qae::{CircuitParams, QaeConfig, QaeModel};

const MAGIC: &str = "qae-params v1";

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Qae(QaeModel),
    Ae(AeModel),
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn push_values(out: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(out, "{name} {}", values.len());
    for v in values {
        let _ = writeln!(out, "{v:e}");
    }
}

pub fn to_text(model: &SavedModel) -> String {
    let mut out = format!("{MAGIC}\n");
    match model {
        SavedModel::Qae(m) => {
            let c = &m.config;
            let _ = write!(
                out,
                "kind qae\nn_qubits {}\nn_layers {}\ntrash {}\nseed {}\nreg_weights {:e}\nreg_bias {:e}\ninit_scale {:e}\n",
                c.n_qubits,
                c.n_layers,
                join(&c.trash_qubits),
                c.seed,
                c.reg_weights,
                c.reg_bias,
                c.init_scale
            );
            push_values(&mut out, "weights", m.params.weights());
            push_values(&mut out, "biases", m.params.biases());
        }
        SavedModel::Ae(m) => {
            let c = &m.config;
            let _ = write!(
                out,
                "kind ae\ninput_dim {}\nhidden {}\nseed {}\ninit_scale {:e}\n",
                c.input_dim,
                join(&c.hidden_sizes),
                c.seed,
                c.init_scale
            );
            push_values(&mut out, "params", m.weights.as_slice());
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| Error::Format("unexpected end of parameter file".into()))
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let (n, line) = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ => Err(Error::Format(format!(
                "line {n}: expected `{key} …`, found {line:?}"
            ))),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        v.parse()
            .map_err(|_| Error::Format(format!("cannot parse {key} value {v:?}")))
    }

    fn list(&mut self, key: &str) -> Result<Vec<usize>> {
        self.field(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("bad {key} entry {s:?}")))
            })
            .collect()
    }

    fn values(&mut self, key: &str) -> Result<Vec<f64>> {
        let n: usize = self.parsed(key)?;
        (0..n)
            .map(|_| {
                let (i, l) = self.next_line()?;
                l.parse()
                    .map_err(|_| Error::Format(format!("line {i}: bad value {l:?}")))
            })
            .collect()
    }
}

pub fn from_text(text: &str) -> Result<SavedModel> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, magic) = lines.next_line()?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "not a parameter file (header {magic:?})"
        )));
    }
    let model = match lines.field("kind")? {
        "qae" => {
            let config = QaeConfig {
                n_qubits: lines.parsed("n_qubits")?,
                n_layers: lines.parsed("n_layers")?,
                trash_qubits: lines.list("trash")?,
                seed: lines.parsed("seed")?,
                reg_weights: lines.parsed("reg_weights")?,
                reg_bias: lines.parsed("reg_bias")?,
                init_scale: lines.parsed("init_scale")?,
            };
            let weights = lines.values("weights")?;
            let biases = lines.values("biases")?;
            let params = CircuitParams::from_parts(&config, weights, biases)?;
            SavedModel::Qae(QaeModel::with_params(config, params)?)
        }
        "ae" => {
            let config = AeConfig {
                input_dim: lines.parsed("input_dim")?,
                hidden_sizes: lines.list("hidden")?,
                seed: lines.parsed("seed")?,
                init_scale: lines.parsed("init_scale")?,
            };
            let values = lines.values("params")?;
            let weights = AeWeights::from_values(&config, values)?;
            SavedModel::Ae(AeModel::with_weights(config, weights)?)
        }
        other => return Err(Error::Format(format!("unknown model kind {other:?}"))),
    };
    Ok(model)
}

pub fn save(path: &Path, model: &SavedModel) -> Result<()> {
    crate::report::write_text(path, &to_text(model))
}

pub fn load(path: &Path) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}
