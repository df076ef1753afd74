//! Dataset ingestion and preprocessing: CSV loading, contiguous train/test
//! splits, min-max scaling with clipping, sliding windows with window-wise
//! labels, and removal of anomalous training windows.
//!
//! Windows are flattened time-major: all `d` features of step `t`, then all
//! features of `t + 1`, and so on.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multivariate series of `T` steps with `d` features, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MtsRecord {
    timestamps: Vec<usize>,
    values: Vec<f64>,
    n_features: usize,
    labels: Option<Vec<u8>>,
}

impl MtsRecord {
    pub fn new(values: Vec<f64>, n_features: usize, labels: Option<Vec<u8>>) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::Input("a series needs at least one feature".into()));
        }
        if !values.len().is_multiple_of(n_features) {
            return Err(Error::Input(format!(
                "{} values do not divide into rows of {n_features}",
                values.len()
            )));
        }
        let len = values.len() / n_features;
        if let Some(l) = &labels {
            if l.len() != len {
                return Err(Error::Input(format!(
                    "{} labels for {len} time steps",
                    l.len()
                )));
            }
            if l.iter().any(|&v| v > 1) {
                return Err(Error::Input("labels must be 0 or 1".into()));
            }
        }
        Ok(Self {
            timestamps: (0..len).collect(),
            values,
            n_features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Original row index of every step (preserved across splits).
    pub fn timestamps(&self) -> &[usize] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.n_features..(t + 1) * self.n_features]
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn set_labels(&mut self, labels: Vec<u8>) -> Result<()> {
        if labels.len() != self.len() {
            return Err(Error::Input(format!(
                "{} labels for {} time steps",
                labels.len(),
                self.len()
            )));
        }
        if labels.iter().any(|&v| v > 1) {
            return Err(Error::Input("labels must be 0 or 1".into()));
        }
        self.labels = Some(labels);
        Ok(())
    }

    fn slice(&self, range: std::ops::Range<usize>) -> MtsRecord {
        let d = self.n_features;
        MtsRecord {
            timestamps: self.timestamps[range.clone()].to_vec(),
            values: self.values[range.start * d..range.end * d].to_vec(),
            n_features: d,
            labels: self.labels.as_ref().map(|l| l[range].to_vec()),
        }
    }
}

/// Column layout of an input CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schema {
    /// Headerless numeric rows; point labels live in a separate file.
    Smd,
    /// Header row; the point label is the OR of the promotion flag columns.
    Pasta { promo_columns: Vec<usize> },
    /// Header row, `timestamp,value,label`.
    Mscm,
    GenericCsv {
        has_header: bool,
        label_column: Option<usize>,
    },
}

impl Schema {
    fn has_header(&self) -> bool {
        match self {
            Schema::Smd => false,
            Schema::Pasta { .. } | Schema::Mscm => true,
            Schema::GenericCsv { has_header, .. } => *has_header,
        }
    }

    fn default_features(&self) -> Vec<usize> {
        match self {
            Schema::Mscm => vec![1],
            _ => Vec::new(),
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_reader(path: &Path, has_header: bool) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

fn parse_cell(path: &Path, rec: &csv::StringRecord, line: usize, col: usize) -> Result<f64> {
    let cell = rec
        .get(col)
        .ok_or_else(|| Error::ingest(path, Some(line), Some(col), "missing column"))?;
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            Error::ingest(
                path,
                Some(line),
                Some(col),
                format!("non-numeric cell {cell:?}"),
            )
        })
}

fn parse_flag(path: &Path, rec: &csv::StringRecord, line: usize, col: usize) -> Result<u8> {
    let v = parse_cell(path, rec, line, col)?;
    if v == 0.0 {
        Ok(0)
    } else if v == 1.0 {
        Ok(1)
    } else {
        Err(Error::ingest(
            path,
            Some(line),
            Some(col),
            format!("label {v} is not 0 or 1"),
        ))
    }
}

/// Header names of a CSV file.
pub fn read_header(path: &Path) -> Result<Vec<String>> {
    let mut rdr = csv_reader(path, true)?;
    let header = rdr
        .headers()
        .map_err(|e| Error::ingest(path, Some(1), None, e.to_string()))?;
    Ok(header.iter().map(str::to_string).collect())
}

/// Quantity and promotion columns of one Pasta brand, matched by the
/// `QTY_<brand>_` and `PROMO_<brand>_` header prefixes.
pub fn pasta_brand_columns(header: &[String], brand: &str) -> Result<(Vec<usize>, Vec<usize>)> {
    let pick = |prefix: String| -> Vec<usize> {
        header
            .iter()
            .enumerate()
            .filter(|(_, h)| h.starts_with(&prefix))
            .map(|(i, _)| i)
            .collect()
    };
    let qty = pick(format!("QTY_{brand}_"));
    let promo = pick(format!("PROMO_{brand}_"));
    if qty.is_empty() {
        return Err(Error::Dataset(format!(
            "no QTY_{brand}_* columns in header"
        )));
    }
    if promo.is_empty() {
        return Err(Error::Dataset(format!(
            "no PROMO_{brand}_* columns in header"
        )));
    }
    Ok((qty, promo))
}

/// Loads one CSV file. `feature_columns` selects and orders the value
/// columns; when empty, every non-label column is used (or the schema
/// default, for MSCM).
pub fn load_dataset(path: &Path, schema: &Schema, feature_columns: &[usize]) -> Result<MtsRecord> {
    let mut rdr = csv_reader(path, schema.has_header())?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let has_labels = !matches!(
        schema,
        Schema::Smd
            | Schema::GenericCsv {
                label_column: None,
                ..
            }
    );
    let mut features: Vec<usize> = if feature_columns.is_empty() {
        schema.default_features()
    } else {
        feature_columns.to_vec()
    };
    let mut width = None;

    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::ingest(path, Some(i + 1), None, e.to_string()))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        match width {
            None => {
                width = Some(rec.len());
                if features.is_empty() {
                    let label_col = match schema {
                        Schema::GenericCsv { label_column, .. } => *label_column,
                        _ => None,
                    };
                    let promos = match schema {
                        Schema::Pasta { promo_columns } => promo_columns.as_slice(),
                        _ => &[],
                    };
                    features = (0..rec.len())
                        .filter(|c| Some(*c) != label_col && !promos.contains(c))
                        .collect();
                }
                if let Some(&c) = features.iter().find(|&&c| c >= rec.len()) {
                    return Err(Error::ingest(path, Some(line), Some(c), "missing column"));
                }
            }
            Some(w) if w != rec.len() => {
                return Err(Error::ingest(
                    path,
                    Some(line),
                    None,
                    format!("ragged row: {} fields, expected {w}", rec.len()),
                ));
            }
            Some(_) => {}
        }
        for &c in &features {
            values.push(parse_cell(path, &rec, line, c)?);
        }
        match schema {
            Schema::Smd
            | Schema::GenericCsv {
                label_column: None, ..
            } => {}
            Schema::GenericCsv {
                label_column: Some(c),
                ..
            } => labels.push(parse_flag(path, &rec, line, *c)?),
            Schema::Mscm => labels.push(parse_flag(path, &rec, line, 2)?),
            Schema::Pasta { promo_columns } => {
                let mut any = 0u8;
                for &c in promo_columns {
                    any |= (parse_cell(path, &rec, line, c)? != 0.0) as u8;
                }
                labels.push(any);
            }
        }
    }
    if features.is_empty() {
        return Err(Error::ingest(path, None, None, "no feature columns"));
    }
    if values.is_empty() {
        return Err(Error::ingest(path, None, None, "no data rows"));
    }
    MtsRecord::new(values, features.len(), has_labels.then_some(labels))
}

/// One 0/1 label per line (SMD `test_label` files).
pub fn load_point_labels(path: &Path) -> Result<Vec<u8>> {
    let mut rdr = csv_reader(path, false)?;
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::ingest(path, Some(i + 1), None, e.to_string()))?;
        labels.push(parse_flag(path, &rec, i + 1, 0)?);
    }
    Ok(labels)
}

/// Zero-based SMD columns of `load_1`, `disk_r`, `disk_svc`, `disk_w` and
/// `disk_wb`.
pub const SMD_FEATURE_COLUMNS: [usize; 5] = [1, 9, 11, 13, 15];

/// Loads an SMD machine from the native `train/`, `test/` and `test_label/`
/// directories. Training steps are labeled normal unless a `train_label/`
/// file is present.
pub fn load_smd_machine(
    root: &Path,
    machine: &str,
    feature_columns: &[usize],
) -> Result<(MtsRecord, MtsRecord)> {
    let file = format!("{machine}.txt");
    let mut train = load_dataset(
        &root.join("train").join(&file),
        &Schema::Smd,
        feature_columns,
    )?;
    let mut test = load_dataset(
        &root.join("test").join(&file),
        &Schema::Smd,
        feature_columns,
    )?;
    let train_labels_path = root.join("train_label").join(&file);
    let train_labels = if train_labels_path.exists() {
        load_point_labels(&train_labels_path)?
    } else {
        vec![0; train.len()]
    };
    attach_labels(&mut train, train_labels, &train_labels_path)?;
    let test_labels_path = root.join("test_label").join(&file);
    let test_labels = load_point_labels(&test_labels_path)?;
    attach_labels(&mut test, test_labels, &test_labels_path)?;
    Ok((train, test))
}

fn attach_labels(record: &mut MtsRecord, labels: Vec<u8>, path: &Path) -> Result<()> {
    if labels.len() != record.len() {
        return Err(Error::ingest(
            path,
            None,
            None,
            format!("{} labels for {} rows", labels.len(), record.len()),
        ));
    }
    record.labels = Some(labels);
    Ok(())
}

/// How a subset is divided into train and test parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// The source ships separate train and test files.
    NativeFiles,
    /// Leading `fraction` of the series (floored) is used for training.
    Fraction(f64),
}

/// Contiguous temporal split: the first `⌊f·T⌋` steps train, the rest test.
/// Both parts must hold at least `window_len` steps.
pub fn split_series(
    record: &MtsRecord,
    fraction: f64,
    window_len: usize,
) -> Result<(MtsRecord, MtsRecord)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "split fraction {fraction} is not in (0, 1)"
        )));
    }
    let n_train = (fraction * record.len() as f64).floor() as usize;
    let n_test = record.len() - n_train;
    if n_train < window_len || n_test < window_len {
        return Err(Error::Config(format!(
            "split of {} steps gives {n_train}/{n_test}, shorter than window {window_len}",
            record.len()
        )));
    }
    Ok((
        record.slice(0..n_train),
        record.slice(n_train..record.len()),
    ))
}

/// Per-feature min/max fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_scaler(train: &MtsRecord) -> Scaler {
    let d = train.n_features;
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in train.values.chunks(d) {
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Scaler { min, max }
}

impl Scaler {
    /// `(x − min)/(max − min)` clipped to `[0, 1]`; constant features map to 0.
    pub fn scale_value(&self, feature: usize, v: f64) -> f64 {
        let range = self.max[feature] - self.min[feature];
        if range > 0.0 {
            ((v - self.min[feature]) / range).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn apply(&self, record: &MtsRecord) -> Result<MtsRecord> {
        let d = record.n_features;
        if d != self.min.len() {
            return Err(Error::Input(format!(
                "scaler fitted on {} features, record has {d}",
                self.min.len()
            )));
        }
        let values = record
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| self.scale_value(i % d, v))
            .collect();
        Ok(MtsRecord {
            values,
            ..record.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// `N` flattened windows of `window_len · n_features` values with one label each.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    pub window_len: usize,
    pub stride: usize,
    pub n_features: usize,
    pub split: Split,
    windows: Vec<f64>,
    labels: Vec<u8>,
}

impl WindowSet {
    pub fn from_parts(
        window_len: usize,
        stride: usize,
        n_features: usize,
        split: Split,
        windows: Vec<f64>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        let dim = window_len * n_features;
        if dim == 0 || windows.len() != dim * labels.len() {
            return Err(Error::Input(format!(
                "{} values do not form {} windows of width {dim}",
                windows.len(),
                labels.len()
            )));
        }
        Ok(Self {
            window_len,
            stride,
            n_features,
            split,
            windows,
            labels,
        })
    }

    /// Flattened width `L · d`.
    pub fn dim(&self) -> usize {
        self.window_len * self.n_features
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn window(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.windows[i * d..(i + 1) * d]
    }

    pub fn windows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.windows.chunks(self.dim())
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n_anomalous(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Keeps the windows for which `keep(label)` holds, in order.
    pub fn filter_by_label(&self, keep: impl Fn(u8) -> bool) -> WindowSet {
        let mut windows = Vec::new();
        let mut labels = Vec::new();
        for (w, &l) in self.windows().zip(&self.labels) {
            if keep(l) {
                windows.extend_from_slice(w);
                labels.push(l);
            }
        }
        WindowSet {
            windows,
            labels,
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> WindowSet {
        WindowSet {
            window_len: self.window_len,
            stride: self.stride,
            n_features: self.n_features,
            split: self.split,
            windows: Vec::new(),
            labels: Vec::new(),
        }
    }
}

/// `⌊(T − L)/S⌋ + 1`.
pub fn window_count(len: usize, window_len: usize, stride: usize) -> usize {
    if window_len > len || window_len == 0 || stride == 0 {
        0
    } else {
        (len - window_len) / stride + 1
    }
}

/// Sliding windows of `window_len` steps every `stride` steps. A window is
/// anomalous iff any step inside it is. Unlabeled records yield all-normal
/// windows.
pub fn make_windows(
    record: &MtsRecord,
    window_len: usize,
    stride: usize,
    split: Split,
) -> Result<WindowSet> {
    if window_len == 0 || stride == 0 {
        return Err(Error::Config(
            "window length and stride must be positive".into(),
        ));
    }
    if window_len > record.len() {
        return Err(Error::Input(format!(
            "window length {window_len} exceeds series length {}",
            record.len()
        )));
    }
    let n = window_count(record.len(), window_len, stride);
    let d = record.n_features;
    let mut windows = Vec::with_capacity(n * window_len * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let start = i * stride;
        windows.extend_from_slice(&record.values[start * d..(start + window_len) * d]);
        let anomalous = record
            .labels
            .as_ref()
            .is_some_and(|l| l[start..start + window_len].contains(&1));
        labels.push(anomalous as u8);
    }
    WindowSet::from_parts(window_len, stride, d, split, windows, labels)
}

/// Keeps only normal windows; errors if none remain.
pub fn drop_anomalous_train_windows(train: &WindowSet) -> Result<WindowSet> {
    let kept = train.filter_by_label(|l| l == 0);
    if kept.is_empty() {
        return Err(Error::Dataset(format!(
            "all {} training windows are anomalous",
            train.len()
        )));
    }
    Ok(kept)
}

/// Scaler fitted on `train`, applied to both parts, then windowed. Anomalous
/// training windows are dropped; test windows keep their labels.
pub fn prepare_windows(
    train: &MtsRecord,
    test: &MtsRecord,
    window_len: usize,
    stride: usize,
) -> Result<(WindowSet, WindowSet, Scaler)> {
    let scaler = fit_scaler(train);
    let train_w = make_windows(&scaler.apply(train)?, window_len, stride, Split::Train)?;
    let test_w = make_windows(&scaler.apply(test)?, window_len, stride, Split::Test)?;
    Ok((drop_anomalous_train_windows(&train_w)?, test_w, scaler))
}

const WINDOW_MAGIC: &[u8; 8] = b"QAEWIN01";

/// Writes the binary window cache:
///
/// ```text
/// magic    8 bytes  "QAEWIN01"
/// n        u64 LE   number of windows
/// L        u64 LE   window length
/// S        u64 LE   stride
/// d        u64 LE   features per step
/// split    u8       0 = train, 1 = test
/// values   n·L·d f64 LE, row-major (window, step, feature)
/// labels   n u8
/// ```
pub fn write_windows(path: &Path, set: &WindowSet) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    write(WINDOW_MAGIC)?;
    for v in [set.len(), set.window_len, set.stride, set.n_features] {
        write(&(v as u64).to_le_bytes())?;
    }
    write(&[match set.split {
        Split::Train => 0,
        Split::Test => 1,
    }])?;
    for v in &set.windows {
        write(&v.to_le_bytes())?;
    }
    write(&set.labels)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_windows(path: &Path) -> Result<WindowSet> {
    let mut bytes = Vec::new();
    BufReader::new(open(path)?)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::Format(format!("{}: {m}", path.display()));
    if bytes.len() < 41 || &bytes[..8] != WINDOW_MAGIC {
        return Err(bad("not a window cache file"));
    }
    let word =
        |i: usize| u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap()) as usize;
    let (n, window_len, stride, n_features) = (word(0), word(1), word(2), word(3));
    let split = match bytes[40] {
        0 => Split::Train,
        1 => Split::Test,
        _ => return Err(bad("unknown split tag")),
    };
    let n_values = n
        .checked_mul(window_len)
        .and_then(|v| v.checked_mul(n_features))
        .ok_or_else(|| bad("header overflow"))?;
    let expected = 41 + 8 * n_values + n;
    if bytes.len() != expected {
        return Err(bad(&format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let body = &bytes[41..41 + 8 * n_values];
    let windows = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let labels = bytes[41 + 8 * n_values..].to_vec();
    WindowSet::from_parts(window_len, stride, n_features, split, windows, labels)
}

/// Returns `path` if it exists, else an ingestion error naming it.
pub fn require_file(path: &Path) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path.to_path_buf())
    } else {
        Err(Error::ingest(path, None, None, "file not found"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn series(len: usize, d: usize, labels: Option<Vec<u8>>) -> MtsRecord {
        MtsRecord::new((0..len * d).map(|v| v as f64).collect(), d, labels).unwrap()
    }

    #[test]
    fn generic_csv_with_label_column() {
        let f = write_tmp("a,b,label\n1,2,0\n3,4,1\n5,6,0\n");
        let schema = Schema::GenericCsv {
            has_header: true,
            label_column: Some(2),
        };
        let r = load_dataset(f.path(), &schema, &[0, 1]).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.n_features(), 2);
        assert_eq!(r.values(), &[1., 2., 3., 4., 5., 6.]);
        assert_eq!(r.labels().unwrap(), &[0, 1, 0]);
        // empty selection means every non-label column
        let r = load_dataset(f.path(), &schema, &[]).unwrap();
        assert_eq!(r.n_features(), 2);
    }

    #[test]
    fn pasta_label_is_or_over_promotions() {
        let mut csv =
            String::from("DATE,QTY_B1_1,QTY_B1_2,QTY_B1_3,PROMO_B1_1,PROMO_B1_2,PROMO_B1_3\n");
        for t in 0..8 {
            let promo2 = u8::from(t == 5);
            csv.push_str(&format!(
                "2014-01-0{},{},{},{},0,{promo2},0\n",
                t + 1,
                t,
                t + 1,
                t + 2
            ));
        }
        let f = write_tmp(&csv);
        let header = read_header(f.path()).unwrap();
        let (qty, promo) = pasta_brand_columns(&header, "B1").unwrap();
        assert_eq!(qty, vec![1, 2, 3]);
        assert_eq!(promo, vec![4, 5, 6]);
        let r = load_dataset(
            f.path(),
            &Schema::Pasta {
                promo_columns: promo,
            },
            &qty,
        )
        .unwrap();
        assert_eq!(r.n_features(), 3);
        let labels = r.labels().unwrap();
        assert_eq!(labels[5], 1);
        assert_eq!(labels.iter().map(|&l| l as usize).sum::<usize>(), 1);
    }

    #[test]
    fn smd_feature_selection() {
        let mut csv = String::new();
        for t in 0..4 {
            let row: Vec<String> = (0..38).map(|c| format!("{}", t * 100 + c)).collect();
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        let f = write_tmp(&csv);
        let r = load_dataset(f.path(), &Schema::Smd, &[1, 9, 11, 13, 15]).unwrap();
        assert_eq!((r.len(), r.n_features()), (4, 5));
        assert_eq!(r.row(2), &[201., 209., 211., 213., 215.]);
        assert!(r.labels().is_none());
    }

    #[test]
    fn mscm_defaults() {
        let f = write_tmp("timestamp,value,is_anomaly\n0,1.5,0\n1,2.5,1\n");
        let r = load_dataset(f.path(), &Schema::Mscm, &[]).unwrap();
        assert_eq!(r.values(), &[1.5, 2.5]);
        assert_eq!(r.labels().unwrap(), &[0, 1]);
    }

    #[test]
    fn ingestion_errors_carry_location() {
        let schema = Schema::GenericCsv {
            has_header: false,
            label_column: None,
        };
        let f = write_tmp("1,2\n3,x\n");
        match load_dataset(f.path(), &schema, &[]) {
            Err(Error::Ingest { row, column, .. }) => assert_eq!((row, column), (Some(2), Some(1))),
            other => panic!("{other:?}"),
        }
        let f = write_tmp("1,2\n3\n");
        match load_dataset(f.path(), &schema, &[]) {
            Err(Error::Ingest { row, .. }) => assert_eq!(row, Some(2)),
            other => panic!("{other:?}"),
        }
        let f = write_tmp("1,2\n3,4\n");
        assert!(matches!(
            load_dataset(f.path(), &schema, &[5]),
            Err(Error::Ingest {
                column: Some(5),
                ..
            })
        ));
        assert!(matches!(
            load_dataset(Path::new("/nonexistent/file.csv"), &schema, &[]),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn fraction_split_floors_train() {
        let (a, b) = split_series(&series(100, 1, None), 0.5, 10).unwrap();
        assert_eq!((a.len(), b.len()), (50, 50));
        let (a, b) = split_series(&series(101, 1, None), 0.5, 10).unwrap();
        assert_eq!((a.len(), b.len()), (50, 51));
        assert_eq!(b.timestamps()[0], 50);
        let (a, b) = split_series(&series(56959, 1, None), 0.5, 100).unwrap();
        assert_eq!((a.len(), b.len()), (28479, 28480));
    }

    #[test]
    fn split_rejects_short_segments_and_bad_fractions() {
        assert!(matches!(
            split_series(&series(30, 1, None), 0.5, 20),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            split_series(&series(30, 1, None), 1.0, 2),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            split_series(&series(30, 1, None), 0.0, 2),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn scaler_examples() {
        let train = MtsRecord::new(vec![2., 4., 6.], 1, None).unwrap();
        let s = fit_scaler(&train);
        assert_eq!(s.scale_value(0, 4.0), 0.5);
        assert_eq!(s.scale_value(0, 8.0), 1.0);
        assert_eq!(s.scale_value(0, -3.0), 0.0);
        let constant = MtsRecord::new(vec![3., 3., 3.], 1, None).unwrap();
        let s = fit_scaler(&constant);
        assert_eq!(s.apply(&constant).unwrap().values(), &[0., 0., 0.]);
    }

    #[test]
    fn window_counts_and_contents() {
        assert_eq!(
            make_windows(&series(20, 1, None), 10, 5, Split::Train)
                .unwrap()
                .len(),
            3
        );
        let w = make_windows(&series(10, 2, None), 10, 5, Split::Train).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.window(0), series(10, 2, None).values());
        assert_eq!(window_count(28479, 100, 50), 568);

        let w = make_windows(&series(6, 2, None), 3, 2, Split::Test).unwrap();
        // time-major flattening: steps 2..5, two features each
        assert_eq!(w.window(1), &[4., 5., 6., 7., 8., 9.]);
        assert!(matches!(
            make_windows(&series(5, 1, None), 6, 1, Split::Train),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn window_labels_are_or_of_points() {
        let labels = vec![0, 0, 0, 1, 0, 0, 0, 0];
        let w = make_windows(&series(8, 1, Some(labels)), 3, 2, Split::Test).unwrap();
        // windows start at 0, 2, 4 → [0..3), [2..5), [4..7)
        assert_eq!(w.labels(), &[0, 1, 0]);
    }

    #[test]
    fn dropping_anomalous_windows() {
        let mk = |labels: Vec<u8>| {
            let n = labels.len();
            WindowSet::from_parts(
                1,
                1,
                1,
                Split::Train,
                (0..n).map(|v| v as f64).collect(),
                labels,
            )
            .unwrap()
        };
        let kept = drop_anomalous_train_windows(&mk(vec![0, 1, 0])).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(kept.window(1), &[2.0]);
        let all_normal = mk(vec![0, 0]);
        assert_eq!(
            drop_anomalous_train_windows(&all_normal).unwrap(),
            all_normal
        );
        assert!(matches!(
            drop_anomalous_train_windows(&mk(vec![1, 1])),
            Err(Error::Dataset(_))
        ));
    }

    #[test]
    fn window_cache_round_trip() {
        let w = make_windows(
            &series(9, 2, Some(vec![0, 0, 1, 0, 0, 0, 0, 0, 0])),
            4,
            2,
            Split::Test,
        )
        .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_windows(f.path(), &w).unwrap();
        assert_eq!(read_windows(f.path()).unwrap(), w);
        std::fs::write(f.path(), b"garbage").unwrap();
        assert!(matches!(read_windows(f.path()), Err(Error::Format(_))));
    }
}
