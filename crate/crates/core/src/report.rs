//! Report serialization: per-run metrics (CSV and JSON), violin data (CSV and
//! SVG) and the model × subset benchmark table.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Density, MetricsReport, ViolinSummary, METRIC_NAMES};

pub const METRICS_CSV_HEADER: &str =
    "dataset,subset,model,auc,precision,recall,f1,accuracy,balanced_accuracy,threshold,tp,fp,tn,fn";

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

/// One CSV row in [`METRICS_CSV_HEADER`] layout.
pub fn metrics_csv_row(dataset: &str, subset: &str, model: &str, m: &MetricsReport) -> String {
    format!(
        "{dataset},{subset},{model},{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{}",
        fmt_opt(m.auc),
        m.precision,
        m.recall,
        m.f1,
        m.accuracy,
        m.balanced_accuracy,
        m.threshold,
        m.counts.tp,
        m.counts.fp,
        m.counts.tn,
        m.counts.fn_,
    )
}

/// The structured per-run report written next to the CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub subset: String,
    pub model: String,
    /// Reported trainable-parameter count (weights only).
    pub n_params: usize,
    pub optimizer: String,
    pub metrics: MetricsReport,
    pub violins: Vec<ViolinSummary>,
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Summary rows: `group,n,min,q1,median,q3,max,bandwidth`.
pub fn violin_summary_csv(summaries: &[ViolinSummary]) -> String {
    let mut out = String::from("group,n,min,q1,median,q3,max,bandwidth\n");
    for s in summaries {
        let bw = match &s.density {
            Density::Spike { .. } => 0.0,
            Density::Curve { bandwidth, .. } => *bandwidth,
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.group.name(),
            s.n,
            s.min,
            s.q1,
            s.median,
            s.q3,
            s.max,
            bw
        );
    }
    out
}

/// Density samples: `group,x,density`. A spike is a single row with an
/// infinite density.
pub fn violin_density_csv(summaries: &[ViolinSummary]) -> String {
    let mut out = String::from("group,x,density\n");
    for s in summaries {
        match &s.density {
            Density::Spike { at } => {
                let _ = writeln!(out, "{},{at},inf", s.group.name());
            }
            Density::Curve { xs, ys, .. } => {
                for (x, y) in xs.iter().zip(ys) {
                    let _ = writeln!(out, "{},{x},{y}", s.group.name());
                }
            }
        }
    }
    out
}

/// Self-contained SVG of the score distributions, one violin per group,
/// with quartile box, median tick and an optional dashed threshold line.
pub fn render_violin_svg(
    summaries: &[ViolinSummary],
    threshold: Option<f64>,
    title: &str,
) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 50.0;

    let mut lo = summaries
        .iter()
        .map(|s| s.min)
        .fold(f64::INFINITY, f64::min);
    let mut hi = summaries
        .iter()
        .map(|s| s.max)
        .fold(f64::NEG_INFINITY, f64::max);
    if let Some(t) = threshold.filter(|t| t.is_finite()) {
        lo = lo.min(t);
        hi = hi.max(t);
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let y = |v: f64| TOP + (H - TOP - BOTTOM) * (hi - v) / (hi - lo);
    let slot = (W - LEFT - RIGHT) / summaries.len().max(1) as f64;
    let half = 0.4 * slot;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    // y axis with five ticks
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        H - BOTTOM
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{yy:.2}" x2="{LEFT}" y2="{yy:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            LEFT - 4.0,
            LEFT - 6.0,
            yy + 4.0
        );
    }

    let colors = ["#4c72b0", "#55a868", "#c44e52"];
    for (i, s) in summaries.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let color = colors[i % colors.len()];
        match &s.density {
            Density::Curve { xs, ys, .. } => {
                let peak = ys
                    .iter()
                    .cloned()
                    .fold(0.0, f64::max)
                    .max(f64::MIN_POSITIVE);
                let mut pts: Vec<String> = xs
                    .iter()
                    .zip(ys)
                    .map(|(x, d)| format!("{:.2},{:.2}", cx + half * d / peak, y(*x)))
                    .collect();
                pts.extend(
                    xs.iter()
                        .zip(ys)
                        .rev()
                        .map(|(x, d)| format!("{:.2},{:.2}", cx - half * d / peak, y(*x))),
                );
                let _ = writeln!(
                    svg,
                    r#"<polygon points="{}" fill="{color}" fill-opacity="0.45" stroke="{color}"/>"#,
                    pts.join(" ")
                );
            }
            Density::Spike { at } => {
                let _ = writeln!(
                    svg,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="3"/>"#,
                    cx - half,
                    y(*at),
                    cx + half,
                    y(*at)
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            y(s.min),
            y(s.max)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="8" height="{:.2}" fill="black"/>"#,
            cx - 4.0,
            y(s.q3),
            (y(s.q1) - y(s.q3)).max(0.5)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="white" stroke-width="2"/>"#,
            cx - 4.0,
            y(s.median),
            cx + 4.0,
            y(s.median)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{} (n={})</text>"#,
            H - BOTTOM + 20.0,
            s.group.name(),
            s.n
        );
    }
    if let Some(t) = threshold.filter(|t| t.is_finite()) {
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="red" stroke-dasharray="6,4"/><text x="{}" y="{:.2}" text-anchor="end" fill="red">threshold</text>"#,
            y(t),
            W - RIGHT,
            y(t),
            W - RIGHT,
            y(t) - 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Metrics for every model × subset cell of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub dataset: String,
    pub models: Vec<String>,
    pub subsets: Vec<String>,
    /// `cells[model][subset]`, `None` where the run failed.
    pub cells: Vec<Vec<Option<MetricsReport>>>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub model: String,
    pub subset: String,
    pub error: String,
}

impl BenchmarkTable {
    pub fn new(dataset: &str, models: Vec<String>, subsets: Vec<String>) -> Self {
        let cells = vec![vec![None; subsets.len()]; models.len()];
        Self {
            dataset: dataset.to_string(),
            models,
            subsets,
            cells,
            failures: Vec::new(),
        }
    }

    fn index(&self, model: &str, subset: &str) -> Result<(usize, usize)> {
        let m = self.models.iter().position(|x| x == model);
        let s = self.subsets.iter().position(|x| x == subset);
        m.zip(s)
            .ok_or_else(|| Error::Input(format!("unknown benchmark cell {model}/{subset}")))
    }

    pub fn set(&mut self, model: &str, subset: &str, report: MetricsReport) -> Result<()> {
        let (m, s) = self.index(model, subset)?;
        self.cells[m][s] = Some(report);
        Ok(())
    }

    pub fn fail(&mut self, model: &str, subset: &str, error: impl Into<String>) {
        self.failures.push(CellFailure {
            model: model.to_string(),
            subset: subset.to_string(),
            error: error.into(),
        });
    }

    /// Mean of metric `metric` (index into [`MetricsReport::values`]) over
    /// the subsets where it is defined.
    pub fn mean(&self, model: usize, metric: usize) -> Option<f64> {
        let vals: Vec<f64> = self.cells[model]
            .iter()
            .filter_map(|c| c.as_ref().and_then(|r| r.values()[metric].1))
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Table layout: one row per (model, metric), one column per subset,
    /// then the mean.
    pub fn to_csv(&self) -> String {
        let mut out = format!("model,metric,{},mean\n", self.subsets.join(","));
        for (m, model) in self.models.iter().enumerate() {
            for (k, name) in METRIC_NAMES.iter().enumerate() {
                let row: Vec<String> = self.cells[m]
                    .iter()
                    .map(|c| match c {
                        Some(r) => fmt_opt(r.values()[k].1),
                        None => "ERR".to_string(),
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    "{model},{name},{},{}",
                    row.join(","),
                    fmt_opt(self.mean(m, k))
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate, violin_summary, ScoreSet};

    #[test]
    fn single_subset_mean_equals_row() {
        let r = evaluate(&[1, 0, 1, 0], &[0.9, 0.2, 0.4, 0.5], 0.45).unwrap();
        let mut t = BenchmarkTable::new("toy", vec!["qae".into()], vec!["s1".into()]);
        t.set("qae", "s1", r.clone()).unwrap();
        for (k, (_, v)) in r.values().iter().enumerate() {
            assert_eq!(t.mean(0, k), *v);
        }
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("model,metric,s1,mean\n"));
        assert!(csv.contains("qae,AUC,0.750000,0.750000"));
    }

    #[test]
    fn failed_cells_are_marked_and_skipped_in_means() {
        let r = evaluate(&[1, 0], &[0.9, 0.2], 0.5).unwrap();
        let mut t = BenchmarkTable::new("toy", vec!["qae".into()], vec!["a".into(), "b".into()]);
        t.set("qae", "a", r).unwrap();
        t.fail("qae", "b", "boom");
        assert_eq!(t.mean(0, 0), Some(1.0));
        assert!(t.to_csv().contains("qae,AUC,1.000000,ERR,1.000000"));
        let r = evaluate(&[1, 0], &[0.9, 0.2], 0.5).unwrap();
        assert!(t.set("nope", "a", r).is_err());
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let sets =
            ScoreSet::standard_groups(&[0.1, 0.2, 0.25], &[0.3, 0.9, 0.35, 1.2], &[0, 1, 0, 1]);
        let v = violin_summary(&sets);
        let svg = render_violin_svg(&v, Some(0.24), "m-1-1 <qae>");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polygon").count(), 3);
        assert!(svg.contains("&lt;qae&gt;"));
        assert!(violin_density_csv(&v).lines().count() == 1 + 3 * crate::eval::DENSITY_POINTS);
    }
}
