use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::methods::MethodKind;
use super::runner::Report;
use crate::error::{Error, Result};
use crate::serde_float::csv_cell;

/// A header plus string rows, written as CSV or rendered as markdown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f(v: Option<f64>) -> String {
    v.map(csv_cell).unwrap_or_default()
}

/// Cell table; includes wall-clock timings, so it is not byte-stable.
pub fn cells_table(report: &Report) -> Table {
    let header = vec![
        "dataset",
        "method",
        "seed",
        "status",
        "output_dim",
        "accuracy",
        "macro_f1",
        "effective_rank",
        "normalized_erank",
        "condition_number",
        "log10_kappa",
        "kappa_capped",
        "probe_iterations",
        "fit_time_ms",
        "encode_time_ms",
        "train_time_s",
        "split_digest",
        "note",
    ];
    let rows = report
        .cells
        .iter()
        .map(|c| {
            let s = c.spectral.as_ref();
            vec![
                c.dataset.clone(),
                c.method.name().to_owned(),
                c.seed.to_string(),
                format!("{:?}", c.status).to_lowercase(),
                opt(c.output_dim),
                opt_f(c.accuracy),
                opt_f(c.macro_f1),
                opt_f(s.map(|s| s.effective_rank)),
                opt_f(s.map(|s| s.normalized_erank)),
                opt_f(s.map(|s| s.condition_number)),
                opt_f(s.map(|s| s.log10_kappa)),
                opt(s.map(|s| s.kappa_capped)),
                opt(c.probe_iterations),
                opt_f(c.fit_time_ms),
                opt_f(c.encode_time_ms),
                opt_f(c.train_time_s),
                c.split_digest.clone(),
                c.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    Table { header, rows }
}

pub fn comparisons_table(report: &Report) -> Table {
    let header = vec![
        "dataset",
        "method",
        "baseline",
        "metric",
        "n_seeds",
        "method_mean",
        "baseline_mean",
        "mean_difference",
        "ci95_low",
        "ci95_high",
        "t_statistic",
        "t_df",
        "t_pvalue",
        "t_degenerate",
        "wilcoxon_statistic",
        "wilcoxon_pvalue",
        "cohens_d",
    ];
    let rows = report
        .comparisons
        .iter()
        .map(|c| {
            vec![
                c.dataset.clone(),
                c.method.clone(),
                c.baseline.clone(),
                serde_json::to_value(c.metric)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
                c.seeds.len().to_string(),
                csv_cell(c.method_mean),
                csv_cell(c.baseline_mean),
                csv_cell(c.mean_difference),
                opt_f(c.ci95.map(|x| x.0)),
                opt_f(c.ci95.map(|x| x.1)),
                opt_f(c.t_test.map(|t| t.t)),
                opt(c.t_test.map(|t| t.df)),
                opt_f(c.t_test.map(|t| t.p)),
                opt(c.t_test.map(|t| t.degenerate)),
                csv_cell(c.wilcoxon.statistic),
                csv_cell(c.wilcoxon.p),
                opt_f(c.cohens_d),
            ]
        })
        .collect();
    Table { header, rows }
}

pub fn cka_table(report: &Report) -> Table {
    let header = vec![
        "dataset",
        "representation_a",
        "representation_b",
        "mean_cka",
        "n_seeds",
        "sample_count",
    ];
    let rows = report
        .cka
        .iter()
        .map(|r| {
            vec![
                r.dataset.clone(),
                r.a.clone(),
                r.b.clone(),
                csv_cell(r.mean),
                r.per_seed.len().to_string(),
                r.sample_count.to_string(),
            ]
        })
        .collect();
    Table { header, rows }
}

/// Paired Cohen's d per comparison with its 95% interval.
pub fn forest_table(report: &Report) -> Table {
    let header = vec!["method", "dataset", "d", "ci_low", "ci_high"];
    let rows = report
        .comparisons
        .iter()
        .filter_map(|c| {
            let d = c.cohens_d?;
            let (lo, hi) = c.cohens_d_ci()?;
            Some(vec![
                c.method.clone(),
                c.dataset.clone(),
                csv_cell(d),
                csv_cell(lo),
                csv_cell(hi),
            ])
        })
        .collect();
    Table { header, rows }
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Csv {
            path: "<memory>".into(),
            message: e.to_string(),
        };
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv {
            path: "<memory>".into(),
            message: e.to_string(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "| {} |", self.header.join(" | "));
        let _ = writeln!(s, "|{}", "---|".repeat(self.header.len()));
        for r in &self.rows {
            let _ = writeln!(s, "| {} |", r.join(" | "));
        }
        s
    }
}

/// Mean accuracy grid: one row per dataset, one column per method.
pub fn accuracy_summary(report: &Report) -> String {
    let mut methods: Vec<MethodKind> = report.config.methods.clone();
    methods.sort_by_key(|m| (m.family(), m.name()));
    let mut datasets: Vec<&str> = report.cells.iter().map(|c| c.dataset.as_str()).collect();
    datasets.dedup();
    let mut s = String::new();
    let _ = write!(s, "| dataset |");
    for m in &methods {
        let _ = write!(s, " {m} |");
    }
    let _ = writeln!(s, "\n|---|{}", "---|".repeat(methods.len()));
    for d in datasets {
        let _ = write!(s, "| {d} |");
        for &m in &methods {
            match report.mean_accuracy(d, m) {
                Some(a) => {
                    let _ = write!(s, " {a:.3} |");
                }
                None => s.push_str(" n/a |"),
            }
        }
        s.push('\n');
    }
    s
}

pub fn render_markdown(report: &Report) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "# Benchmark report\n\nseeds: {:?}\n", report.seeds);
    let _ = writeln!(s, "## Mean test accuracy\n\n{}", accuracy_summary(report));
    let _ = writeln!(s, "## Comparisons against the best classical baseline\n");
    s.push_str(&comparisons_table(report).to_markdown());
    let _ = writeln!(s, "\n## Linear CKA (train split)\n");
    s.push_str(&cka_table(report).to_markdown());
    if !report.errors.is_empty() {
        let _ = writeln!(s, "\n## Errors\n");
        for e in &report.errors {
            let _ = writeln!(s, "- {} ({}): {}", e.dataset, e.stage, e.message);
        }
    }
    Ok(s)
}

pub fn to_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `results.json`, `cells.csv`, `comparisons.csv`, `cka.csv` and
/// `forest.csv` into `out_dir`, creating it if needed.
pub fn emit_report(report: &Report, out_dir: impl AsRef<Path>) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join("results.json"), &to_json(report)?)?;
    write_file(&dir.join("cells.csv"), &cells_table(report).to_csv()?)?;
    write_file(&dir.join("comparisons.csv"), &comparisons_table(report).to_csv()?)?;
    write_file(&dir.join("cka.csv"), &cka_table(report).to_csv()?)?;
    write_file(&dir.join("forest.csv"), &forest_table(report).to_csv()?)?;
    Ok(())
}
