use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::methods::{Encoder, MethodKind};
use crate::data::{fit_standardizer, stratified_split, Dataset, Split};
use crate::diagnostics::{cka_rows, linear_cka, spectral_report, SpectralReport, CKA_MAX_ROWS};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RandomStream};
use crate::probe::{compute_metrics, train_logistic, ProbeConfig};
use crate::stats::{compare_to_best, MethodFamily, PairedComparison, ScoreRecord};

pub const SCHEMA_VERSION: u32 = 1;
/// Name of the standardized-feature reference used in CKA tables.
pub const CKA_REFERENCE: &str = "raw";
const TIMING_REPEATS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    /// Skipped by a resource budget (polynomial expansion too large).
    Infeasible,
    Failed,
}

/// One (dataset, method, seed) run. Wall-clock timings are kept in memory
/// and in `cells.csv` but never serialized into `results.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: String,
    pub method: MethodKind,
    pub seed: u64,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub split_digest: String,
    pub output_dim: Option<usize>,
    pub accuracy: Option<f64>,
    pub macro_f1: Option<f64>,
    pub spectral: Option<SpectralReport>,
    pub probe_iterations: Option<usize>,
    #[serde(skip)]
    pub fit_time_ms: Option<f64>,
    #[serde(skip)]
    pub encode_time_ms: Option<f64>,
    #[serde(skip)]
    pub train_time_s: Option<f64>,
}

impl CellResult {
    fn empty(dataset: &str, method: MethodKind, seed: u64, split: &Split, status: CellStatus) -> Self {
        CellResult {
            dataset: dataset.to_owned(),
            method,
            seed,
            status,
            note: None,
            split_digest: split.digest(),
            output_dim: None,
            accuracy: None,
            macro_f1: None,
            spectral: None,
            probe_iterations: None,
            fit_time_ms: None,
            encode_time_ms: None,
            train_time_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub dataset: String,
    pub seed: u64,
    pub digest: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedValue {
    pub seed: u64,
    pub value: f64,
}

/// Linear CKA between two train-split representations, averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CkaRecord {
    pub dataset: String,
    pub a: String,
    pub b: String,
    pub mean: f64,
    pub sample_count: usize,
    pub per_seed: Vec<SeedValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub dataset: String,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub splits: Vec<SplitRecord>,
    pub cells: Vec<CellResult>,
    pub comparisons: Vec<PairedComparison>,
    pub cka: Vec<CkaRecord>,
    pub errors: Vec<ErrorRecord>,
}

impl Report {
    pub fn cell(&self, dataset: &str, method: MethodKind, seed: u64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.method == method && c.seed == seed)
    }

    pub fn cells_for<'a>(&'a self, dataset: &'a str, method: MethodKind) -> impl Iterator<Item = &'a CellResult> + 'a {
        self.cells
            .iter()
            .filter(move |c| c.dataset == dataset && c.method == method)
    }

    /// Mean test accuracy over the successful cells, if any.
    pub fn mean_accuracy(&self, dataset: &str, method: MethodKind) -> Option<f64> {
        mean(self.cells_for(dataset, method).filter_map(|c| c.accuracy))
    }

    pub fn mean_spectral<F: Fn(&SpectralReport) -> f64>(&self, dataset: &str, method: MethodKind, f: F) -> Option<f64> {
        mean(
            self.cells_for(dataset, method)
                .filter_map(|c| c.spectral.as_ref().map(&f)),
        )
    }

    /// Mean CKA between two representations, in either order.
    pub fn cka(&self, dataset: &str, a: &str, b: &str) -> Option<f64> {
        self.cka
            .iter()
            .find(|r| r.dataset == dataset && ((r.a == a && r.b == b) || (r.a == b && r.b == a)))
            .map(|r| r.mean)
    }

    pub fn comparison(&self, dataset: &str, method: MethodKind) -> Option<&PairedComparison> {
        self.comparisons
            .iter()
            .find(|c| c.dataset == dataset && c.method == method.name())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn stream_for(dataset: &str, method: &str, seed: u64, purpose: &str) -> RandomStream {
    RandomStream::derive(seed, &format!("{dataset}/{method}/{seed}/{purpose}"))
}

fn split_stream(dataset: &str, seed: u64) -> RandomStream {
    RandomStream::derive(seed, &format!("{dataset}/split/{seed}"))
}

/// Transforms `x` [`TIMING_REPEATS`] times and returns the median
/// wall-clock milliseconds with the last output.
fn timed_transform(encoder: &Encoder, x: &Matrix) -> Result<(f64, Matrix)> {
    let mut times = Vec::with_capacity(TIMING_REPEATS);
    let mut out = None;
    for _ in 0..TIMING_REPEATS {
        let t = Instant::now();
        out = Some(encoder.transform(x)?);
        times.push(t.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(f64::total_cmp);
    Ok((times[TIMING_REPEATS / 2], out.expect("at least one repeat")))
}

/// Median wall-clock milliseconds of transforming `x` with a fitted encoder;
/// fitting is not timed.
pub fn time_encoding(encoder: &Encoder, x: &Matrix) -> Result<f64> {
    timed_transform(encoder, x).map(|(ms, _)| ms)
}

struct CellInput<'a> {
    ds: &'a Dataset,
    split: &'a Split,
    seed: u64,
    method: MethodKind,
}

fn run_cell(input: &CellInput<'_>, probe: &ProbeConfig, poly_budget: usize) -> CellResult {
    let name = input.ds.name();
    let mut cell = CellResult::empty(name, input.method, input.seed, input.split, CellStatus::Ok);
    if let Err(e) = fill_cell(&mut cell, input, probe, poly_budget) {
        cell.status = match e {
            Error::Infeasible { .. } => CellStatus::Infeasible,
            _ => CellStatus::Failed,
        };
        cell.note = Some(e.to_string());
        cell.accuracy = None;
        cell.macro_f1 = None;
    }
    cell
}

fn fill_cell(cell: &mut CellResult, input: &CellInput<'_>, probe: &ProbeConfig, poly_budget: usize) -> Result<()> {
    let (xtr, ytr) = input.ds.subset(&input.split.train);
    let (xte, yte) = input.ds.subset(&input.split.test);
    let mut encoder = Encoder::new(input.method, poly_budget);
    let mut stream = stream_for(input.ds.name(), input.method.name(), input.seed, "fit");

    let t = Instant::now();
    encoder.fit(&xtr, &mut stream)?;
    cell.fit_time_ms = Some(t.elapsed().as_secs_f64() * 1e3);
    let (encode_ms, ztr) = timed_transform(&encoder, &xtr)?;
    cell.encode_time_ms = Some(encode_ms);
    let zte = encoder.transform(&xte)?;
    cell.output_dim = Some(ztr.cols());
    cell.spectral = spectral_report(&ztr).ok();

    let t = Instant::now();
    let model = train_logistic(&ztr, &ytr, input.ds.class_count(), probe)?;
    cell.train_time_s = Some(t.elapsed().as_secs_f64());
    cell.probe_iterations = Some(model.iterations);

    let metrics = compute_metrics(&yte, &model.predict(&zte)?, input.ds.class_count())?;
    cell.accuracy = Some(metrics.accuracy);
    cell.macro_f1 = Some(metrics.macro_f1);
    Ok(())
}

struct CkaSeed {
    dataset: String,
    seed: u64,
    sample_count: usize,
    values: Vec<(String, String, f64)>,
}

/// Pairwise CKA for one (dataset, seed) on a shared row subsample of the
/// training split: encodings against each other and against standardized
/// features.
fn cka_for_seed(ds: &Dataset, split: &Split, seed: u64, qie: &[MethodKind], poly_budget: usize) -> Result<CkaSeed> {
    let (xtr, _) = ds.subset(&split.train);
    let mut stream = stream_for(ds.name(), "cka", seed, "rows");
    let rows = cka_rows(xtr.rows(), CKA_MAX_ROWS, &mut stream);
    let x = xtr.select_rows(&rows);

    let mut reps: Vec<(String, Matrix)> = Vec::new();
    for &m in qie {
        let mut enc = Encoder::new(m, poly_budget);
        enc.fit(&xtr, &mut stream_for(ds.name(), m.name(), seed, "fit"))?;
        reps.push((m.name().to_owned(), enc.transform(&x)?));
    }
    reps.push((CKA_REFERENCE.to_owned(), fit_standardizer(&xtr)?.transform(&x)?));

    let mut values = Vec::new();
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            let (a, b) = if reps[i].0 <= reps[j].0 { (i, j) } else { (j, i) };
            let v = linear_cka(&reps[a].1, &reps[b].1)?;
            values.push((reps[a].0.clone(), reps[b].0.clone(), v.value));
        }
    }
    Ok(CkaSeed {
        dataset: ds.name().to_owned(),
        seed,
        sample_count: rows.len(),
        values,
    })
}

/// Runs every (dataset, method, seed) cell. All methods of a (dataset, seed)
/// share one stratified split. A dataset that fails to load or split is
/// recorded in `errors` and skipped.
pub fn run_benchmark(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let seeds = config.effective_seeds();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut errors = Vec::new();
    let mut prepared: Vec<(Dataset, Vec<(u64, Split)>)> = Vec::new();
    for spec in &config.datasets {
        let ds = match spec.load(&config.base_dir) {
            Ok(ds) => ds,
            Err(e) => {
                errors.push(ErrorRecord {
                    dataset: spec.name.clone(),
                    stage: "load".into(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let splits: Result<Vec<_>> = seeds
            .iter()
            .map(|&s| {
                Ok((
                    s,
                    stratified_split(&ds, config.test_fraction, &mut split_stream(ds.name(), s))?,
                ))
            })
            .collect();
        match splits {
            Ok(splits) => prepared.push((ds, splits)),
            Err(e) => errors.push(ErrorRecord {
                dataset: spec.name.clone(),
                stage: "split".into(),
                message: e.to_string(),
            }),
        }
    }

    let mut inputs = Vec::new();
    for (ds, splits) in &prepared {
        for (seed, split) in splits {
            for &method in &config.methods {
                inputs.push(CellInput {
                    ds,
                    split,
                    seed: *seed,
                    method,
                });
            }
        }
    }
    let qie: Vec<MethodKind> = config
        .methods
        .iter()
        .copied()
        .filter(|m| m.family() == MethodFamily::Qie)
        .collect();
    let cka_inputs: Vec<(&Dataset, &Split, u64)> = prepared
        .iter()
        .flat_map(|(ds, splits)| splits.iter().map(move |(s, sp)| (ds, sp, *s)))
        .collect();

    let (mut cells, cka_seeds) = pool.install(|| {
        let cells: Vec<CellResult> = inputs
            .par_iter()
            .map(|i| run_cell(i, &config.probe, config.poly_budget))
            .collect();
        let cka: Vec<Result<CkaSeed>> = cka_inputs
            .par_iter()
            .map(|(ds, sp, s)| cka_for_seed(ds, sp, *s, &qie, config.poly_budget))
            .collect();
        (cells, cka)
    });
    cells.sort_by(|a, b| (&a.dataset, a.method.name(), a.seed).cmp(&(&b.dataset, b.method.name(), b.seed)));

    let mut grouped: BTreeMap<(String, String, String), (usize, Vec<SeedValue>)> = BTreeMap::new();
    for (r, (ds, _, seed)) in cka_seeds.into_iter().zip(&cka_inputs) {
        match r {
            Ok(c) => {
                for (a, b, v) in c.values {
                    let e = grouped
                        .entry((c.dataset.clone(), a, b))
                        .or_insert((c.sample_count, Vec::new()));
                    e.1.push(SeedValue { seed: c.seed, value: v });
                }
            }
            Err(e) => errors.push(ErrorRecord {
                dataset: ds.name().to_owned(),
                stage: format!("cka/{seed}"),
                message: e.to_string(),
            }),
        }
    }
    let cka = grouped
        .into_iter()
        .map(|((dataset, a, b), (sample_count, mut per_seed))| {
            per_seed.sort_by_key(|s| s.seed);
            CkaRecord {
                dataset,
                a,
                b,
                mean: per_seed.iter().map(|s| s.value).sum::<f64>() / per_seed.len() as f64,
                sample_count,
                per_seed,
            }
        })
        .collect();

    let mut comparisons = Vec::new();
    let mut by_dataset: BTreeMap<&str, Vec<ScoreRecord>> = BTreeMap::new();
    for c in &cells {
        if let (Some(accuracy), Some(macro_f1)) = (c.accuracy, c.macro_f1) {
            by_dataset.entry(&c.dataset).or_default().push(ScoreRecord {
                dataset: c.dataset.clone(),
                method: c.method.name().to_owned(),
                family: c.method.family(),
                seed: c.seed,
                accuracy,
                macro_f1,
            });
        }
    }
    for (dataset, records) in by_dataset {
        match compare_to_best(&records, config.baseline_metric) {
            Ok(mut c) => comparisons.append(&mut c),
            Err(e) => errors.push(ErrorRecord {
                dataset: dataset.to_owned(),
                stage: "compare".into(),
                message: e.to_string(),
            }),
        }
    }

    let mut splits: Vec<SplitRecord> = prepared
        .iter()
        .flat_map(|(ds, splits)| {
            splits.iter().map(|(seed, s)| SplitRecord {
                dataset: ds.name().to_owned(),
                seed: *seed,
                digest: s.digest(),
                train: s.train.clone(),
                test: s.test.clone(),
            })
        })
        .collect();
    splits.sort_by(|a, b| (&a.dataset, a.seed).cmp(&(&b.dataset, b.seed)));

    Ok(Report {
        schema_version: SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_owned(),
        config: config.clone(),
        seeds,
        splits,
        cells,
        comparisons,
        cka,
        errors,
    })
}
