//! Paired comparisons of an encoding against the strongest classical
//! baseline: paired t, exact Wilcoxon signed-rank and paired Cohen's d.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{student_t_two_sided, t_quantile};

/// Two-sided significance level used when reporting.
pub const ALPHA: f64 = 0.05;
/// Largest number of nonzero differences handled by full sign enumeration.
pub const ENUMERATION_LIMIT: usize = 20;
/// Relative tolerance under which two |differences| count as tied.
const TIE_TOLERANCE: f64 = 1e-9;
/// Differences whose spread is below this fraction of their mean are
/// treated as constant.
const CONSTANT_TOLERANCE: f64 = 1e-12;

fn differences(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "paired scores",
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("paired scores"));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

fn mean_sd(d: &[f64]) -> (f64, f64) {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    (mean, if sd <= CONSTANT_TOLERANCE * mean.abs() { 0.0 } else { sd })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    #[serde(with = "crate::serde_float::float")]
    pub t: f64,
    pub p: f64,
    pub df: u32,
    /// Every difference was zero; reported as `t = 0`, `p = 1`.
    pub degenerate: bool,
}

/// Paired t-test on `a - b`, two-sided.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TTest> {
    let d = differences(a, b)?;
    if d.len() < 2 {
        return Err(Error::InvalidInput("paired t needs at least 2 pairs".into()));
    }
    let df = (d.len() - 1) as u32;
    if d.iter().all(|&v| v == 0.0) {
        return Ok(TTest {
            t: 0.0,
            p: 1.0,
            df,
            degenerate: true,
        });
    }
    let (mean, sd) = mean_sd(&d);
    let t = if sd == 0.0 {
        f64::INFINITY.copysign(mean)
    } else {
        mean / (sd / (d.len() as f64).sqrt())
    };
    Ok(TTest {
        t,
        p: student_t_two_sided(t, df)?,
        df,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// `min(W+, W-)`
    pub statistic: f64,
    pub w_plus: f64,
    pub p: f64,
    /// Nonzero differences actually ranked.
    pub n_used: usize,
    pub degenerate: bool,
}

/// Average ranks (1-based) of `|d|`, ties within a relative tolerance.
fn average_ranks(abs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&i, &j| abs[i].total_cmp(&abs[j]));
    let mut ranks = vec![0.0; abs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() {
            let (lo, hi) = (abs[order[start]], abs[order[end]]);
            if hi - lo > TIE_TOLERANCE * hi {
                break;
            }
            end += 1;
        }
        // positions start..end share the mean of ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

/// Counts of every achievable doubled `W+` under random signs, by
/// enumerating all `2^m` assignments.
fn null_by_enumeration(doubled: &[u64]) -> (Vec<f64>, f64) {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0.0; total as usize + 1];
    for mask in 0u64..(1u64 << doubled.len()) {
        let mut s = 0;
        for (k, r) in doubled.iter().enumerate() {
            if mask >> k & 1 == 1 {
                s += r;
            }
        }
        counts[s as usize] += 1.0;
    }
    (counts, (1u64 << doubled.len()) as f64)
}

/// Same distribution built one rank at a time; exact for any `m`.
fn null_by_convolution(doubled: &[u64]) -> (Vec<f64>, f64) {
    let total: u64 = doubled.iter().sum();
    let mut prob = vec![0.0; total as usize + 1];
    prob[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach + r).rev() {
            let keep = if s <= reach { prob[s] } else { 0.0 };
            let add = if s >= r { prob[s - r] } else { 0.0 };
            prob[s] = 0.5 * (keep + add);
        }
        reach += r;
    }
    (prob, 1.0)
}

/// Exact two-sided Wilcoxon signed-rank test on `a - b`. Zero differences
/// are dropped; tied magnitudes share their average rank.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<Wilcoxon> {
    let d: Vec<f64> = differences(a, b)?.into_iter().filter(|&v| v != 0.0).collect();
    if d.is_empty() {
        return Ok(Wilcoxon {
            statistic: 0.0,
            w_plus: 0.0,
            p: 1.0,
            n_used: 0,
            degenerate: true,
        });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&abs);
    let doubled: Vec<u64> = ranks.iter().map(|r| (2.0 * r).round() as u64).collect();
    let w2: u64 = doubled.iter().zip(&d).filter(|(_, &v)| v > 0.0).map(|(r, _)| r).sum();
    let total2: u64 = doubled.iter().sum();

    let (dist, norm) = if d.len() <= ENUMERATION_LIMIT {
        null_by_enumeration(&doubled)
    } else {
        null_by_convolution(&doubled)
    };
    let lower: f64 = dist[..=w2 as usize].iter().sum::<f64>() / norm;
    let upper: f64 = dist[w2 as usize..].iter().sum::<f64>() / norm;
    let p = (2.0 * lower.min(upper)).min(1.0);
    let w_plus = w2 as f64 / 2.0;
    let w_minus = (total2 - w2) as f64 / 2.0;
    Ok(Wilcoxon {
        statistic: w_plus.min(w_minus),
        w_plus,
        p,
        n_used: d.len(),
        degenerate: false,
    })
}

/// `mean(a - b) / sd(a - b)`. Zero when every difference is zero, signed
/// infinity when the differences are constant and nonzero.
pub fn cohens_d_paired(a: &[f64], b: &[f64]) -> Result<f64> {
    let d = differences(a, b)?;
    if d.len() < 2 {
        return Err(Error::InvalidInput("Cohen's d needs at least 2 pairs".into()));
    }
    let (mean, sd) = mean_sd(&d);
    if mean == 0.0 && sd == 0.0 {
        return Ok(0.0);
    }
    if sd == 0.0 {
        return Ok(f64::INFINITY.copysign(mean));
    }
    Ok(mean / sd)
}

/// `mean ± t_{(1+level)/2, n-1} · sd / √n` for the paired differences.
pub fn mean_difference_ci(a: &[f64], b: &[f64], level: f64) -> Result<(f64, f64)> {
    let d = differences(a, b)?;
    if d.len() < 2 {
        return Err(Error::InvalidInput("confidence interval needs at least 2 pairs".into()));
    }
    let (mean, sd) = mean_sd(&d);
    let q = t_quantile(0.5 + level / 2.0, (d.len() - 1) as u32)?;
    let half = q * sd / (d.len() as f64).sqrt();
    Ok((mean - half, mean + half))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodFamily {
    Qie,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    #[default]
    Accuracy,
    MacroF1,
}

/// One scored (dataset, method, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub dataset: String,
    pub method: String,
    pub family: MethodFamily,
    pub seed: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
}

impl ScoreRecord {
    fn score(&self, metric: SelectionMetric) -> f64 {
        match metric {
            SelectionMetric::Accuracy => self.accuracy,
            SelectionMetric::MacroF1 => self.macro_f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub dataset: String,
    pub method: String,
    pub baseline: String,
    pub metric: SelectionMetric,
    pub seeds: Vec<u64>,
    pub method_scores: Vec<f64>,
    pub baseline_scores: Vec<f64>,
    pub method_mean: f64,
    pub baseline_mean: f64,
    /// `method_mean - baseline_mean`; negative means the encoding is worse.
    pub mean_difference: f64,
    pub t_test: Option<TTest>,
    pub wilcoxon: Wilcoxon,
    #[serde(with = "crate::serde_float::opt_float")]
    pub cohens_d: Option<f64>,
    pub ci95: Option<(f64, f64)>,
}

impl PairedComparison {
    pub fn build(
        dataset: &str,
        method: &str,
        baseline: &str,
        metric: SelectionMetric,
        seeds: Vec<u64>,
        method_scores: Vec<f64>,
        baseline_scores: Vec<f64>,
    ) -> Result<Self> {
        let n = method_scores.len() as f64;
        let method_mean = method_scores.iter().sum::<f64>() / n;
        let baseline_mean = baseline_scores.iter().sum::<f64>() / n;
        let enough = method_scores.len() >= 2;
        Ok(PairedComparison {
            dataset: dataset.to_owned(),
            method: method.to_owned(),
            baseline: baseline.to_owned(),
            metric,
            t_test: if enough {
                Some(paired_t(&method_scores, &baseline_scores)?)
            } else {
                None
            },
            wilcoxon: wilcoxon_signed_rank(&method_scores, &baseline_scores)?,
            cohens_d: if enough {
                Some(cohens_d_paired(&method_scores, &baseline_scores)?)
            } else {
                None
            },
            ci95: if enough {
                Some(mean_difference_ci(&method_scores, &baseline_scores, 0.95)?)
            } else {
                None
            },
            mean_difference: method_mean - baseline_mean,
            method_mean,
            baseline_mean,
            seeds,
            method_scores,
            baseline_scores,
        })
    }

    /// 95% interval for Cohen's d obtained by scaling the mean-difference
    /// interval by the difference standard deviation.
    pub fn cohens_d_ci(&self) -> Option<(f64, f64)> {
        let d = self.cohens_d?;
        let (lo, hi) = self.ci95?;
        if !d.is_finite() || self.mean_difference == 0.0 {
            return Some((d, d));
        }
        let sd = self.mean_difference / d;
        Some((lo / sd, hi / sd))
    }
}

/// Per dataset, picks the classical method with the highest mean score (ties
/// to the lexicographically smallest name) among those scored on every seed,
/// then pairs each encoding with it seed by seed.
pub fn compare_to_best(records: &[ScoreRecord], metric: SelectionMetric) -> Result<Vec<PairedComparison>> {
    let mut by_dataset: BTreeMap<&str, BTreeMap<&str, BTreeMap<u64, &ScoreRecord>>> = BTreeMap::new();
    for r in records {
        by_dataset
            .entry(&r.dataset)
            .or_default()
            .entry(&r.method)
            .or_default()
            .insert(r.seed, r);
    }
    let mut out = Vec::new();
    for (dataset, methods) in by_dataset {
        let seeds: BTreeSet<u64> = methods.values().flat_map(|m| m.keys().copied()).collect();
        let family = |m: &BTreeMap<u64, &ScoreRecord>| m.values().next().map(|r| r.family);
        let mean = |m: &BTreeMap<u64, &ScoreRecord>| m.values().map(|r| r.score(metric)).sum::<f64>() / m.len() as f64;

        let mut best: Option<(&str, f64)> = None;
        for (name, cells) in &methods {
            if family(cells) != Some(MethodFamily::Classical) || cells.len() != seeds.len() {
                continue;
            }
            let m = mean(cells);
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((name, m));
            }
        }
        let Some((baseline, _)) = best else { continue };
        let base_cells = &methods[baseline];

        for (name, cells) in &methods {
            if family(cells) != Some(MethodFamily::Qie) {
                continue;
            }
            if let Some(&gap) = seeds.iter().find(|s| !cells.contains_key(s)) {
                return Err(Error::Pairing {
                    dataset: dataset.to_owned(),
                    method: (*name).to_owned(),
                    seed: gap,
                });
            }
            let seed_list: Vec<u64> = seeds.iter().copied().collect();
            let ms = seed_list.iter().map(|s| cells[s].score(metric)).collect();
            let bs = seed_list.iter().map(|s| base_cells[s].score(metric)).collect();
            out.push(PairedComparison::build(
                dataset, name, baseline, metric, seed_list, ms, bs,
            )?);
        }
    }
    Ok(out)
}
