//! Multinomial logistic-regression probe and classification metrics.
//!
//! The objective is the summed cross-entropy plus `(λ/2)‖W‖²_F`, intercepts
//! unpenalized. It is minimized by L-BFGS with Armijo backtracking from a
//! zero start, so training is a deterministic function of the data.

use std::collections::VecDeque;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{axpy, dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop once `‖∇f‖₂ / n` falls to this value.
    pub tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            lambda: 1.0,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

const HISTORY: usize = 10;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// `features × classes`
    pub weights: Array2<f64>,
    pub intercepts: Array1<f64>,
    pub class_count: usize,
    pub lambda: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    /// Objective after each accepted step, starting from the zero model.
    pub loss_trace: Vec<f64>,
}

struct Problem<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    classes: usize,
    lambda: f64,
}

impl Problem<'_> {
    fn features(&self) -> usize {
        self.x.ncols()
    }

    fn split<'p>(&self, theta: &'p [f64]) -> (ArrayView2<'p, f64>, &'p [f64]) {
        let pw = self.features() * self.classes;
        let w = ArrayView2::from_shape((self.features(), self.classes), &theta[..pw]).expect("shape");
        (w, &theta[pw..])
    }

    /// Objective and gradient at `theta = [vec(W) row-major, b]`, in one
    /// streaming pass over the rows of `X`.
    fn evaluate(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let (p, c) = (self.features(), self.classes);
        let (w, b) = self.split(theta);
        // class-major copies so per-row work is contiguous
        let wt: Vec<Vec<f64>> = (0..c).map(|k| w.column(k).to_vec()).collect();
        let mut gt = vec![vec![0.0; p]; c];
        let mut gb = vec![0.0; c];
        let mut z = vec![0.0; c];
        let mut loss = 0.0;
        for (row, &yi) in self.x.rows().into_iter().zip(self.y) {
            let xi = row.to_slice().expect("standard layout");
            for k in 0..c {
                z[k] = b[k] + dot(xi, &wt[k]);
            }
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in z.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            loss += sum.ln() - z[yi].ln();
            for k in 0..c {
                let r = z[k] / sum - if k == yi { 1.0 } else { 0.0 };
                gb[k] += r;
                axpy(r, xi, &mut gt[k]);
            }
        }
        let mut penalty = 0.0;
        for j in 0..p {
            for k in 0..c {
                let wv = w[[j, k]];
                grad[j * c + k] = gt[k][j] + self.lambda * wv;
                penalty += wv * wv;
            }
        }
        grad[p * c..].copy_from_slice(&gb);
        loss + 0.5 * self.lambda * penalty
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Objective value and gradient for given parameters; used by gradient
/// checks.
pub fn objective_and_gradient(
    x: &Matrix,
    y: &[usize],
    class_count: usize,
    lambda: f64,
    weights: &Array2<f64>,
    intercepts: &Array1<f64>,
) -> (f64, Array2<f64>, Array1<f64>) {
    let p = Problem {
        x: x.view(),
        y,
        classes: class_count,
        lambda,
    };
    let mut theta: Vec<f64> = weights.iter().copied().collect();
    theta.extend(intercepts.iter());
    let mut grad = vec![0.0; theta.len()];
    let f = p.evaluate(&theta, &mut grad);
    let pw = x.cols() * class_count;
    let gw = Array2::from_shape_vec((x.cols(), class_count), grad[..pw].to_vec()).expect("shape");
    (f, gw, Array1::from(grad[pw..].to_vec()))
}

pub fn train_logistic(x: &Matrix, y: &[usize], class_count: usize, config: &ProbeConfig) -> Result<LogisticModel> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "probe labels",
            expected: x.rows(),
            found: y.len(),
        });
    }
    if !(config.lambda >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "lambda must be >= 0, got {}",
            config.lambda
        )));
    }
    if let Some(bad) = y.iter().find(|&&c| c >= class_count) {
        return Err(Error::InvalidInput(format!("label {bad} outside [0, {class_count})")));
    }
    let mut seen = vec![false; class_count];
    y.iter().for_each(|&c| seen[c] = true);
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(Error::SingleClass);
    }

    let problem = Problem {
        x: x.view(),
        y,
        classes: class_count,
        lambda: config.lambda,
    };
    let dim = (x.cols() + 1) * class_count;
    let n = x.rows() as f64;
    let mut theta = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut f = problem.evaluate(&theta, &mut grad);
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut iterations = 0;
    let mut trial = vec![0.0; dim];
    let mut trial_grad = vec![0.0; dim];

    while iterations < config.max_iter && norm(&grad) / n > config.tol {
        // two-loop recursion
        let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * dot(s, &dir);
            dir.iter_mut().zip(yv).for_each(|(d, yy)| *d -= a * yy);
            alphas.push(a);
        }
        let gamma = history
            .back()
            .map_or(1.0 / norm(&grad).max(1.0), |(s, yv, _)| dot(s, yv) / dot(yv, yv));
        dir.iter_mut().for_each(|d| *d *= gamma);
        for ((s, yv, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(yv, &dir);
            dir.iter_mut().zip(s).for_each(|(d, ss)| *d += (a - b) * ss);
        }
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = grad.iter().map(|g| -g / norm(&grad).max(1.0)).collect();
            slope = dot(&grad, &dir);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            trial
                .iter_mut()
                .zip(&theta)
                .zip(&dir)
                .for_each(|((t, th), d)| *t = th + step * d);
            let ft = problem.evaluate(&trial, &mut trial_grad);
            if ft.is_finite() && ft <= f + ARMIJO * step * slope {
                accepted = Some(ft);
                break;
            }
            step *= 0.5;
        }
        let Some(f_new) = accepted else { break };
        iterations += 1;

        let s: Vec<f64> = trial.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * norm(&s) * norm(&yv) {
            if history.len() == HISTORY {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        let decrease = f - f_new;
        f = f_new;
        trace.push(f);
        if decrease <= 1e-15 * f.abs().max(1.0) {
            break;
        }
    }

    let pw = x.cols() * class_count;
    Ok(LogisticModel {
        weights: Array2::from_shape_vec((x.cols(), class_count), theta[..pw].to_vec()).expect("shape"),
        intercepts: Array1::from(theta[pw..].to_vec()),
        class_count,
        lambda: config.lambda,
        iterations,
        final_grad_norm: norm(&grad),
        loss_trace: trace,
    })
}

impl LogisticModel {
    fn check(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.weights.nrows() {
            return Err(Error::DimensionMismatch {
                context: "probe features",
                expected: self.weights.nrows(),
                found: x.cols(),
            });
        }
        Ok(())
    }

    pub fn decision_function(&self, x: &Matrix) -> Result<Array2<f64>> {
        self.check(x)?;
        Ok(x.as_array().dot(&self.weights) + &self.intercepts)
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        let mut z = self.decision_function(x)?;
        for mut row in z.rows_mut() {
            softmax_inplace(row.as_slice_mut().expect("contiguous"));
        }
        Ok(Matrix::from_array_unchecked(z))
    }

    /// Argmax class; ties go to the lowest class id.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let z = self.decision_function(x)?;
        Ok(z.rows()
            .into_iter()
            .map(|row| argmax(row.as_slice().expect("contiguous")))
            .collect())
    }
}

pub fn softmax_inplace(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    row.iter_mut().for_each(|v| *v /= sum);
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

/// Accuracy and macro-F1 over all `class_count` classes. Precision, recall
/// and F1 are 0 wherever their denominator is 0.
pub fn compute_metrics(y_true: &[usize], y_pred: &[usize], class_count: usize) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            context: "metrics",
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidInput("metrics of an empty label set".into()));
    }
    let mut tp = vec![0usize; class_count];
    let mut predicted = vec![0usize; class_count];
    let mut actual = vec![0usize; class_count];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= class_count || p >= class_count {
            return Err(Error::InvalidInput(format!(
                "label {} outside [0, {class_count})",
                t.max(p)
            )));
        }
        actual[t] += 1;
        predicted[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let per_class: Vec<ClassMetrics> = (0..class_count)
        .map(|c| {
            let precision = ratio(tp[c], predicted[c]);
            let recall = ratio(tp[c], actual[c]);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support: actual[c],
            }
        })
        .collect();
    let correct: usize = tp.iter().sum();
    Ok(Metrics {
        accuracy: correct as f64 / y_true.len() as f64,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / class_count as f64,
        per_class,
    })
}
