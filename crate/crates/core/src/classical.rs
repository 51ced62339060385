//! Classical comparison maps: random Fourier features, polynomial expansion
//! and PCA, each sized to match an encoding's output dimension.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::numerics::{svd, Matrix, RandomStream};

/// Random Fourier features `z(x)_j = sqrt(2/D) cos(ω_jᵀx + b_j)` with
/// `ω ~ N(0, σ⁻² I)` and `b ~ U[0, 2π)`.
#[derive(Debug, Clone)]
pub struct RffMap {
    omega: Array2<f64>,
    phases: Array1<f64>,
    sigma: f64,
}

pub fn fit_rff(d: usize, output_dim: usize, sigma: f64, stream: &mut RandomStream) -> Result<RffMap> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "rff bandwidth must be positive, got {sigma}"
        )));
    }
    if output_dim == 0 {
        return Err(Error::InvalidInput("rff output dimension must be >= 1".into()));
    }
    let omega = Array2::from_shape_fn((d, output_dim), |_| stream.normal() / sigma);
    let phases = Array1::from_shape_fn(output_dim, |_| 2.0 * std::f64::consts::PI * stream.uniform());
    Ok(RffMap { omega, phases, sigma })
}

impl RffMap {
    pub fn input_dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.omega.ncols()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

pub fn rff_transform(map: &RffMap, x: &Matrix) -> Result<Matrix> {
    if x.cols() != map.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "rff transform",
            expected: map.input_dim(),
            found: x.cols(),
        });
    }
    let scale = (2.0 / map.output_dim() as f64).sqrt();
    let mut z = x.as_array().dot(&map.omega);
    for mut row in z.rows_mut() {
        for (v, b) in row.iter_mut().zip(map.phases.iter()) {
            *v = scale * (*v + b).cos();
        }
    }
    Ok(Matrix::from_array_unchecked(z))
}

/// Median pairwise Euclidean distance over at most `cap` stream-chosen rows.
/// Falls back to 1 when the median is zero.
pub fn median_heuristic(train: &Matrix, cap: usize, stream: &mut RandomStream) -> f64 {
    let rows = stream.sample_indices(train.rows(), cap.min(train.rows()));
    let mut dist = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
    for (a, &i) in rows.iter().enumerate() {
        let ri = train.row_slice(i);
        for &j in &rows[a + 1..] {
            let rj = train.row_slice(j);
            let s: f64 = ri.iter().zip(rj).map(|(p, q)| (p - q) * (p - q)).sum();
            dist.push(s.sqrt());
        }
    }
    if dist.is_empty() {
        return 1.0;
    }
    let mid = dist.len() / 2;
    let (_, m, _) = dist.select_nth_unstable_by(mid, f64::total_cmp);
    let mut median = *m;
    if dist.len() % 2 == 0 {
        let lower = dist[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        median = 0.5 * (median + lower);
    }
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

/// `C(d + degree, degree) - 1`, or `None` on overflow.
pub fn poly_output_dim(d: usize, degree: usize) -> Option<usize> {
    let mut c: u128 = 1;
    for i in 1..=degree as u128 {
        c = c.checked_mul(d as u128 + i)? / i;
    }
    usize::try_from(c - 1).ok()
}

fn check_degree(degree: usize) -> Result<()> {
    if !(2..=3).contains(&degree) {
        return Err(Error::InvalidInput(format!(
            "polynomial degree must be 2 or 3, got {degree}"
        )));
    }
    Ok(())
}

/// Fails with `Infeasible` when `rows * output_dim` exceeds `budget`.
pub fn check_poly_budget(rows: usize, d: usize, degree: usize, budget: usize) -> Result<usize> {
    check_degree(degree)?;
    let dim = poly_output_dim(d, degree).unwrap_or(usize::MAX);
    let needed = rows.saturating_mul(dim);
    if needed > budget {
        return Err(Error::Infeasible { needed, budget });
    }
    Ok(dim)
}

/// All monomials of total degree `1..=degree`, no constant term, in graded
/// lexicographic order: `x1..xd, x1x1, x1x2, .., xdxd, x1x1x1, ..`.
pub fn poly_expand(x: &Matrix, degree: usize, budget: usize) -> Result<Matrix> {
    let d = x.cols();
    let dim = check_poly_budget(x.rows(), d, degree, budget)?;

    // (parent term, variable, lowest allowed next variable)
    let mut terms: Vec<(Option<usize>, usize)> = (0..d).map(|j| (None, j)).collect();
    let mut level_start = 0;
    for _ in 2..=degree {
        let level_end = terms.len();
        for parent in level_start..level_end {
            let last = terms[parent].1;
            for v in last..d {
                terms.push((Some(parent), v));
            }
        }
        level_start = level_end;
    }
    debug_assert_eq!(terms.len(), dim);

    let mut out = Array2::zeros((x.rows(), dim));
    for (i, mut dst) in out.rows_mut().into_iter().enumerate() {
        let row = x.row_slice(i);
        for (t, &(parent, v)) in terms.iter().enumerate() {
            let base = parent.map_or(1.0, |p| dst[p]);
            dst[t] = base * row[v];
        }
    }
    Matrix::from_array(out)
}

/// Principal components of the training rows.
#[derive(Debug, Clone)]
pub struct PcaMap {
    mean: Array1<f64>,
    /// `d × k`, orthonormal columns.
    components: Array2<f64>,
    explained_variance: Vec<f64>,
}

/// Keeps `k = min(target_dim, rank)` components, the rank counted at
/// `1e-10 · σ_max`.
pub fn fit_pca(train: &Matrix, target_dim: usize) -> Result<PcaMap> {
    if train.rows() < 2 {
        return Err(Error::InvalidInput("pca needs at least 2 training rows".into()));
    }
    let mean = train.as_array().mean_axis(Axis(0)).expect("nonempty");
    let centered = Matrix::from_array_unchecked(train.as_array() - &mean);
    let dec = svd(&centered)?;
    let s = &dec.singular_values;
    let cutoff = 1e-10 * s[0];
    let rank = s.iter().filter(|&&v| v > cutoff && v > 0.0).count();
    let k = target_dim.min(rank);
    let components = dec.v.as_array().slice(ndarray::s![.., ..k]).to_owned();
    let denom = (train.rows() - 1) as f64;
    Ok(PcaMap {
        mean,
        components,
        explained_variance: s[..k].iter().map(|v| v * v / denom).collect(),
    })
}

impl PcaMap {
    pub fn input_dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.components.ncols()
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn components(&self) -> Matrix {
        Matrix::from_array_unchecked(self.components.clone())
    }

    pub fn inverse_transform(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "pca inverse",
                expected: self.output_dim(),
                found: z.cols(),
            });
        }
        Ok(Matrix::from_array_unchecked(
            z.as_array().dot(&self.components.t()) + &self.mean,
        ))
    }
}

pub fn pca_transform(map: &PcaMap, x: &Matrix) -> Result<Matrix> {
    if x.cols() != map.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "pca transform",
            expected: map.input_dim(),
            found: x.cols(),
        });
    }
    Ok(Matrix::from_array_unchecked(
        (x.as_array() - &map.mean).dot(&map.components),
    ))
}
