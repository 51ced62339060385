//! Representation geometry: effective rank, condition number and linear
//! centered kernel alignment.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{singular_values, Matrix, RandomStream};

/// Singular values below this fraction of `σ_max` are ignored by `κ`.
pub const KAPPA_RELATIVE_FLOOR: f64 = 1e-12;
pub const KAPPA_CAP: f64 = 1e15;
/// Normalized singular values below this contribute nothing to the entropy.
pub const ERANK_FLOOR: f64 = 1e-15;
pub const CKA_MAX_ROWS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub effective_rank: f64,
    pub condition_number: f64,
    pub log10_kappa: f64,
    pub normalized_erank: f64,
    /// Set when only `σ_max` survived the floor and `κ` was reported as the cap.
    pub kappa_capped: bool,
}

fn nonzero_spectrum(x: &Matrix, what: &'static str) -> Result<Vec<f64>> {
    if x.rows() == 0 || x.cols() == 0 || x.is_zero() {
        return Err(Error::ZeroMatrix(what));
    }
    singular_values(x)
}

/// `exp(-Σ p log p)` with `p = σ / Σσ`.
pub fn effective_rank_from_values(sigma: &[f64]) -> f64 {
    let total: f64 = sigma.iter().sum();
    let entropy: f64 = sigma
        .iter()
        .map(|s| s / total)
        .filter(|&p| p >= ERANK_FLOOR)
        .map(|p| -p * p.ln())
        .sum();
    entropy.exp()
}

/// `(κ, capped)` from a nonincreasing spectrum.
pub fn condition_from_values(sigma: &[f64]) -> (f64, bool) {
    let smax = sigma[0];
    let floor = KAPPA_RELATIVE_FLOOR * smax;
    let retained: Vec<f64> = sigma.iter().copied().filter(|&s| s >= floor).collect();
    if retained.len() == 1 && sigma.len() > 1 {
        return (KAPPA_CAP, true);
    }
    let smin = *retained.last().expect("σ_max is retained");
    let kappa = smax / smin;
    if kappa > KAPPA_CAP {
        (KAPPA_CAP, true)
    } else {
        (kappa, false)
    }
}

pub fn effective_rank(x: &Matrix) -> Result<f64> {
    Ok(effective_rank_from_values(&nonzero_spectrum(x, "effective rank")?))
}

pub fn condition_number(x: &Matrix) -> Result<f64> {
    Ok(condition_from_values(&nonzero_spectrum(x, "condition number")?).0)
}

/// Effective rank and condition number from a single decomposition.
pub fn spectral_report(x: &Matrix) -> Result<SpectralReport> {
    let sigma = nonzero_spectrum(x, "spectral report")?;
    let erank = effective_rank_from_values(&sigma);
    let (kappa, capped) = condition_from_values(&sigma);
    Ok(SpectralReport {
        effective_rank: erank,
        condition_number: kappa,
        log10_kappa: kappa.log10(),
        normalized_erank: erank / x.cols() as f64,
        kappa_capped: capped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CkaValue {
    pub value: f64,
    pub sample_count: usize,
}

fn centered(x: &Matrix) -> Array2<f64> {
    let mean = x.as_array().mean_axis(Axis(0)).expect("rows");
    x.as_array() - &mean
}

fn frob(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Doubly centered Gram matrix of one representation, reusable across pairs.
#[derive(Debug, Clone)]
pub struct CenteredGram {
    gram: Array2<f64>,
    norm: f64,
}

impl CenteredGram {
    pub fn new(x: &Matrix) -> Result<Self> {
        let c = centered(x);
        let gram = c.dot(&c.t());
        let norm = frob(&gram);
        if norm == 0.0 {
            return Err(Error::ZeroVariance);
        }
        Ok(CenteredGram { gram, norm })
    }

    pub fn rows(&self) -> usize {
        self.gram.nrows()
    }

    /// `⟨K_X, K_Y⟩_F / (‖K_X‖_F ‖K_Y‖_F)`
    pub fn cka(&self, other: &CenteredGram) -> Result<CkaValue> {
        if self.rows() != other.rows() {
            return Err(Error::DimensionMismatch {
                context: "cka rows",
                expected: self.rows(),
                found: other.rows(),
            });
        }
        let cross: f64 = self.gram.iter().zip(other.gram.iter()).map(|(a, b)| a * b).sum();
        Ok(CkaValue {
            value: (cross / (self.norm * other.norm)).clamp(0.0, 1.0),
            sample_count: self.rows(),
        })
    }
}

/// Linear CKA on all rows: `‖ỸᵀX̃‖²_F / (‖X̃ᵀX̃‖_F ‖ỸᵀỸ‖_F)` with column-centered
/// inputs. Works in feature space or sample space, whichever is cheaper.
pub fn linear_cka(x: &Matrix, y: &Matrix) -> Result<CkaValue> {
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch {
            context: "cka rows",
            expected: x.rows(),
            found: y.rows(),
        });
    }
    let n = x.rows();
    let (dx, dy) = (x.cols(), y.cols());
    let feature_cost = n * (dx * dy + dx * dx + dy * dy);
    let sample_cost = n * n * (dx + dy + 1);
    if sample_cost < feature_cost {
        return CenteredGram::new(x)?.cka(&CenteredGram::new(y)?);
    }
    let cx = centered(x);
    let cy = centered(y);
    let xx = frob(&cx.t().dot(&cx));
    let yy = frob(&cy.t().dot(&cy));
    if xx == 0.0 || yy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let yx = frob(&cy.t().dot(&cx));
    Ok(CkaValue {
        value: (yx * yx / (xx * yy)).clamp(0.0, 1.0),
        sample_count: n,
    })
}

/// Rows kept for CKA: everything up to `cap`, otherwise a stream-chosen
/// sorted subset of size `cap`.
pub fn cka_rows(n: usize, cap: usize, stream: &mut RandomStream) -> Vec<usize> {
    if n <= cap {
        (0..n).collect()
    } else {
        stream.sample_indices(n, cap)
    }
}

pub fn linear_cka_subsampled(x: &Matrix, y: &Matrix, cap: usize, stream: &mut RandomStream) -> Result<CkaValue> {
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch {
            context: "cka rows",
            expected: x.rows(),
            found: y.rows(),
        });
    }
    if x.rows() <= cap {
        return linear_cka(x, y);
    }
    let rows = cka_rows(x.rows(), cap, stream);
    linear_cka(&x.select_rows(&rows), &y.select_rows(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derive_stream;

    fn gaussian(rows: usize, cols: usize, label: &str) -> Matrix {
        let mut s = derive_stream(9, label);
        Matrix::new(rows, cols, (0..rows * cols).map(|_| s.normal()).collect()).unwrap()
    }

    #[test]
    fn rank_one_and_uniform_spectra() {
        let r1 = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        assert!((effective_rank(&r1).unwrap() - 1.0).abs() < 1e-9);
        let eye = Matrix::identity(5);
        assert!((effective_rank(&eye).unwrap() - 5.0).abs() < 1e-9);
        let mut padded = Matrix::zeros(6, 4).into_array();
        for i in 0..3 {
            padded[[i, i]] = 2.5;
        }
        let padded = Matrix::from_array(padded).unwrap();
        assert!((effective_rank(&padded).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn condition_numbers() {
        assert!((condition_number(&Matrix::identity(3)).unwrap() - 1.0).abs() < 1e-9);
        let d = Matrix::from_rows(&[[10.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((condition_number(&d).unwrap() - 10.0).abs() < 1e-9);
        let r1 = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let rep = spectral_report(&r1).unwrap();
        assert!(rep.kappa_capped);
        assert_eq!(rep.condition_number, KAPPA_CAP);
        let col = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert_eq!(spectral_report(&col).unwrap().condition_number, 1.0);
    }

    #[test]
    fn zero_matrix_errors() {
        assert!(matches!(
            effective_rank(&Matrix::zeros(3, 3)),
            Err(Error::ZeroMatrix(_))
        ));
        assert!(condition_number(&Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn cka_self_and_routes_agree() {
        let x = gaussian(40, 6, "x");
        let y = gaussian(40, 9, "y");
        assert!((linear_cka(&x, &x).unwrap().value - 1.0).abs() < 1e-9);
        let by_gram = CenteredGram::new(&x)
            .unwrap()
            .cka(&CenteredGram::new(&y).unwrap())
            .unwrap();
        let wide = gaussian(40, 300, "w");
        let direct = linear_cka(&x, &y).unwrap();
        assert!((by_gram.value - direct.value).abs() < 1e-12);
        let g = CenteredGram::new(&x)
            .unwrap()
            .cka(&CenteredGram::new(&wide).unwrap())
            .unwrap();
        assert!((g.value - linear_cka(&x, &wide).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn cka_errors() {
        let x = gaussian(10, 3, "x");
        assert!(linear_cka(&x, &gaussian(11, 3, "y")).is_err());
        let constant = Matrix::new(10, 2, vec![3.0; 20]).unwrap();
        assert!(matches!(linear_cka(&x, &constant), Err(Error::ZeroVariance)));
    }

    #[test]
    fn subsampling_caps_rows() {
        let x = gaussian(50, 3, "x");
        let y = gaussian(50, 2, "y");
        let v = linear_cka_subsampled(&x, &y, 20, &mut derive_stream(1, "c")).unwrap();
        assert_eq!(v.sample_count, 20);
        let again = linear_cka_subsampled(&x, &y, 20, &mut derive_stream(1, "c")).unwrap();
        assert_eq!(v, again);
    }
}
