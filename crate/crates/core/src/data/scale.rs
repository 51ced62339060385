use crate::error::{Error, Result};
use crate::numerics::Matrix;

const CONSTANT_COLUMN: f64 = 1e-12;

fn check_train(train: &Matrix) -> Result<()> {
    if train.rows() < 2 {
        return Err(Error::InvalidInput(format!(
            "scaler needs at least 2 training rows, got {}",
            train.rows()
        )));
    }
    Ok(())
}

fn check_width(expected: usize, x: &Matrix, context: &'static str) -> Result<()> {
    if x.cols() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found: x.cols(),
        });
    }
    Ok(())
}

/// Per-column mean and sample standard deviation of the training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_standardizer(train: &Matrix) -> Result<Standardizer> {
    check_train(train)?;
    let n = train.rows() as f64;
    let d = train.cols();
    let mut mean = vec![0.0; d];
    for i in 0..train.rows() {
        for (m, v) in mean.iter_mut().zip(train.row_slice(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for i in 0..train.rows() {
        for ((s, v), m) in var.iter_mut().zip(train.row_slice(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / (n - 1.0)).sqrt()).collect();
    Ok(Standardizer { mean, std })
}

impl Standardizer {
    /// `(x - mean) / std`; columns with `std < 1e-12` map to zero.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        check_width(self.mean.len(), x, "standardize")?;
        let mut out = x.as_array().clone();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = if *s < CONSTANT_COLUMN { 0.0 } else { (*v - m) / s };
            }
        }
        Ok(Matrix::from_array_unchecked(out))
    }
}

/// Per-column training min and max, mapping onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_minmax(train: &Matrix) -> Result<MinMaxScaler> {
    check_train(train)?;
    let d = train.cols();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for i in 0..train.rows() {
        for (j, &v) in train.row_slice(i).iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(MinMaxScaler { min, max })
}

impl MinMaxScaler {
    pub fn scale_value(&self, j: usize, v: f64) -> f64 {
        let range = self.max[j] - self.min[j];
        if range < CONSTANT_COLUMN {
            return 0.0;
        }
        (2.0 * (v - self.min[j]) / range - 1.0).clamp(-1.0, 1.0)
    }

    /// Train min to -1, train max to +1, clamping values outside the range.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        check_width(self.min.len(), x, "min-max scale")?;
        let mut out = x.as_array().clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.scale_value(j, *v);
            }
        }
        Ok(Matrix::from_array_unchecked(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> Matrix {
        Matrix::new(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn standardizes_to_unit_sample_std() {
        let s = fit_standardizer(&col(&[1.0, 2.0, 3.0])).unwrap();
        let t = s.transform(&col(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(t.column(0), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let s = fit_standardizer(&col(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(s.transform(&col(&[5.0, 7.0])).unwrap().column(0), vec![0.0, 0.0]);
        let m = fit_minmax(&col(&[5.0, 5.0])).unwrap();
        assert_eq!(m.transform(&col(&[3.0])).unwrap().get(0, 0), 0.0);
    }

    #[test]
    fn test_value_uses_train_statistics() {
        let s = Standardizer {
            mean: vec![2.0],
            std: vec![1.0],
        };
        assert_eq!(s.transform(&col(&[4.0])).unwrap().get(0, 0), 2.0);
    }

    #[test]
    fn minmax_midpoint_endpoints_and_clamp() {
        let m = fit_minmax(&col(&[0.0, 10.0])).unwrap();
        let t = m.transform(&col(&[5.0, 10.0, 0.0, 12.0, -3.0])).unwrap();
        assert_eq!(t.column(0), vec![0.0, 1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn fit_needs_two_rows() {
        assert!(fit_standardizer(&col(&[1.0])).is_err());
        assert!(fit_minmax(&Matrix::zeros(0, 3)).is_err());
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let m = fit_minmax(&col(&[0.0, 1.0])).unwrap();
        assert!(m.transform(&Matrix::zeros(1, 2)).is_err());
    }
}
