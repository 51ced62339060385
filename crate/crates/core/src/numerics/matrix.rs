use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix(Array2<f64>);

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                found: entries.len(),
            });
        }
        let array = Array2::from_shape_vec((rows, cols), entries).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::from_array(array)
    }

    pub fn from_array(array: Array2<f64>) -> Result<Self> {
        if array.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self::from_array_unchecked(array))
    }

    /// Rows given as slices of equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: cols,
                    found: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix(Array2::zeros((rows, cols)))
    }

    pub fn identity(n: usize) -> Self {
        Matrix(Array2::eye(n))
    }

    pub(crate) fn from_array_unchecked(array: Array2<f64>) -> Self {
        debug_assert!(array.iter().all(|v| v.is_finite()));
        if array.is_standard_layout() {
            Matrix(array)
        } else {
            Matrix(array.as_standard_layout().into_owned())
        }
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[[row, col]]
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        let cols = self.cols();
        &self.as_slice()[i * cols..(i + 1) * cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.0.column(j).to_vec()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("standard layout")
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_array_unchecked(self.0.t().to_owned())
    }

    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        Matrix(self.0.select(Axis(0), indices))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch {
                context: "matmul",
                expected: self.cols(),
                found: other.rows(),
            });
        }
        Ok(Matrix(self.0.dot(&other.0)))
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix::from_array_unchecked(&self.0 * c)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.as_slice().iter().all(|&v| v == 0.0)
    }

    /// Columns as contiguous vectors (column-major copy).
    pub(crate) fn to_columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols()).map(|j| self.column(j)).collect()
    }

    pub(crate) fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Matrix {
        let cols = columns.len();
        let mut a = Array2::zeros((rows, cols));
        for (j, c) in columns.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                a[[i, j]] = *v;
            }
        }
        Matrix(a)
    }
}

impl From<Matrix> for Array2<f64> {
    fn from(m: Matrix) -> Self {
        m.0
    }
}

impl TryFrom<Array2<f64>> for Matrix {
    type Error = Error;

    fn try_from(a: Array2<f64>) -> Result<Self> {
        Matrix::from_array(a)
    }
}
