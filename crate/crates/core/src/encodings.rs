//! Amplitude, angle and basis encodings implemented as plain deterministic
//! feature maps. Nothing here simulates a circuit; each map is the classical
//! image of the corresponding state-preparation scheme.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::data::{fit_minmax, MinMaxScaler};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Added to the row norm before dividing.
pub const AMPLITUDE_EPSILON: f64 = 1e-12;
pub const BITS_PER_FEATURE: usize = 8;
const LEVELS: f64 = 255.0;

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

/// Row-wise L2 normalization followed by zero padding to `2^ceil(log2 d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmplitudeMap {
    input_dim: usize,
    output_dim: usize,
}

impl AmplitudeMap {
    pub fn new(input_dim: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidInput("amplitude encoding of zero features".into()));
        }
        Ok(AmplitudeMap {
            input_dim,
            output_dim: input_dim.next_power_of_two(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }
}

pub fn amplitude_encode(map: &AmplitudeMap, x: &Matrix) -> Result<Matrix> {
    check_width(map.input_dim, x, "amplitude encode")?;
    let mut out = Array2::zeros((x.rows(), map.output_dim));
    for (i, mut dst) in out.rows_mut().into_iter().enumerate() {
        let row = x.row_slice(i);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let denom = norm + AMPLITUDE_EPSILON;
        for (o, v) in dst.iter_mut().zip(row) {
            *o = v / denom;
        }
    }
    Ok(Matrix::from_array_unchecked(out))
}

/// Each min-max scaled feature `x̃ ∈ [-1, 1]` becomes the pair
/// `(cos(θ/2), sin(θ/2))` with `θ = π x̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleMap {
    scaler: MinMaxScaler,
}

pub fn fit_angle(train: &Matrix) -> Result<AngleMap> {
    Ok(AngleMap {
        scaler: fit_minmax(train)?,
    })
}

impl AngleMap {
    pub fn input_dim(&self) -> usize {
        self.scaler.min.len()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.input_dim()
    }

    pub fn scaler(&self) -> &MinMaxScaler {
        &self.scaler
    }
}

pub fn angle_encode(map: &AngleMap, x: &Matrix) -> Result<Matrix> {
    check_width(map.input_dim(), x, "angle encode")?;
    let d = map.input_dim();
    let mut out = Array2::zeros((x.rows(), 2 * d));
    for (i, mut dst) in out.rows_mut().into_iter().enumerate() {
        for (j, &v) in x.row_slice(i).iter().enumerate() {
            let half = 0.5 * PI * map.scaler.scale_value(j, v);
            let (s, c) = half.sin_cos();
            dst[2 * j] = c;
            dst[2 * j + 1] = s;
        }
    }
    Ok(Matrix::from_array_unchecked(out))
}

/// 8-bit quantization against the training range, emitted MSB first.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMap {
    min: Vec<f64>,
    max: Vec<f64>,
}

pub fn fit_basis(train: &Matrix) -> Result<BasisMap> {
    let s = fit_minmax(train)?;
    Ok(BasisMap { min: s.min, max: s.max })
}

impl BasisMap {
    pub fn input_dim(&self) -> usize {
        self.min.len()
    }

    pub fn output_dim(&self) -> usize {
        BITS_PER_FEATURE * self.input_dim()
    }

    /// `round_half_up(255 (x - min) / (max - min))`, clamped to `[0, 255]`;
    /// constant training columns quantize to 0.
    pub fn quantize(&self, j: usize, v: f64) -> u8 {
        let range = self.max[j] - self.min[j];
        if range < 1e-12 {
            return 0;
        }
        let level = (LEVELS * (v - self.min[j]) / range + 0.5).floor();
        level.clamp(0.0, LEVELS) as u8
    }
}

pub fn basis_encode(map: &BasisMap, x: &Matrix) -> Result<Matrix> {
    check_width(map.input_dim(), x, "basis encode")?;
    let mut out = Array2::zeros((x.rows(), map.output_dim()));
    for (i, mut dst) in out.rows_mut().into_iter().enumerate() {
        for (j, &v) in x.row_slice(i).iter().enumerate() {
            let q = map.quantize(j, v);
            for k in 0..BITS_PER_FEATURE {
                dst[BITS_PER_FEATURE * j + k] = f64::from((q >> (7 - k)) & 1);
            }
        }
    }
    Ok(Matrix::from_array_unchecked(out))
}
