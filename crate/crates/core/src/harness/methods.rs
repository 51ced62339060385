use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical::{
    check_poly_budget, fit_pca, fit_rff, median_heuristic, pca_transform, poly_expand, rff_transform, PcaMap, RffMap,
};
use crate::data::{fit_standardizer, Standardizer};
use crate::encodings::{
    amplitude_encode, angle_encode, basis_encode, fit_angle, fit_basis, AmplitudeMap, AngleMap, BasisMap,
};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RandomStream};
use crate::stats::MethodFamily;

/// Rows drawn for the RFF bandwidth median heuristic.
pub const MEDIAN_HEURISTIC_ROWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Amplitude,
    Angle,
    Basis,
    Raw,
    Rff,
    Poly2,
    Poly3,
    Pca,
}

impl MethodKind {
    pub const ALL: [MethodKind; 8] = [
        MethodKind::Amplitude,
        MethodKind::Angle,
        MethodKind::Basis,
        MethodKind::Raw,
        MethodKind::Rff,
        MethodKind::Poly2,
        MethodKind::Poly3,
        MethodKind::Pca,
    ];
    /// Three encodings and four classical baselines.
    pub const DEFAULT: [MethodKind; 7] = [
        MethodKind::Amplitude,
        MethodKind::Angle,
        MethodKind::Basis,
        MethodKind::Raw,
        MethodKind::Rff,
        MethodKind::Poly2,
        MethodKind::Pca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Amplitude => "amplitude",
            MethodKind::Angle => "angle",
            MethodKind::Basis => "basis",
            MethodKind::Raw => "raw",
            MethodKind::Rff => "rff",
            MethodKind::Poly2 => "poly2",
            MethodKind::Poly3 => "poly3",
            MethodKind::Pca => "pca",
        }
    }

    pub fn family(self) -> MethodFamily {
        match self {
            MethodKind::Amplitude | MethodKind::Angle | MethodKind::Basis => MethodFamily::Qie,
            _ => MethodFamily::Classical,
        }
    }

    /// Output width for `d` input features, when it is known before fitting.
    pub fn planned_dim(self, d: usize) -> Option<usize> {
        match self {
            MethodKind::Amplitude => Some(d.next_power_of_two()),
            MethodKind::Angle | MethodKind::Rff => Some(2 * d),
            MethodKind::Basis => Some(8 * d),
            MethodKind::Raw => Some(d),
            MethodKind::Poly2 => crate::classical::poly_output_dim(d, 2),
            MethodKind::Poly3 => crate::classical::poly_output_dim(d, 3),
            MethodKind::Pca => None,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone)]
enum Fitted {
    Amplitude(AmplitudeMap),
    Angle(AngleMap),
    Basis(BasisMap),
    Raw(Standardizer),
    Rff(Standardizer, RffMap),
    Poly(Standardizer, usize),
    Pca(PcaMap),
}

/// A method bound to its preprocessing. Amplitude and PCA see raw features;
/// angle and basis min-max scale internally; raw, RFF and polynomial
/// features are built on train-standardized inputs.
#[derive(Debug, Clone)]
pub struct Encoder {
    kind: MethodKind,
    poly_budget: usize,
    fitted: Option<Fitted>,
}

impl Encoder {
    pub fn new(kind: MethodKind, poly_budget: usize) -> Self {
        Encoder {
            kind,
            poly_budget,
            fitted: None,
        }
    }

    pub fn kind(&self) -> MethodKind {
        self.kind
    }

    /// Fits on the training rows. Polynomial methods fail with
    /// [`Error::Infeasible`] when the training expansion exceeds the budget.
    pub fn fit(&mut self, train: &Matrix, stream: &mut RandomStream) -> Result<()> {
        let d = train.cols();
        let fitted = match self.kind {
            MethodKind::Amplitude => Fitted::Amplitude(AmplitudeMap::new(d)?),
            MethodKind::Angle => Fitted::Angle(fit_angle(train)?),
            MethodKind::Basis => Fitted::Basis(fit_basis(train)?),
            MethodKind::Raw => Fitted::Raw(fit_standardizer(train)?),
            MethodKind::Rff => {
                let std = fit_standardizer(train)?;
                let z = std.transform(train)?;
                let sigma = median_heuristic(&z, MEDIAN_HEURISTIC_ROWS, stream);
                let map = fit_rff(d, 2 * d, sigma, stream)?;
                Fitted::Rff(std, map)
            }
            MethodKind::Poly2 | MethodKind::Poly3 => {
                let degree = if self.kind == MethodKind::Poly2 { 2 } else { 3 };
                check_poly_budget(train.rows(), d, degree, self.poly_budget)?;
                Fitted::Poly(fit_standardizer(train)?, degree)
            }
            MethodKind::Pca => Fitted::Pca(fit_pca(train, 2 * d)?),
        };
        self.fitted = Some(fitted);
        Ok(())
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        match self.fitted.as_ref().ok_or(Error::NotFitted(self.kind.name()))? {
            Fitted::Amplitude(m) => amplitude_encode(m, x),
            Fitted::Angle(m) => angle_encode(m, x),
            Fitted::Basis(m) => basis_encode(m, x),
            Fitted::Raw(s) => s.transform(x),
            Fitted::Rff(s, m) => rff_transform(m, &s.transform(x)?),
            Fitted::Poly(s, degree) => poly_expand(&s.transform(x)?, *degree, self.poly_budget),
            Fitted::Pca(m) => pca_transform(m, x),
        }
    }

    pub fn output_dim(&self) -> Option<usize> {
        Some(match self.fitted.as_ref()? {
            Fitted::Amplitude(m) => m.output_dim(),
            Fitted::Angle(m) => m.output_dim(),
            Fitted::Basis(m) => m.output_dim(),
            Fitted::Raw(s) => s.mean.len(),
            Fitted::Rff(_, m) => m.output_dim(),
            Fitted::Poly(s, degree) => crate::classical::poly_output_dim(s.mean.len(), *degree)?,
            Fitted::Pca(m) => m.output_dim(),
        })
    }
}
