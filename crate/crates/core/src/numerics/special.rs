use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Survival function `P(T > t)` of Student's t with `df` degrees of freedom,
/// via the regularized incomplete beta function.
pub fn student_t_sf(t: f64, df: u32) -> Result<f64> {
    if df < 1 {
        return Err(Error::InvalidInput("t distribution needs df >= 1".into()));
    }
    if t.is_nan() {
        return Err(Error::NonFinite("t statistic"));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let nu = df as f64;
    let tail = 0.5 * beta_reg(nu / 2.0, 0.5, nu / (nu + t * t));
    Ok(if t >= 0.0 { tail } else { 1.0 - tail })
}

/// Two-sided p-value `2 min(sf, 1 - sf)`.
pub fn student_t_two_sided(t: f64, df: u32) -> Result<f64> {
    let sf = student_t_sf(t, df)?;
    Ok((2.0 * sf.min(1.0 - sf)).min(1.0))
}

/// Quantile `q` with `P(T <= q) = p`, by bisection on the survival function.
pub fn t_quantile(p: f64, df: u32) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidInput(format!("quantile level {p} outside (0, 1)")));
    }
    let target = 1.0 - p;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while student_t_sf(lo, df)? < target {
        lo *= 2.0;
    }
    while student_t_sf(hi, df)? > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_sf(mid, df)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
