//! Thin SVD by one-sided Jacobi on the triangular factor of a Householder QR,
//! plus a values-only path (QR, bidiagonalization, Golub-Kahan tridiagonal
//! eigenvalues) that stays fast on wide encoded matrices.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ShapeBuilder};

use super::{axpy, dot, Matrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;
/// Panel width of the blocked QR used by [`singular_values`].
const QR_BLOCK: usize = 32;

/// Thin singular value decomposition `X = U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Nonincreasing, nonnegative; `min(rows, cols)` entries.
    pub singular_values: Vec<f64>,
    /// `rows × k`, orthonormal columns.
    pub u: Matrix,
    /// `cols × k`, orthonormal columns.
    pub v: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.as_array().clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).mapv_inplace(|x| x * s);
        }
        Matrix::from_array_unchecked(us.dot(&self.v.as_array().t()))
    }
}

fn check_shape(m: &Matrix) -> Result<()> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::InvalidInput(format!(
            "svd of an empty {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

pub fn svd(m: &Matrix) -> Result<SvdResult> {
    check_shape(m)?;
    if m.rows() < m.cols() {
        let t = svd(&m.transpose())?;
        return Ok(SvdResult {
            singular_values: t.singular_values,
            u: t.v,
            v: t.u,
        });
    }
    let rows = m.rows();
    let n = m.cols();
    let mut cols = m.to_columns();
    let reflectors = if rows > n {
        let refl = householder_qr(&mut cols);
        for c in cols.iter_mut() {
            c.truncate(n);
        }
        Some(refl)
    } else {
        None
    };

    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    one_sided_jacobi(&mut cols, Some(&mut v))?;

    let sigma: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));

    let mut u_small: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (pos, &j) in order.iter().enumerate() {
        if sigma[j] >= f64::MIN_POSITIVE {
            u_small.push(cols[j].iter().map(|x| x / sigma[j]).collect());
        } else {
            u_small.push(vec![0.0; cols[j].len()]);
            missing.push(pos);
        }
    }
    complete_orthonormal(&mut u_small, &missing);

    let u_cols = match reflectors {
        Some(refl) => {
            let mut full: Vec<Vec<f64>> = u_small
                .into_iter()
                .map(|mut c| {
                    c.resize(rows, 0.0);
                    c
                })
                .collect();
            for col in full.iter_mut() {
                apply_reflectors_reverse(&refl, col);
            }
            full
        }
        None => u_small,
    };
    let v_cols: Vec<Vec<f64>> = order.iter().map(|&j| v[j].clone()).collect();

    Ok(SvdResult {
        singular_values: order.iter().map(|&j| sigma[j]).collect(),
        u: Matrix::from_columns(rows, &u_cols),
        v: Matrix::from_columns(n, &v_cols),
    })
}

/// Singular values only, nonincreasing.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    check_shape(m)?;
    if m.rows() < m.cols() {
        return singular_values(&m.transpose());
    }
    let n = m.cols();
    let mut cols = if m.rows() > n { blocked_qr_r(m) } else { m.to_columns() };
    let (d, e) = bidiagonalize_square(&mut cols);

    // Golub-Kahan form: zero diagonal, off-diagonal d0, e0, d1, e1, ..., d(n-1).
    // Its eigenvalues are ±σ, so no squaring of the condition number.
    let mut off = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        off.push(d[k]);
        if k + 1 < n {
            off.push(e[k]);
        }
    }
    let mut diag = vec![0.0; 2 * n];
    tridiagonal_eigenvalues(&mut diag, &off)?;
    diag.sort_by(|a, b| b.total_cmp(a));
    Ok(diag[..n].iter().map(|s| s.abs()).collect())
}

struct Reflector {
    start: usize,
    v: Vec<f64>,
    beta: f64,
}

/// Builds `H = I - beta v vᵀ` with `H x = alpha e1`. `None` for a zero vector.
fn make_reflector(x: &[f64]) -> Option<(Vec<f64>, f64, f64)> {
    let norm = dot(x, x).sqrt();
    if norm == 0.0 {
        return None;
    }
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vtv = dot(&v, &v);
    if vtv == 0.0 {
        return None;
    }
    Some((v, 2.0 / vtv, alpha))
}

/// In-place QR of a tall column-major matrix; `cols` holds R on return.
fn householder_qr(cols: &mut [Vec<f64>]) -> Vec<Reflector> {
    let n = cols.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let Some((v, beta, alpha)) = make_reflector(&cols[k][k..]) else {
            continue;
        };
        for col in cols[k + 1..].iter_mut() {
            let s = beta * dot(&v, &col[k..]);
            axpy(-s, &v, &mut col[k..]);
        }
        cols[k][k] = alpha;
        cols[k][k + 1..].iter_mut().for_each(|x| *x = 0.0);
        out.push(Reflector { start: k, v, beta });
    }
    out
}

/// `R` (as `n` columns of length `n`) of a tall matrix by blocked Householder
/// QR. Each panel's reflectors are aggregated as `I - V T Vᵀ` and applied to
/// the trailing columns with matrix products.
fn blocked_qr_r(m: &Matrix) -> Vec<Vec<f64>> {
    let (rows, n) = (m.rows(), m.cols());
    let mut a = Array2::<f64>::zeros((rows, n).f());
    a.assign(m.as_array());
    let mut k = 0;
    while k < n {
        let nb = QR_BLOCK.min(n - k);
        let mut v = Array2::<f64>::zeros((rows - k, nb).f());
        let mut betas = vec![0.0; nb];
        for i in 0..nb {
            let c = k + i;
            let x = a.slice(s![c.., c]).to_vec();
            let Some((vv, beta, alpha)) = make_reflector(&x) else {
                continue;
            };
            for j in c + 1..k + nb {
                let mut col = a.slice_mut(s![c.., j]);
                let col = col.as_slice_mut().expect("column-major");
                let t = beta * dot(&vv, col);
                axpy(-t, &vv, col);
            }
            a[[c, c]] = alpha;
            a.slice_mut(s![c + 1.., c]).fill(0.0);
            v.slice_mut(s![i.., i])
                .as_slice_mut()
                .expect("column-major")
                .copy_from_slice(&vv);
            betas[i] = beta;
        }
        if k + nb < n {
            let mut t = Array2::<f64>::zeros((nb, nb));
            for i in 0..nb {
                t[[i, i]] = betas[i];
                if i > 0 && betas[i] != 0.0 {
                    let z = v.slice(s![.., ..i]).t().dot(&v.column(i));
                    let tz = t.slice(s![..i, ..i]).dot(&z);
                    t.slice_mut(s![..i, i]).assign(&(tz * -betas[i]));
                }
            }
            let mut trailing = a.slice_mut(s![k.., k + nb..]);
            let w = t.t().dot(&v.t().dot(&trailing));
            general_mat_mul(-1.0, &v, &w, 1.0, &mut trailing);
        }
        k += nb;
    }
    (0..n)
        .map(|j| (0..n).map(|i| if i <= j { a[[i, j]] } else { 0.0 }).collect())
        .collect()
}

fn apply_reflectors_reverse(refl: &[Reflector], y: &mut [f64]) {
    for r in refl.iter().rev() {
        let s = r.beta * dot(&r.v, &y[r.start..]);
        axpy(-s, &r.v, &mut y[r.start..]);
    }
}

/// Reduces a square column-major matrix to upper bidiagonal form, returning
/// the diagonal and superdiagonal. The input is overwritten.
fn bidiagonalize_square(cols: &mut [Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = cols.len();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut w = vec![0.0; n];
    for k in 0..n {
        if let Some((v, beta, alpha)) = make_reflector(&cols[k][k..]) {
            for col in cols[k + 1..].iter_mut() {
                let s = beta * dot(&v, &col[k..]);
                axpy(-s, &v, &mut col[k..]);
            }
            d[k] = alpha;
        } else {
            d[k] = 0.0;
        }
        if k + 1 >= n {
            continue;
        }
        let row: Vec<f64> = cols[k + 1..].iter().map(|c| c[k]).collect();
        if let Some((v, beta, alpha)) = make_reflector(&row) {
            let w = &mut w[..n - k - 1];
            w.iter_mut().for_each(|x| *x = 0.0);
            for (vj, col) in v.iter().zip(cols[k + 1..].iter()) {
                axpy(*vj, &col[k + 1..], w);
            }
            for (vj, col) in v.iter().zip(cols[k + 1..].iter_mut()) {
                axpy(-beta * vj, w, &mut col[k + 1..]);
            }
            e[k] = alpha;
        }
    }
    (d, e)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `diag` is overwritten with the (unsorted) eigenvalues.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &[f64]) -> Result<()> {
    let n = diag.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let d = diag;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::NoConvergence("tridiagonal QL"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Hestenes one-sided Jacobi: rotates column pairs until all are mutually
/// orthogonal to working precision. `v` accumulates the right rotations.
fn one_sided_jacobi(cols: &mut [Vec<f64>], mut v: Option<&mut Vec<Vec<f64>>>) -> Result<()> {
    let n = cols.len();
    if n < 2 {
        return Ok(());
    }
    let rows = cols[0].len();
    let tol = f64::EPSILON * (rows.max(1) as f64).sqrt();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let (head, tail) = cols.split_at_mut(j);
                let (ci, cj) = (&mut head[i], &mut tail[0]);
                let alpha = dot(ci, ci);
                let beta = dot(cj, cj);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(ci, cj);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(ci, cj, c, s);
                if let Some(v) = v.as_deref_mut() {
                    let (vh, vt) = v.split_at_mut(j);
                    rotate(&mut vh[i], &mut vt[0], c, s);
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence("one-sided Jacobi"))
}

#[inline]
fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (p, q) = (*x, *y);
        *x = c * p - s * q;
        *y = s * p + c * q;
    }
}

/// Fills the columns listed in `missing` with unit vectors orthogonal to
/// every other column.
fn complete_orthonormal(cols: &mut [Vec<f64>], missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let dim = cols[0].len();
    for &slot in missing {
        let mut best: Option<Vec<f64>> = None;
        let mut best_norm = 0.0;
        for axis in 0..dim {
            let mut cand = vec![0.0; dim];
            cand[axis] = 1.0;
            for _ in 0..2 {
                for (k, other) in cols.iter().enumerate() {
                    if k == slot {
                        continue;
                    }
                    let p = dot(other, &cand);
                    axpy(-p, other, &mut cand);
                }
            }
            let norm = dot(&cand, &cand).sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = Some(cand);
            }
            if best_norm > 0.5 {
                break;
            }
        }
        if let Some(mut b) = best {
            b.iter_mut().for_each(|x| *x /= best_norm);
            cols[slot] = b;
        }
    }
}
