use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RandomStream};

/// Uniform ±1 features; label 1 iff the product of the first `k`
/// coordinates is negative (odd number of -1 among them).
pub fn gen_parity(n: usize, d: usize, k: usize, stream: &mut RandomStream) -> Result<Dataset> {
    if k == 0 || k > d {
        return Err(Error::InvalidInput(format!(
            "parity needs 1 <= k <= d, got k={k}, d={d}"
        )));
    }
    let mut entries = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let start = entries.len();
        for _ in 0..d {
            entries.push(if stream.next_u64() >> 63 == 1 { 1.0 } else { -1.0 });
        }
        let negatives = entries[start..start + k].iter().filter(|&&v| v < 0.0).count();
        labels.push(negatives % 2);
    }
    Dataset::new("parity", Matrix::new(n, d, entries)?, labels, 2)
}

/// Isotropic standard-normal features labelled by the side of a random
/// hyperplane through the origin.
pub fn gen_high_rank_noise(n: usize, d: usize, stream: &mut RandomStream) -> Result<Dataset> {
    if d == 0 {
        return Err(Error::InvalidInput("high-rank noise needs d >= 1".into()));
    }
    let mut w: Vec<f64> = (0..d).map(|_| stream.normal()).collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= norm);
    let entries: Vec<f64> = (0..n * d).map(|_| stream.normal()).collect();
    let labels = entries
        .chunks_exact(d)
        .map(|row| {
            let s: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
            usize::from(s > 0.0)
        })
        .collect();
    Dataset::new("high_rank_noise", Matrix::new(n, d, entries)?, labels, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derive_stream;

    #[test]
    fn parity_rejects_k_above_d() {
        assert!(gen_parity(10, 3, 4, &mut derive_stream(0, "p")).is_err());
    }

    #[test]
    fn parity_flip_changes_label() {
        let ds = gen_parity(200, 8, 5, &mut derive_stream(0, "p")).unwrap();
        for i in 0..ds.n() {
            let row = ds.features().row_slice(i);
            assert!(row.iter().all(|&v| v == 1.0 || v == -1.0));
            let all_pos = row[..5].iter().all(|&v| v > 0.0);
            if all_pos {
                assert_eq!(ds.labels()[i], 0);
            }
            for flip in 0..5 {
                let mut r = row.to_vec();
                r[flip] = -r[flip];
                let neg = r[..5].iter().filter(|&&v| v < 0.0).count();
                assert_ne!(neg % 2, ds.labels()[i]);
            }
        }
    }

    #[test]
    fn defaults_have_table_shapes() {
        let p = gen_parity(10_000, 20, 10, &mut derive_stream(0, "p")).unwrap();
        assert_eq!((p.n(), p.d(), p.class_count()), (10_000, 20, 2));
        let frac = p.class_counts()[1] as f64 / p.n() as f64;
        assert!((frac - 0.5).abs() <= 0.02, "{frac}");

        let h = gen_high_rank_noise(5_000, 200, &mut derive_stream(0, "h")).unwrap();
        assert_eq!((h.n(), h.d(), h.class_count()), (5_000, 200, 2));
        let frac = h.class_counts()[1] as f64 / h.n() as f64;
        assert!((frac - 0.5).abs() <= 0.03, "{frac}");
    }
}
