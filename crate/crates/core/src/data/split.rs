use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::RandomStream;

/// Disjoint train/test row indices, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// Short hex fingerprint of the test indices.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for i in &self.test {
            h.update((*i as u64).to_le_bytes());
        }
        let out: [u8; 32] = h.finalize().into();
        out[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Per class, shuffles the class's rows and sends `round(fraction * count)`
/// of them (at least one, never all) to the test side.
pub fn stratified_split(ds: &Dataset, test_fraction: f64, stream: &mut RandomStream) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.class_count()];
    for (i, &y) in ds.labels().iter().enumerate() {
        by_class[y].push(i);
    }
    let mut train = Vec::with_capacity(ds.n());
    let mut test = Vec::new();
    for (class, mut rows) in by_class.into_iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() < 2 {
            return Err(Error::Stratification {
                class,
                count: rows.len(),
            });
        }
        stream.shuffle(&mut rows);
        let n_test = ((test_fraction * rows.len() as f64).round() as usize).clamp(1, rows.len() - 1);
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}
