//! Agreement between two clusterings of the same items.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Counts `n_ij` of items in cluster `i` of the first labeling and cluster
/// `j` of the second. Rows and columns follow the sorted distinct labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    /// Row-major, `row_labels.len() x col_labels.len()`.
    pub counts: Vec<u64>,
}

impl ContingencyTable {
    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols() + col]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts
            .chunks(self.cols())
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0; self.cols()];
        for row in self.counts.chunks(self.cols()) {
            for (s, &c) in sums.iter_mut().zip(row) {
                *s += c;
            }
        }
        sums
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn index_of(labels: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut ids = BTreeMap::new();
    for &l in labels {
        ids.insert(l, 0);
    }
    for (pos, v) in ids.values_mut().enumerate() {
        *v = pos;
    }
    let distinct = ids.keys().copied().collect();
    (distinct, labels.iter().map(|l| ids[l]).collect())
}

pub fn confusion(x: &[usize], y: &[usize]) -> Result<ContingencyTable> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let (row_labels, rx) = index_of(x);
    let (col_labels, cy) = index_of(y);
    let mut counts = vec![0u64; row_labels.len() * col_labels.len()];
    for (&r, &c) in rx.iter().zip(&cy) {
        counts[r * col_labels.len() + c] += 1;
    }
    Ok(ContingencyTable {
        row_labels,
        col_labels,
        counts,
    })
}

fn pairs(n: u64) -> u128 {
    let n = u128::from(n);
    n * n.saturating_sub(1) / 2
}

/// Hubert-Arabie adjusted Rand index. When the chance-corrected denominator
/// vanishes (both labelings trivial) the result is 1 for identical
/// partitions and 0 otherwise.
pub fn ari(x: &[usize], y: &[usize]) -> Result<f64> {
    let table = confusion(x, y)?;
    if x.len() < 2 {
        return Err(Error::TooFewItems { len: x.len() });
    }
    let index: u128 = table.counts.iter().map(|&c| pairs(c)).sum();
    let sum_a: u128 = table.row_sums().into_iter().map(pairs).sum();
    let sum_b: u128 = table.col_sums().into_iter().map(pairs).sum();
    let total = pairs(x.len() as u64);
    // ARI times 2 * C(n,2) in numerator and denominator keeps both exact
    let expected = (sum_a * sum_b) as i128;
    let num = 2 * (index as i128 * total as i128 - expected);
    let den = (sum_a + sum_b) as i128 * total as i128 - 2 * expected;
    if den == 0 {
        let nonzero = table.counts.iter().filter(|&&c| c > 0).count();
        let identical = table.rows() == table.cols() && nonzero == table.rows();
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / den as f64)
}
