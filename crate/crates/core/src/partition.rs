use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Node and interval cluster labels.
///
/// Cluster ids are contiguous: every id in `0..k` labels at least one node and
/// every id in `0..d` labels at least one interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    node_labels: Vec<usize>,
    interval_labels: Vec<usize>,
    k: usize,
    d: usize,
}

fn count_live(labels: &[usize], what: &'static str) -> Result<usize> {
    if labels.is_empty() {
        return Err(Error::InvalidPartition(what));
    }
    let live = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; live];
    for &l in labels {
        seen[l] = true;
    }
    if seen.iter().all(|&s| s) {
        Ok(live)
    } else {
        Err(Error::InvalidPartition("cluster ids are not contiguous"))
    }
}

/// Renumbers arbitrary labels to contiguous ids in order of first appearance.
pub fn compact_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = alloc::collections::BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

impl Partition {
    /// Validates contiguity and derives `K` and `D` from the labels.
    pub fn new(node_labels: Vec<usize>, interval_labels: Vec<usize>) -> Result<Self> {
        let k = count_live(&node_labels, "empty node label vector")?;
        let d = count_live(&interval_labels, "empty interval label vector")?;
        Ok(Partition {
            node_labels,
            interval_labels,
            k,
            d,
        })
    }

    /// Like [`Partition::new`] but renumbers labels contiguously first.
    pub fn from_raw_labels(node_labels: &[usize], interval_labels: &[usize]) -> Result<Self> {
        Self::new(compact_labels(node_labels), compact_labels(interval_labels))
    }

    /// Every node in one cluster and every interval in one time cluster.
    pub fn trivial(n_nodes: usize, n_intervals: usize) -> Result<Self> {
        Self::new(vec![0; n_nodes], vec![0; n_intervals])
    }

    pub fn node_labels(&self) -> &[usize] {
        &self.node_labels
    }

    pub fn interval_labels(&self) -> &[usize] {
        &self.interval_labels
    }

    pub fn node_label(&self, i: usize) -> usize {
        self.node_labels[i]
    }

    pub fn interval_label(&self, u: usize) -> usize {
        self.interval_labels[u]
    }

    /// Number of live node clusters.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of live time clusters.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_nodes(&self) -> usize {
        self.node_labels.len()
    }

    pub fn n_intervals(&self) -> usize {
        self.interval_labels.len()
    }

    pub fn node_cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.node_labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn time_cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.d];
        for &l in &self.interval_labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub(crate) fn set_node_label(&mut self, i: usize, l: usize) {
        self.node_labels[i] = l;
    }

    pub(crate) fn set_interval_label(&mut self, u: usize, l: usize) {
        self.interval_labels[u] = l;
    }

    /// Moves the last node cluster id into the empty slot `vacated` and
    /// shrinks `K`.
    pub(crate) fn retire_node_cluster(&mut self, vacated: usize) {
        let last = self.k - 1;
        for l in &mut self.node_labels {
            if *l == last {
                *l = vacated;
            }
        }
        self.k -= 1;
    }

    /// Time-cluster analogue of [`Partition::retire_node_cluster`].
    pub(crate) fn retire_time_cluster(&mut self, vacated: usize) {
        let last = self.d - 1;
        for l in &mut self.interval_labels {
            if *l == last {
                *l = vacated;
            }
        }
        self.d -= 1;
    }
}
