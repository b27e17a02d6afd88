//! Sparse storage for the directed interaction count tensor.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One aggregated record: `count` interactions from `src` to `dst` during
/// interval `interval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub interval: usize,
    pub count: u64,
}

impl Edge {
    pub fn new(src: usize, dst: usize, interval: usize, count: u64) -> Self {
        Edge {
            src,
            dst,
            interval,
            count,
        }
    }
}

/// A single timestamped directed contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub t: f64,
    pub src: usize,
    pub dst: usize,
}

/// Interaction counts `N_ij^u` for `i != j` over `U` intervals.
///
/// Only non-zero cells are stored. Entries are kept sorted by
/// `(src, dst, interval)` and indexed by source, destination and interval so
/// that move updates touch only the cells incident to the moved item.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTensor {
    n_nodes: usize,
    n_intervals: usize,
    entries: Vec<Edge>,
    log_fact: Vec<f64>,
    out_offsets: Vec<usize>,
    in_order: Vec<usize>,
    in_offsets: Vec<usize>,
    interval_order: Vec<usize>,
    interval_offsets: Vec<usize>,
    total: u64,
}

/// `log(n!)`.
pub fn log_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

fn bucket(n: usize, keys: impl Iterator<Item = usize> + Clone) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = vec![0usize; n + 1];
    for k in keys.clone() {
        offsets[k + 1] += 1;
    }
    for x in 1..=n {
        offsets[x] += offsets[x - 1];
    }
    let mut next = offsets.clone();
    let mut order = vec![0usize; offsets[n]];
    for (idx, k) in keys.enumerate() {
        order[next[k]] = idx;
        next[k] += 1;
    }
    (order, offsets)
}

/// Builds a tensor from aggregated records. Duplicate `(src, dst, interval)`
/// keys are summed and zero counts are dropped.
pub fn build_tensor<I>(edges: I, n_nodes: usize, n_intervals: usize) -> Result<InteractionTensor>
where
    I: IntoIterator<Item = Edge>,
{
    if n_nodes == 0 {
        return Err(Error::InvalidDimension("number of nodes must be positive"));
    }
    if n_intervals == 0 {
        return Err(Error::InvalidDimension(
            "number of intervals must be positive",
        ));
    }
    let mut cells: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
    for e in edges {
        for node in [e.src, e.dst] {
            if node >= n_nodes {
                return Err(Error::NodeOutOfRange { node, n_nodes });
            }
        }
        if e.interval >= n_intervals {
            return Err(Error::IntervalOutOfRange {
                interval: e.interval,
                n_intervals,
            });
        }
        if e.src == e.dst {
            return Err(Error::SelfLoop { node: e.src });
        }
        if e.count > 0 {
            *cells.entry((e.src, e.dst, e.interval)).or_insert(0) += e.count;
        }
    }
    let entries: Vec<Edge> = cells
        .into_iter()
        .map(|((src, dst, interval), count)| Edge::new(src, dst, interval, count))
        .collect();
    Ok(InteractionTensor::from_sorted(
        entries,
        n_nodes,
        n_intervals,
    ))
}

/// Bins a contact stream into `horizon / delta` intervals; interval `u`
/// covers `(u * delta, (u + 1) * delta]`.
pub fn aggregate_stream(
    contacts: &[Contact],
    delta: f64,
    horizon: f64,
    n_nodes: usize,
) -> Result<InteractionTensor> {
    if !(delta > 0.0 && delta.is_finite() && horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidDimension(
            "delta and horizon must be positive",
        ));
    }
    let ratio = horizon / delta;
    let n_intervals = libm::round(ratio);
    if n_intervals < 1.0 || libm::fabs(n_intervals * delta - horizon) > 1e-9 * horizon {
        return Err(Error::NonDividingDelta { delta, horizon });
    }
    let n_intervals = n_intervals as usize;
    let mut edges = Vec::with_capacity(contacts.len());
    for c in contacts {
        if !(c.t > 0.0 && c.t <= horizon) {
            return Err(Error::TimeOutOfRange { t: c.t, horizon });
        }
        let u = (libm::ceil(c.t / delta) as usize).saturating_sub(1);
        edges.push(Edge::new(c.src, c.dst, u.min(n_intervals - 1), 1));
    }
    build_tensor(edges, n_nodes, n_intervals)
}

impl InteractionTensor {
    fn from_sorted(entries: Vec<Edge>, n_nodes: usize, n_intervals: usize) -> Self {
        let log_fact = entries.iter().map(|e| log_factorial(e.count)).collect();
        let total = entries.iter().map(|e| e.count).sum();
        let (_, out_offsets) = bucket(n_nodes, entries.iter().map(|e| e.src));
        let (in_order, in_offsets) = bucket(n_nodes, entries.iter().map(|e| e.dst));
        let (interval_order, interval_offsets) =
            bucket(n_intervals, entries.iter().map(|e| e.interval));
        InteractionTensor {
            n_nodes,
            n_intervals,
            entries,
            log_fact,
            out_offsets,
            in_order,
            in_offsets,
            interval_order,
            interval_offsets,
            total,
        }
    }

    /// An all-zero tensor.
    pub fn empty(n_nodes: usize, n_intervals: usize) -> Result<Self> {
        build_tensor(core::iter::empty(), n_nodes, n_intervals)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    /// Non-zero cells sorted by `(src, dst, interval)`.
    pub fn entries(&self) -> &[Edge] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, src: usize, dst: usize, interval: usize) -> u64 {
        let range = self.out_range(src);
        let row = &self.entries[range];
        row.binary_search_by(|e| (e.dst, e.interval).cmp(&(dst, interval)))
            .map(|idx| row[idx].count)
            .unwrap_or(0)
    }

    /// Sum of `log(N!)` over all cells; invariant under any relabeling.
    pub fn total_log_factorial(&self) -> f64 {
        self.log_fact.iter().sum()
    }

    fn out_range(&self, src: usize) -> core::ops::Range<usize> {
        self.out_offsets[src]..self.out_offsets[src + 1]
    }

    /// Cells with source `src`, paired with `log(count!)`.
    pub fn out_edges(&self, src: usize) -> impl Iterator<Item = (&Edge, f64)> + '_ {
        self.out_range(src)
            .map(move |idx| (&self.entries[idx], self.log_fact[idx]))
    }

    /// Cells with destination `dst`, paired with `log(count!)`.
    pub fn in_edges(&self, dst: usize) -> impl Iterator<Item = (&Edge, f64)> + '_ {
        self.in_order[self.in_offsets[dst]..self.in_offsets[dst + 1]]
            .iter()
            .map(move |&idx| (&self.entries[idx], self.log_fact[idx]))
    }

    /// Cells of interval `u`, paired with `log(count!)`.
    pub fn interval_edges(&self, u: usize) -> impl Iterator<Item = (&Edge, f64)> + '_ {
        self.interval_order[self.interval_offsets[u]..self.interval_offsets[u + 1]]
            .iter()
            .map(move |&idx| (&self.entries[idx], self.log_fact[idx]))
    }

    /// All cells paired with `log(count!)`.
    pub fn cells(&self) -> impl Iterator<Item = (&Edge, f64)> + '_ {
        self.entries.iter().zip(self.log_fact.iter().copied())
    }

    /// Sums the counts over time into a single-interval tensor (the static
    /// adjacency matrix of the aggregated graph).
    pub fn aggregate_over_time(&self) -> InteractionTensor {
        let edges = self
            .entries
            .iter()
            .map(|e| Edge::new(e.src, e.dst, 0, e.count));
        build_tensor(edges, self.n_nodes, 1).expect("indices already validated")
    }

    /// Out-degree and in-degree series of node `i` over the intervals,
    /// concatenated (length `2U`).
    pub fn node_profile(&self, i: usize) -> Vec<f64> {
        let u = self.n_intervals;
        let mut profile = vec![0.0; 2 * u];
        for (e, _) in self.out_edges(i) {
            profile[e.interval] += e.count as f64;
        }
        for (e, _) in self.in_edges(i) {
            profile[u + e.interval] += e.count as f64;
        }
        profile
    }

    /// Total activity (out plus in counts) of every node during interval `u`.
    pub fn interval_profile(&self, u: usize) -> Vec<f64> {
        let mut profile = vec![0.0; self.n_nodes];
        for (e, _) in self.interval_edges(u) {
            profile[e.src] += e.count as f64;
            profile[e.dst] += e.count as f64;
        }
        profile
    }
}
