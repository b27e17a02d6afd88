//! Block sufficient statistics and their exact incremental updates.
//!
//! For every live block `(k, g, d)` (source node cluster, target node
//! cluster, time cluster) we keep the count sum `S`, the sum of
//! `log(N!)` over its cells and the exposure `R` (number of cells). The
//! arrays are sized for `K_max x K_max x D_max` once and never resized.
//!
//! Two families of marginals make single-item moves cheap:
//!
//! * per interval `u`: `S_time[k][g][u]`, the counts of interval `u` between
//!   clusters `k` and `g`;
//! * per node `i`: `out[i][g][d]` (counts from `i` to cluster `g` during time
//!   cluster `d`) and `in[i][g][d]` (counts from cluster `g` to `i`).
//!
//! When a cluster empties, the last live id is moved into the vacated slot so
//! ids stay contiguous.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::tensor::InteractionTensor;

/// A committed change of the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    /// Move node `node` from its current cluster to cluster `to`.
    Node { node: usize, to: usize },
    /// Move interval `interval` from its current time cluster to `to`.
    Interval { interval: usize, to: usize },
    /// Merge node cluster `from` into `into`.
    MergeNodes { from: usize, into: usize },
    /// Merge time cluster `from` into `into`.
    MergeTimes { from: usize, into: usize },
}

impl Move {
    pub fn is_merge(&self) -> bool {
        matches!(self, Move::MergeNodes { .. } | Move::MergeTimes { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    pub(crate) k_max: usize,
    pub(crate) d_max: usize,
    pub(crate) n_nodes: usize,
    pub(crate) n_intervals: usize,
    pub(crate) k: usize,
    pub(crate) d: usize,
    pub(crate) s: Vec<u64>,
    pub(crate) logp: Vec<f64>,
    pub(crate) r: Vec<u64>,
    pub(crate) s_time: Vec<u64>,
    pub(crate) logp_time: Vec<f64>,
    pub(crate) node_out: Vec<u64>,
    pub(crate) node_in: Vec<u64>,
    pub(crate) logp_out: Vec<f64>,
    pub(crate) logp_in: Vec<f64>,
    pub(crate) node_sizes: Vec<usize>,
    pub(crate) time_sizes: Vec<usize>,
}

impl SuffStats {
    /// Builds all statistics in one pass over the non-zero cells.
    pub fn compute(
        tensor: &InteractionTensor,
        partition: &Partition,
        k_max: usize,
        d_max: usize,
    ) -> Result<Self> {
        let n = tensor.n_nodes();
        let u = tensor.n_intervals();
        if partition.n_nodes() != n || partition.n_intervals() != u {
            return Err(Error::InvalidPartition(
                "label vectors do not match tensor dimensions",
            ));
        }
        if partition.k() > k_max {
            return Err(Error::CapacityTooSmall {
                live: partition.k(),
                capacity: k_max,
            });
        }
        if partition.d() > d_max {
            return Err(Error::CapacityTooSmall {
                live: partition.d(),
                capacity: d_max,
            });
        }
        let blocks = k_max * k_max * d_max;
        let mut st = SuffStats {
            k_max,
            d_max,
            n_nodes: n,
            n_intervals: u,
            k: partition.k(),
            d: partition.d(),
            s: vec![0; blocks],
            logp: vec![0.0; blocks],
            r: vec![0; blocks],
            s_time: vec![0; k_max * k_max * u],
            logp_time: vec![0.0; k_max * k_max * u],
            node_out: vec![0; n * k_max * d_max],
            node_in: vec![0; n * k_max * d_max],
            logp_out: vec![0.0; n * k_max * d_max],
            logp_in: vec![0.0; n * k_max * d_max],
            node_sizes: vec![0; k_max],
            time_sizes: vec![0; d_max],
        };
        for (k, size) in partition.node_cluster_sizes().into_iter().enumerate() {
            st.node_sizes[k] = size;
        }
        for (d, size) in partition.time_cluster_sizes().into_iter().enumerate() {
            st.time_sizes[d] = size;
        }
        for (e, lf) in tensor.cells() {
            let k = partition.node_label(e.src);
            let g = partition.node_label(e.dst);
            let d = partition.interval_label(e.interval);
            let b = st.blk(k, g, d);
            st.s[b] += e.count;
            st.logp[b] += lf;
            let t = st.tm(k, g, e.interval);
            st.s_time[t] += e.count;
            st.logp_time[t] += lf;
            let o = st.nd(e.src, g, d);
            st.node_out[o] += e.count;
            st.logp_out[o] += lf;
            let i = st.nd(e.dst, k, d);
            st.node_in[i] += e.count;
            st.logp_in[i] += lf;
        }
        for k in 0..st.k {
            for g in 0..st.k {
                for d in 0..st.d {
                    let b = st.blk(k, g, d);
                    st.r[b] = st.exposure(k, g, d);
                }
            }
        }
        Ok(st)
    }

    #[inline]
    pub(crate) fn blk(&self, k: usize, g: usize, d: usize) -> usize {
        (k * self.k_max + g) * self.d_max + d
    }

    #[inline]
    pub(crate) fn tm(&self, k: usize, g: usize, u: usize) -> usize {
        (k * self.k_max + g) * self.n_intervals + u
    }

    #[inline]
    pub(crate) fn nd(&self, i: usize, g: usize, d: usize) -> usize {
        (i * self.k_max + g) * self.d_max + d
    }

    /// Number of ordered node pairs between clusters `k` and `g`.
    #[inline]
    pub fn pairs(&self, k: usize, g: usize) -> u64 {
        let nk = self.node_sizes[k] as u64;
        if k == g {
            nk * nk.saturating_sub(1)
        } else {
            nk * self.node_sizes[g] as u64
        }
    }

    #[inline]
    fn exposure(&self, k: usize, g: usize, d: usize) -> u64 {
        self.pairs(k, g) * self.time_sizes[d] as u64
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn s(&self, k: usize, g: usize, d: usize) -> u64 {
        self.s[self.blk(k, g, d)]
    }

    pub fn logp(&self, k: usize, g: usize, d: usize) -> f64 {
        self.logp[self.blk(k, g, d)]
    }

    pub fn r(&self, k: usize, g: usize, d: usize) -> u64 {
        self.r[self.blk(k, g, d)]
    }

    pub fn s_time(&self, k: usize, g: usize, u: usize) -> u64 {
        self.s_time[self.tm(k, g, u)]
    }

    pub fn node_out(&self, i: usize, g: usize, d: usize) -> u64 {
        self.node_out[self.nd(i, g, d)]
    }

    pub fn node_in(&self, i: usize, g: usize, d: usize) -> u64 {
        self.node_in[self.nd(i, g, d)]
    }

    /// Live node cluster sizes `|A_k|`.
    pub fn node_sizes(&self) -> &[usize] {
        &self.node_sizes[..self.k]
    }

    /// Live time cluster sizes `|C_d|`.
    pub fn time_sizes(&self) -> &[usize] {
        &self.time_sizes[..self.d]
    }

    /// Sum of `S` over all live blocks.
    pub fn total_count(&self) -> u64 {
        let mut total = 0;
        for k in 0..self.k {
            for g in 0..self.k {
                for d in 0..self.d {
                    total += self.s(k, g, d);
                }
            }
        }
        total
    }

    /// True if `other` holds the same statistics: integer fields exactly,
    /// log-factorial fields within `tol`.
    pub fn matches(&self, other: &SuffStats, tol: f64) -> bool {
        let close = |a: &[f64], b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| libm::fabs(x - y) <= tol)
        };
        self.k_max == other.k_max
            && self.d_max == other.d_max
            && self.k == other.k
            && self.d == other.d
            && self.s == other.s
            && self.r == other.r
            && self.s_time == other.s_time
            && self.node_out == other.node_out
            && self.node_in == other.node_in
            && self.node_sizes == other.node_sizes
            && self.time_sizes == other.time_sizes
            && close(&self.logp, &other.logp)
            && close(&self.logp_time, &other.logp_time)
            && close(&self.logp_out, &other.logp_out)
            && close(&self.logp_in, &other.logp_in)
    }

    fn check_node_cluster(&self, id: usize) -> Result<()> {
        if id < self.k {
            Ok(())
        } else {
            Err(Error::DeadCluster { id, live: self.k })
        }
    }

    fn check_time_cluster(&self, id: usize) -> Result<()> {
        if id < self.d {
            Ok(())
        } else {
            Err(Error::DeadCluster { id, live: self.d })
        }
    }

    /// Commits `mv`, updating the statistics and `partition` together.
    ///
    /// An exchange that empties its source cluster behaves like a merge: the
    /// emptied id is filled by the last live id and `K` (or `D`) decrements.
    pub fn apply_move(
        &mut self,
        tensor: &InteractionTensor,
        partition: &mut Partition,
        mv: Move,
    ) -> Result<()> {
        match mv {
            Move::Node { node, to } => {
                if node >= self.n_nodes {
                    return Err(Error::NodeOutOfRange {
                        node,
                        n_nodes: self.n_nodes,
                    });
                }
                self.check_node_cluster(to)?;
                if partition.node_label(node) == to {
                    return Err(Error::NoOpMove);
                }
                self.move_node(tensor, partition, node, to);
            }
            Move::Interval { interval, to } => {
                if interval >= self.n_intervals {
                    return Err(Error::IntervalOutOfRange {
                        interval,
                        n_intervals: self.n_intervals,
                    });
                }
                self.check_time_cluster(to)?;
                if partition.interval_label(interval) == to {
                    return Err(Error::NoOpMove);
                }
                self.move_interval(tensor, partition, interval, to);
            }
            Move::MergeNodes { from, into } => {
                self.check_node_cluster(from)?;
                self.check_node_cluster(into)?;
                if from == into {
                    return Err(Error::NoOpMove);
                }
                let members: Vec<usize> = (0..self.n_nodes)
                    .filter(|&i| partition.node_label(i) == from)
                    .collect();
                // ids only shift when the final move empties `from`
                for i in members {
                    self.move_node(tensor, partition, i, into);
                }
            }
            Move::MergeTimes { from, into } => {
                self.check_time_cluster(from)?;
                self.check_time_cluster(into)?;
                if from == into {
                    return Err(Error::NoOpMove);
                }
                let members: Vec<usize> = (0..self.n_intervals)
                    .filter(|&u| partition.interval_label(u) == from)
                    .collect();
                for u in members {
                    self.move_interval(tensor, partition, u, into);
                }
            }
        }
        Ok(())
    }

    fn move_node(
        &mut self,
        tensor: &InteractionTensor,
        partition: &mut Partition,
        i: usize,
        to: usize,
    ) {
        let from = partition.node_label(i);
        let (k, d) = (self.k, self.d);

        for g in 0..k {
            for dd in 0..d {
                let x = self.nd(i, g, dd);
                let (o, lo) = (self.node_out[x], self.logp_out[x]);
                let (n_in, l_in) = (self.node_in[x], self.logp_in[x]);
                let b = self.blk(from, g, dd);
                self.s[b] -= o;
                self.logp[b] -= lo;
                let b = self.blk(to, g, dd);
                self.s[b] += o;
                self.logp[b] += lo;
                let b = self.blk(g, from, dd);
                self.s[b] -= n_in;
                self.logp[b] -= l_in;
                let b = self.blk(g, to, dd);
                self.s[b] += n_in;
                self.logp[b] += l_in;
            }
        }

        for (e, lf) in tensor.out_edges(i) {
            let dd = partition.interval_label(e.interval);
            let cj = partition.node_label(e.dst);
            let a = self.nd(e.dst, from, dd);
            let b = self.nd(e.dst, to, dd);
            self.node_in[a] -= e.count;
            self.logp_in[a] -= lf;
            self.node_in[b] += e.count;
            self.logp_in[b] += lf;
            let a = self.tm(from, cj, e.interval);
            let b = self.tm(to, cj, e.interval);
            self.s_time[a] -= e.count;
            self.logp_time[a] -= lf;
            self.s_time[b] += e.count;
            self.logp_time[b] += lf;
        }
        for (e, lf) in tensor.in_edges(i) {
            let dd = partition.interval_label(e.interval);
            let cj = partition.node_label(e.src);
            let a = self.nd(e.src, from, dd);
            let b = self.nd(e.src, to, dd);
            self.node_out[a] -= e.count;
            self.logp_out[a] -= lf;
            self.node_out[b] += e.count;
            self.logp_out[b] += lf;
            let a = self.tm(cj, from, e.interval);
            let b = self.tm(cj, to, e.interval);
            self.s_time[a] -= e.count;
            self.logp_time[a] -= lf;
            self.s_time[b] += e.count;
            self.logp_time[b] += lf;
        }

        self.node_sizes[from] -= 1;
        self.node_sizes[to] += 1;
        partition.set_node_label(i, to);
        self.refresh_node_exposure(from);
        self.refresh_node_exposure(to);

        if self.node_sizes[from] == 0 {
            self.retire_node_cluster(partition, from);
        }
    }

    fn move_interval(
        &mut self,
        tensor: &InteractionTensor,
        partition: &mut Partition,
        u: usize,
        to: usize,
    ) {
        let from = partition.interval_label(u);
        for k in 0..self.k {
            for g in 0..self.k {
                let t = self.tm(k, g, u);
                let (st, lt) = (self.s_time[t], self.logp_time[t]);
                let a = self.blk(k, g, from);
                self.s[a] -= st;
                self.logp[a] -= lt;
                let b = self.blk(k, g, to);
                self.s[b] += st;
                self.logp[b] += lt;
            }
        }
        for (e, lf) in tensor.interval_edges(u) {
            let ci = partition.node_label(e.src);
            let cj = partition.node_label(e.dst);
            let a = self.nd(e.src, cj, from);
            let b = self.nd(e.src, cj, to);
            self.node_out[a] -= e.count;
            self.logp_out[a] -= lf;
            self.node_out[b] += e.count;
            self.logp_out[b] += lf;
            let a = self.nd(e.dst, ci, from);
            let b = self.nd(e.dst, ci, to);
            self.node_in[a] -= e.count;
            self.logp_in[a] -= lf;
            self.node_in[b] += e.count;
            self.logp_in[b] += lf;
        }
        self.time_sizes[from] -= 1;
        self.time_sizes[to] += 1;
        partition.set_interval_label(u, to);
        for dd in [from, to] {
            for k in 0..self.k {
                for g in 0..self.k {
                    let b = self.blk(k, g, dd);
                    self.r[b] = self.exposure(k, g, dd);
                }
            }
        }
        if self.time_sizes[from] == 0 {
            self.retire_time_cluster(partition, from);
        }
    }

    fn refresh_node_exposure(&mut self, x: usize) {
        for g in 0..self.k {
            for d in 0..self.d {
                let b = self.blk(x, g, d);
                self.r[b] = self.exposure(x, g, d);
                let b = self.blk(g, x, d);
                self.r[b] = self.exposure(g, x, d);
            }
        }
    }

    fn retire_node_cluster(&mut self, partition: &mut Partition, vacated: usize) {
        let last = self.k - 1;
        if vacated != last {
            self.swap_node_ids(vacated, last);
        }
        self.clear_node_slot(last);
        partition.retire_node_cluster(vacated);
        self.k -= 1;
    }

    fn retire_time_cluster(&mut self, partition: &mut Partition, vacated: usize) {
        let last = self.d - 1;
        if vacated != last {
            self.swap_time_ids(vacated, last);
        }
        self.clear_time_slot(last);
        partition.retire_time_cluster(vacated);
        self.d -= 1;
    }

    fn swap_node_ids(&mut self, x: usize, y: usize) {
        let (km, dm, nu) = (self.k_max, self.d_max, self.n_intervals);
        for g in 0..km {
            for d in 0..dm {
                let (a, b) = (self.blk(x, g, d), self.blk(y, g, d));
                self.s.swap(a, b);
                self.logp.swap(a, b);
                self.r.swap(a, b);
            }
        }
        for k in 0..km {
            for d in 0..dm {
                let (a, b) = (self.blk(k, x, d), self.blk(k, y, d));
                self.s.swap(a, b);
                self.logp.swap(a, b);
                self.r.swap(a, b);
            }
        }
        for g in 0..km {
            for u in 0..nu {
                let (a, b) = (self.tm(x, g, u), self.tm(y, g, u));
                self.s_time.swap(a, b);
                self.logp_time.swap(a, b);
            }
        }
        for k in 0..km {
            for u in 0..nu {
                let (a, b) = (self.tm(k, x, u), self.tm(k, y, u));
                self.s_time.swap(a, b);
                self.logp_time.swap(a, b);
            }
        }
        for i in 0..self.n_nodes {
            for d in 0..dm {
                let (a, b) = (self.nd(i, x, d), self.nd(i, y, d));
                self.node_out.swap(a, b);
                self.node_in.swap(a, b);
                self.logp_out.swap(a, b);
                self.logp_in.swap(a, b);
            }
        }
        self.node_sizes.swap(x, y);
    }

    fn swap_time_ids(&mut self, x: usize, y: usize) {
        let km = self.k_max;
        for k in 0..km {
            for g in 0..km {
                let (a, b) = (self.blk(k, g, x), self.blk(k, g, y));
                self.s.swap(a, b);
                self.logp.swap(a, b);
                self.r.swap(a, b);
            }
        }
        for i in 0..self.n_nodes {
            for g in 0..km {
                let (a, b) = (self.nd(i, g, x), self.nd(i, g, y));
                self.node_out.swap(a, b);
                self.node_in.swap(a, b);
                self.logp_out.swap(a, b);
                self.logp_in.swap(a, b);
            }
        }
        self.time_sizes.swap(x, y);
    }

    // An emptied cluster holds zero counts, but the float fields may carry
    // rounding residue from the incremental updates.
    fn clear_node_slot(&mut self, x: usize) {
        let (km, dm, nu) = (self.k_max, self.d_max, self.n_intervals);
        for g in 0..km {
            for d in 0..dm {
                for b in [self.blk(x, g, d), self.blk(g, x, d)] {
                    debug_assert_eq!(self.s[b], 0);
                    self.s[b] = 0;
                    self.logp[b] = 0.0;
                    self.r[b] = 0;
                }
            }
            for u in 0..nu {
                for t in [self.tm(x, g, u), self.tm(g, x, u)] {
                    self.s_time[t] = 0;
                    self.logp_time[t] = 0.0;
                }
            }
        }
        for i in 0..self.n_nodes {
            for d in 0..dm {
                let a = self.nd(i, x, d);
                self.node_out[a] = 0;
                self.node_in[a] = 0;
                self.logp_out[a] = 0.0;
                self.logp_in[a] = 0.0;
            }
        }
        self.node_sizes[x] = 0;
    }

    fn clear_time_slot(&mut self, x: usize) {
        let km = self.k_max;
        for k in 0..km {
            for g in 0..km {
                let b = self.blk(k, g, x);
                debug_assert_eq!(self.s[b], 0);
                self.s[b] = 0;
                self.logp[b] = 0.0;
                self.r[b] = 0;
            }
        }
        for i in 0..self.n_nodes {
            for g in 0..km {
                let a = self.nd(i, g, x);
                self.node_out[a] = 0;
                self.node_in[a] = 0;
                self.logp_out[a] = 0.0;
                self.logp_in[a] = 0.0;
            }
        }
        self.time_sizes[x] = 0;
    }
}
