//! Exact integrated complete-data likelihood and its incremental changes.
//!
//! With a Gamma(a, b) prior on every block rate, the marginal likelihood of a
//! block with count sum `S`, log-factorial sum `logP` and exposure `R` is
//!
//! ```text
//! log L = a log b - logΓ(a) - logP + logΓ(S + a) - (S + a) log(R + b)
//! ```
//!
//! and a symmetric Dirichlet(α) prior on the node proportions contributes
//!
//! ```text
//! logΓ(αK) - K logΓ(α) + Σ_k logΓ(|A_k| + α) - logΓ(N + αK)
//! ```
//!
//! (likewise with γ, D and U for the intervals). The ICL is the sum of the
//! block terms over every live `(k, g, d)` plus the two label terms.
//!
//! Every move only redistributes cells among a known set of blocks, so the
//! `logP` parts cancel exactly inside the deltas and are left out of them.

use alloc::vec;
use alloc::vec::Vec;

use libm::{lgamma, log};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::priors::Priors;
use crate::stats::SuffStats;

/// ICL split into its data and label parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IclValue {
    pub value: f64,
    /// `log p(N | c, y, K, D)`.
    pub block_term: f64,
    /// `log p(c, y | K, D)`.
    pub label_term: f64,
}

/// Block marginal likelihood in log form.
pub fn log_block_likelihood(s: u64, logp: f64, r: u64, priors: &Priors) -> f64 {
    Scorer::new(priors).block(s, r) - logp
}

fn dirichlet_term(sizes: &[usize], conc: f64) -> f64 {
    let clusters = sizes.len() as f64;
    let total: usize = sizes.iter().sum();
    let mut v =
        lgamma(conc * clusters) - clusters * lgamma(conc) - lgamma(total as f64 + conc * clusters);
    for &n in sizes {
        v += lgamma(n as f64 + conc);
    }
    v
}

/// Integrated label density `log p(c, y | K, D)` for the given cluster sizes.
pub fn log_label_prior(node_sizes: &[usize], time_sizes: &[usize], priors: &Priors) -> f64 {
    dirichlet_term(node_sizes, priors.alpha) + dirichlet_term(time_sizes, priors.gamma)
}

/// Part of the Dirichlet term that depends on the number of clusters only.
fn count_term(clusters: usize, total: usize, conc: f64) -> f64 {
    let c = clusters as f64;
    lgamma(conc * c) - c * lgamma(conc) - lgamma(total as f64 + conc * c)
}

/// Full ICL of the partition described by `stats`.
pub fn icl_full(stats: &SuffStats, priors: &Priors) -> IclValue {
    let scorer = Scorer::new(priors);
    let mut block_term = 0.0;
    for k in 0..stats.k {
        for g in 0..stats.k {
            for d in 0..stats.d {
                let b = stats.blk(k, g, d);
                block_term += scorer.block(stats.s[b], stats.r[b]) - stats.logp[b];
            }
        }
    }
    let label_term = log_label_prior(stats.node_sizes(), stats.time_sizes(), priors);
    IclValue {
        value: block_term + label_term,
        block_term,
        label_term,
    }
}

/// Evaluates block terms without the `logP` part.
///
/// The move deltas take `cur`, the current block values indexed like the
/// block arrays of [`SuffStats`] (see [`Scorer::cache`]), so only the
/// post-move blocks are evaluated.
#[derive(Debug, Clone)]
pub(crate) struct Scorer {
    a: f64,
    b: f64,
    prefactor: f64,
    alpha: f64,
    gamma: f64,
}

impl Scorer {
    pub(crate) fn new(priors: &Priors) -> Self {
        Scorer {
            a: priors.a,
            b: priors.b,
            prefactor: priors.a * log(priors.b) - lgamma(priors.a),
            alpha: priors.alpha,
            gamma: priors.gamma,
        }
    }

    #[inline]
    pub(crate) fn block(&self, s: u64, r: u64) -> f64 {
        let sa = s as f64 + self.a;
        self.prefactor + lgamma(sa) - sa * log(r as f64 + self.b)
    }

    pub(crate) fn cache(&self, st: &SuffStats) -> Vec<f64> {
        let mut cur = vec![0.0; st.s.len()];
        self.refresh(st, &mut cur);
        cur
    }

    pub(crate) fn refresh(&self, st: &SuffStats, cur: &mut [f64]) {
        for k in 0..st.k {
            for g in 0..st.k {
                for d in 0..st.d {
                    let b = st.blk(k, g, d);
                    cur[b] = self.block(st.s[b], st.r[b]);
                }
            }
        }
    }

    /// Refreshes the rows and columns of node cluster `x`.
    pub(crate) fn refresh_node_cluster(&self, st: &SuffStats, cur: &mut [f64], x: usize) {
        for g in 0..st.k {
            for d in 0..st.d {
                for b in [st.blk(x, g, d), st.blk(g, x, d)] {
                    cur[b] = self.block(st.s[b], st.r[b]);
                }
            }
        }
    }

    /// Refreshes the slice of time cluster `x`.
    pub(crate) fn refresh_time_cluster(&self, st: &SuffStats, cur: &mut [f64], x: usize) {
        for k in 0..st.k {
            for g in 0..st.k {
                let b = st.blk(k, g, x);
                cur[b] = self.block(st.s[b], st.r[b]);
            }
        }
    }

    /// Change of one Dirichlet label term when an item leaves a cluster of
    /// size `n_from` for one of size `n_to`.
    #[inline]
    fn transfer(conc: f64, n_from: usize, n_to: usize) -> f64 {
        lgamma(n_from as f64 - 1.0 + conc) + lgamma(n_to as f64 + 1.0 + conc)
            - lgamma(n_from as f64 + conc)
            - lgamma(n_to as f64 + conc)
    }

    /// Change of one Dirichlet label term when clusters of sizes `na` and
    /// `nb` merge, going from `clusters` to `clusters - 1`.
    #[inline]
    fn fuse(conc: f64, clusters: usize, total: usize, na: usize, nb: usize) -> f64 {
        count_term(clusters - 1, total, conc) - count_term(clusters, total, conc)
            + lgamma((na + nb) as f64 + conc)
            - lgamma(na as f64 + conc)
            - lgamma(nb as f64 + conc)
    }

    /// Block change of the source slice when interval `u` leaves its time
    /// cluster; shared by every destination.
    pub(crate) fn time_leave(&self, st: &SuffStats, cur: &[f64], u: usize, from: usize) -> f64 {
        let tf = st.time_sizes[from] as u64;
        let mut acc = 0.0;
        for k in 0..st.k {
            for g in 0..st.k {
                let moved = st.s_time[st.tm(k, g, u)];
                let b = st.blk(k, g, from);
                acc += self.block(st.s[b] - moved, st.pairs(k, g) * (tf - 1)) - cur[b];
            }
        }
        acc
    }

    /// Full ICL change for moving interval `u` from `from` (size ≥ 2) to
    /// `to`, given the matching [`Scorer::time_leave`] value.
    pub(crate) fn time_join(
        &self,
        st: &SuffStats,
        cur: &[f64],
        u: usize,
        from: usize,
        leave: f64,
        to: usize,
    ) -> f64 {
        if from == to {
            return 0.0;
        }
        let tt = st.time_sizes[to] as u64;
        let mut delta = Self::transfer(self.gamma, st.time_sizes[from], tt as usize) + leave;
        for k in 0..st.k {
            for g in 0..st.k {
                let moved = st.s_time[st.tm(k, g, u)];
                let b = st.blk(k, g, to);
                delta += self.block(st.s[b] + moved, st.pairs(k, g) * (tt + 1)) - cur[b];
            }
        }
        delta
    }

    pub(crate) fn exchange_time(
        &self,
        st: &SuffStats,
        cur: &[f64],
        u: usize,
        from: usize,
        to: usize,
    ) -> f64 {
        if from == to {
            return 0.0;
        }
        let leave = self.time_leave(st, cur, u, from);
        self.time_join(st, cur, u, from, leave, to)
    }

    /// Block change when node `i` leaves its cluster `from` (size ≥ 2),
    /// before it joins another one.
    ///
    /// Returns the total over the diagonal block and every row/column block
    /// `(from, g)`, `(g, from)`; `per_g[g]` receives the part owed to cluster
    /// `g` so that [`Scorer::node_join`] can replace it for the destination,
    /// whose size also changes.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn node_leave(
        &self,
        st: &SuffStats,
        cur: &[f64],
        i: usize,
        from: usize,
        per_g: &mut Vec<f64>,
    ) -> f64 {
        per_g.clear();
        per_g.resize(st.k, 0.0);
        let nf = st.node_sizes[from] as u64;
        let mut total = 0.0;
        for d in 0..st.d {
            let td = st.time_sizes[d] as u64;
            for g in 0..st.k {
                let x = st.nd(i, g, d);
                let (out_g, in_g) = (st.node_out[x], st.node_in[x]);
                if g == from {
                    let b = st.blk(from, from, d);
                    let v = self.block(st.s[b] - out_g - in_g, (nf - 1) * (nf - 2) * td) - cur[b];
                    total += v;
                } else {
                    let ng = st.node_sizes[g] as u64;
                    let r = (nf - 1) * ng * td;
                    let row = st.blk(from, g, d);
                    let col = st.blk(g, from, d);
                    let v = self.block(st.s[row] - out_g, r) - cur[row]
                        + self.block(st.s[col] - in_g, r)
                        - cur[col];
                    per_g[g] += v;
                    total += v;
                }
            }
        }
        total
    }

    /// Full ICL change for moving node `i` from `from` to `to`, given the
    /// output of [`Scorer::node_leave`].
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn node_join(
        &self,
        st: &SuffStats,
        cur: &[f64],
        i: usize,
        from: usize,
        leave: f64,
        per_g: &[f64],
        to: usize,
    ) -> f64 {
        if from == to {
            return 0.0;
        }
        let nf = st.node_sizes[from] as u64;
        let nt = st.node_sizes[to] as u64;
        let mut delta = Self::transfer(self.alpha, nf as usize, nt as usize) + leave - per_g[to];
        for d in 0..st.d {
            let td = st.time_sizes[d] as u64;
            let x_from = st.nd(i, from, d);
            let x_to = st.nd(i, to, d);
            let (out_from, in_from) = (st.node_out[x_from], st.node_in[x_from]);
            let (out_to, in_to) = (st.node_out[x_to], st.node_in[x_to]);

            let diag = st.blk(to, to, d);
            delta += self.block(st.s[diag] + out_to + in_to, (nt + 1) * nt * td) - cur[diag];

            let cross_r = (nf - 1) * (nt + 1) * td;
            let ft = st.blk(from, to, d);
            let tf = st.blk(to, from, d);
            delta += self.block(st.s[ft] - out_to + in_from, cross_r) - cur[ft]
                + self.block(st.s[tf] - in_to + out_from, cross_r)
                - cur[tf];

            for g in 0..st.k {
                if g == from || g == to {
                    continue;
                }
                let x = st.nd(i, g, d);
                let r = (nt + 1) * st.node_sizes[g] as u64 * td;
                let row = st.blk(to, g, d);
                let col = st.blk(g, to, d);
                delta += self.block(st.s[row] + st.node_out[x], r) - cur[row]
                    + self.block(st.s[col] + st.node_in[x], r)
                    - cur[col];
            }
        }
        delta
    }

    pub(crate) fn exchange_node(
        &self,
        st: &SuffStats,
        cur: &[f64],
        i: usize,
        from: usize,
        to: usize,
    ) -> f64 {
        if from == to {
            return 0.0;
        }
        let mut per_g = Vec::new();
        let leave = self.node_leave(st, cur, i, from, &mut per_g);
        self.node_join(st, cur, i, from, leave, &per_g, to)
    }

    /// ICL change for merging time clusters `a` and `b`.
    pub(crate) fn merge_time(&self, st: &SuffStats, cur: &[f64], a: usize, b: usize) -> f64 {
        let na = st.time_sizes[a];
        let nb = st.time_sizes[b];
        let mut delta = Self::fuse(self.gamma, st.d, st.n_intervals, na, nb);
        let merged = (na + nb) as u64;
        for k in 0..st.k {
            for g in 0..st.k {
                let ba = st.blk(k, g, a);
                let bb = st.blk(k, g, b);
                delta +=
                    self.block(st.s[ba] + st.s[bb], st.pairs(k, g) * merged) - cur[ba] - cur[bb];
            }
        }
        delta
    }

    /// ICL change for merging node clusters `a` and `b`.
    pub(crate) fn merge_node(&self, st: &SuffStats, cur: &[f64], a: usize, b: usize) -> f64 {
        let na = st.node_sizes[a];
        let nb = st.node_sizes[b];
        let mut delta = Self::fuse(self.alpha, st.k, st.n_nodes, na, nb);
        let m = (na + nb) as u64;
        for d in 0..st.d {
            let td = st.time_sizes[d] as u64;
            for g in 0..st.k {
                if g == a || g == b {
                    continue;
                }
                let r = m * st.node_sizes[g] as u64 * td;
                let (ra, rb) = (st.blk(a, g, d), st.blk(b, g, d));
                let (ca, cb) = (st.blk(g, a, d), st.blk(g, b, d));
                delta += self.block(st.s[ra] + st.s[rb], r) + self.block(st.s[ca] + st.s[cb], r)
                    - cur[ra]
                    - cur[rb]
                    - cur[ca]
                    - cur[cb];
            }
            let corners = [
                st.blk(a, a, d),
                st.blk(a, b, d),
                st.blk(b, a, d),
                st.blk(b, b, d),
            ];
            let s_merged: u64 = corners.iter().map(|&x| st.s[x]).sum();
            delta += self.block(s_merged, m * m.saturating_sub(1) * td);
            for x in corners {
                delta -= cur[x];
            }
        }
        delta
    }
}

fn live(id: usize, live: usize) -> Result<()> {
    if id < live {
        Ok(())
    } else {
        Err(Error::DeadCluster { id, live })
    }
}

/// ICL change for moving interval `u` to time cluster `to`.
pub fn delta_exchange_time(
    stats: &SuffStats,
    partition: &Partition,
    u: usize,
    to: usize,
    priors: &Priors,
) -> Result<f64> {
    let from = partition.interval_label(u);
    live(to, stats.d)?;
    if from == to {
        return Err(Error::NoOpMove);
    }
    if stats.time_sizes[from] < 2 {
        return Err(Error::SingletonSource);
    }
    let sc = Scorer::new(priors);
    Ok(sc.exchange_time(stats, &sc.cache(stats), u, from, to))
}

/// ICL change for moving node `i` to cluster `to`.
pub fn delta_exchange_node(
    stats: &SuffStats,
    partition: &Partition,
    i: usize,
    to: usize,
    priors: &Priors,
) -> Result<f64> {
    let from = partition.node_label(i);
    live(to, stats.k)?;
    if from == to {
        return Err(Error::NoOpMove);
    }
    if stats.node_sizes[from] < 2 {
        return Err(Error::SingletonSource);
    }
    let sc = Scorer::new(priors);
    Ok(sc.exchange_node(stats, &sc.cache(stats), i, from, to))
}

/// ICL change for merging time clusters `a` and `b`.
pub fn delta_merge_time(stats: &SuffStats, a: usize, b: usize, priors: &Priors) -> Result<f64> {
    live(a, stats.d)?;
    live(b, stats.d)?;
    if a == b {
        return Err(Error::NoOpMove);
    }
    let sc = Scorer::new(priors);
    Ok(sc.merge_time(stats, &sc.cache(stats), a, b))
}

/// ICL change for merging node clusters `a` and `b`.
pub fn delta_merge_node(stats: &SuffStats, a: usize, b: usize, priors: &Priors) -> Result<f64> {
    live(a, stats.k)?;
    live(b, stats.k)?;
    if a == b {
        return Err(Error::NoOpMove);
    }
    let sc = Scorer::new(priors);
    Ok(sc.merge_node(stats, &sc.cache(stats), a, b))
}
