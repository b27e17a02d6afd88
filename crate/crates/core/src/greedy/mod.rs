//! Greedy ICL maximization.
//!
//! A search starts from an initial partition with at most `K_max` node
//! clusters and `D_max` time clusters and alternates two kinds of passes:
//!
//! * greedy exchange (GE): visit the items in shuffled order and move each one
//!   to the cluster with the largest ICL gain, if positive; a singleton item
//!   moving out empties its cluster, so that move is scored and committed as
//!   a merge;
//! * greedy merge (GM): repeatedly commit the best pairwise cluster merge
//!   while it improves the ICL.
//!
//! Strategy A runs GE+GM on intervals then on nodes, strategy B the reverse,
//! and strategy C interleaves node and interval picks in one mixed GE followed
//! by a mixed GM.

mod init;

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::icl::{icl_full, IclValue, Scorer};
use crate::partition::Partition;
use crate::priors::Priors;
use crate::stats::{Move, SuffStats};
use crate::tensor::InteractionTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Intervals first, then nodes.
    A,
    /// Nodes first, then intervals.
    B,
    /// Mixed passes alternating nodes and intervals.
    C,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::A, Strategy::B, Strategy::C];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::A => "A",
            Strategy::B => "B",
            Strategy::C => "C",
        }
    }

    fn schedule(&self) -> &'static [Target] {
        match self {
            Strategy::A => &[Target::Times, Target::Nodes],
            Strategy::B => &[Target::Nodes, Target::Times],
            Strategy::C => &[Target::Mixed],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Init {
    /// Item `x` in cluster `x mod K_max` (every item alone when `K_max = N`).
    Singletons,
    /// I.i.d. uniform labels over `K_max` (resp. `D_max`) clusters.
    Random,
    /// Average-linkage clustering of activity profiles, cut at `K_max`
    /// (resp. `D_max`) clusters.
    Hierarchical,
}

/// Which items a pass works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Nodes,
    Times,
    Mixed,
}

impl Target {
    fn nodes(&self) -> bool {
        matches!(self, Target::Nodes | Target::Mixed)
    }

    fn times(&self) -> bool {
        matches!(self, Target::Times | Target::Mixed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub strategy: Strategy,
    pub init: Init,
    pub k_max: usize,
    pub d_max: usize,
    pub restarts: usize,
    pub seed: u64,
    /// A move is committed only if its gain exceeds this.
    pub min_improvement: f64,
    pub priors: Priors,
    /// Draw a fresh visiting order for every GE sweep instead of once per
    /// pass.
    pub reshuffle_each_sweep: bool,
    /// Repeat GE+GM on a target until neither accepts a move.
    pub repeat_brackets: bool,
    /// Repeat the whole strategy schedule until a round accepts nothing, so
    /// the result is a local optimum for every move type.
    pub repeat_schedule: bool,
}

impl FitConfig {
    /// Defaults for `tensor`: strategy A, hierarchical initialization,
    /// `K_max = ⌈N/2⌉`, `D_max = ⌈U/2⌉`, ten restarts and unit priors.
    pub fn for_tensor(tensor: &InteractionTensor) -> Self {
        FitConfig {
            strategy: Strategy::A,
            init: Init::Hierarchical,
            k_max: tensor.n_nodes().div_ceil(2),
            d_max: tensor.n_intervals().div_ceil(2),
            restarts: 10,
            seed: 0,
            min_improvement: 1e-10,
            priors: Priors::default(),
            reshuffle_each_sweep: true,
            repeat_brackets: true,
            repeat_schedule: true,
        }
    }

    pub fn validate(&self, tensor: &InteractionTensor) -> Result<()> {
        if self.k_max == 0 || self.d_max == 0 {
            return Err(Error::InvalidConfig("K_max and D_max must be positive"));
        }
        if self.k_max > tensor.n_nodes() {
            return Err(Error::InvalidConfig("K_max exceeds the number of nodes"));
        }
        if self.d_max > tensor.n_intervals() {
            return Err(Error::InvalidConfig(
                "D_max exceeds the number of intervals",
            ));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1"));
        }
        if !(self.min_improvement >= 0.0 && self.min_improvement.is_finite()) {
            return Err(Error::InvalidConfig(
                "min_improvement must be finite and >= 0",
            ));
        }
        self.priors.validate()
    }
}

/// One committed move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub mv: Move,
    pub delta: f64,
    pub icl_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub partition: Partition,
    pub icl: IclValue,
    pub strategy: Strategy,
    pub restart_index: usize,
    pub initial_icl: f64,
    pub trace: Vec<TraceStep>,
}

/// Seed of restart `index` derived from the run seed.
pub fn restart_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed
        ^ (index as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Initial partition with at most `K_max` node and `D_max` time clusters.
pub fn init_partition<R: rand::Rng + ?Sized>(
    tensor: &InteractionTensor,
    config: &FitConfig,
    rng: &mut R,
) -> Result<Partition> {
    if config.k_max == 0 || config.d_max == 0 {
        return Err(Error::InvalidConfig("K_max and D_max must be positive"));
    }
    let n = tensor.n_nodes();
    let u = tensor.n_intervals();
    let k_max = config.k_max.min(n);
    let d_max = config.d_max.min(u);
    let (nodes, times) = match config.init {
        Init::Singletons => (init::round_robin(n, k_max), init::round_robin(u, d_max)),
        Init::Random => {
            let nodes = init::uniform(n, k_max, rng);
            (nodes, init::uniform(u, d_max, rng))
        }
        Init::Hierarchical => {
            let node_features: Vec<Vec<f64>> = (0..n).map(|i| tensor.node_profile(i)).collect();
            let time_features: Vec<Vec<f64>> = (0..u).map(|x| tensor.interval_profile(x)).collect();
            (
                init::average_linkage(&node_features, k_max),
                init::average_linkage(&time_features, d_max),
            )
        }
    };
    Partition::new(nodes, times)
}

/// Mutable state of one greedy search.
#[derive(Debug, Clone)]
pub struct FitState<'t> {
    tensor: &'t InteractionTensor,
    partition: Partition,
    stats: SuffStats,
    priors: Priors,
    scorer: Scorer,
    cur: Vec<f64>,
    scratch: Vec<f64>,
    min_improvement: f64,
    reshuffle_each_sweep: bool,
    rng: ChaCha8Rng,
    initial_icl: f64,
    icl: f64,
    trace: Vec<TraceStep>,
}

impl<'t> FitState<'t> {
    pub fn new(
        tensor: &'t InteractionTensor,
        partition: Partition,
        k_max: usize,
        d_max: usize,
        priors: Priors,
        seed: u64,
    ) -> Result<Self> {
        priors.validate()?;
        let stats = SuffStats::compute(tensor, &partition, k_max, d_max)?;
        let scorer = Scorer::new(&priors);
        let cur = scorer.cache(&stats);
        let icl = icl_full(&stats, &priors).value;
        Ok(FitState {
            tensor,
            partition,
            stats,
            priors,
            scorer,
            cur,
            scratch: Vec::new(),
            min_improvement: 1e-10,
            reshuffle_each_sweep: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
            initial_icl: icl,
            icl,
            trace: Vec::new(),
        })
    }

    pub fn with_min_improvement(mut self, min_improvement: f64) -> Self {
        self.min_improvement = min_improvement;
        self
    }

    pub fn with_reshuffle(mut self, reshuffle_each_sweep: bool) -> Self {
        self.reshuffle_each_sweep = reshuffle_each_sweep;
        self
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn stats(&self) -> &SuffStats {
        &self.stats
    }

    pub fn priors(&self) -> &Priors {
        &self.priors
    }

    /// Running ICL: the initial value plus every committed delta.
    pub fn icl(&self) -> f64 {
        self.icl
    }

    /// ICL recomputed from the statistics.
    pub fn icl_full(&self) -> IclValue {
        icl_full(&self.stats, &self.priors)
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    /// Best move of node `i` to another live cluster.
    pub fn best_node_move(&mut self, i: usize) -> Option<(Move, f64)> {
        let st = &self.stats;
        if st.k < 2 {
            return None;
        }
        let from = self.partition.node_label(i);
        let mut best: Option<(usize, f64)> = None;
        if st.node_sizes[from] >= 2 {
            let leave = self
                .scorer
                .node_leave(st, &self.cur, i, from, &mut self.scratch);
            for to in (0..st.k).filter(|&to| to != from) {
                let delta = self
                    .scorer
                    .node_join(st, &self.cur, i, from, leave, &self.scratch, to);
                if best.is_none_or(|(_, b)| delta > b) {
                    best = Some((to, delta));
                }
            }
            best.map(|(to, delta)| (Move::Node { node: i, to }, delta))
        } else {
            for to in (0..st.k).filter(|&to| to != from) {
                let delta = self.scorer.merge_node(st, &self.cur, from, to);
                if best.is_none_or(|(_, b)| delta > b) {
                    best = Some((to, delta));
                }
            }
            best.map(|(into, delta)| (Move::MergeNodes { from, into }, delta))
        }
    }

    /// Best move of interval `u` to another live time cluster.
    pub fn best_interval_move(&mut self, u: usize) -> Option<(Move, f64)> {
        let st = &self.stats;
        if st.d < 2 {
            return None;
        }
        let from = self.partition.interval_label(u);
        let mut best: Option<(usize, f64)> = None;
        if st.time_sizes[from] >= 2 {
            let leave = self.scorer.time_leave(st, &self.cur, u, from);
            for to in (0..st.d).filter(|&to| to != from) {
                let delta = self.scorer.time_join(st, &self.cur, u, from, leave, to);
                if best.is_none_or(|(_, b)| delta > b) {
                    best = Some((to, delta));
                }
            }
            best.map(|(to, delta)| (Move::Interval { interval: u, to }, delta))
        } else {
            for to in (0..st.d).filter(|&to| to != from) {
                let delta = self.scorer.merge_time(st, &self.cur, from, to);
                if best.is_none_or(|(_, b)| delta > b) {
                    best = Some((to, delta));
                }
            }
            best.map(|(into, delta)| (Move::MergeTimes { from, into }, delta))
        }
    }

    /// Best pairwise merge on `target`, as `(Move, delta)`. Pairs are scanned
    /// in increasing id order (nodes before times) and the first maximum wins.
    pub fn best_merge(&self, target: Target) -> Option<(Move, f64)> {
        let st = &self.stats;
        let mut best: Option<(Move, f64)> = None;
        let mut consider = |mv: Move, delta: f64| {
            if best.is_none_or(|(_, b)| delta > b) {
                best = Some((mv, delta));
            }
        };
        if target.nodes() {
            for a in 0..st.k {
                for b in (a + 1)..st.k {
                    let delta = self.scorer.merge_node(st, &self.cur, a, b);
                    consider(Move::MergeNodes { from: b, into: a }, delta);
                }
            }
        }
        if target.times() {
            for a in 0..st.d {
                for b in (a + 1)..st.d {
                    let delta = self.scorer.merge_time(st, &self.cur, a, b);
                    consider(Move::MergeTimes { from: b, into: a }, delta);
                }
            }
        }
        best
    }

    /// Commits `mv` and records `delta` in the trace.
    pub fn commit(&mut self, mv: Move, delta: f64) -> Result<()> {
        let (k, d) = (self.stats.k, self.stats.d);
        let touched = match mv {
            Move::Node { node, to } => Some((true, self.partition.node_label(node), to)),
            Move::Interval { interval, to } => {
                Some((false, self.partition.interval_label(interval), to))
            }
            _ => None,
        };
        self.stats
            .apply_move(self.tensor, &mut self.partition, mv)?;
        match touched {
            Some((true, from, to)) if self.stats.k == k => {
                self.scorer
                    .refresh_node_cluster(&self.stats, &mut self.cur, from);
                self.scorer
                    .refresh_node_cluster(&self.stats, &mut self.cur, to);
            }
            Some((false, from, to)) if self.stats.d == d => {
                self.scorer
                    .refresh_time_cluster(&self.stats, &mut self.cur, from);
                self.scorer
                    .refresh_time_cluster(&self.stats, &mut self.cur, to);
            }
            _ => self.scorer.refresh(&self.stats, &mut self.cur),
        }
        self.icl += delta;
        self.trace.push(TraceStep {
            mv,
            delta,
            icl_after: self.icl,
        });
        Ok(())
    }

    fn try_node(&mut self, i: usize) -> bool {
        match self.best_node_move(i) {
            Some((mv, delta)) if delta > self.min_improvement => {
                self.commit(mv, delta).expect("candidate moves are valid");
                true
            }
            _ => false,
        }
    }

    fn try_interval(&mut self, u: usize) -> bool {
        match self.best_interval_move(u) {
            Some((mv, delta)) if delta > self.min_improvement => {
                self.commit(mv, delta).expect("candidate moves are valid");
                true
            }
            _ => false,
        }
    }

    /// Greedy exchange: sweeps over the shuffled items until a full sweep
    /// accepts nothing. Returns the number of accepted moves.
    pub fn ge_pass(&mut self, target: Target) -> usize {
        let mut nodes: Vec<usize> = if target.nodes() {
            (0..self.stats.n_nodes).collect()
        } else {
            Vec::new()
        };
        let mut times: Vec<usize> = if target.times() {
            (0..self.stats.n_intervals).collect()
        } else {
            Vec::new()
        };
        let mut total = 0;
        let mut first = true;
        loop {
            if first || self.reshuffle_each_sweep {
                nodes.shuffle(&mut self.rng);
                times.shuffle(&mut self.rng);
            }
            first = false;
            let mut accepted = 0;
            for idx in 0..nodes.len().max(times.len()) {
                if let Some(&i) = nodes.get(idx) {
                    accepted += usize::from(self.try_node(i));
                }
                if let Some(&u) = times.get(idx) {
                    accepted += usize::from(self.try_interval(u));
                }
            }
            total += accepted;
            if accepted == 0 {
                return total;
            }
        }
    }

    /// Greedy merge: commits the best merge while it improves the ICL.
    /// Returns the number of merges.
    pub fn gm_pass(&mut self, target: Target) -> usize {
        let mut merges = 0;
        while let Some((mv, delta)) = self.best_merge(target) {
            if delta <= self.min_improvement {
                break;
            }
            self.commit(mv, delta).expect("candidate merges are valid");
            merges += 1;
        }
        merges
    }

    /// GE then GM on `target`, repeated while anything is accepted when
    /// `repeat` is set.
    pub fn bracket(&mut self, target: Target, repeat: bool) -> usize {
        let mut total = 0;
        loop {
            let accepted = self.ge_pass(target) + self.gm_pass(target);
            total += accepted;
            if accepted == 0 || !repeat {
                return total;
            }
        }
    }

    /// Largest gain over every single exchange and merge, or `None` when no
    /// move exists (`K = D = 1`).
    pub fn best_single_move(&mut self) -> Option<(Move, f64)> {
        let mut best: Option<(Move, f64)> = None;
        let mut keep = |cand: Option<(Move, f64)>| {
            if let Some((mv, delta)) = cand {
                if best.is_none_or(|(_, b)| delta > b) {
                    best = Some((mv, delta));
                }
            }
        };
        for i in 0..self.stats.n_nodes {
            keep(self.best_node_move(i));
        }
        for u in 0..self.stats.n_intervals {
            keep(self.best_interval_move(u));
        }
        keep(self.best_merge(Target::Mixed));
        best
    }

    /// Final result. The reported ICL is recomputed from fresh statistics so
    /// it depends only on the partition, not on the path that reached it.
    pub fn into_result(self, strategy: Strategy, restart_index: usize) -> FitResult {
        let fresh = SuffStats::compute(self.tensor, &self.partition, self.stats.k, self.stats.d)
            .expect("live clusters fit their own counts");
        let icl = icl_full(&fresh, &self.priors);
        FitResult {
            partition: self.partition,
            icl,
            strategy,
            restart_index,
            initial_icl: self.initial_icl,
            trace: self.trace,
        }
    }
}

/// Runs one restart of `config.strategy`, with the RNG seeded from
/// [`restart_seed`]`(config.seed, restart_index)`.
pub fn run_restart(
    tensor: &InteractionTensor,
    config: &FitConfig,
    restart_index: usize,
) -> Result<FitResult> {
    config.validate(tensor)?;
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(config.seed, restart_index));
    let partition = init_partition(tensor, config, &mut rng)?;
    let search_seed = rand::Rng::random(&mut rng);
    let mut state = FitState::new(
        tensor,
        partition,
        config.k_max,
        config.d_max,
        config.priors,
        search_seed,
    )?
    .with_min_improvement(config.min_improvement)
    .with_reshuffle(config.reshuffle_each_sweep);
    loop {
        let mut accepted = 0;
        for &target in config.strategy.schedule() {
            accepted += state.bracket(target, config.repeat_brackets);
        }
        if accepted == 0 || !config.repeat_schedule {
            break;
        }
    }
    Ok(state.into_result(config.strategy, restart_index))
}

/// A single search (restart index 0).
pub fn run_strategy(tensor: &InteractionTensor, config: &FitConfig) -> Result<FitResult> {
    run_restart(tensor, config, 0)
}

/// Highest-ICL result; ties keep the earliest entry.
pub fn select_best<I: IntoIterator<Item = FitResult>>(results: I) -> Option<FitResult> {
    let mut best: Option<FitResult> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| r.icl.value > b.icl.value) {
            best = Some(r);
        }
    }
    best
}

/// Runs `config.restarts` independent searches and keeps the best.
pub fn fit(tensor: &InteractionTensor, config: &FitConfig) -> Result<FitResult> {
    config.validate(tensor)?;
    let mut runs = Vec::with_capacity(config.restarts);
    for r in 0..config.restarts {
        runs.push(run_restart(tensor, config, r)?);
    }
    Ok(select_best(runs).expect("at least one restart"))
}

/// Static baseline: the same search on the time-aggregated graph, where the
/// single interval keeps `D = 1`.
pub fn fit_static(tensor: &InteractionTensor, config: &FitConfig) -> Result<FitResult> {
    let aggregated = tensor.aggregate_over_time();
    let config = FitConfig {
        d_max: 1,
        ..config.clone()
    };
    fit(&aggregated, &config)
}

#[cfg(test)]
mod tests;
