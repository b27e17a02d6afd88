//! Restarts and strategy selection on a thread pool.

use rayon::prelude::*;
use serde::Serialize;
use tsbm_core::{
    run_restart, select_best, FitConfig, FitResult, InteractionTensor, Partition, Strategy,
};

use crate::error::{Error, Result};

/// One strategy, or all three keeping the best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyChoice {
    One(Strategy),
    Best,
}

impl StrategyChoice {
    pub fn strategies(&self) -> Vec<Strategy> {
        match self {
            StrategyChoice::One(s) => vec![*s],
            StrategyChoice::Best => Strategy::ALL.to_vec(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StrategyChoice::One(s) => s.name(),
            StrategyChoice::Best => "best",
        }
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub strategy: &'static str,
    pub restart: usize,
    pub icl: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub moves: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub best: FitResult,
    pub restarts: Vec<RestartSummary>,
    /// Every run's trace increased strictly at each committed move.
    pub traces_monotone: bool,
}

/// Each committed move raised the ICL by a positive amount.
pub fn trace_is_increasing(fit: &FitResult) -> bool {
    let mut prev = fit.initial_icl;
    fit.trace.iter().all(|step| {
        let ok = step.delta > 0.0 && step.icl_after > prev;
        prev = step.icl_after;
        ok
    })
}

/// Runs `f` on a pool of `jobs` threads (0 means one per core).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every restart of every chosen strategy in parallel. The result does
/// not depend on scheduling: runs are collected in (strategy, restart) order
/// and ties keep the earliest.
pub fn fit_all(
    tensor: &InteractionTensor,
    config: &FitConfig,
    choice: StrategyChoice,
) -> Result<FitReport> {
    config.validate(tensor)?;
    let tasks: Vec<(Strategy, usize)> = choice
        .strategies()
        .into_iter()
        .flat_map(|s| (0..config.restarts).map(move |r| (s, r)))
        .collect();
    let runs = tasks
        .par_iter()
        .map(|&(strategy, r)| {
            let cfg = FitConfig {
                strategy,
                ..config.clone()
            };
            run_restart(tensor, &cfg, r)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let restarts = runs
        .iter()
        .map(|r| RestartSummary {
            strategy: r.strategy.name(),
            restart: r.restart_index,
            icl: r.icl.value,
            k: r.partition.k(),
            d: r.partition.d(),
            moves: r.trace.len(),
        })
        .collect();
    let traces_monotone = runs.iter().all(trace_is_increasing);
    let best = select_best(runs).expect("at least one run");
    Ok(FitReport {
        best,
        restarts,
        traces_monotone,
    })
}

/// Static baseline: the time-aggregated graph with a single time cluster.
/// The returned partition is expanded back to the original intervals, all in
/// time cluster 0.
pub fn fit_static_all(
    tensor: &InteractionTensor,
    config: &FitConfig,
    choice: StrategyChoice,
) -> Result<FitReport> {
    let aggregated = tensor.aggregate_over_time();
    let cfg = FitConfig {
        d_max: 1,
        ..config.clone()
    };
    let mut report = fit_all(&aggregated, &cfg, choice)?;
    report.best.partition = Partition::new(
        report.best.partition.node_labels().to_vec(),
        vec![0; tensor.n_intervals()],
    )?;
    Ok(report)
}
