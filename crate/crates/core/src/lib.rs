//! Clustering of nodes and time intervals in dynamic networks with a temporal
//! Poisson stochastic block model.
//!
//! Interactions between `N` nodes are counted on `U` equal-width time
//! intervals. Nodes are grouped into `K` clusters and intervals into `D` time
//! clusters; the count on a directed pair during an interval is Poisson with a
//! rate that depends only on the two node clusters and the time cluster.
//! Rates and mixing proportions are integrated out under conjugate
//! Gamma/Dirichlet priors, which yields the exact integrated complete-data
//! likelihood (ICL). The [`greedy`] module maximizes it directly over labels
//! and cluster counts with exchange and merge moves whose ICL changes are
//! computed incrementally from the sufficient statistics in [`stats`].
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel restarts live in the companion `tsbm` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod eval;
pub mod greedy;
pub mod icl;
pub mod partition;
pub mod priors;
pub mod simulate;
pub mod stats;
pub mod tensor;

pub use error::{Error, Result};
pub use eval::{ari, confusion, ContingencyTable};
pub use greedy::{
    fit, fit_static, init_partition, restart_seed, run_restart, run_strategy, select_best,
    FitConfig, FitResult, FitState, Init, Strategy, Target, TraceStep,
};
pub use icl::{
    delta_exchange_node, delta_exchange_time, delta_merge_node, delta_merge_time, icl_full,
    log_block_likelihood, log_label_prior, IclValue,
};
pub use partition::Partition;
pub use priors::Priors;
pub use simulate::{
    sample_planted, scenario1, scenario1_model, scenario2, scenario2_model, PlantedModel, Sample,
};
pub use stats::{Move, SuffStats};
pub use tensor::{aggregate_stream, build_tensor, Contact, Edge, InteractionTensor};
