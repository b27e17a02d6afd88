use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A node index is not below the number of nodes.
    NodeOutOfRange {
        node: usize,
        n_nodes: usize,
    },
    /// An interval index is not below the number of intervals.
    IntervalOutOfRange {
        interval: usize,
        n_intervals: usize,
    },
    SelfLoop {
        node: usize,
    },
    /// A contact time outside `(0, horizon]`.
    TimeOutOfRange {
        t: f64,
        horizon: f64,
    },
    /// The interval width does not tile the horizon exactly.
    NonDividingDelta {
        delta: f64,
        horizon: f64,
    },
    /// Dimensions of zero, or otherwise unusable sizes.
    InvalidDimension(&'static str),
    /// Label vectors, cluster counts or capacities are inconsistent.
    InvalidPartition(&'static str),
    /// A statistics capacity smaller than the live cluster count.
    CapacityTooSmall {
        live: usize,
        capacity: usize,
    },
    /// A move that refers to a cluster id that is not live.
    DeadCluster {
        id: usize,
        live: usize,
    },
    /// An exchange whose source and destination coincide.
    NoOpMove,
    /// An exchange from a singleton cluster; it must be expressed as a merge.
    SingletonSource,
    InvalidPriors,
    InvalidConfig(&'static str),
    InvalidModel(&'static str),
    LengthMismatch {
        left: usize,
        right: usize,
    },
    TooFewItems {
        len: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NodeOutOfRange { node, n_nodes } => {
                write!(f, "node {node} out of range (N = {n_nodes})")
            }
            Error::IntervalOutOfRange {
                interval,
                n_intervals,
            } => write!(f, "interval {interval} out of range (U = {n_intervals})"),
            Error::SelfLoop { node } => write!(f, "self-loop on node {node}"),
            Error::TimeOutOfRange { t, horizon } => {
                write!(f, "contact time {t} outside (0, {horizon}]")
            }
            Error::NonDividingDelta { delta, horizon } => {
                write!(
                    f,
                    "interval width {delta} does not divide horizon {horizon}"
                )
            }
            Error::InvalidDimension(msg) => write!(f, "invalid dimension: {msg}"),
            Error::InvalidPartition(msg) => write!(f, "invalid partition: {msg}"),
            Error::CapacityTooSmall { live, capacity } => {
                write!(f, "capacity {capacity} below live cluster count {live}")
            }
            Error::DeadCluster { id, live } => {
                write!(f, "cluster {id} is not live ({live} live clusters)")
            }
            Error::NoOpMove => f.write_str("source and destination cluster coincide"),
            Error::SingletonSource => {
                f.write_str("exchange from a singleton cluster must be a merge")
            }
            Error::InvalidPriors => f.write_str("priors must be strictly positive and finite"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidModel(msg) => write!(f, "invalid planted model: {msg}"),
            Error::LengthMismatch { left, right } => {
                write!(f, "label vectors differ in length ({left} vs {right})")
            }
            Error::TooFewItems { len } => write!(f, "need at least 2 labels, got {len}"),
        }
    }
}

impl core::error::Error for Error {}
