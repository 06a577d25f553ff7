use alloc::string::String;
use alloc::vec::Vec;

use crate::measures::Measure;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("a distribution needs at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("a distribution needs at least one observation (all counts are zero)")]
    NoObservations,
    #[error("cumulative totals must be nondecreasing (bin {index} drops from {previous} to {value})")]
    NotNondecreasing { index: usize, previous: u64, value: u64 },
    #[error("bin counts differ: k = {left} vs k = {right}")]
    BinCountMismatch { left: usize, right: usize },
    #[error("invalid exponent z = {0} (must be finite and > 0)")]
    InvalidExponent(f64),
    #[error("invalid feasible set parameters n = {n}, k = {k} (need n >= 1, k >= 2)")]
    InvalidFeasibleSet { n: u64, k: usize },
    #[error("feasible set A(n={n}, k={k}) has {cardinality} members, above the cap of {cap}")]
    CapExceeded { n: u64, k: usize, cardinality: String, cap: u64 },
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("{measure} is undefined for pair {pair_index}: {first:?} vs {second:?}")]
    UndefinedMeasure { pair_index: usize, measure: Measure, first: Vec<u64>, second: Vec<u64> },
    #[error("regression needs two series of equal length >= 2 (got {xs} and {ys})")]
    RegressionInput { xs: usize, ys: usize },
    #[error("unknown series '{name}'; valid names are {valid}")]
    UnknownSeries { name: String, valid: String },
}
