//! Distributional shift (DS) and relative distributional shift (RDS) for
//! discrete frequency distributions.
//!
//! DS measures how far the frequencies of a binned distribution sit away from
//! its right-most bin, on a scale from 0 (everything in the last bin) to 1
//! (everything in the first). RDS is the signed difference in DS between two
//! distributions. The crate also carries the six established comparison
//! measures RDS is usually read against, the feasible-set machinery
//! (exact cardinality, lexicographic enumeration, uniform sampling and DS
//! uniqueness audits) and a seeded Monte Carlo correlation harness.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the CLI and
//! thread-parallel runners live in the `dshift` companion crate.
//!
//! ```
//! use dshift_core::{FrequencyDistribution, shift};
//!
//! let f = FrequencyDistribution::new(vec![2, 1, 0]).unwrap();
//! let linear = shift::ds_linear(&f.cumulate());
//! assert!((linear.ds - 5.0 / 6.0).abs() < 1e-12);
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod distributions;
mod error;
pub mod exact;
pub mod experiments;
pub mod feasible;
pub mod measures;
pub mod rng;
pub mod shift;
pub mod summation;

pub use distributions::{CumulativeDistribution, FrequencyDistribution, ProbabilityVector};
pub use error::{Error, Result};
pub use experiments::{
    CorrelationTable, ExperimentConfig, RegressionSummary, Source, UndefinedPolicy,
};
pub use feasible::{FeasibleSetSpec, UniquenessReport};
pub use measures::{Measure, MeasureReport};
pub use shift::{ShiftExponent, ShiftValue};
