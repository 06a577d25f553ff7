//! Frequency distributions, their cumulative forms and normalized views.
//!
//! Counts are exact `u64` integers and every cumulative total is computed in
//! integer arithmetic. `n` (total observations) and `k` (bin count) are always
//! derived from the counts. Zero-valued bins are kept as they are.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::summation::neumaier_sum;

/// Nonnegative integer counts over `k >= 2` ordered bins with `n >= 1` total.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyDistribution {
    counts: Vec<u64>,
    n: u64,
}

impl FrequencyDistribution {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::TooFewBins(counts.len()));
        }
        let n = counts.iter().sum::<u64>();
        if n == 0 {
            return Err(Error::NoObservations);
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn into_counts(self) -> Vec<u64> {
        self.counts
    }

    /// Running totals: `totals[i] = counts[0] + ... + counts[i]`.
    pub fn cumulate(&self) -> CumulativeDistribution {
        let mut running = 0u64;
        let totals = self
            .counts
            .iter()
            .map(|&c| {
                running += c;
                running
            })
            .collect();
        CumulativeDistribution { totals, n: self.n }
    }

    /// Relative frequencies `counts[i] / n`.
    pub fn normalize(&self) -> ProbabilityVector {
        let n = self.n as f64;
        ProbabilityVector { probs: self.counts.iter().map(|&c| c as f64 / n).collect() }
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        Self::new(self.counts.iter().map(|&c| c * factor).collect())
    }
}

impl fmt::Display for FrequencyDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.counts)
    }
}

/// Nondecreasing running totals over `k >= 2` bins ending at `n >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CumulativeDistribution {
    totals: Vec<u64>,
    n: u64,
}

impl CumulativeDistribution {
    pub fn new(totals: Vec<u64>) -> Result<Self> {
        if totals.len() < 2 {
            return Err(Error::TooFewBins(totals.len()));
        }
        for (i, w) in totals.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::NotNondecreasing { index: i + 1, previous: w[0], value: w[1] });
            }
        }
        let n = *totals.last().unwrap();
        if n == 0 {
            return Err(Error::NoObservations);
        }
        Ok(Self { totals, n })
    }

    pub fn totals(&self) -> &[u64] {
        &self.totals
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.totals.len()
    }

    /// Inverse of [`FrequencyDistribution::cumulate`].
    pub fn decumulate(&self) -> FrequencyDistribution {
        let mut previous = 0u64;
        let counts = self
            .totals
            .iter()
            .map(|&t| {
                let c = t - previous;
                previous = t;
                c
            })
            .collect();
        FrequencyDistribution { counts, n: self.n }
    }

    /// Cumulative probabilities `totals[i] / n`.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.totals.iter().map(|&t| t as f64 / n).collect()
    }
}

impl fmt::Display for CumulativeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.totals)
    }
}

/// Relative frequencies summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(probs: Vec<f64>) -> Option<Self> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return None;
        }
        let total = neumaier_sum(probs.iter().copied());
        if libm::fabs(total - 1.0) > Self::SUM_TOLERANCE {
            return None;
        }
        Some(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Running sums of the probabilities.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, xs: &[u64]) -> fmt::Result {
    f.write_str("[")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("]")
}
