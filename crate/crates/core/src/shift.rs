//! Distributional shift (DS) and relative distributional shift (RDS).
//!
//! For a cumulative distribution `F` with `n` observations over `k` bins,
//!
//! ```text
//! DS = (Σ (F_i / n)^z − 1) / (k − 1)
//! ```
//!
//! `z = 1` gives the linear form, any fixed `z > 0` the general form, and the
//! default uses the bin-dependent exponent `z = (k + 1) / k`. DS is 0 when all
//! mass sits in the right-most bin and 1 when it all sits in the left-most.
//! RDS is `DS(F2) − DS(F1)`: positive when `F1` lies to the right of `F2`.

use alloc::vec::Vec;

use crate::distributions::{CumulativeDistribution, FrequencyDistribution};
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// How the exponent applied to cumulative frequencies is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ShiftExponent {
    /// `z = 1`.
    Linear,
    /// A caller-supplied `z > 0`. Values below 1 are accepted for
    /// experimentation only.
    Fixed(f64),
    /// `z = (k + 1) / k`.
    #[default]
    BinDependent,
}

impl ShiftExponent {
    /// The exponent used for a distribution with `k` bins.
    pub fn z_for(self, k: usize) -> f64 {
        match self {
            ShiftExponent::Linear => 1.0,
            ShiftExponent::Fixed(z) => z,
            ShiftExponent::BinDependent => bin_dependent_exponent(k),
        }
    }

    fn validate(self) -> Result<Self> {
        if let ShiftExponent::Fixed(z) = self {
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::InvalidExponent(z));
            }
        }
        Ok(self)
    }
}

/// `(k + 1) / k`.
pub fn bin_dependent_exponent(k: usize) -> f64 {
    (k as f64 + 1.0) / k as f64
}

/// A computed DS value together with the parameters it was computed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftValue {
    pub ds: f64,
    pub z_used: f64,
    pub n: u64,
    pub k: usize,
}

/// `Σ (F_i / n)^z`, compensated. Lies in `[1, k]` for any `z > 0`.
pub fn normalized_power_sum(cumulative: &CumulativeDistribution, z: f64) -> f64 {
    let n = cumulative.n() as f64;
    let mut acc = NeumaierSum::new();
    for &t in cumulative.totals() {
        acc.add(power_term(t as f64 / n, z));
    }
    acc.total()
}

#[inline]
pub(crate) fn power_term(ratio: f64, z: f64) -> f64 {
    if z == 1.0 {
        ratio
    } else {
        libm::pow(ratio, z)
    }
}

/// Maps a normalized power sum in `[1, k]` onto `[0, 1]`.
#[inline]
pub fn standardize(power_sum: f64, k: usize) -> f64 {
    ((power_sum - 1.0) / (k as f64 - 1.0)).clamp(0.0, 1.0)
}

/// Linear DS, `(ΣF/n − 1)/(k − 1)`, computed from the exact integer sum.
pub fn ds_linear(cumulative: &CumulativeDistribution) -> ShiftValue {
    let n = cumulative.n();
    let k = cumulative.k();
    let total: u128 = cumulative.totals().iter().map(|&t| t as u128).sum();
    let excess = total - n as u128;
    let ds = excess as f64 / (n as f64 * (k as f64 - 1.0));
    ShiftValue { ds: ds.clamp(0.0, 1.0), z_used: 1.0, n, k }
}

/// DS with a fixed exponent `z > 0`.
pub fn ds_with_exponent(cumulative: &CumulativeDistribution, z: f64) -> Result<ShiftValue> {
    ShiftExponent::Fixed(z).validate()?;
    let k = cumulative.k();
    let ds = standardize(normalized_power_sum(cumulative, z), k);
    Ok(ShiftValue { ds, z_used: z, n: cumulative.n(), k })
}

/// DS with the bin-dependent exponent `z = (k + 1) / k`.
pub fn ds(cumulative: &CumulativeDistribution) -> ShiftValue {
    let k = cumulative.k();
    let z = bin_dependent_exponent(k);
    let ds = standardize(normalized_power_sum(cumulative, z), k);
    ShiftValue { ds, z_used: z, n: cumulative.n(), k }
}

/// DS under any exponent mode.
pub fn ds_with(cumulative: &CumulativeDistribution, exponent: ShiftExponent) -> Result<ShiftValue> {
    match exponent.validate()? {
        ShiftExponent::Linear => Ok(ds_linear(cumulative)),
        ShiftExponent::Fixed(z) => ds_with_exponent(cumulative, z),
        ShiftExponent::BinDependent => Ok(ds(cumulative)),
    }
}

/// Default DS of a (non-cumulative) frequency distribution.
pub fn ds_of(frequencies: &FrequencyDistribution) -> ShiftValue {
    ds(&frequencies.cumulate())
}

/// Signed relative shift plus whether it was computed on the validated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeShift {
    pub rds: f64,
    /// `false` when the two distributions have different bin counts.
    pub validated: bool,
}

/// `DS(F2) − DS(F1)` with default DS. Both distributions must share `k`;
/// `n` may differ.
pub fn rds(first: &CumulativeDistribution, second: &CumulativeDistribution) -> Result<f64> {
    rds_with(first, second, false).map(|r| r.rds)
}

/// Like [`rds`], but with `allow_unequal_k` distributions with different bin
/// counts are compared anyway and the result is marked unvalidated.
pub fn rds_with(
    first: &CumulativeDistribution,
    second: &CumulativeDistribution,
    allow_unequal_k: bool,
) -> Result<RelativeShift> {
    let same_k = first.k() == second.k();
    if !same_k && !allow_unequal_k {
        return Err(Error::BinCountMismatch { left: first.k(), right: second.k() });
    }
    Ok(RelativeShift { rds: ds(second).ds - ds(first).ds, validated: same_k })
}

/// Precomputed `(F / n)^z` for every `F in 0..=n`, so that the power sum of a
/// member of a feasible set is a sum of table lookups.
#[derive(Debug, Clone)]
pub struct PowerTable {
    terms: Vec<f64>,
}

impl PowerTable {
    pub fn new(n: u64, z: f64) -> Self {
        let nf = n as f64;
        Self { terms: (0..=n).map(|f| power_term(f as f64 / nf, z)).collect() }
    }

    #[inline]
    pub fn power_sum(&self, totals: &[u64]) -> f64 {
        let mut acc = NeumaierSum::new();
        for &t in totals {
            acc.add(self.terms[t as usize]);
        }
        acc.total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cd(t: &[u64]) -> CumulativeDistribution {
        CumulativeDistribution::new(t.to_vec()).unwrap()
    }

    fn fd(c: &[u64]) -> FrequencyDistribution {
        FrequencyDistribution::new(c.to_vec()).unwrap()
    }

    #[test]
    fn linear_examples() {
        assert_eq!(ds_linear(&cd(&[1, 2, 3])).ds, 0.5);
        assert!((ds_linear(&cd(&[2, 3, 3])).ds - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(ds_linear(&cd(&[0, 0, 3])).ds, 0.0);
        assert_eq!(ds_linear(&cd(&[3, 3, 3])).ds, 1.0);
    }

    #[test]
    fn exponent_examples() {
        let f3 = cd(&[0, 3, 3, 5]);
        assert!((normalized_power_sum(&f3, 3.0) - 1.432).abs() < 1e-12);
        assert!((ds_with_exponent(&f3, 3.0).unwrap().ds - 0.144).abs() < 1e-12);
        let f4 = cd(&[1, 1, 4, 5]);
        assert!((normalized_power_sum(&f4, 3.0) - 1.528).abs() < 1e-12);
        assert!((ds_with_exponent(&f4, 3.0).unwrap().ds - 0.176).abs() < 1e-12);
        let f = cd(&[0, 1, 3]);
        assert!((normalized_power_sum(&f, 2.0) - 10.0 / 9.0).abs() < 1e-12);
        assert!((ds_with_exponent(&f, 2.0).unwrap().ds - (10.0 / 9.0 - 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn default_examples() {
        let v = ds(&cd(&[10, 10, 10]));
        assert_eq!(v.ds, 1.0);
        assert!((v.z_used - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(ds(&cd(&[0, 0, 10])).ds, 0.0);
        assert!((ds_of(&fd(&[21, 2, 0, 2, 21])).ds - 0.435).abs() < 1e-3);
        assert!((ds_of(&fd(&[1, 1, 42, 1, 1])).ds - 0.489).abs() < 1e-3);
    }

    #[test]
    fn rds_examples() {
        let a = fd(&[10, 0, 0]).cumulate();
        let b = fd(&[0, 0, 10]).cumulate();
        assert_eq!(rds(&a, &b).unwrap(), -1.0);
        assert_eq!(rds(&a, &a).unwrap(), 0.0);
        let r = rds(&fd(&[21, 2, 0, 2, 21]).cumulate(), &fd(&[1, 1, 42, 1, 1]).cumulate()).unwrap();
        assert!((r - 0.053).abs() < 2e-3);
    }

    #[test]
    fn rds_unequal_n_is_fine() {
        let a = fd(&[10, 0, 0]).cumulate();
        let b = fd(&[0, 0, 3]).cumulate();
        assert_eq!(rds(&a, &b).unwrap(), -1.0);
    }

    #[test]
    fn rds_unequal_k_requires_override() {
        let a = cd(&[1, 2]);
        let b = cd(&[0, 1, 2]);
        assert_eq!(rds(&a, &b), Err(Error::BinCountMismatch { left: 2, right: 3 }));
        let r = rds_with(&a, &b, true).unwrap();
        assert!(!r.validated);
        assert!(rds_with(&a, &a, false).unwrap().validated);
    }

    #[test]
    fn invalid_exponents() {
        let f = cd(&[1, 2]);
        assert!(matches!(ds_with_exponent(&f, 0.0), Err(Error::InvalidExponent(_))));
        assert!(matches!(ds_with_exponent(&f, -1.0), Err(Error::InvalidExponent(_))));
        assert!(matches!(ds_with_exponent(&f, f64::NAN), Err(Error::InvalidExponent(_))));
        // below 1 is accepted
        assert!(ds_with_exponent(&f, 0.5).is_ok());
    }

    #[test]
    fn modes_agree() {
        let f = cd(&[1, 3, 4, 7]);
        assert_eq!(ds_with(&f, ShiftExponent::Linear).unwrap(), ds_linear(&f));
        assert_eq!(ds_with(&f, ShiftExponent::BinDependent).unwrap(), ds(&f));
        assert_eq!(ds_with(&f, ShiftExponent::Fixed(2.0)).unwrap(), ds_with_exponent(&f, 2.0).unwrap());
        assert_eq!(ShiftExponent::default().z_for(4), 1.25);
    }

    #[test]
    fn power_table_matches_direct_sum() {
        let f = cd(&[0, 3, 3, 5]);
        let table = PowerTable::new(5, 1.25);
        assert_eq!(table.power_sum(f.totals()), normalized_power_sum(&f, 1.25));
    }
}
