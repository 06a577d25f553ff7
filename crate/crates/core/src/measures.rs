//! Established comparison measures for pairs of binned distributions.
//!
//! All measures work on relative frequencies `p_i = f_i / n` and cumulative
//! probabilities `P_i = F_i / n`, so distributions with different `n` can be
//! compared. Bins are unit-spaced for the earth mover's distance.
//!
//! Chi-square distance and KL divergence are undefined when some bin is empty
//! in both distributions. KL is also undefined when the second distribution
//! is empty where the first is not. Undefined values are `None`.

use alloc::collections::BTreeSet;
use core::fmt;

use crate::distributions::{CumulativeDistribution, FrequencyDistribution};
use crate::error::{Error, Result};
use crate::shift;
use crate::summation::NeumaierSum;

/// The seven series the correlation harness works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    AbsRds,
    ChiSquare,
    NonIntersection,
    KlSqrt,
    Ks,
    Emd,
    RpsSqrt,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::AbsRds,
        Measure::ChiSquare,
        Measure::NonIntersection,
        Measure::KlSqrt,
        Measure::Ks,
        Measure::Emd,
        Measure::RpsSqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::AbsRds => "abs_rds",
            Measure::ChiSquare => "chi_square",
            Measure::NonIntersection => "non_intersection",
            Measure::KlSqrt => "kl_sqrt",
            Measure::Ks => "ks",
            Measure::Emd => "emd",
            Measure::RpsSqrt => "rps_sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Whether the measure is built on cumulative forms.
    pub fn is_cumulative(self) -> bool {
        matches!(self, Measure::AbsRds | Measure::Ks | Measure::Emd | Measure::RpsSqrt)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How bins that are empty in both distributions are treated by chi-square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroHandling {
    /// Any bin empty in both distributions makes the distance undefined.
    #[default]
    Strict,
    /// Such bins contribute nothing.
    Lenient,
}

fn check_bins(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::BinCountMismatch { left, right });
    }
    Ok(())
}

/// `½ Σ (p1 − p2)² / (p1 + p2)`.
pub fn chi_square_distance(
    first: &FrequencyDistribution,
    second: &FrequencyDistribution,
    zeros: ZeroHandling,
) -> Result<Option<f64>> {
    check_bins(first.k(), second.k())?;
    let (n1, n2) = (first.n() as f64, second.n() as f64);
    let mut acc = NeumaierSum::new();
    for (&a, &b) in first.counts().iter().zip(second.counts()) {
        if a == 0 && b == 0 {
            match zeros {
                ZeroHandling::Strict => return Ok(None),
                ZeroHandling::Lenient => continue,
            }
        }
        let (p, q) = (a as f64 / n1, b as f64 / n2);
        let d = p - q;
        acc.add(d * d / (p + q));
    }
    Ok(Some(0.5 * acc.total()))
}

/// `max_i |P1_i − P2_i|`.
pub fn ks_distance(first: &CumulativeDistribution, second: &CumulativeDistribution) -> Result<f64> {
    check_bins(first.k(), second.k())?;
    let (n1, n2) = (first.n() as f64, second.n() as f64);
    Ok(first
        .totals()
        .iter()
        .zip(second.totals())
        .map(|(&a, &b)| libm::fabs(a as f64 / n1 - b as f64 / n2))
        .fold(0.0, f64::max))
}

/// `Σ p1 ln(p1 / p2)` in nats.
pub fn kl_divergence(first: &FrequencyDistribution, second: &FrequencyDistribution) -> Result<Option<f64>> {
    check_bins(first.k(), second.k())?;
    let (n1, n2) = (first.n() as f64, second.n() as f64);
    let mut acc = NeumaierSum::new();
    for (&a, &b) in first.counts().iter().zip(second.counts()) {
        match (a, b) {
            (0, 0) => return Ok(None),
            (_, 0) => return Ok(None),
            (0, _) => {}
            _ => {
                let (p, q) = (a as f64 / n1, b as f64 / n2);
                acc.add(p * libm::log(p / q));
            }
        }
    }
    // Gibbs' inequality; rounding can leave a tiny negative residue
    Ok(Some(acc.total().max(0.0)))
}

/// `1 − Σ min(p1, p2)`.
pub fn histogram_non_intersection(first: &FrequencyDistribution, second: &FrequencyDistribution) -> Result<f64> {
    check_bins(first.k(), second.k())?;
    let (n1, n2) = (first.n() as f64, second.n() as f64);
    let mut acc = NeumaierSum::new();
    for (&a, &b) in first.counts().iter().zip(second.counts()) {
        acc.add(f64::min(a as f64 / n1, b as f64 / n2));
    }
    Ok((1.0 - acc.total()).clamp(0.0, 1.0))
}

/// One-dimensional earth mover's distance with unit ground distance between
/// neighbouring bins, `Σ |P1_i − P2_i|`.
pub fn emd(first: &CumulativeDistribution, second: &CumulativeDistribution) -> Result<f64> {
    check_bins(first.k(), second.k())?;
    let (n1, n2) = (first.n() as f64, second.n() as f64);
    let mut acc = NeumaierSum::new();
    for (&a, &b) in first.totals().iter().zip(second.totals()) {
        acc.add(libm::fabs(a as f64 / n1 - b as f64 / n2));
    }
    Ok(acc.total())
}

/// Ranked probability score of one pair, `Σ (P1_j − P2_j)²`.
pub fn rps(first: &CumulativeDistribution, second: &CumulativeDistribution) -> Result<f64> {
    check_bins(first.k(), second.k())?;
    let (n1, n2) = (first.n() as f64, second.n() as f64);
    let mut acc = NeumaierSum::new();
    for (&a, &b) in first.totals().iter().zip(second.totals()) {
        let d = a as f64 / n1 - b as f64 / n2;
        acc.add(d * d);
    }
    Ok(acc.total())
}

/// Every measure for one pair of distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub rds: f64,
    pub abs_rds: f64,
    pub chi_square: Option<f64>,
    pub ks: f64,
    pub kl_sqrt: Option<f64>,
    pub non_intersection: f64,
    pub emd: f64,
    pub rps_sqrt: f64,
    pub undefined_flags: BTreeSet<Measure>,
}

impl MeasureReport {
    /// Value of one of the seven correlation series.
    pub fn get(&self, measure: Measure) -> Option<f64> {
        match measure {
            Measure::AbsRds => Some(self.abs_rds),
            Measure::ChiSquare => self.chi_square,
            Measure::NonIntersection => Some(self.non_intersection),
            Measure::KlSqrt => self.kl_sqrt,
            Measure::Ks => Some(self.ks),
            Measure::Emd => Some(self.emd),
            Measure::RpsSqrt => Some(self.rps_sqrt),
        }
    }
}

/// All measures with strict zero handling.
pub fn compare_all(first: &FrequencyDistribution, second: &FrequencyDistribution) -> Result<MeasureReport> {
    compare_all_with(first, second, ZeroHandling::Strict)
}

pub fn compare_all_with(
    first: &FrequencyDistribution,
    second: &FrequencyDistribution,
    chi_square_zeros: ZeroHandling,
) -> Result<MeasureReport> {
    check_bins(first.k(), second.k())?;
    let (c1, c2) = (first.cumulate(), second.cumulate());
    let rds = shift::rds(&c1, &c2)?;
    let chi_square = chi_square_distance(first, second, chi_square_zeros)?;
    let kl_sqrt = kl_divergence(first, second)?.map(libm::sqrt);
    let mut undefined_flags = BTreeSet::new();
    if chi_square.is_none() {
        undefined_flags.insert(Measure::ChiSquare);
    }
    if kl_sqrt.is_none() {
        undefined_flags.insert(Measure::KlSqrt);
    }
    Ok(MeasureReport {
        rds,
        abs_rds: libm::fabs(rds),
        chi_square,
        ks: ks_distance(&c1, &c2)?,
        kl_sqrt,
        non_intersection: histogram_non_intersection(first, second)?,
        emd: emd(&c1, &c2)?,
        rps_sqrt: libm::sqrt(rps(&c1, &c2)?),
        undefined_flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(c: &[u64]) -> FrequencyDistribution {
        FrequencyDistribution::new(c.to_vec()).unwrap()
    }

    // Straight transcription of the chi-square formula, kept separate from
    // the compensated implementation above.
    fn chi_square_reference(a: &[u64], b: &[u64]) -> f64 {
        let na: u64 = a.iter().sum();
        let nb: u64 = b.iter().sum();
        let mut s = 0.0;
        for i in 0..a.len() {
            let p = a[i] as f64 / na as f64;
            let q = b[i] as f64 / nb as f64;
            s += (p - q).powi(2) / (p + q);
        }
        s / 2.0
    }

    #[test]
    fn chi_square_examples() {
        let f = fd(&[2, 1, 3]);
        assert_eq!(chi_square_distance(&f, &f, ZeroHandling::Strict).unwrap(), Some(0.0));
        let v = chi_square_distance(&fd(&[2, 1, 0]), &fd(&[1, 1, 1]), ZeroHandling::Strict).unwrap().unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-12);
        let a = [21, 2, 0, 2, 21];
        let b = [1, 1, 42, 1, 1];
        let v = chi_square_distance(&fd(&a), &fd(&b), ZeroHandling::Strict).unwrap().unwrap();
        assert!((v - chi_square_reference(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn chi_square_zero_handling() {
        let a = fd(&[10, 0, 0]);
        let b = fd(&[0, 0, 10]);
        assert_eq!(chi_square_distance(&a, &b, ZeroHandling::Strict).unwrap(), None);
        assert_eq!(chi_square_distance(&a, &b, ZeroHandling::Lenient).unwrap(), Some(1.0));
    }

    #[test]
    fn ks_examples() {
        let a = fd(&[3, 0, 0]).cumulate();
        let b = fd(&[0, 0, 3]).cumulate();
        assert_eq!(ks_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        let v = ks_distance(&fd(&[2, 1, 0]).cumulate(), &fd(&[1, 1, 1]).cumulate()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn kl_examples() {
        let f = fd(&[1, 2, 3]);
        assert_eq!(kl_divergence(&f, &f).unwrap(), Some(0.0));
        let v = kl_divergence(&fd(&[3, 1]), &fd(&[2, 2])).unwrap().unwrap();
        let expected = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.1308).abs() < 1e-4);
        assert_eq!(kl_divergence(&fd(&[1, 1, 1]), &fd(&[2, 1, 0])).unwrap(), None);
        // zero in the first distribution only contributes nothing
        assert!(kl_divergence(&fd(&[2, 1, 0]), &fd(&[1, 1, 1])).unwrap().is_some());
        // both-zero bins are undefined
        assert_eq!(kl_divergence(&fd(&[2, 0, 1]), &fd(&[1, 0, 1])).unwrap(), None);
    }

    #[test]
    fn non_intersection_examples() {
        let v = histogram_non_intersection(&fd(&[21, 2, 0, 2, 21]), &fd(&[1, 1, 42, 1, 1])).unwrap();
        assert!((v - 0.913).abs() < 1e-3);
        assert!((v - 42.0 / 46.0).abs() < 1e-12);
        let f = fd(&[4, 5]);
        assert_eq!(histogram_non_intersection(&f, &f).unwrap(), 0.0);
        assert_eq!(histogram_non_intersection(&fd(&[5, 0, 0]), &fd(&[0, 0, 5])).unwrap(), 1.0);
    }

    #[test]
    fn emd_and_rps_extremes() {
        let a = fd(&[5, 0, 0]).cumulate();
        let b = fd(&[0, 0, 5]).cumulate();
        assert_eq!(emd(&a, &b).unwrap(), 2.0);
        assert_eq!(emd(&a, &a).unwrap(), 0.0);
        assert_eq!(rps(&a, &b).unwrap(), 2.0);
        assert_eq!(rps(&a, &a).unwrap(), 0.0);
        let v = rps(&fd(&[2, 1, 0]).cumulate(), &fd(&[1, 1, 1]).cumulate()).unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn bin_mismatch_rejected() {
        let a = fd(&[1, 1]);
        let b = fd(&[1, 1, 1]);
        assert_eq!(compare_all(&a, &b), Err(Error::BinCountMismatch { left: 2, right: 3 }));
        assert!(emd(&a.cumulate(), &b.cumulate()).is_err());
    }

    #[test]
    fn compare_all_examples() {
        let f = fd(&[3, 4, 5]);
        let r = compare_all(&f, &f).unwrap();
        assert!(r.undefined_flags.is_empty());
        for m in Measure::ALL {
            assert_eq!(r.get(m), Some(0.0), "{m}");
        }

        let r = compare_all(&fd(&[10, 0, 0]), &fd(&[0, 0, 10])).unwrap();
        assert_eq!(r.rds, -1.0);
        assert_eq!(r.abs_rds, 1.0);
        assert_eq!(r.ks, 1.0);
        assert_eq!(r.emd, 2.0);
        assert_eq!(r.non_intersection, 1.0);
        assert_eq!(r.chi_square, None);
        assert_eq!(r.kl_sqrt, None);
        assert!(r.undefined_flags.contains(&Measure::ChiSquare));
        assert!(r.undefined_flags.contains(&Measure::KlSqrt));
        assert_eq!(r.undefined_flags.len(), 2);

        let r = compare_all(&fd(&[21, 2, 0, 2, 21]), &fd(&[1, 1, 42, 1, 1])).unwrap();
        assert!((r.rds - 0.053).abs() < 2e-3);
        assert!((r.non_intersection - 0.913).abs() < 1e-3);
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(Measure::from_name(m.name()), Some(m));
        }
        assert_eq!(Measure::from_name("bogus"), None);
    }
}
