use std::collections::BTreeSet;

use dshift_core::experiments::{self, ExperimentConfig, TruncatedPoisson};
use dshift_core::feasible::{self, AuditOptions};
use dshift_core::measures::{self, Measure};
use dshift_core::{rng, shift, CumulativeDistribution, FrequencyDistribution};
use proptest::prelude::*;

fn counts(k: std::ops::RangeInclusive<usize>, max: u64) -> impl Strategy<Value = Vec<u64>> {
    k.prop_flat_map(move |k| prop::collection::vec(0..=max, k)).prop_filter("non-empty", |c| c.iter().sum::<u64>() > 0)
}

fn pair(k: std::ops::RangeInclusive<usize>, max: u64) -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
    k.prop_flat_map(move |k| {
        let side = prop::collection::vec(0..=max, k).prop_filter("non-empty", |c| c.iter().sum::<u64>() > 0);
        (side.clone(), side)
    })
}

fn fd(c: &[u64]) -> FrequencyDistribution {
    FrequencyDistribution::new(c.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn ds_in_unit_interval(c in counts(2..=12, 50), z in 1.0f64..4.0) {
        let cum = fd(&c).cumulate();
        for v in [shift::ds_linear(&cum).ds, shift::ds(&cum).ds, shift::ds_with_exponent(&cum, z).unwrap().ds] {
            prop_assert!((0.0..=1.0).contains(&v), "{v}");
        }
    }

    #[test]
    fn ds_scale_invariant(c in counts(2..=10, 40), factor in 2u64..2000) {
        let f = fd(&c);
        let base = shift::ds_of(&f).ds;
        let scaled = shift::ds_of(&f.scaled(factor).unwrap()).ds;
        prop_assert!((scaled - base).abs() <= 1e-12 * base.abs().max(1e-300) || scaled == base);
    }

    #[test]
    fn rds_antisymmetric((a, b) in pair(2..=10, 30)) {
        let (a, b) = (fd(&a).cumulate(), fd(&b).cumulate());
        let ab = shift::rds(&a, &b).unwrap();
        prop_assert_eq!(ab, -shift::rds(&b, &a).unwrap());
        prop_assert!(ab.abs() <= 1.0);
    }

    #[test]
    fn measures_symmetric((a, b) in pair(2..=8, 20)) {
        let (fa, fb) = (fd(&a), fd(&b));
        let ab = measures::compare_all(&fa, &fb).unwrap();
        let ba = measures::compare_all(&fb, &fa).unwrap();
        for m in [Measure::AbsRds, Measure::ChiSquare, Measure::NonIntersection, Measure::Ks, Measure::Emd, Measure::RpsSqrt] {
            prop_assert_eq!(ab.get(m).is_some(), ba.get(m).is_some());
            if let (Some(x), Some(y)) = (ab.get(m), ba.get(m)) {
                prop_assert!((x - y).abs() <= 1e-12, "{:?}: {} vs {}", m, x, y);
            }
        }
    }

    #[test]
    fn measures_nonnegative((a, b) in pair(2..=8, 20)) {
        let report = measures::compare_all(&fd(&a), &fd(&b)).unwrap();
        for m in Measure::ALL {
            if let Some(v) = report.get(m) {
                prop_assert!(v >= 0.0, "{:?} = {}", m, v);
            }
        }
        if let Some(kl) = measures::kl_divergence(&fd(&a), &fd(&b)).unwrap() {
            prop_assert!(kl >= 0.0);
        }
    }

    #[test]
    fn ks_and_emd_triangle(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let [a, b, c]: [CumulativeDistribution; 3] =
            core::array::from_fn(|_| feasible::sample_uniform(20, 5, &mut r).unwrap().cumulate());
        for d in [measures::ks_distance, measures::emd] {
            let (ab, bc, ac) = (d(&a, &b).unwrap(), d(&b, &c).unwrap(), d(&a, &c).unwrap());
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }

    #[test]
    fn rank_roundtrip(n in 1u64..40, k in 2usize..7, pick in any::<u64>()) {
        let total = feasible::FeasibleSetSpec::new(n, k).unwrap().within_cap(u64::MAX).unwrap();
        let index = pick % total;
        let member = feasible::unrank(n, k, index).unwrap();
        prop_assert_eq!(feasible::rank(&member), index);
    }

    #[test]
    fn sampled_members_are_feasible(n in 1u64..200, k in 2usize..12, seed in any::<u64>()) {
        let f = feasible::sample_uniform_seeded(n, k, seed).unwrap();
        prop_assert_eq!(f.k(), k);
        prop_assert_eq!(f.n(), n);
    }
}

/// Optimal transport cost on a line, found by moving one unit at a time from
/// the leftmost surplus to the nearest deficit; cheapest for unit-cost moves
/// in one dimension.
fn greedy_transport(a: &[u64], b: &[u64]) -> u64 {
    let (mut supply, mut demand) = (Vec::new(), Vec::new());
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        supply.extend(std::iter::repeat_n(i, x as usize));
        demand.extend(std::iter::repeat_n(i, y as usize));
    }
    supply.iter().zip(&demand).map(|(&s, &d)| s.abs_diff(d) as u64).sum()
}

#[test]
fn emd_matches_sorted_matching() {
    for k in 2..=5usize {
        for n in 1..=6u64 {
            let all: Vec<_> = feasible::enumerate(n, k, feasible::DEFAULT_CAP).unwrap().collect();
            for a in &all {
                for b in &all {
                    let oracle = greedy_transport(a.counts(), b.counts()) as f64 / n as f64;
                    let got = measures::emd(&a.cumulate(), &b.cumulate()).unwrap();
                    assert!((got - oracle).abs() < 1e-12, "{a:?} {b:?}: {got} vs {oracle}");
                }
            }
        }
    }
}

#[test]
fn cardinality_matches_enumeration() {
    for k in 2..=5usize {
        for n in 1..=15u64 {
            let listed = feasible::enumerate_cumulative(n, k, feasible::DEFAULT_CAP).unwrap().count() as u64;
            assert_eq!(feasible::cardinality(n, k).unwrap(), listed.into(), "A({n},{k})");
        }
    }
}

#[test]
fn enumeration_is_lexicographic_and_ranked() {
    let all: Vec<CumulativeDistribution> = feasible::enumerate_cumulative(6, 4, feasible::DEFAULT_CAP).unwrap().collect();
    for (i, m) in all.iter().enumerate() {
        assert_eq!(feasible::rank(m), i as u64);
        assert_eq!(&feasible::unrank(6, 4, i as u64).unwrap(), m);
    }
    assert!(all.windows(2).all(|w| w[0].totals() < w[1].totals()));
}

#[test]
fn linear_audit_counts_distinct_integer_sums() {
    for k in 2..=6usize {
        for n in 1..=10u64 {
            let sums: BTreeSet<u64> = feasible::enumerate_cumulative(n, k, feasible::DEFAULT_CAP)
                .unwrap()
                .map(|m| m.totals().iter().sum())
                .collect();
            let report = feasible::audit_uniqueness(n, k, 1.0).unwrap();
            assert_eq!(report.unique_values, sums.len() as u64, "A({n},{k})");
        }
    }
}

#[test]
fn exact_and_float_ties_agree_away_from_ties() {
    for (n, k, z) in [(8u64, 4usize, 1.25), (12, 5, 1.2), (10, 3, 2.0), (7, 6, 3.0)] {
        let exact = feasible::audit_uniqueness(n, k, z).unwrap();
        let float = feasible::Auditor::new(n, k, z, AuditOptions::default()).unwrap().without_exact_ties().run();
        assert!(exact.unique_values >= float.unique_values);
        if float.suspect_count == 0 && float.collision_count == 0 {
            assert_eq!(exact.unique_values, float.unique_values);
        }
        // integer exponents have exact float sums at these sizes
        if z.fract() == 0.0 {
            assert_eq!(exact.unique_values, float.unique_values, "A({n},{k}) z={z}");
        }
    }
}

#[test]
fn windowed_audit_matches_single_pass() {
    for (n, k) in [(15u64, 5usize), (20, 4)] {
        let z = shift::bin_dependent_exponent(k);
        let whole = feasible::audit_uniqueness(n, k, z).unwrap();
        let windowed = feasible::audit_uniqueness_with(n, k, z, AuditOptions { max_window: 300, ..Default::default() }).unwrap();
        assert_eq!(whole.unique_values, windowed.unique_values);
        assert_eq!(whole.collision_count, windowed.collision_count);
    }
}

#[test]
fn truncated_poisson_frequencies() {
    let (lambda, k, draws) = (5.0, 5usize, 1_000_000u64);
    let dist = TruncatedPoisson::new(lambda, k).unwrap();
    let sample = dist.sample(draws, &mut rng::seeded(17)).unwrap();
    // pmf ∝ λ^i / i! on 0..k
    let weights: Vec<f64> = (0..k).scan(1.0, |w, i| {
        let out = *w;
        *w *= lambda / (i + 1) as f64;
        Some(out)
    }).collect();
    let total: f64 = weights.iter().sum();
    for (i, (&got, w)) in sample.counts().iter().zip(&weights).enumerate() {
        let p = w / total;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        let freq = got as f64 / draws as f64;
        assert!((freq - p).abs() <= 3.0 * se, "bin {i}: {freq} vs {p}");
    }
}

#[test]
fn pair_records_exchangeable() {
    let config = ExperimentConfig::feasible_set(30, 5, 2_000, 5);
    let table = experiments::run_experiment(&config).unwrap();
    let rds = &table.signed_rds_series;
    let mean = rds.iter().sum::<f64>() / rds.len() as f64;
    let sd = (rds.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / rds.len() as f64).sqrt();
    assert!(mean.abs() < 4.0 * sd / (rds.len() as f64).sqrt(), "mean {mean}, sd {sd}");
    let fork = experiments::export_fork_data(&table, "emd").unwrap();
    let above = fork.rows.iter().filter(|r| r.1 > 0.0).count() as f64;
    let below = fork.rows.iter().filter(|r| r.1 < 0.0).count() as f64;
    assert!((above - below).abs() < 4.0 * (above + below).sqrt());
}

#[test]
fn experiments_are_reproducible() {
    for config in [ExperimentConfig::feasible_set(50, 4, 500, 1), ExperimentConfig::poisson(3.0, 50, 4, 500, 1)] {
        assert_eq!(experiments::run_experiment(&config).unwrap(), experiments::run_experiment(&config).unwrap());
        let mut other = config.clone();
        other.seed = 2;
        assert_ne!(experiments::run_experiment(&config).unwrap(), experiments::run_experiment(&other).unwrap());
    }
}
