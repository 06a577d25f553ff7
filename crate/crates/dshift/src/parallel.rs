//! Thread-parallel experiment and audit runners.
//!
//! Results do not depend on the thread count: experiment pairs are seeded by
//! index and audit entries are fully sorted before they are scanned.

use std::ops::Range;

use dshift_core::experiments::PairSampler;
use dshift_core::feasible::{AuditOptions, AuditTally, Auditor};
use dshift_core::{CorrelationTable, ExperimentConfig, Result, UniquenessReport};
use rayon::prelude::*;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "DSHIFT_THREADS";

/// A pool with `threads` workers, or rayon's default when `None` or 0.
pub fn pool(threads: Option<usize>) -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads.filter(|&t| t > 0) {
        builder = builder.num_threads(t);
    }
    builder.build().expect("thread pool starts")
}

pub fn run_experiment(config: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<CorrelationTable> {
    let sampler = PairSampler::new(config)?;
    let records = pool.install(|| (0..config.num_pairs).into_par_iter().map(|i| sampler.pair(i)).collect::<Result<Vec<_>>>())?;
    CorrelationTable::from_records(config, records)
}

fn chunks(total: u64, parts: usize) -> Vec<Range<u64>> {
    let parts = (parts.max(1) as u64).min(total.max(1));
    let step = total.div_ceil(parts);
    (0..parts).map(|i| (i * step).min(total)..((i + 1) * step).min(total)).filter(|r| !r.is_empty()).collect()
}

pub fn audit(n: u64, k: usize, z: f64, options: AuditOptions, exact_ties: bool, pool: &rayon::ThreadPool) -> Result<UniquenessReport> {
    let mut auditor = Auditor::new(n, k, z, options)?;
    if !exact_ties {
        auditor = auditor.without_exact_ties();
    }
    Ok(pool.install(|| audit_with(&auditor)))
}

fn audit_with(auditor: &Auditor) -> UniquenessReport {
    let parts = chunks(auditor.total(), rayon::current_num_threads() * 4);
    let histogram = if auditor.single_pass() {
        Vec::new()
    } else {
        parts
            .par_iter()
            .map(|r| auditor.histogram(r.clone()))
            .reduce_with(|mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            })
            .unwrap_or_default()
    };
    let mut tally = AuditTally::default();
    for window in auditor.windows(&histogram) {
        let pieces: Vec<Vec<u128>> = parts.par_iter().map(|r| auditor.collect(r.clone(), &window)).collect();
        let mut entries = pieces.concat();
        entries.par_sort_unstable();
        auditor.scan(&window, &entries, &mut tally);
    }
    auditor.finish(tally)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dshift_core::experiments::run_experiment as run_sequential;
    use dshift_core::feasible::audit_uniqueness_with;

    #[test]
    fn chunks_cover_range() {
        let c = chunks(10, 3);
        assert_eq!(c, vec![0..4, 4..8, 8..10]);
        assert_eq!(chunks(2, 8), vec![0..1, 1..2]);
    }

    #[test]
    fn experiment_matches_sequential() {
        let config = ExperimentConfig::feasible_set(20, 4, 300, 3);
        let parallel = run_experiment(&config, &pool(Some(3))).unwrap();
        assert_eq!(parallel, run_sequential(&config).unwrap());
    }

    #[test]
    fn audit_matches_sequential() {
        let options = AuditOptions { max_window: 200, ..Default::default() };
        for &(n, k, z) in &[(12u64, 5usize, 2.0), (10, 5, 1.2), (9, 4, 1.25)] {
            let p = audit(n, k, z, options, true, &pool(Some(2))).unwrap();
            let s = audit_uniqueness_with(n, k, z, options).unwrap();
            assert_eq!(p, s);
        }
    }
}
