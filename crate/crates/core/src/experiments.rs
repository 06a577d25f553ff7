//! Monte Carlo correlation harness.
//!
//! An experiment draws independent pairs of distributions (uniformly from a
//! feasible set, or as truncated-Poisson samples), evaluates every measure on
//! each pair and fits a simple least-squares line between every two of the
//! seven series `|RDS|`, chi-square, non-intersection, `√KL`, KS, EMD and
//! `√RPS`. Each fit records both r² and the signed Pearson correlation r.
//!
//! Pair `i` is drawn from ChaCha stream `i` of the configured seed, so the
//! table is identical however the pairs are scheduled.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::distributions::FrequencyDistribution;
use crate::error::{Error, Result};
use crate::feasible;
use crate::measures::{self, Measure, MeasureReport};
use crate::rng;
use crate::summation::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// Uniform draws from `A(n, k)`.
    FeasibleSet,
    /// `n` Poisson(λ) values restricted to `0..k`, binned by value.
    Poisson { lambda: f64 },
    /// `n` unrestricted Poisson(λ) values in `k` equal-width bins spanning
    /// the sample's own range (see [`equal_width_histogram`]).
    PoissonBinned { lambda: f64 },
}

/// What to do with pairs for which chi-square or KL is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UndefinedPolicy {
    /// Leave the pair out of every regression involving the undefined measure.
    #[default]
    Drop,
    /// Abort at the first such pair.
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: Source,
    pub n: u64,
    pub k: usize,
    pub num_pairs: usize,
    pub seed: u64,
    pub undefined_policy: UndefinedPolicy,
}

impl ExperimentConfig {
    pub fn feasible_set(n: u64, k: usize, num_pairs: usize, seed: u64) -> Self {
        Self { source: Source::FeasibleSet, n, k, num_pairs, seed, undefined_policy: UndefinedPolicy::Drop }
    }

    pub fn poisson(lambda: f64, n: u64, k: usize, num_pairs: usize, seed: u64) -> Self {
        Self { source: Source::Poisson { lambda }, n, k, num_pairs, seed, undefined_policy: UndefinedPolicy::Drop }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_pairs == 0 {
            return Err(Error::InvalidConfig("num_pairs must be at least 1".into()));
        }
        if self.n == 0 || self.k < 2 {
            return Err(Error::InvalidFeasibleSet { n: self.n, k: self.k });
        }
        if let Source::Poisson { lambda } | Source::PoissonBinned { lambda } = self.source {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::InvalidConfig(alloc::format!("lambda must be > 0, got {lambda}")));
            }
        }
        Ok(())
    }
}

/// Poisson(λ) conditioned on values below `k`.
#[derive(Debug, Clone)]
pub struct TruncatedPoisson {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl TruncatedPoisson {
    pub fn new(lambda: f64, k: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!("lambda must be > 0, got {lambda}")));
        }
        if k == 0 {
            return Err(Error::InvalidConfig("support must contain at least one value".into()));
        }
        // log weights j ln λ − ln j!, shifted by their maximum before exponentiating
        let logs: Vec<f64> =
            (0..k).map(|j| j as f64 * libm::log(lambda) - libm::lgamma(j as f64 + 1.0)).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| libm::exp(l - top)).collect();
        let mut total = NeumaierSum::new();
        weights.iter().for_each(|&w| total.add(w));
        let total = total.total();
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut running = NeumaierSum::new();
        let mut cdf: Vec<f64> = pmf
            .iter()
            .map(|&p| {
                running.add(p);
                running.total()
            })
            .collect();
        *cdf.last_mut().unwrap() = 1.0;
        Ok(Self { pmf, cdf })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// One draw by inversion of the truncated CDF.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    /// Bins `n` draws into a frequency distribution over `0..k`.
    pub fn sample<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Result<FrequencyDistribution> {
        let mut counts = alloc::vec![0u64; self.cdf.len()];
        for _ in 0..n {
            counts[self.draw(rng)] += 1;
        }
        FrequencyDistribution::new(counts)
    }
}

/// `n` Poisson(λ) values restricted to `0..k`, binned at their values.
pub fn sample_poisson_distribution<R: Rng + ?Sized>(
    lambda: f64,
    n: u64,
    k: usize,
    rng: &mut R,
) -> Result<FrequencyDistribution> {
    if n == 0 || k < 2 {
        return Err(Error::InvalidFeasibleSet { n, k });
    }
    TruncatedPoisson::new(lambda, k)?.sample(n, rng)
}

/// Counts of `values` in `k` equal-width bins over `[min, max]`, the last
/// bin closed on the right. A sample with a single distinct value lands in
/// bin `k / 2` (the bins then span `value ± 0.5`).
pub fn equal_width_histogram(values: &[u64], k: usize) -> Vec<u64> {
    let mut counts = alloc::vec![0u64; k];
    let (Some(&lo), Some(&hi)) = (values.iter().min(), values.iter().max()) else {
        return counts;
    };
    let width = (hi - lo) as u128;
    for &v in values {
        let bin = ((v - lo) as u128 * k as u128).checked_div(width).map_or(k / 2, |b| b.min(k as u128 - 1) as usize);
        counts[bin] += 1;
    }
    counts
}

/// `n` Poisson(λ) values binned by [`equal_width_histogram`].
pub fn sample_poisson_binned<R: Rng + ?Sized>(
    lambda: f64,
    n: u64,
    k: usize,
    rng: &mut R,
) -> Result<FrequencyDistribution> {
    if n == 0 || k < 2 {
        return Err(Error::InvalidFeasibleSet { n, k });
    }
    let poisson = Poisson::new(lambda)
        .map_err(|_| Error::InvalidConfig(alloc::format!("lambda must be > 0, got {lambda}")))?;
    let values: Vec<u64> = (0..n).map(|_| poisson.sample(rng) as u64).collect();
    FrequencyDistribution::new(equal_width_histogram(&values, k))
}

/// One evaluated pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub index: usize,
    pub first: FrequencyDistribution,
    pub second: FrequencyDistribution,
    pub report: MeasureReport,
}

/// Draws and evaluates pair `index` of an experiment.
pub struct PairSampler {
    config: ExperimentConfig,
    truncated: Option<TruncatedPoisson>,
}

impl PairSampler {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let truncated = match config.source {
            Source::Poisson { lambda } => Some(TruncatedPoisson::new(lambda, config.k)?),
            _ => None,
        };
        Ok(Self { config: config.clone(), truncated })
    }

    fn draw_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FrequencyDistribution> {
        let (n, k) = (self.config.n, self.config.k);
        match (&self.truncated, self.config.source) {
            (Some(p), _) => p.sample(n, rng),
            (None, Source::PoissonBinned { lambda }) => sample_poisson_binned(lambda, n, k, rng),
            (None, _) => feasible::sample_uniform(n, k, rng),
        }
    }

    pub fn pair(&self, index: usize) -> Result<PairRecord> {
        let mut rng = rng::stream(self.config.seed, index as u64);
        let first = self.draw_one(&mut rng)?;
        let second = self.draw_one(&mut rng)?;
        let report = measures::compare_all(&first, &second)?;
        Ok(PairRecord { index, first, second, report })
    }
}

/// Least-squares fit of `y = slope · x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionSummary {
    pub slope: f64,
    pub intercept: f64,
    /// Squared Pearson correlation; 0 for degenerate inputs.
    pub r_squared: f64,
    /// Signed Pearson correlation; 0 for degenerate inputs.
    pub r: f64,
    pub sample_count: usize,
    pub dropped_count: usize,
    /// One of the series has zero variance (or fewer than two points remain).
    pub degenerate: bool,
}

/// Simple OLS regression of `ys` on `xs`.
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> Result<RegressionSummary> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::RegressionInput { xs: xs.len(), ys: ys.len() });
    }
    Ok(fit_points(xs.iter().copied().zip(ys.iter().copied()), xs.len(), 0))
}

fn fit_points(points: impl Iterator<Item = (f64, f64)> + Clone, count: usize, dropped: usize) -> RegressionSummary {
    if count < 2 {
        return RegressionSummary {
            slope: 0.0,
            intercept: 0.0,
            r_squared: 0.0,
            r: 0.0,
            sample_count: count,
            dropped_count: dropped,
            degenerate: true,
        };
    }
    let m = count as f64;
    let (mut sx, mut sy) = (NeumaierSum::new(), NeumaierSum::new());
    for (x, y) in points.clone() {
        sx.add(x);
        sy.add(y);
    }
    let (mean_x, mean_y) = (sx.total() / m, sy.total() / m);
    let (mut sxx, mut syy, mut sxy) = (NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new());
    for (x, y) in points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx.add(dx * dx);
        syy.add(dy * dy);
        sxy.add(dx * dy);
    }
    let (sxx, syy, sxy) = (sxx.total(), syy.total(), sxy.total());
    let degenerate = sxx <= 0.0 || syy <= 0.0;
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if degenerate { 0.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let r = if degenerate { 0.0 } else { (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0) };
    RegressionSummary {
        slope,
        intercept: mean_y - slope * mean_x,
        r_squared,
        r,
        sample_count: count,
        dropped_count: dropped,
        degenerate,
    }
}

/// Pairwise regressions between the seven measure series of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub measure_names: Vec<Measure>,
    /// `fits[i][j]` regresses series `j` on series `i`.
    pub fits: Vec<Vec<RegressionSummary>>,
    /// Per-pair values of each series, `None` where undefined.
    pub series: Vec<Vec<Option<f64>>>,
    pub signed_rds_series: Vec<f64>,
    pub num_pairs: usize,
}

impl CorrelationTable {
    /// Builds the table from evaluated pairs (in any order).
    pub fn from_records(config: &ExperimentConfig, mut records: Vec<PairRecord>) -> Result<Self> {
        records.sort_by_key(|r| r.index);
        if config.undefined_policy == UndefinedPolicy::Fail {
            if let Some(r) = records.iter().find(|r| !r.report.undefined_flags.is_empty()) {
                return Err(Error::UndefinedMeasure {
                    pair_index: r.index,
                    measure: *r.report.undefined_flags.iter().next().unwrap(),
                    first: r.first.counts().to_vec(),
                    second: r.second.counts().to_vec(),
                });
            }
        }
        let measure_names = Measure::ALL.to_vec();
        let series: Vec<Vec<Option<f64>>> = measure_names
            .iter()
            .map(|&m| records.iter().map(|r| r.report.get(m)).collect())
            .collect();
        let signed_rds_series = records.iter().map(|r| r.report.rds).collect();
        let num_pairs = records.len();
        let fits = series
            .iter()
            .map(|xs| series.iter().map(|ys| fit_defined(xs, ys)).collect())
            .collect();
        Ok(Self { measure_names, fits, series, signed_rds_series, num_pairs })
    }

    fn position(&self, measure: Measure) -> usize {
        self.measure_names.iter().position(|&m| m == measure).expect("all measures tabulated")
    }

    pub fn fit(&self, x: Measure, y: Measure) -> &RegressionSummary {
        &self.fits[self.position(x)][self.position(y)]
    }

    pub fn r_squared(&self, x: Measure, y: Measure) -> f64 {
        self.fit(x, y).r_squared
    }

    pub fn correlation(&self, x: Measure, y: Measure) -> f64 {
        self.fit(x, y).r
    }

    pub fn series(&self, measure: Measure) -> &[Option<f64>] {
        &self.series[self.position(measure)]
    }

    /// Smallest off-diagonal r² among the given measures.
    pub fn min_r_squared(&self, among: &[Measure]) -> f64 {
        self.off_diagonal(among, |f| f.r_squared).0
    }

    /// Smallest and largest off-diagonal `|r|` among the given measures.
    pub fn abs_r_range(&self, among: &[Measure]) -> (f64, f64) {
        self.off_diagonal(among, |f| libm::fabs(f.r))
    }

    fn off_diagonal(&self, among: &[Measure], value: impl Fn(&RegressionSummary) -> f64) -> (f64, f64) {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for (i, &a) in among.iter().enumerate() {
            for &b in &among[i + 1..] {
                let v = value(self.fit(a, b));
                min = min.min(v);
                max = max.max(v);
            }
        }
        (min, max)
    }
}

fn fit_defined(xs: &[Option<f64>], ys: &[Option<f64>]) -> RegressionSummary {
    let points = xs.iter().zip(ys).filter_map(|(x, y)| Some(((*x)?, (*y)?)));
    let count = points.clone().count();
    fit_points(points, count, xs.len() - count)
}

/// Runs an experiment on the current thread.
pub fn run_experiment(config: &ExperimentConfig) -> Result<CorrelationTable> {
    let sampler = PairSampler::new(config)?;
    let records = (0..config.num_pairs).map(|i| sampler.pair(i)).collect::<Result<Vec<_>>>()?;
    CorrelationTable::from_records(config, records)
}

/// `(measure value, signed RDS)` rows for a fork plot.
#[derive(Debug, Clone, PartialEq)]
pub struct ForkData {
    pub measure: Measure,
    pub rows: Vec<(Option<f64>, f64)>,
}

pub fn export_fork_data(table: &CorrelationTable, measure: &str) -> Result<ForkData> {
    let measure = Measure::from_name(measure).ok_or_else(|| Error::UnknownSeries {
        name: measure.into(),
        valid: Measure::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(", "),
    })?;
    let rows = table.series(measure).iter().copied().zip(table.signed_rds_series.iter().copied()).collect();
    Ok(ForkData { measure, rows })
}

impl ForkData {
    pub fn header(&self) -> String {
        alloc::format!("{},rds", self.measure.name())
    }
}
