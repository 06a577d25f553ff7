//! The feasible set `A(n, k)`: every way of placing `n` observations into `k`
//! ordered bins.
//!
//! Members are handled through their cumulative forms, the nondecreasing
//! sequences of length `k` that end at `n`. Enumeration walks them in
//! dictionary order, one member at a time, and every member has a rank (its
//! position in that order) that can be converted back and forth. Uniform
//! sampling picks `k − 1` bar positions among `n + k − 1` slots.
//!
//! The uniqueness auditor computes `Σ (F_i / n)^z` for every member and
//! counts how many distinct values appear.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::distributions::{CumulativeDistribution, FrequencyDistribution};
use crate::error::{Error, Result};
use crate::exact::{bracket, compare_power_sums, Bracket, RationalExponent};
use crate::rng;
use crate::shift::{bin_dependent_exponent, PowerTable};

/// Largest feasible set that enumeration and audits accept by default.
pub const DEFAULT_CAP: u64 = 20_000_000;

fn check_params(n: u64, k: usize) -> Result<()> {
    if n == 0 || k < 2 {
        return Err(Error::InvalidFeasibleSet { n, k });
    }
    Ok(())
}

/// `|A(n, k)| = C(n + k − 1, k − 1)`, exactly.
pub fn cardinality(n: u64, k: usize) -> Result<BigUint> {
    check_params(n, k)?;
    Ok(binomial_big(n + k as u64 - 1, k as u64 - 1))
}

fn binomial_big(top: u64, choose: u64) -> BigUint {
    let choose = choose.min(top - choose);
    let mut acc = BigUint::from(1u32);
    for i in 0..choose {
        acc *= top - i;
        acc /= i + 1;
    }
    acc
}

/// `C(top, choose)` when it fits in a `u64`.
fn binomial_u64(top: u64, choose: u64) -> Option<u64> {
    if choose > top {
        return Some(0);
    }
    let choose = choose.min(top - choose);
    let mut acc: u128 = 1;
    for i in 0..choose as u128 {
        // acc * (top - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(top as u128 - i)? / (i + 1);
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// `(n, k)` together with the exact size of `A(n, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleSetSpec {
    pub n: u64,
    pub k: usize,
    pub cardinality: BigUint,
}

impl FeasibleSetSpec {
    pub fn new(n: u64, k: usize) -> Result<Self> {
        Ok(Self { n, k, cardinality: cardinality(n, k)? })
    }

    /// The cardinality, if it is at most `cap`.
    pub fn within_cap(&self, cap: u64) -> Result<u64> {
        match self.cardinality.to_u64() {
            Some(c) if c <= cap => Ok(c),
            _ => Err(Error::CapExceeded {
                n: self.n,
                k: self.k,
                cardinality: self.cardinality.to_string(),
                cap,
            }),
        }
    }
}

/// Number of nondecreasing sequences of length `len` with values in `[low, n]`.
fn completions(n: u64, low: u64, len: usize) -> u64 {
    binomial_u64(n - low + len as u64, len as u64).expect("rank space checked against the cap")
}

/// Position of a cumulative form in the dictionary order of `A(n, k)`.
pub fn rank(cumulative: &CumulativeDistribution) -> u64 {
    let n = cumulative.n();
    let totals = cumulative.totals();
    let free = totals.len() - 1;
    let mut r = 0u64;
    let mut low = 0u64;
    for (i, &t) in totals[..free].iter().enumerate() {
        let remaining = free - 1 - i;
        for v in low..t {
            r += completions(n, v, remaining);
        }
        low = t;
    }
    r
}

/// Inverse of [`rank`]. `index` must be below `|A(n, k)|`.
pub fn unrank(n: u64, k: usize, mut index: u64) -> Result<CumulativeDistribution> {
    let spec = FeasibleSetSpec::new(n, k)?;
    let total = spec.within_cap(u64::MAX)?;
    if index >= total {
        return Err(Error::InvalidConfig(alloc::format!(
            "rank {index} is out of range for a feasible set of {total} members"
        )));
    }
    let mut totals = vec![n; k];
    fill_unranked(n, &mut totals, &mut index);
    CumulativeDistribution::new(totals)
}

fn fill_unranked(n: u64, totals: &mut [u64], index: &mut u64) {
    let free = totals.len() - 1;
    let mut low = 0u64;
    for (i, slot) in totals[..free].iter_mut().enumerate() {
        let remaining = free - 1 - i;
        let mut v = low;
        loop {
            let c = completions(n, v, remaining);
            if *index < c {
                break;
            }
            *index -= c;
            v += 1;
        }
        *slot = v;
        low = v;
    }
    totals[free] = n;
}

/// Walks cumulative forms of `A(n, k)` in dictionary order over a rank range,
/// reusing one buffer.
#[derive(Debug, Clone)]
pub struct LexCursor {
    n: u64,
    totals: Vec<u64>,
    remaining: u64,
}

impl LexCursor {
    /// Cursor positioned at rank `range.start`, yielding `range.len()` members.
    /// The range must lie inside `0..|A(n, k)|`.
    pub fn new(n: u64, k: usize, range: Range<u64>) -> Self {
        let mut totals = vec![n; k];
        if range.start < range.end {
            let mut start = range.start;
            fill_unranked(n, &mut totals, &mut start);
        }
        Self { n, totals, remaining: range.end.saturating_sub(range.start) }
    }

    /// Advances the buffer to the lexicographic successor.
    #[inline]
    fn step(&mut self) {
        let free = self.totals.len() - 1;
        if let Some(i) = (0..free).rev().find(|&i| self.totals[i] < self.n) {
            let v = self.totals[i] + 1;
            for t in &mut self.totals[i..free] {
                *t = v;
            }
        }
    }

    /// Calls `visit(rank, totals)` for every member in the range.
    pub fn for_each(mut self, start: u64, mut visit: impl FnMut(u64, &[u64])) {
        let mut r = start;
        while self.remaining > 0 {
            visit(r, &self.totals);
            self.remaining -= 1;
            r += 1;
            if self.remaining > 0 {
                self.step();
            }
        }
    }
}

/// Streaming iterator over the members of `A(n, k)`.
#[derive(Debug, Clone)]
pub struct Members {
    cursor: LexCursor,
    fresh: bool,
}

impl Iterator for Members {
    type Item = CumulativeDistribution;

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor.remaining == 0 {
            return None;
        }
        if !self.fresh {
            self.cursor.step();
        }
        self.fresh = false;
        self.cursor.remaining -= 1;
        let totals = self.cursor.totals.clone();
        Some(CumulativeDistribution::new(totals).expect("cursor yields valid members"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.cursor.remaining as usize;
        (r, Some(r))
    }
}

impl ExactSizeIterator for Members {}

impl Members {
    /// Switches to yielding non-cumulative frequency distributions.
    pub fn frequencies(self) -> impl Iterator<Item = FrequencyDistribution> {
        self.map(|c| c.decumulate())
    }
}

/// Every member of `A(n, k)` as a cumulative form, in dictionary order.
/// Refuses sets with more than `cap` members.
pub fn enumerate_cumulative(n: u64, k: usize, cap: u64) -> Result<Members> {
    let total = FeasibleSetSpec::new(n, k)?.within_cap(cap)?;
    Ok(Members { cursor: LexCursor::new(n, k, 0..total), fresh: true })
}

/// Every member of `A(n, k)`, ordered by cumulative form.
pub fn enumerate(n: u64, k: usize, cap: u64) -> Result<impl Iterator<Item = FrequencyDistribution>> {
    Ok(enumerate_cumulative(n, k, cap)?.frequencies())
}

/// Draws one member of `A(n, k)` with probability `1 / |A(n, k)|`.
///
/// Chooses a uniform `(k − 1)`-subset of the `n + k − 1` slots with a sparse
/// partial Fisher-Yates shuffle; the chosen slots are the bars between bins.
pub fn sample_uniform<R: Rng + ?Sized>(n: u64, k: usize, rng: &mut R) -> Result<FrequencyDistribution> {
    check_params(n, k)?;
    let slots = n + k as u64 - 1;
    let bars = k - 1;
    // positions displaced by earlier swaps; k is small so a linear map suffices
    let mut displaced: Vec<(u64, u64)> = Vec::with_capacity(bars);
    let lookup = |d: &[(u64, u64)], i: u64| d.iter().find(|(p, _)| *p == i).map_or(i, |(_, v)| *v);
    let mut chosen = Vec::with_capacity(bars);
    for j in 0..bars as u64 {
        let r = rng.random_range(j..slots);
        let picked = lookup(&displaced, r);
        let at_j = lookup(&displaced, j);
        match displaced.iter_mut().find(|(p, _)| *p == r) {
            Some(entry) => entry.1 = at_j,
            None => displaced.push((r, at_j)),
        }
        chosen.push(picked + 1);
    }
    chosen.sort_unstable();
    let mut counts = Vec::with_capacity(k);
    let mut previous = 0u64;
    for s in chosen {
        counts.push(s - previous - 1);
        previous = s;
    }
    counts.push(slots - previous);
    FrequencyDistribution::new(counts)
}

/// [`sample_uniform`] from stream 0 of `seed`.
pub fn sample_uniform_seeded(n: u64, k: usize, seed: u64) -> Result<FrequencyDistribution> {
    sample_uniform(n, k, &mut rng::seeded(seed))
}

/// Relative difference at or below which two audited values tie in `f64`.
/// With a small rational exponent ties are then re-decided exactly.
pub const COLLISION_TOLERANCE: f64 = 1e-12;
/// Relative difference at or below which a distinct pair is flagged for review.
pub const SUSPECT_TOLERANCE: f64 = 1e-9;

/// Outcome of comparing two audited values in `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tie {
    Distinct,
    /// Within [`SUSPECT_TOLERANCE`].
    Suspect,
    /// Bitwise equal or within [`COLLISION_TOLERANCE`].
    Collision,
}

/// `|a − b| / max(|a|, |b|)`, zero for bitwise equal values.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    if a.to_bits() == b.to_bits() {
        return 0.0;
    }
    libm::fabs(a - b) / f64::max(libm::fabs(a), libm::fabs(b))
}

pub fn classify(a: f64, b: f64) -> Tie {
    let rel = relative_gap(a, b);
    if rel <= COLLISION_TOLERANCE {
        Tie::Collision
    } else if rel <= SUSPECT_TOLERANCE {
        Tie::Suspect
    } else {
        Tie::Distinct
    }
}

/// Two members with (nearly) equal audited values.
#[derive(Debug, Clone, PartialEq)]
pub struct Collision {
    pub first_value: f64,
    pub second_value: f64,
    pub first: CumulativeDistribution,
    pub second: CumulativeDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub n: u64,
    pub k: usize,
    pub z: f64,
    pub total: BigUint,
    pub unique_values: u64,
    /// `total − unique_values`.
    pub collision_count: u64,
    /// At most `witness_cap` witnesses.
    pub collisions: Vec<Collision>,
    pub suspect_count: u64,
    /// The closest distinct pairs, at most `witness_cap` of them.
    pub suspects: Vec<Collision>,
    /// Whether `f64` ties were re-decided by exact comparison. Without it
    /// every `f64` tie is a collision.
    pub exact_ties: bool,
}

impl UniquenessReport {
    pub fn is_unique(&self) -> bool {
        self.collision_count == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditOptions {
    /// Largest feasible set that will be audited.
    pub cap: u64,
    /// Witnesses kept per kind (at least one).
    pub witness_cap: usize,
    /// Values held in memory per pass. Larger sets are audited in several
    /// passes over disjoint value windows.
    pub max_window: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP, witness_cap: 16, max_window: 1 << 24 }
    }
}

const HISTOGRAM_BUCKETS: usize = 1 << 16;
const BRACKET_BITS: u32 = 128;

/// A slice of the value range `[1, k]`, as a half-open range of histogram
/// buckets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub buckets: Range<usize>,
}

type Pair = (f64, u64, f64, u64);

/// Running counts for an audit.
#[derive(Debug, Clone, Default)]
pub struct AuditTally {
    unique: u64,
    collisions: u64,
    suspects: u64,
    collision_witnesses: Vec<Pair>,
    suspect_witnesses: Vec<(f64, Pair)>,
}

impl AuditTally {
    /// Adds the counts and witnesses of `other`.
    pub fn merge(&mut self, other: AuditTally, witness_cap: usize) {
        self.unique += other.unique;
        self.collisions += other.collisions;
        self.suspects += other.suspects;
        for w in other.collision_witnesses {
            if self.collision_witnesses.len() < witness_cap.max(1) {
                self.collision_witnesses.push(w);
            }
        }
        for (gap, w) in other.suspect_witnesses {
            self.keep_suspect(gap, w, witness_cap);
        }
    }

    fn keep_suspect(&mut self, gap: f64, pair: Pair, cap: usize) {
        let list = &mut self.suspect_witnesses;
        if list.len() < cap.max(1) {
            list.push((gap, pair));
            return;
        }
        let (worst, _) = list.iter().enumerate().fold((0, f64::MIN), |best, (i, (g, _))| {
            if *g > best.1 {
                (i, *g)
            } else {
                best
            }
        });
        if gap < list[worst].0 {
            list[worst] = (gap, pair);
        }
    }
}

/// A distinct value inside a run of `f64` ties.
struct TieClass {
    value: f64,
    rank: u64,
    totals: Vec<u64>,
    bracket: Bracket,
}

/// Uniqueness audit of `Σ (F_i / n)^z` over `A(n, k)`.
///
/// The audit sorts `(value, rank)` pairs and compares neighbours in `f64`.
/// Neighbours within [`COLLISION_TOLERANCE`] form a run of ties; when `z` has
/// a small rational form every member of a run is compared exactly against
/// the distinct values already seen in it, otherwise each one is counted as
/// a collision. Sets larger than `max_window` are processed window by window:
/// a first pass histograms the values, then each pass collects one window
/// plus a margin below it, so that cross-window neighbours are still compared.
#[derive(Debug, Clone)]
pub struct Auditor {
    n: u64,
    k: usize,
    z: f64,
    exact: Option<RationalExponent>,
    total: u64,
    table: PowerTable,
    options: AuditOptions,
}

impl Auditor {
    pub fn new(n: u64, k: usize, z: f64, options: AuditOptions) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::InvalidExponent(z));
        }
        let total = FeasibleSetSpec::new(n, k)?.within_cap(options.cap)?;
        let exact = RationalExponent::from_f64(z);
        Ok(Self { n, k, z, exact, total, table: PowerTable::new(n, z), options })
    }

    /// Turns exact tie-breaking off, leaving the plain `f64` rule.
    pub fn without_exact_ties(mut self) -> Self {
        self.exact = None;
        self
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn options(&self) -> AuditOptions {
        self.options
    }

    #[inline]
    pub fn value(&self, totals: &[u64]) -> f64 {
        self.table.power_sum(totals)
    }

    #[inline]
    fn bucket(&self, value: f64) -> usize {
        let span = self.k as f64 - 1.0;
        let b = ((value - 1.0) / span * HISTOGRAM_BUCKETS as f64) as isize;
        b.clamp(0, HISTOGRAM_BUCKETS as isize - 1) as usize
    }

    fn bucket_floor(&self, bucket: usize) -> f64 {
        1.0 + (self.k as f64 - 1.0) * bucket as f64 / HISTOGRAM_BUCKETS as f64
    }

    /// Whether everything fits in a single pass.
    pub fn single_pass(&self) -> bool {
        self.total <= self.options.max_window as u64
    }

    pub fn histogram(&self, ranks: Range<u64>) -> Vec<u64> {
        let mut counts = vec![0u64; HISTOGRAM_BUCKETS];
        LexCursor::new(self.n, self.k, ranks.clone()).for_each(ranks.start, |_, totals| {
            counts[self.bucket(self.value(totals))] += 1;
        });
        counts
    }

    /// Groups buckets into windows of at most `max_window` members (a single
    /// oversized bucket becomes its own window).
    pub fn windows(&self, histogram: &[u64]) -> Vec<Window> {
        if self.single_pass() {
            return vec![Window { buckets: 0..HISTOGRAM_BUCKETS }];
        }
        let mut windows = Vec::new();
        let mut start = 0;
        let mut load = 0u64;
        for (b, &c) in histogram.iter().enumerate() {
            if load > 0 && load + c > self.options.max_window as u64 {
                windows.push(Window { buckets: start..b });
                start = b;
                load = 0;
            }
            load += c;
        }
        windows.push(Window { buckets: start..HISTOGRAM_BUCKETS });
        windows
    }

    fn margin(&self) -> f64 {
        SUSPECT_TOLERANCE * self.k as f64 * 2.0
    }

    /// Packed `(value, rank)` entries for members in `ranks` that fall in
    /// `window` or in the margin just below it.
    pub fn collect(&self, ranks: Range<u64>, window: &Window) -> Vec<u128> {
        let mut out = Vec::new();
        let whole = window.buckets == (0..HISTOGRAM_BUCKETS);
        let floor = self.bucket_floor(window.buckets.start) - self.margin();
        LexCursor::new(self.n, self.k, ranks.clone()).for_each(ranks.start, |r, totals| {
            let v = self.value(totals);
            if whole {
                out.push(pack(v, r));
                return;
            }
            let b = self.bucket(v);
            if window.buckets.contains(&b) || (b < window.buckets.start && v >= floor) {
                out.push(pack(v, r));
            }
        });
        out
    }

    /// Orders collected entries by value, then rank.
    pub fn sort(entries: &mut [u128]) {
        entries.sort_unstable();
    }

    /// Counts the sorted entries of one window into `tally`.
    pub fn scan(&self, window: &Window, sorted: &[u128], tally: &mut AuditTally) {
        let cap = self.options.witness_cap.max(1);
        let whole = window.buckets == (0..HISTOGRAM_BUCKETS);
        let mut classes: Vec<TieClass> = Vec::new();
        for (i, &entry) in sorted.iter().enumerate() {
            let (v, r) = unpack(entry);
            let previous = i.checked_sub(1).map(|p| unpack(sorted[p]));
            let tie = previous.map_or(Tie::Distinct, |(pv, _)| classify(pv, v));
            if tie != Tie::Collision {
                classes.clear();
            }
            let counted = whole || window.buckets.contains(&self.bucket(v));
            let equal_to = match (tie, previous) {
                (Tie::Collision, Some(p)) => self.tied_with(&mut classes, p, (v, r)),
                _ => None,
            };
            if !counted {
                continue;
            }
            if let Some((ev, er)) = equal_to {
                tally.collisions += 1;
                if tally.collision_witnesses.len() < cap {
                    tally.collision_witnesses.push((ev, er, v, r));
                }
                continue;
            }
            tally.unique += 1;
            if let Some((pv, pr)) = previous {
                let gap = relative_gap(pv, v);
                if gap <= SUSPECT_TOLERANCE {
                    tally.suspects += 1;
                    tally.keep_suspect(gap, (pv, pr, v, r), cap);
                }
            }
        }
    }

    /// The earlier member of the current tie run that `member` equals, if
    /// any. Registers `member` as a new distinct value otherwise.
    fn tied_with(&self, classes: &mut Vec<TieClass>, previous: (f64, u64), member: (f64, u64)) -> Option<(f64, u64)> {
        let Some(z) = self.exact else {
            return Some(previous);
        };
        if classes.is_empty() {
            classes.push(self.tie_class(previous, z));
        }
        let candidate = self.tie_class(member, z);
        for c in classes.iter() {
            let same = match c.bracket.compare(&candidate.bracket) {
                Some(o) => o == Ordering::Equal,
                None => compare_power_sums(&c.totals, &candidate.totals, z).is_none_or(|o| o == Ordering::Equal),
            };
            if same {
                return Some((c.value, c.rank));
            }
        }
        classes.push(candidate);
        None
    }

    fn tie_class(&self, (value, rank): (f64, u64), z: RationalExponent) -> TieClass {
        let totals = unrank(self.n, self.k, rank).expect("rank in range").totals().to_vec();
        let bracket = bracket(&totals, z, BRACKET_BITS);
        TieClass { value, rank, totals, bracket }
    }

    pub fn finish(&self, tally: AuditTally) -> UniquenessReport {
        let witness = |(a, ra, b, rb): Pair| Collision {
            first_value: a,
            second_value: b,
            first: unrank(self.n, self.k, ra).expect("rank in range"),
            second: unrank(self.n, self.k, rb).expect("rank in range"),
        };
        let mut suspects = tally.suspect_witnesses;
        suspects.sort_by(|a, b| a.0.total_cmp(&b.0));
        UniquenessReport {
            n: self.n,
            k: self.k,
            z: self.z,
            total: BigUint::from(self.total),
            unique_values: tally.unique,
            collision_count: tally.collisions,
            collisions: tally.collision_witnesses.into_iter().map(witness).collect(),
            suspect_count: tally.suspects,
            suspects: suspects.into_iter().map(|(_, p)| witness(p)).collect(),
            exact_ties: self.exact.is_some(),
        }
    }

    /// Sequential audit.
    pub fn run(&self) -> UniquenessReport {
        let all = 0..self.total;
        let histogram = if self.single_pass() { Vec::new() } else { self.histogram(all.clone()) };
        let mut tally = AuditTally::default();
        for window in self.windows(&histogram) {
            let mut entries = self.collect(all.clone(), &window);
            Self::sort(&mut entries);
            self.scan(&window, &entries, &mut tally);
        }
        self.finish(tally)
    }
}

// Audited values are positive, so their bit patterns sort like the values.
#[inline]
fn pack(value: f64, rank: u64) -> u128 {
    ((value.to_bits() as u128) << 64) | rank as u128
}

#[inline]
fn unpack(entry: u128) -> (f64, u64) {
    (f64::from_bits((entry >> 64) as u64), entry as u64)
}

/// Audits `A(n, k)` at exponent `z` with default options.
pub fn audit_uniqueness(n: u64, k: usize, z: f64) -> Result<UniquenessReport> {
    audit_uniqueness_with(n, k, z, AuditOptions::default())
}

pub fn audit_uniqueness_with(n: u64, k: usize, z: f64, options: AuditOptions) -> Result<UniquenessReport> {
    Ok(Auditor::new(n, k, z, options)?.run())
}

/// Audit at the bin-dependent exponent `(k + 1) / k`.
pub fn audit_uniqueness_default(n: u64, k: usize) -> Result<UniquenessReport> {
    audit_uniqueness(n, k, bin_dependent_exponent(k))
}
