//! Certified comparison of power sums `Σ F_i^(p/q)` over integer totals.
//!
//! Each term is bracketed in fixed point with `bits` fractional bits using
//! integer `q`-th roots, so two sums can be ordered with certainty whenever
//! their brackets do not overlap. Terms that are exact (integer exponent, or
//! `F^r` a perfect `q`-th power) carry no width at all, which lets genuinely
//! equal sums be recognised as equal.

use core::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::Zero;

/// A positive exponent `num / den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalExponent {
    num: u32,
    den: u32,
}

const MAX_DEN: u32 = 64;
const MAX_NUM: u32 = 4096;

impl RationalExponent {
    pub fn new(num: u32, den: u32) -> Option<Self> {
        if num == 0 || den == 0 {
            return None;
        }
        let g = gcd(num, den);
        Some(Self { num: num / g, den: den / g })
    }

    /// Recognises `z` as `p / q` with a small denominator, to within a few
    /// ulps. `(k + 1) / k` and integers are always recognised.
    pub fn from_f64(z: f64) -> Option<Self> {
        if !(z.is_finite() && z > 0.0) {
            return None;
        }
        for den in 1..=MAX_DEN {
            let scaled = z * den as f64;
            let num = libm::round(scaled);
            if num < 1.0 || num > MAX_NUM as f64 {
                continue;
            }
            if libm::fabs(num / den as f64 - z) <= 4.0 * f64::EPSILON * z {
                return Self::new(num as u32, den);
            }
        }
        None
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `Σ F_i^z · 2^bits` lies in `[low, low + width]`, and strictly inside when
/// `width > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bracket {
    pub low: BigUint,
    pub width: BigUint,
}

impl Bracket {
    pub fn is_exact(&self) -> bool {
        self.width.is_zero()
    }

    fn high(&self) -> BigUint {
        &self.low + &self.width
    }

    /// `None` when the brackets overlap.
    pub fn compare(&self, other: &Bracket) -> Option<Ordering> {
        if self.is_exact() && other.is_exact() {
            return Some(self.low.cmp(&other.low));
        }
        if self.high() <= other.low {
            Some(Ordering::Less)
        } else if other.high() <= self.low {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

pub fn bracket(totals: &[u64], z: RationalExponent, bits: u32) -> Bracket {
    let whole = z.num / z.den;
    let rem = z.num % z.den;
    let mut low = BigUint::zero();
    let mut width = BigUint::zero();
    for &t in totals {
        if t == 0 {
            continue;
        }
        let f = BigUint::from(t);
        let base = f.pow(whole);
        if rem == 0 {
            low += base << bits;
            continue;
        }
        let radicand = f.pow(rem) << (bits as u64 * z.den as u64);
        let root = radicand.nth_root(z.den);
        if root.pow(z.den) != radicand {
            width += &base;
        }
        low += base * root;
    }
    Bracket { low, width }
}

/// Orders `Σ a_i^z` against `Σ b_i^z`, refining precision as needed. `None`
/// means the two could not be separated even at the finest precision tried.
pub fn compare_power_sums(a: &[u64], b: &[u64], z: RationalExponent) -> Option<Ordering> {
    for bits in [128u32, 512, 2048] {
        if let Some(o) = bracket(a, z, bits).compare(&bracket(b, z, bits)) {
            return Some(o);
        }
    }
    None
}
