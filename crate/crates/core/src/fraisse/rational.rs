//! Exact rationals and the fixed enumeration of `Q` used by the built-in dense
//! linear order.
//!
//! The enumeration starts with `0` and then walks the breadth-first
//! Calkin–Wilf sequence of positive rationals, emitting each value followed by
//! its negation: `0, 1, -1, 1/2, -1/2, 2, -2, 1/3, -1/3, 3/2, ...`.
//!
//! Positions in this enumeration are compared through [`EnumKey`], which never
//! materialises the (possibly astronomically large) index. This is what makes
//! "the enumeration-least rational in an open interval" computable without a
//! linear scan: the minimum-depth node of the Calkin–Wilf tree inside an
//! interval is the Stern–Brocot simplest rational of that interval, and it is
//! unique.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `-p/q` or an integer literal.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rat::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
    }
}

/// Prints `p/q`, or `p` when the denominator is one.
pub fn format_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// The `j`-th (1-based) term of the breadth-first Calkin–Wilf sequence.
pub fn calkin_wilf(j: u64) -> Rat {
    assert!(j >= 1, "Calkin-Wilf positions are 1-based");
    let mut a = BigInt::one();
    let mut b = BigInt::one();
    let bits = 64 - j.leading_zeros();
    for shift in (0..bits - 1).rev() {
        if (j >> shift) & 1 == 0 {
            b = &a + &b;
        } else {
            a = &a + &b;
        }
    }
    Rat::new(a, b)
}

/// The `n`-th rational of the fixed enumeration of `Q`.
pub fn nth(n: u64) -> Rat {
    if n == 0 {
        return Rat::zero();
    }
    let q = calkin_wilf(n.div_ceil(2));
    if n % 2 == 1 {
        q
    } else {
        -q
    }
}

/// Root-to-leaf Calkin–Wilf path of a positive rational, run-length encoded.
/// `false` is a left step `a/b -> a/(a+b)`, `true` a right step `a/b -> (a+b)/b`.
fn cw_runs(q: &Rat) -> Vec<(bool, BigUint)> {
    let mut p = q.numer().magnitude().clone();
    let mut d = q.denom().magnitude().clone();
    let mut runs = Vec::new();
    while !(p.is_one() && d.is_one()) {
        if p < d {
            let k = (&d - 1u32) / &p;
            d -= &k * &p;
            runs.push((false, k));
        } else {
            let k = (&p - 1u32) / &d;
            p -= &k * &d;
            runs.push((true, k));
        }
    }
    runs.reverse();
    runs
}

/// Position of a rational in the enumeration, comparable without computing the
/// index itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumKey {
    zero: bool,
    depth: BigUint,
    runs: Vec<(bool, BigUint)>,
    negative: bool,
}

pub fn enum_key(q: &Rat) -> EnumKey {
    if q.is_zero() {
        return EnumKey {
            zero: true,
            depth: BigUint::zero(),
            runs: Vec::new(),
            negative: false,
        };
    }
    let runs = cw_runs(&q.abs());
    let depth = runs.iter().fold(BigUint::zero(), |acc, (_, k)| acc + k);
    EnumKey {
        zero: false,
        depth,
        runs,
        negative: q.is_negative(),
    }
}

fn cmp_paths(a: &[(bool, BigUint)], b: &[(bool, BigUint)]) -> Ordering {
    let (mut ia, mut ib) = (0, 0);
    let mut rem_a = a.first().map(|r| r.1.clone()).unwrap_or_default();
    let mut rem_b = b.first().map(|r| r.1.clone()).unwrap_or_default();
    while ia < a.len() && ib < b.len() {
        if a[ia].0 != b[ib].0 {
            return a[ia].0.cmp(&b[ib].0);
        }
        let step = rem_a.clone().min(rem_b.clone());
        rem_a -= &step;
        rem_b -= &step;
        if rem_a.is_zero() {
            ia += 1;
            if ia < a.len() {
                rem_a = a[ia].1.clone();
            }
        }
        if rem_b.is_zero() {
            ib += 1;
            if ib < b.len() {
                rem_b = b[ib].1.clone();
            }
        }
    }
    (ia < a.len()).cmp(&(ib < b.len()))
}

impl Ord for EnumKey {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.zero, other.zero) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        self.depth
            .cmp(&other.depth)
            .then_with(|| cmp_paths(&self.runs, &other.runs))
            .then_with(|| self.negative.cmp(&other.negative))
    }
}

impl PartialOrd for EnumKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Index of `q` in the enumeration, when it fits in a `u64`.
pub fn enumeration_index(q: &Rat) -> Option<u64> {
    if q.is_zero() {
        return Some(0);
    }
    let key = enum_key(q);
    let depth = key.depth.to_u32()?;
    if depth >= 62 {
        return None;
    }
    let mut j: u64 = 1;
    for (bit, k) in &key.runs {
        for _ in 0..k.to_u64()? {
            j = (j << 1) | u64::from(*bit);
        }
    }
    let n = 2 * j - 1;
    Some(if key.negative { n + 1 } else { n })
}

/// Stern–Brocot simplest rational in the open interval `(lo, hi)`, `lo >= 0`.
fn simplest_nonneg(lo: &Rat, hi: Option<&Rat>) -> Rat {
    let floor = lo.floor();
    let next = &floor + Rat::one();
    match hi {
        None => return next,
        Some(h) if &next < h => return next,
        Some(_) => {}
    }
    let h = hi.expect("bounded case");
    let y_lo = (h - &floor).recip();
    let y_hi = if lo == &floor {
        None
    } else {
        Some((lo - &floor).recip())
    };
    floor + simplest_nonneg(&y_lo, y_hi.as_ref()).recip()
}

/// The enumeration-least rational in the open interval `(lo, hi)`; `None`
/// bounds are infinite. Returns `None` when the interval is empty.
pub fn least_in(lo: Option<&Rat>, hi: Option<&Rat>) -> Option<Rat> {
    if let (Some(l), Some(h)) = (lo, hi) {
        if l >= h {
            return None;
        }
    }
    let below_zero = lo.is_none_or(|l| l.is_negative());
    let above_zero = hi.is_none_or(|h| h.is_positive());
    if below_zero && above_zero {
        return Some(Rat::zero());
    }
    if let Some(l) = lo.filter(|l| !l.is_negative()) {
        return Some(simplest_nonneg(l, hi));
    }
    let h = hi.expect("interval lies at or below zero");
    let neg_lo = lo.map(|l| -l);
    Some(-simplest_nonneg(&-h, neg_lo.as_ref()))
}
