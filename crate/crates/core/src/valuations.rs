//! Factored integers and rationals as prime-exponent vectors, and the valuation
//! formulas of Legendre and Kummer.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::primes::PrimeTable;

/// Factored positive integer: prime → exponent, zero exponents absent.
/// Iteration is in ascending prime order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ExponentVec {
    entries: BTreeMap<u64, u64>,
}

/// Factored non-zero rational: prime → non-zero signed exponent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SignedExponentVec {
    entries: BTreeMap<u64, i64>,
}

impl ExponentVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the exponent of `p`; zero removes the entry.
    pub fn insert(&mut self, p: u64, e: u64) {
        if e == 0 {
            self.entries.remove(&p);
        } else {
            self.entries.insert(p, e);
        }
    }

    pub fn get(&self, p: u64) -> u64 {
        self.entries.get(&p).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.entries.iter().map(|(&p, &e)| (p, e))
    }

    /// Exponent vector of the product of the two represented integers.
    pub fn checked_add(&self, other: &ExponentVec) -> Result<ExponentVec> {
        let mut out = self.clone();
        for (p, e) in other.iter() {
            let sum = out
                .get(p)
                .checked_add(e)
                .ok_or_else(|| Error::Arithmetic(format!("exponent of {p} overflows")))?;
            out.entries.insert(p, sum);
        }
        Ok(out)
    }

    /// Valuation vector of the rational `self / other`.
    pub fn quotient(&self, other: &ExponentVec) -> SignedExponentVec {
        let mut out = SignedExponentVec::new();
        for (p, e) in self.iter() {
            out.add_to(p, e as i64);
        }
        for (p, e) in other.iter() {
            out.add_to(p, -(e as i64));
        }
        out
    }

    /// True iff the integer of `other` divides the integer of `self`.
    pub fn dominates(&self, other: &ExponentVec) -> bool {
        other.iter().all(|(p, e)| self.get(p) >= e)
    }

    /// The represented integer, if it fits in a `u64`.
    pub fn to_u64(&self) -> Option<u64> {
        let mut acc = 1u64;
        for (p, e) in self.iter() {
            let e = u32::try_from(e).ok()?;
            acc = acc.checked_mul(p.checked_pow(e)?)?;
        }
        Some(acc)
    }
}

impl FromIterator<(u64, u64)> for ExponentVec {
    fn from_iter<I: IntoIterator<Item = (u64, u64)>>(iter: I) -> Self {
        let mut v = ExponentVec::new();
        for (p, e) in iter {
            v.insert(p, e);
        }
        v
    }
}

impl SignedExponentVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `delta` to the exponent of `p`, dropping the entry if it hits zero.
    pub fn add_to(&mut self, p: u64, delta: i64) {
        if delta == 0 {
            return;
        }
        let e = self.entries.entry(p).or_insert(0);
        *e += delta;
        if *e == 0 {
            self.entries.remove(&p);
        }
    }

    pub fn get(&self, p: u64) -> i64 {
        self.entries.get(&p).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.entries.iter().map(|(&p, &e)| (p, e))
    }

    /// The rational is an integer iff no exponent is negative.
    pub fn is_integral(&self) -> bool {
        self.entries.values().all(|&e| e > 0)
    }

    /// Entries with negative exponent, ascending by prime.
    pub fn deficits(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.iter().filter(|&(_, e)| e < 0)
    }
}

impl FromIterator<(u64, i64)> for SignedExponentVec {
    fn from_iter<I: IntoIterator<Item = (u64, i64)>>(iter: I) -> Self {
        let mut v = SignedExponentVec::new();
        for (p, e) in iter {
            v.add_to(p, e);
        }
        v
    }
}

fn render<E: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    mut it: impl Iterator<Item = (u64, E)>,
) -> fmt::Result {
    match it.next() {
        None => write!(f, "1"),
        Some((p, e)) => {
            write!(f, "{p}^{e}")?;
            for (p, e) in it {
                write!(f, " * {p}^{e}")?;
            }
            Ok(())
        }
    }
}

/// `p1^e1 * p2^e2 * ...` ascending; `1` when empty.
impl fmt::Display for ExponentVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render(f, self.iter())
    }
}

impl fmt::Display for SignedExponentVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render(f, self.iter())
    }
}

/// Sum of the base-`base` digits of `n`.
pub fn digit_sum(mut n: u64, base: u64) -> u64 {
    assert!(base >= 2, "digit base must be at least 2");
    let mut s = 0;
    while n > 0 {
        s += n % base;
        n /= base;
    }
    s
}

/// `ν_p(n!)` by Legendre's floor sum `Σ ⌊n/p^i⌋`. Debug builds also check the
/// digit-sum form `(n − s_p(n)) / (p − 1)`.
pub fn legendre_valuation(n: u64, p: u64) -> u64 {
    let mut total = 0;
    let mut m = n;
    while m > 0 {
        m /= p;
        total += m;
    }
    debug_assert_eq!(total, legendre_by_digits(n, p));
    total
}

/// `ν_p(n!) = (n − s_p(n)) / (p − 1)`.
pub fn legendre_by_digits(n: u64, p: u64) -> u64 {
    (n - digit_sum(n, p)) / (p - 1)
}

/// Number of carries when adding `a + b` in base `p`; by Kummer's theorem this
/// is `ν_p(C(a+b, a))`.
pub fn kummer_carries(mut a: u64, mut b: u64, p: u64) -> u64 {
    let mut carry = 0;
    let mut carries = 0;
    while a > 0 || b > 0 || carry > 0 {
        let s = a % p + b % p + carry;
        carry = u64::from(s >= p);
        carries += carry;
        a /= p;
        b /= p;
    }
    carries
}

/// `ν_q(∏_{p<x} (p−1))`, computed by double counting as `Σ_{q^k<x} π(x; q^k, 1)`.
///
/// Primes are taken strictly below `x`; callers wanting `p ≤ a` pass `a + 1`.
pub fn shifted_prime_product_valuation(x: u64, q: u64, table: &PrimeTable) -> Result<u64> {
    if x > table.limit() + 1 {
        return Err(Error::Bounds(format!(
            "prime table limit {} does not cover primes below {x}",
            table.limit()
        )));
    }
    let mut total = 0;
    let mut qk = q;
    while qk < x {
        total += table.count_primes_in_ap(x, qk, 1);
        qk = match qk.checked_mul(q) {
            Some(v) => v,
            None => break,
        };
    }
    Ok(total)
}
