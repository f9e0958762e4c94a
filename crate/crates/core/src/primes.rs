//! Prime generation, deterministic 64-bit primality, factorization and exact
//! counts of primes in arithmetic progressions.

use crate::error::{Error, Result};
use crate::valuations::ExponentVec;

/// Largest accepted sieve bound.
pub const MAX_SIEVE_LIMIT: u64 = 1 << 32;

/// Above this bound the sieve runs segment by segment.
const SEGMENT_THRESHOLD: u64 = 10_000_000;

/// Segment length, counted in odd numbers (32 KiB of bits).
const SEGMENT_ODDS: usize = 1 << 18;

/// All primes up to an inclusive `limit` plus an odd-only bitset for O(1)
/// membership queries. Immutable once built.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    // bit i <=> 2i+1 is prime
    odd_bits: Vec<u64>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_segment_threshold(limit, SEGMENT_THRESHOLD)
    }

    pub(crate) fn with_segment_threshold(limit: u64, threshold: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Bounds(format!("sieve limit {limit} < 2")));
        }
        if limit > MAX_SIEVE_LIMIT {
            return Err(Error::Bounds(format!(
                "sieve limit {limit} exceeds {MAX_SIEVE_LIMIT}"
            )));
        }
        let odd_bits = if limit <= threshold {
            sieve_flat(limit)
        } else {
            sieve_segmented(limit)
        };
        let odd_count = limit.div_ceil(2) as usize;
        let mut primes = Vec::with_capacity(estimate_pi(limit));
        primes.push(2);
        for (w, &word) in odd_bits.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let i = w * 64 + bits.trailing_zeros() as usize;
                if i >= odd_count {
                    break;
                }
                primes.push(2 * i as u64 + 1);
                bits &= bits - 1;
            }
        }
        Ok(PrimeTable {
            limit,
            primes,
            odd_bits,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes strictly below `x` (capped at the table limit).
    pub fn primes_below(&self, x: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p < x);
        &self.primes[..end]
    }

    /// Table lookup when `n <= limit`, deterministic Miller-Rabin otherwise.
    pub fn is_prime(&self, n: u64) -> bool {
        if n > self.limit {
            return is_prime(n);
        }
        if n == 2 {
            return true;
        }
        if n.is_multiple_of(2) {
            return false;
        }
        let i = (n / 2) as usize;
        self.odd_bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// `π(x; modulus, residue)`: the number of primes `p < x` with
    /// `p ≡ residue (mod modulus)`. Exact; beyond the table limit the remaining
    /// members of the progression are tested individually.
    pub fn count_primes_in_ap(&self, x: u64, modulus: u64, residue: i64) -> u64 {
        assert!(modulus >= 1, "modulus must be positive");
        let r = residue.rem_euclid(modulus as i64) as u64;
        let mut count = self
            .primes_below(x)
            .iter()
            .filter(|&&p| p % modulus == r)
            .count() as u64;
        if x > self.limit + 1 {
            // members of the progression in (limit, x)
            let from = self.limit + 1;
            let mut n = from + (r + modulus - from % modulus) % modulus;
            while n < x {
                if is_prime(n) {
                    count += 1;
                }
                n = match n.checked_add(modulus) {
                    Some(v) => v,
                    None => break,
                };
            }
        }
        count
    }
}

fn estimate_pi(limit: u64) -> usize {
    let x = limit as f64;
    (1.26 * x / x.ln().max(1.0)) as usize + 16
}

fn clear_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] &= !(1u64 << (i % 64));
}

fn all_odd_bits(limit: u64) -> Vec<u64> {
    let odd_count = limit.div_ceil(2) as usize;
    let mut bits = vec![u64::MAX; odd_count.div_ceil(64)];
    // 1 is not prime
    clear_bit(&mut bits, 0);
    bits
}

fn sieve_flat(limit: u64) -> Vec<u64> {
    let mut bits = all_odd_bits(limit);
    let odd_count = limit.div_ceil(2) as usize;
    let mut p = 3u64;
    while p * p <= limit {
        let i = (p / 2) as usize;
        if bits[i / 64] >> (i % 64) & 1 == 1 {
            let mut j = (p * p / 2) as usize;
            while j < odd_count {
                clear_bit(&mut bits, j);
                j += p as usize;
            }
        }
        p += 2;
    }
    bits
}

fn sieve_segmented(limit: u64) -> Vec<u64> {
    let root = isqrt(limit);
    let base: Vec<u64> = PrimeTable::with_segment_threshold(root.max(2), u64::MAX)
        .expect("base sieve bound is valid")
        .primes
        .into_iter()
        .skip(1)
        .collect();
    let mut bits = all_odd_bits(limit);
    let odd_count = limit.div_ceil(2) as usize;
    let mut lo = 0usize;
    while lo < odd_count {
        let hi = (lo + SEGMENT_ODDS).min(odd_count);
        let lo_value = 2 * lo as u64 + 1;
        for &p in &base {
            let sq = p * p;
            if sq > 2 * hi as u64 - 1 {
                break;
            }
            // first odd multiple of p that is >= max(p², lo_value)
            let start = if sq >= lo_value {
                sq
            } else {
                let mut m = lo_value.div_ceil(p) * p;
                if m % 2 == 0 {
                    m += p;
                }
                m
            };
            let mut j = (start / 2) as usize;
            while j < hi {
                clear_bit(&mut bits, j);
                j += p as usize;
            }
        }
        lo = hi;
    }
    bits
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

// The first twelve primes as strong-pseudoprime bases are deterministic for
// every n < 3.3 * 10^24, which covers u64.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test over the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization of `n >= 1`. Trial division by the table's primes (or by
/// small odd numbers without a table), then Pollard-Brent rho on any 64-bit
/// cofactor that is left.
pub fn factorize(n: u64, table: Option<&PrimeTable>) -> Result<ExponentVec> {
    if n == 0 {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    let mut out = ExponentVec::new();
    let mut rest = n;
    let mut push = |rest: &mut u64, p: u64| {
        let mut e = 0;
        while (*rest).is_multiple_of(p) {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            out.insert(p, e);
        }
    };
    match table {
        Some(t) => {
            for &p in t.primes() {
                if p * p > rest {
                    break;
                }
                push(&mut rest, p);
            }
        }
        None => {
            push(&mut rest, 2);
            let mut p = 3;
            while p <= 1000 && p * p <= rest {
                push(&mut rest, p);
                p += 2;
            }
        }
    }
    if rest > 1 {
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime(m) {
                let e = out.get(m) + 1;
                out.insert(m, e);
                continue;
            }
            if let Some(r) = perfect_square_root(m) {
                stack.push(r);
                stack.push(r);
                continue;
            }
            let d = pollard_brent(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    Ok(out)
}

fn perfect_square_root(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Returns a non-trivial divisor of an odd composite `n`.
fn pollard_brent(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    for c in 1.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

/// Euler's totient by direct factorization.
pub fn totient(n: u64) -> Result<u64> {
    let f = factorize(n, None)?;
    Ok(f.iter().fold(n, |acc, (p, _)| acc / p * (p - 1)))
}
