//! Exponent vectors `E(n)` of `φ(n!)`, the quotient `T(a,b;c) = φ(c!)/(φ(a!)φ(b!))`,
//! and the solver for `c(a,b)`.
//!
//! `E` is built by the recurrence
//!
//! ```text
//! E(n) = E(n−1) + factor(n)      n composite
//! E(p) = E(p−1) + factor(p−1)    p prime
//! ```
//!
//! For every prime `q` the map `n ↦ ν_q(φ(n!))` is a non-decreasing step
//! function. The table stores, per prime, the sorted list of `n` at which it
//! steps up (an `n` is repeated once per unit of increase). Then
//!
//! * `ν_q(φ(n!))` is the number of stored positions `<= n` (binary search), and
//! * the least `n` with `ν_q(φ(n!)) >= t` is the `t`-th stored position.
//!
//! This keeps memory near-linear in `n_max` instead of `π(n_max)·n_max`.

use std::fmt;

use crate::error::{Error, Result};
use crate::primes::factorize;
use crate::rational::{to_decimal, Rational};
use crate::valuations::{ExponentVec, SignedExponentVec};

/// Largest accepted `n_max`.
pub const MAX_TABLE_N: u64 = 100_000_000;

/// Table bound used when solving pairs with `a, b <= max_ab`: `⌈9·2N/8⌉ + 64`.
/// Not a proven ceiling for small pairs; the solver reports exhaustion instead
/// of trusting it.
pub fn table_size_for(max_ab: u64) -> u64 {
    (9 * 2 * max_ab).div_ceil(8) + 64
}

#[derive(Debug, Clone)]
pub struct PhiFactorialTable {
    n_max: u64,
    primes: Vec<u64>,
    steps: Vec<Vec<u32>>,
}

/// One solved pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairResult {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl PairResult {
    pub fn sum(&self) -> u64 {
        self.a + self.b
    }

    /// `r(a,b) = c/(a+b)`, reduced.
    pub fn r(&self) -> Rational {
        Rational::new(self.c, self.sum())
    }
}

impl fmt::Display for PairResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.r();
        write!(
            f,
            "c={} r={}/{} ({})",
            self.c,
            r.numer(),
            r.denom(),
            to_decimal(&r, 6)
        )
    }
}

fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let m = i * p as usize;
            if p > spf[i] || m > n {
                break;
            }
            spf[m] = p;
        }
    }
    spf
}

impl PhiFactorialTable {
    pub fn build(n_max: u64) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::Bounds("n_max must be at least 1".into()));
        }
        if n_max > MAX_TABLE_N {
            return Err(Error::Bounds(format!(
                "n_max {n_max} exceeds table guard {MAX_TABLE_N}"
            )));
        }
        let spf = smallest_prime_factors(n_max as usize);
        let primes: Vec<u64> = (2..=n_max).filter(|&n| spf[n as usize] as u64 == n).collect();
        let mut steps: Vec<Vec<u32>> = vec![Vec::new(); primes.len()];
        let index = |p: u64| primes.binary_search(&p).expect("factor is a tabled prime");
        for n in 2..=n_max {
            // n prime: φ gains p−1 and loses nothing; n composite: n's primes
            // already divide (n−1)!, so φ gains all of n
            let mut m = if spf[n as usize] as u64 == n { n - 1 } else { n };
            while m > 1 {
                let p = spf[m as usize] as u64;
                m /= p;
                let s = &mut steps[index(p)];
                debug_assert!(s.last().is_none_or(|&last| last as u64 <= n));
                s.push(n as u32);
            }
        }
        Ok(PhiFactorialTable { n_max, primes, steps })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Primes `<= n_max`; the only primes that can divide any tabled `φ(n!)`.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn check(&self, n: u64) -> Result<()> {
        if n > self.n_max {
            return Err(Error::Bounds(format!(
                "n = {n} exceeds table n_max = {}",
                self.n_max
            )));
        }
        Ok(())
    }

    fn prime_count_upto(&self, n: u64) -> usize {
        self.primes.partition_point(|&p| p <= n)
    }

    fn at(&self, idx: usize, n: u64) -> u64 {
        self.steps[idx].partition_point(|&s| s as u64 <= n) as u64
    }

    /// `ν_q(φ(n!))`.
    pub fn valuation(&self, q: u64, n: u64) -> Result<u64> {
        self.check(n)?;
        Ok(match self.primes.binary_search(&q) {
            Ok(idx) => self.at(idx, n),
            Err(_) => 0,
        })
    }

    /// `E(n)`, the exponent vector of `φ(n!)`.
    pub fn exponents(&self, n: u64) -> Result<ExponentVec> {
        self.check(n)?;
        Ok((0..self.prime_count_upto(n))
            .map(|i| (self.primes[i], self.at(i, n)))
            .collect())
    }

    /// Valuation vector of `T(a,b;c)`; `T` is an integer iff no entry is negative.
    pub fn t_valuation(&self, a: u64, b: u64, c: u64) -> Result<SignedExponentVec> {
        for n in [a, b, c] {
            self.check(n)?;
        }
        let upto = self.prime_count_upto(a.max(b).max(c));
        Ok((0..upto)
            .map(|i| {
                let e = self.at(i, c) as i64 - self.at(i, a) as i64 - self.at(i, b) as i64;
                (self.primes[i], e)
            })
            .collect())
    }

    /// Least `c >= 1` such that `ν_q(φ(c!)) >= target` for every `(prime index, target)`.
    fn least_c(&self, targets: impl Iterator<Item = (usize, u64)>) -> Result<u64> {
        let mut c = 1u64;
        for (idx, t) in targets {
            if t == 0 {
                continue;
            }
            match self.steps[idx].get(t as usize - 1) {
                Some(&pos) => c = c.max(pos as u64),
                None => {
                    return Err(Error::TableExhausted {
                        n_max: self.n_max,
                        lower_bound: self.n_max + 1,
                    })
                }
            }
        }
        Ok(c)
    }

    /// Solves `c(a,b)`.
    pub fn c_of(&self, a: u64, b: u64) -> Result<PairResult> {
        if a == 0 || b == 0 {
            return Err(Error::Domain("a and b must be positive".into()));
        }
        self.check(a)?;
        self.check(b)?;
        let upto = self.prime_count_upto(a.max(b));
        let c = self.least_c((0..upto).map(|i| (i, self.at(i, a) + self.at(i, b))))?;
        Ok(PairResult { a, b, c })
    }

    /// `T(a,b;c)` is integral and, for `c >= 2`, `T(a,b;c−1)` is not.
    pub fn is_minimal(&self, pair: &PairResult) -> Result<bool> {
        let PairResult { a, b, c } = *pair;
        if !self.t_valuation(a, b, c)?.is_integral() {
            return Ok(false);
        }
        Ok(c == 1 || !self.t_valuation(a, b, c - 1)?.is_integral())
    }

    /// Dense `E(n)` rows for every `n <= rows_max`, for solving many pairs.
    pub fn pair_solver(&self, rows_max: u64) -> Result<PairSolver<'_>> {
        self.check(rows_max)?;
        let width = self.prime_count_upto(rows_max);
        let mut rows = vec![0u32; (rows_max as usize + 1) * width];
        for i in 0..width {
            for &pos in &self.steps[i] {
                if pos as u64 > rows_max {
                    break;
                }
                // +1 on every row from pos onward; done as a difference pass below
                rows[pos as usize * width + i] += 1;
            }
        }
        for n in 1..=rows_max as usize {
            for i in 0..width {
                rows[n * width + i] += rows[(n - 1) * width + i];
            }
        }
        Ok(PairSolver {
            table: self,
            rows_max,
            width,
            rows,
        })
    }
}

/// Solver with precomputed `E(n)` for small `n`; same answers as
/// [`PhiFactorialTable::c_of`], without per-pair binary searches.
pub struct PairSolver<'t> {
    table: &'t PhiFactorialTable,
    rows_max: u64,
    width: usize,
    rows: Vec<u32>,
}

impl PairSolver<'_> {
    pub fn table(&self) -> &PhiFactorialTable {
        self.table
    }

    pub fn rows_max(&self) -> u64 {
        self.rows_max
    }

    fn row(&self, n: u64) -> &[u32] {
        let s = n as usize * self.width;
        &self.rows[s..s + self.width]
    }

    pub fn c_of(&self, a: u64, b: u64) -> Result<PairResult> {
        if a == 0 || b == 0 {
            return Err(Error::Domain("a and b must be positive".into()));
        }
        if a > self.rows_max || b > self.rows_max {
            return self.table.c_of(a, b);
        }
        let (ra, rb) = (self.row(a), self.row(b));
        let upto = self.table.prime_count_upto(a.max(b));
        let c = self
            .table
            .least_c((0..upto).map(|i| (i, (ra[i] + rb[i]) as u64)))?;
        Ok(PairResult { a, b, c })
    }
}

/// Increment `E(n) − E(n−1)` by direct factorization.
pub fn increment(n: u64) -> Result<ExponentVec> {
    if n < 2 {
        return Ok(ExponentVec::new());
    }
    let f = factorize(n, None)?;
    if f.len() == 1 && f.get(n) == 1 {
        factorize(n - 1, None)
    } else {
        Ok(f)
    }
}

/// `E(n)` accumulated from [`increment`], independent of any table.
pub fn exponents_by_increments(n: u64) -> Result<ExponentVec> {
    (2..=n).try_fold(ExponentVec::new(), |acc, k| acc.checked_add(&increment(k)?))
}

/// Deficit-tracking ascent: walks `c = 1, 2, ...` applying [`increment`] until
/// `E(c)` covers `E(a) + E(b)`. Independent of [`PhiFactorialTable`]; used as
/// the oracle for [`PhiFactorialTable::c_of`].
pub fn c_by_ascent(a: u64, b: u64, c_limit: u64) -> Result<PairResult> {
    let target = exponents_by_increments(a)?.checked_add(&exponents_by_increments(b)?)?;
    let mut deficit: std::collections::BTreeMap<u64, u64> = target.iter().collect();
    let mut c = 1;
    while !deficit.is_empty() {
        c += 1;
        if c > c_limit {
            return Err(Error::TableExhausted {
                n_max: c_limit,
                lower_bound: c_limit + 1,
            });
        }
        for (p, e) in increment(c)?.iter() {
            if let Some(d) = deficit.get_mut(&p) {
                *d = d.saturating_sub(e);
                if *d == 0 {
                    deficit.remove(&p);
                }
            }
        }
    }
    Ok(PairResult { a, b, c })
}
