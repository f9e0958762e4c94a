//! Slow, obviously-correct reference implementations. Nothing here calls into
//! the library, so agreement with it is evidence rather than tautology.

#![allow(dead_code)]

pub fn sieve(limit: usize) -> Vec<bool> {
    let mut is = vec![true; limit + 1];
    is[0] = false;
    if limit >= 1 {
        is[1] = false;
    }
    let mut i = 2;
    while i * i <= limit {
        if is[i] {
            for j in (i * i..=limit).step_by(i) {
                is[j] = false;
            }
        }
        i += 1;
    }
    is
}

pub fn is_prime_trial(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Trial-division factorization, ascending primes.
pub fn factor_trial(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn totient_trial(n: u64) -> u64 {
    factor_trial(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn nu(mut n: u64, p: u64) -> u64 {
    let mut e = 0;
    while n > 0 && n.is_multiple_of(p) {
        n /= p;
        e += 1;
    }
    e
}

/// `ν_p(k!)` for every `k <= n`, by summing `ν_p(k)`.
pub fn factorial_valuations(n: u64, p: u64) -> Vec<u64> {
    let mut out = vec![0; n as usize + 1];
    for k in 1..=n {
        out[k as usize] = out[k as usize - 1] + nu(k, p);
    }
    out
}

/// Exponent vectors of `φ(n!) = n!·∏_{p≤n}(p−1)/p` for `n <= n_max`, dense over
/// the primes up to `n_max`.
pub struct PhiExponents {
    pub primes: Vec<u64>,
    pub rows: Vec<Vec<i64>>,
}

impl PhiExponents {
    pub fn new(n_max: u64) -> Self {
        let is = sieve(n_max as usize);
        let primes: Vec<u64> = (2..=n_max).filter(|&p| is[p as usize]).collect();
        let idx = |p: u64| primes.binary_search(&p).expect("prime in range");
        let mut rows = vec![vec![0i64; primes.len()]];
        let mut cur = vec![0i64; primes.len()];
        for n in 1..=n_max {
            // multiply by n
            for (p, e) in factor_trial(n) {
                cur[idx(p)] += e as i64;
            }
            // and by (p−1)/p when n is a new prime
            if is[n as usize] {
                cur[idx(n)] -= 1;
                for (p, e) in factor_trial(n - 1) {
                    cur[idx(p)] += e as i64;
                }
            }
            rows.push(cur.clone());
        }
        PhiExponents { primes, rows }
    }

    pub fn get(&self, q: u64, n: u64) -> i64 {
        match self.primes.binary_search(&q) {
            Ok(i) => self.rows[n as usize][i],
            Err(_) => 0,
        }
    }

    /// Least `c` with `E(c) >= E(a) + E(b)`, scanning `c = 1, 2, ...`.
    pub fn c_ascent(&self, a: u64, b: u64) -> Option<u64> {
        let (ra, rb) = (&self.rows[a as usize], &self.rows[b as usize]);
        (1..self.rows.len()).map(|c| c as u64).find(|&c| {
            self.rows[c as usize]
                .iter()
                .zip(ra.iter().zip(rb))
                .all(|(ec, (ea, eb))| *ec >= ea + eb)
        })
    }

    /// `E(c) − E(a) − E(b)` has no negative entry.
    pub fn t_integral(&self, a: u64, b: u64, c: u64) -> bool {
        let (ra, rb, rc) = (&self.rows[a as usize], &self.rows[b as usize], &self.rows[c as usize]);
        rc.iter().zip(ra.iter().zip(rb)).all(|(ec, (ea, eb))| *ec >= ea + eb)
    }

    pub fn value(&self, n: u64) -> Option<u64> {
        self.primes
            .iter()
            .zip(&self.rows[n as usize])
            .try_fold(1u64, |acc, (&p, &e)| acc.checked_mul(p.checked_pow(e as u32)?))
    }
}

/// `ν_q(∏_{p<x}(p−1))` by factoring every `p − 1`.
pub fn shifted_product_valuation(x: u64, q: u64) -> u64 {
    let is = sieve(x as usize);
    (2..x).filter(|&p| is[p as usize]).map(|p| nu(p - 1, q)).sum()
}
