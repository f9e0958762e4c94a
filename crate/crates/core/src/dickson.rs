//! Witness primes `q` for which `n = 8q+1` forces `r(n,n)` close to `9/8`, and
//! the exact check of `c(n,n) >= 9n/4 − 9/4` at such `n`.
//!
//! A witness is a prime `q > 17` with `2q+1`, `6q+1`, `8q+1` prime and
//! `10q+1`, `12q+1`, `14q+1`, `16q+1`, `18q+1` composite.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::phi_factorial::{table_size_for, PhiFactorialTable};
use crate::primes::{factorize, is_prime};
use crate::rational::Rational;
use crate::verifiers::VerificationReport;

pub const PRIME_MULTIPLIERS: [u64; 3] = [2, 6, 8];
pub const COMPOSITE_MULTIPLIERS: [u64; 5] = [10, 12, 14, 16, 18];

/// Largest witness [`check_theorem5`] accepts by default.
pub const DEFAULT_MAX_Q: u64 = 5000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DicksonWitness {
    pub q: u64,
    pub n: u64,
    /// multiplier `i` → whether `iq+1` is prime
    pub prime_facts: BTreeMap<u64, bool>,
}

impl DicksonWitness {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("witness serializes")
    }
}

fn prime_facts(q: u64) -> BTreeMap<u64, bool> {
    PRIME_MULTIPLIERS
        .iter()
        .chain(&COMPOSITE_MULTIPLIERS)
        .map(|&i| (i, is_prime(i * q + 1)))
        .collect()
}

fn facts_hold(facts: &BTreeMap<u64, bool>) -> bool {
    PRIME_MULTIPLIERS.iter().all(|i| facts[i]) && COMPOSITE_MULTIPLIERS.iter().all(|i| !facts[i])
}

pub fn is_dickson_witness(q: u64) -> bool {
    q > 17 && q <= (u64::MAX - 1) / 18 && is_prime(q) && facts_hold(&prime_facts(q))
}

pub fn witness(q: u64) -> Option<DicksonWitness> {
    is_dickson_witness(q).then(|| DicksonWitness {
        q,
        n: 8 * q + 1,
        prime_facts: prime_facts(q),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Only `q ≡ 54 (mod 77)`, where `12q+1` and `18q+1` are composite by
    /// construction. Misses witnesses outside that class.
    Congruence,
    /// Every prime `q` in range.
    Exhaustive,
}

/// Witnesses `q <= limit` in ascending order, at most `max_count` of them.
pub fn search_witnesses(limit: u64, max_count: usize, mode: SearchMode) -> Vec<DicksonWitness> {
    const CHUNK: u64 = 1 << 16;
    let chunks = limit / CHUNK + 1;
    let mut found = Vec::new();
    // scan chunk batches in order so the search can stop early
    let batch = rayon::current_num_threads() as u64 * 4;
    let mut start = 0;
    while start < chunks && found.len() < max_count {
        let end = (start + batch).min(chunks);
        let mut hits: Vec<DicksonWitness> = (start..end)
            .into_par_iter()
            .flat_map_iter(|ch| {
                let lo = ch * CHUNK;
                let hi = (lo + CHUNK - 1).min(limit);
                let candidates: Box<dyn Iterator<Item = u64>> = match mode {
                    SearchMode::Exhaustive => Box::new(lo..=hi),
                    SearchMode::Congruence => {
                        let first = lo + (54 + 77 - lo % 77) % 77;
                        Box::new((first..=hi).step_by(77))
                    }
                };
                candidates.filter_map(witness).collect::<Vec<_>>()
            })
            .collect();
        hits.sort_by_key(|w| w.q);
        found.extend(hits);
        start = end;
    }
    found.truncate(max_count);
    found
}

/// Checks the explicit arithmetic around a witness. For `q = 131` this also
/// checks the stated factorizations and the congruences `q ≡ 54 (mod 77)`,
/// `q ≡ 2 (mod 3)`, `q ≡ 1 (mod 5)`.
pub fn verify_witness_facts(q: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("dickson_facts").param("q", q);
    let check = |report: &mut VerificationReport, name: &str, ok: bool| {
        report.checked_count += 1;
        if !ok {
            report.fail(json!({ "q": q, "fact": name }));
        }
    };
    check(&mut report, "q prime and q > 17", q > 17 && is_prime(q));
    if q > (u64::MAX - 1) / 18 {
        return Err(Error::Bounds(format!("18q+1 overflows for q = {q}")));
    }
    for &i in &PRIME_MULTIPLIERS {
        check(&mut report, &format!("{i}q+1 prime"), is_prime(i * q + 1));
    }
    for &i in &COMPOSITE_MULTIPLIERS {
        check(&mut report, &format!("{i}q+1 composite"), !is_prime(i * q + 1));
    }
    if q == 131 {
        check(&mut report, "263 prime", 2 * q + 1 == 263 && is_prime(263));
        check(&mut report, "787 prime", 6 * q + 1 == 787 && is_prime(787));
        check(&mut report, "1049 prime", 8 * q + 1 == 1049 && is_prime(1049));
        check(
            &mut report,
            "1573 = 11^2 * 13",
            12 * q + 1 == 1573 && factorize(1573, None)?.to_string() == "11^2 * 13^1",
        );
        check(
            &mut report,
            "2359 = 7 * 337",
            18 * q + 1 == 2359 && factorize(2359, None)?.to_string() == "7^1 * 337^1",
        );
        check(
            &mut report,
            "3 | 10q+1 and 3 | 16q+1",
            (10 * q + 1).is_multiple_of(3) && (16 * q + 1).is_multiple_of(3),
        );
        check(&mut report, "5 | 14q+1", (14 * q + 1).is_multiple_of(5));
        check(&mut report, "q = 54 mod 77", q % 77 == 54);
        check(&mut report, "q = 2 mod 3", q % 3 == 2);
        check(&mut report, "q = 1 mod 5", q % 5 == 1);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem5Report {
    pub witness: DicksonWitness,
    pub c_value: u64,
    /// `c(n,n) − 2n`
    pub m: i64,
    /// `9n/4 − 9/4`
    pub bound: Rational,
    pub satisfied: bool,
    /// `c(n,n) <= 2n + ⌊2n/8⌋`; recorded, not required
    pub within_upper_ceiling: bool,
    pub table_n_max: u64,
}

impl Theorem5Report {
    pub fn r(&self) -> Rational {
        Rational::new(self.c_value, 2 * self.witness.n)
    }

    /// `9/8 − 9/(8n)`
    pub fn r_bound(&self) -> Rational {
        let n = self.witness.n;
        Rational::new(9 * n - 9, 8 * n)
    }

    pub fn to_json_line(&self) -> String {
        let r = self.r();
        json!({
            "claim_id": "theorem5",
            "q": self.witness.q,
            "n": self.witness.n,
            "c": self.c_value,
            "m": self.m,
            "bound": format!("{}/{}", self.bound.numer(), self.bound.denom()),
            "r": format!("{}/{}", r.numer(), r.denom()),
            "satisfied": self.satisfied,
            "within_upper_ceiling": self.within_upper_ceiling,
            "table_n_max": self.table_n_max,
        })
        .to_string()
    }
}

/// Builds a table for `n = 8q+1` (growing it on exhaustion, never past
/// `table_budget`) and compares the exact `c(n,n)` with `9n/4 − 9/4`.
pub fn check_theorem5(q: u64, table_budget: u64) -> Result<Theorem5Report> {
    let witness = witness(q)
        .ok_or_else(|| Error::Domain(format!("q = {q} is not a witness prime")))?;
    let n = witness.n;
    let mut size = table_size_for(n);
    if size > table_budget {
        return Err(Error::Bounds(format!(
            "table for n = {n} needs n_max >= {size}, budget is {table_budget}"
        )));
    }
    let (table, pair) = loop {
        let table = PhiFactorialTable::build(size)?;
        match table.c_of(n, n) {
            Ok(pair) => break (table, pair),
            Err(Error::TableExhausted { lower_bound, .. }) => {
                let next = (2 * size).max(lower_bound);
                if size >= table_budget {
                    return Err(Error::Bounds(format!(
                        "c({n},{n}) exceeds table budget {table_budget}"
                    )));
                }
                size = next.min(table_budget);
            }
            Err(e) => return Err(e),
        }
    };
    let c = pair.c;
    let bound = Rational::new(9 * n - 9, 4);
    let satisfied = Rational::from_integer(c) >= bound;
    let report = Theorem5Report {
        witness,
        c_value: c,
        m: c as i64 - 2 * n as i64,
        bound,
        satisfied,
        within_upper_ceiling: c <= 2 * n + 2 * n / 8,
        table_n_max: table.n_max(),
    };
    debug_assert_eq!(satisfied, report.r() >= report.r_bound());
    Ok(report)
}

/// Table budget implied by a cap on `q`.
pub fn budget_for_max_q(max_q: u64) -> u64 {
    table_size_for(8 * max_q + 1)
}
