//! Mechanical checks of finite claims about `φ(n!)` valuations, shifted-prime
//! products and prime counts in progressions.
//!
//! Every check returns a [`VerificationReport`]; a report passes iff it carries
//! no counterexample.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::phi_factorial::PhiFactorialTable;
use crate::primes::{is_prime, totient, PrimeTable};
use crate::valuations::shifted_prime_product_valuation;

/// Counterexamples kept per report; the total is always recorded in `notes`.
const MAX_COUNTEREXAMPLES: usize = 64;

pub type Params = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub parameters: Params,
    pub passed: bool,
    pub checked_count: u64,
    pub counterexamples: Vec<Params>,
    pub notes: String,
}

impl VerificationReport {
    pub fn new(claim_id: &str) -> Self {
        VerificationReport {
            claim_id: claim_id.to_string(),
            parameters: Params::new(),
            passed: true,
            checked_count: 0,
            counterexamples: Vec::new(),
            notes: String::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn note(&mut self, text: &str) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text);
    }

    /// Records a failure. `passed` follows automatically.
    pub fn fail(&mut self, params: Value) {
        self.passed = false;
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            let entry = match params {
                Value::Object(map) => map.into_iter().collect(),
                other => Params::from([("value".to_string(), other)]),
            };
            self.counterexamples.push(entry);
        }
    }

    fn finish(mut self, failures: u64) -> Self {
        if failures > self.counterexamples.len() as u64 {
            self.note(&format!(
                "{failures} failures in total, first {} listed",
                self.counterexamples.len()
            ));
        }
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn require_prime(q: u64) -> Result<()> {
    if is_prime(q) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{q} is not prime")))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Band for the shifted-prime valuation against its main term.
pub const LEMMA2_BAND: (f64, f64) = (0.9, 1.3);
/// Below this `x` the ratio is reported but never fails.
pub const LEMMA2_GATE_MIN_X: u64 = 10_000;

/// Ratio of the exact `ν_q(∏_{p<x}(p−1))` to `q/(q−1)² · x/ln x`.
pub fn check_lemma2_ratio(q: u64, x: u64, table: &PrimeTable) -> Result<VerificationReport> {
    require_prime(q)?;
    if x < 100 {
        return Err(Error::Domain(format!("x = {x} < 100")));
    }
    let exact = shifted_prime_product_valuation(x, q, table)?;
    let qf = q as f64;
    let xf = x as f64;
    let main_term = qf / ((qf - 1.0) * (qf - 1.0)) * xf / xf.ln();
    let ratio = exact as f64 / main_term;
    let mut report = VerificationReport::new("lemma2")
        .param("q", q)
        .param("x", x)
        .param("valuation", exact)
        .param("main_term", main_term)
        .param("ratio", ratio);
    report.checked_count = 1;
    let (lo, hi) = LEMMA2_BAND;
    report.note(&format!(
        "asymptotic claim; engineering band [{lo}, {hi}]; x/ln x undercounts primes at this scale"
    ));
    if x < LEMMA2_GATE_MIN_X {
        report.note("report only below x = 10000");
    } else if !(lo..=hi).contains(&ratio) {
        report.fail(json!({ "q": q, "x": x, "ratio": ratio }));
    }
    Ok(report)
}

/// `0.23a/(q−1) + 7·ln a/ln q`.
pub fn lemma6_bound(a: u64, q: u64) -> f64 {
    0.23 * a as f64 / (q - 1) as f64 + 7.0 * (a as f64).ln() / (q as f64).ln()
}

/// Largest `a` checked exhaustively by [`check_lemma6`]; beyond it a
/// logarithmic grid is used.
pub const LEMMA6_EXHAUSTIVE: u64 = 10_000;

fn log_grid(from: u64, to: u64, per_decade: u32) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut k = 0;
    loop {
        let a = (from as f64 * 10f64.powf(k as f64 / per_decade as f64)).round() as u64;
        if a > to {
            break;
        }
        if grid.last() != Some(&a) {
            grid.push(a);
        }
        k += 1;
    }
    if grid.last() != Some(&to) && to > from {
        grid.push(to);
    }
    grid
}

/// `ν_q(∏_{p≤a}(p−1)) <= 0.23a/(q−1) + 7·ln a/ln q` for primes `7 < q <= q_max`.
pub fn check_lemma6(a_max: u64, q_max: u64, table: &PrimeTable) -> Result<VerificationReport> {
    if table.limit() < a_max {
        return Err(Error::Bounds(format!(
            "prime table limit {} < a_max {a_max}",
            table.limit()
        )));
    }
    let qs: Vec<u64> = table
        .primes()
        .iter()
        .copied()
        .filter(|&q| q > 7 && q <= q_max)
        .collect();
    if qs.is_empty() {
        return Err(Error::Domain(format!("no prime q with 7 < q <= {q_max}")));
    }
    let exhaustive_to = a_max.min(LEMMA6_EXHAUSTIVE);
    let grid = log_grid(exhaustive_to, a_max, 100);

    let per_q: Vec<(u64, Vec<Value>)> = qs
        .par_iter()
        .map(|&q| {
            let mut checked = 0;
            let mut failures = Vec::new();
            let mut check = |a: u64, v: u64| {
                checked += 1;
                let bound = lemma6_bound(a, q);
                if v as f64 > bound {
                    failures.push(json!({ "a": a, "q": q, "valuation": v, "bound": bound }));
                }
            };
            // running ν_q(∏_{p≤a}(p−1))
            let mut v = 0;
            for a in 1..=exhaustive_to {
                if table.is_prime(a) {
                    let mut m = a - 1;
                    while m > 0 && m % q == 0 {
                        m /= q;
                        v += 1;
                    }
                }
                check(a, v);
            }
            for &a in grid.iter().filter(|&&a| a > exhaustive_to) {
                let v = shifted_prime_product_valuation(a + 1, q, table)
                    .expect("table covers a_max");
                check(a, v);
            }
            (checked, failures)
        })
        .collect();

    let mut report = VerificationReport::new("lemma6")
        .param("a_max", a_max)
        .param("q_max", q_max)
        .param("exhaustive_to", exhaustive_to)
        .param("grid_points", grid.iter().filter(|&&a| a > exhaustive_to).count());
    let mut failures = 0;
    for (checked, fails) in per_q {
        report.checked_count += checked;
        failures += fails.len() as u64;
        for f in fails {
            report.fail(f);
        }
    }
    report.note("natural logarithms");
    Ok(report.finish(failures))
}

fn lemma7_holds(count: u64, n: u64) -> bool {
    // count <= 0.46n + 7, exactly
    100 * count <= 46 * n + 700
}

fn lemma7_precondition(d: u64) -> Result<()> {
    if d <= 7 || gcd(d, 105) != 1 {
        return Err(Error::Domain(format!(
            "d = {d} must exceed 7 and be coprime to 105"
        )));
    }
    Ok(())
}

/// Primes among `{d+1, 2d+1, ..., nd+1}` number at most `0.46n + 7`.
pub fn check_lemma7(d: u64, n: u64) -> Result<VerificationReport> {
    lemma7_precondition(d)?;
    let count = (1..=n).filter(|&i| is_prime(i * d + 1)).count() as u64;
    let mut report = VerificationReport::new("lemma7")
        .param("d", d)
        .param("n", n)
        .param("prime_count", count);
    report.checked_count = 1;
    if !lemma7_holds(count, n) {
        report.fail(json!({ "d": d, "n": n, "count": count }));
    }
    Ok(report)
}

/// [`check_lemma7`] for every admissible `d <= d_max` and every `n <= n_max`.
pub fn check_lemma7_sweep(d_max: u64, n_max: u64) -> Result<VerificationReport> {
    let ds: Vec<u64> = (8..=d_max).filter(|&d| gcd(d, 105) == 1).collect();
    if ds.is_empty() || n_max == 0 {
        return Err(Error::Domain("empty lemma7 sweep".into()));
    }
    let fails: Vec<Value> = ds
        .par_iter()
        .flat_map_iter(|&d| {
            let mut count = 0;
            let mut out = Vec::new();
            for n in 1..=n_max {
                count += u64::from(is_prime(n * d + 1));
                if !lemma7_holds(count, n) {
                    out.push(json!({ "d": d, "n": n, "count": count }));
                }
            }
            out
        })
        .collect();
    let mut report = VerificationReport::new("lemma7")
        .param("d_max", d_max)
        .param("n_max", n_max);
    report.checked_count = ds.len() as u64 * n_max;
    let failures = fails.len() as u64;
    for f in fails {
        report.fail(f);
    }
    Ok(report.finish(failures))
}

/// Residues mod 105 coprime to 105 (48 of them).
pub fn units_mod_105() -> Vec<u64> {
    (1..105).filter(|&r| gcd(r, 105) == 1).collect()
}

/// `#{ i in 1..=k : gcd(2ri+1, 105) = 1 }`: an upper bound on the number of
/// primes among `2qi+1` for any prime `q > 7` with `q ≡ r (mod 105)`.
pub fn residue_sieve_count(k: u64, r: u64) -> u64 {
    (1..=k).filter(|&i| gcd((2 * r * i + 1) % 105, 105) == 1).count() as u64
}

/// For every `k <= k_max` and unit `r` mod 105, the residue sieve count is at
/// most `⌊k/2⌋ + 1`.
pub fn check_lemma8_residues(k_max: u64) -> Result<VerificationReport> {
    if k_max == 0 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    let units = units_mod_105();
    let mut report = VerificationReport::new("lemma8").param("k_max", k_max);
    let mut failures = 0;
    for k in 1..=k_max {
        for &r in &units {
            report.checked_count += 1;
            let count = residue_sieve_count(k, r);
            if count > k / 2 + 1 {
                failures += 1;
                report.fail(json!({ "k": k, "r": r, "count": count }));
            }
        }
    }
    report.note("residue sieve modulo 3*5*7");
    Ok(report.finish(failures))
}

/// Exact number of primes among `{2q+1, 4q+1, ..., 2qk+1}`.
pub fn count_lemma8_direct(q: u64, k: u64) -> Result<u64> {
    if q <= 7 || !is_prime(q) {
        return Err(Error::Domain(format!("q = {q} must be a prime > 7")));
    }
    Ok((1..=k).filter(|&i| is_prime(2 * q * i + 1)).count() as u64)
}

/// `∏_{p≤a} (p−1)`, or `None` on overflow.
pub fn shifted_primorial(a: u64) -> Option<u64> {
    (2..=a)
        .filter(|&p| is_prime(p))
        .try_fold(1u64, |acc, p| acc.checked_mul(p - 1))
}

/// Builds `b = k·∏_{p≤a}(p−1) − a` and checks that `T(a,b;a+b)` is an integer,
/// so that `r(a,b) <= 1`.
///
/// When `b < a` the pair lies outside the construction's hypothesis; the report
/// is returned unchecked (`checked_count = 0`) with a note.
pub fn construct_prop10_pair(
    a: u64,
    k: u64,
    table: Option<&PhiFactorialTable>,
) -> Result<(u64, VerificationReport)> {
    if a == 0 || k == 0 {
        return Err(Error::Domain("a and k must be positive".into()));
    }
    let d = shifted_primorial(a)
        .ok_or_else(|| Error::Arithmetic(format!("product of p-1 over p <= {a} overflows")))?;
    let kd = k
        .checked_mul(d)
        .ok_or_else(|| Error::Arithmetic("k * D overflows".into()))?;
    if kd <= a {
        return Err(Error::Domain(format!("b = {k}*{d} - {a} < 1")));
    }
    let b = kd - a;
    let mut report = VerificationReport::new("prop10")
        .param("a", a)
        .param("k", k)
        .param("D", d)
        .param("b", b);
    if b < a {
        report.note("b < a: outside the construction's hypothesis, not checked");
        return Ok((b, report));
    }
    let owned;
    let table = match table {
        Some(t) if t.n_max() >= a + b => t,
        _ => {
            owned = PhiFactorialTable::build(a + b)?;
            &owned
        }
    };
    let t = table.t_valuation(a, b, a + b)?;
    report.checked_count = 1;
    if !(b + a).is_multiple_of(d) {
        report.fail(json!({ "a": a, "b": b, "reason": "b is not -a mod D" }));
    }
    if !t.is_integral() {
        let deficits: Vec<String> = t.deficits().map(|(p, e)| format!("{p}^{e}")).collect();
        report.fail(json!({ "a": a, "b": b, "deficits": deficits.join(" * ") }));
    }
    Ok((b, report))
}

/// `T(a, φ(a!)−1; φ(a!)) = 1` for `4 <= a <= 8`.
pub fn check_phi_identity(a: u64, table: Option<&PhiFactorialTable>) -> Result<VerificationReport> {
    if !(4..=8).contains(&a) {
        return Err(Error::Bounds(format!(
            "a = {a}: the identity holds for a >= 4 and phi(a!) must stay tabulable (a <= 8)"
        )));
    }
    let small = PhiFactorialTable::build(a)?;
    let m = small
        .exponents(a)?
        .to_u64()
        .ok_or_else(|| Error::Arithmetic("phi(a!) overflows".into()))?;
    let fact: u64 = (1..=a).product();
    let direct = totient(fact)?;

    let owned;
    let table = match table {
        Some(t) if t.n_max() >= m => t,
        _ => {
            owned = PhiFactorialTable::build(m)?;
            &owned
        }
    };
    let t = table.t_valuation(a, m - 1, m)?;
    let c = table.c_of(a, m - 1)?.c;

    let mut report = VerificationReport::new("identity")
        .param("a", a)
        .param("phi_a_factorial", m)
        .param("c", c);
    report.checked_count = 3;
    if direct != m {
        report.fail(json!({ "a": a, "from_exponents": m, "direct_totient": direct }));
    }
    if !t.is_empty() {
        report.fail(json!({ "a": a, "t": t.to_string() }));
    }
    if c > m {
        report.fail(json!({ "a": a, "c": c, "phi_a_factorial": m }));
    }
    Ok(report)
}

/// `⌊a/(4q)⌋ = ⌊⌊a/(2q)⌋/2⌋` for all `a <= sample_max` and primes `q <= sample_max`.
pub fn check_floor_identity(sample_max: u64) -> Result<VerificationReport> {
    if sample_max < 2 {
        return Err(Error::Domain("sample_max must be at least 2".into()));
    }
    let primes = PrimeTable::new(sample_max)?;
    let mut report = VerificationReport::new("floor").param("sample_max", sample_max);
    let mut failures = 0;
    for &q in primes.primes() {
        for a in 0..=sample_max {
            report.checked_count += 1;
            if a / (4 * q) != (a / (2 * q)) / 2 {
                failures += 1;
                report.fail(json!({ "a": a, "q": q }));
            }
        }
    }
    Ok(report.finish(failures))
}
