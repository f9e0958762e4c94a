//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//! Runs without the libtest harness so the lines always reach stdout.

mod oracle;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phifact::dickson::{self, budget_for_max_q, check_theorem5, verify_witness_facts};
use phifact::experiments::{scan_theorem2, table1_proportions, PairCounting};
use phifact::phi_factorial::{table_size_for, PhiFactorialTable};
use phifact::primes::PrimeTable;
use phifact::rational::Rational;
use phifact::valuations::{
    kummer_carries, legendre_by_digits, legendre_valuation, shifted_prime_product_valuation,
};
use phifact::verifiers::{
    check_lemma2_ratio, check_lemma6, check_lemma7_sweep, check_lemma8_residues,
    check_phi_identity, construct_prop10_pair, count_lemma8_direct,
};

use oracle::PhiExponents;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lib<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// `|count/total − expected/1000| <= 1/1000`, exactly.
fn table1_row(n: u64, expected_milli: u64) -> Outcome {
    let rows = lib(table1_proportions(&[n], PairCounting::default(), 1))?;
    let row = &rows[0];
    let diff = (1000 * row.count_gt).abs_diff(expected_milli * row.total);
    let detail = format!(
        "N={n}: {}/{} = {} (expected 0.{expected_milli:03} ± 0.001)",
        row.count_gt,
        row.total,
        row.proportion_3dp()
    );
    ensure(diff <= row.total, detail.clone())?;
    Ok(detail)
}

fn lemma8() -> Outcome {
    let report = lib(check_lemma8_residues(173))?;
    ensure(report.passed, report.to_json_line())?;
    ensure(report.checked_count == 173 * 48, "expected 173 × 48 cells")?;
    let direct = lib(count_lemma8_direct(11, 4))?;
    // independent count of primes among 23, 45, 67, 89
    let oracle = (1..=4).filter(|i| oracle::is_prime_trial(22 * i + 1)).count() as u64;
    ensure(direct == 3 && oracle == 3, format!("count(11,4) = {direct}, oracle {oracle}"))?;
    Ok(format!("{} cells pass; count(11,4) = 3 = ⌊4/2⌋+1", report.checked_count))
}

fn witness_131() -> Outcome {
    let report = lib(verify_witness_facts(131))?;
    ensure(report.passed, report.to_json_line())?;
    let p = oracle::is_prime_trial;
    let f = oracle::factor_trial;
    ensure(
        p(131) && p(263) && p(787) && p(1049),
        "131, 263, 787, 1049 prime",
    )?;
    ensure(f(1573) == vec![(11, 2), (13, 1)], "1573 = 11²·13")?;
    ensure(f(2359) == vec![(7, 1), (337, 1)], "2359 = 7·337")?;
    let q = dickson::witness(131).ok_or("131 is not a witness")?.q;
    ensure(q % 77 == 54 && q % 3 == 2 && q % 5 == 1, "congruences")?;
    ensure(
        [10, 12, 14, 16, 18].iter().all(|i| !p(i * 131 + 1)),
        "10q+1 … 18q+1 composite",
    )?;
    Ok(format!("{} facts checked", report.checked_count))
}

/// Exact `c(1049, 1049)`, first established by the ascent oracle.
const C_1049: u64 = 2358;

fn theorem5() -> Outcome {
    let n = 1049;
    let ex = PhiExponents::new(2400);
    let ascent = ex.c_ascent(n, n).ok_or("ascent oracle ran out")?;
    ensure(ascent == C_1049, format!("ascent oracle gives {ascent}"))?;

    let report = lib(check_theorem5(131, budget_for_max_q(dickson::DEFAULT_MAX_Q)))?;
    ensure(report.c_value == C_1049, format!("solver gives {}", report.c_value))?;
    // c >= 9n/4 − 9/4, and r(n,n) >= 9/8 − 9/(8n), both as exact rationals
    let c = Rational::from_integer(report.c_value);
    ensure(c >= Rational::new(9 * n - 9, 4), "c below 9n/4 − 9/4")?;
    let r = Rational::new(report.c_value, 2 * n);
    let bound = Rational::new(9, 8) - Rational::new(9, 8392);
    ensure(r >= bound, format!("r = {r} below {bound}"))?;
    ensure(report.satisfied, report.to_json_line())?;
    Ok(format!(
        "c(1049,1049) = {} ≥ 2358 (ascent oracle agrees); r = {r} ≥ {bound}; m = {}",
        report.c_value, report.m
    ))
}

fn identity() -> Outcome {
    let expected = [(4, 8), (5, 32), (6, 192), (7, 1152)];
    let table = lib(PhiFactorialTable::build(1152))?;
    for (a, m) in expected {
        let fact: u64 = (1..=a).product();
        let direct = oracle::totient_trial(fact);
        ensure(direct == m, format!("φ({a}!) = {direct}, expected {m}"))?;
        let report = lib(check_phi_identity(a, Some(&table)))?;
        ensure(report.passed, report.to_json_line())?;
        ensure(
            report.parameters["phi_a_factorial"] == m,
            format!("a = {a}: {}", report.to_json_line()),
        )?;
        let t = lib(table.t_valuation(a, m - 1, m))?;
        ensure(t.is_empty(), format!("a = {a}: T = {t}"))?;
    }
    Ok("T(a, φ(a!)−1; φ(a!)) = 1 for a = 4..7 with φ(a!) = 8, 32, 192, 1152".into())
}

fn prop10() -> Outcome {
    let ex = PhiExponents::new(64);
    for k in [2, 3, 4] {
        let (b, report) = lib(construct_prop10_pair(5, k, None))?;
        ensure(b == 8 * k - 5, format!("k = {k}: b = {b}"))?;
        ensure(report.passed && report.checked_count == 1, report.to_json_line())?;
        ensure(ex.t_integral(5, b, 5 + b), format!("oracle: T(5,{b};{}) not integral", 5 + b))?;
        let c = ex.c_ascent(5, b).ok_or("ascent ran out")?;
        ensure(c <= 5 + b, format!("c(5,{b}) = {c} > a+b"))?;
    }
    Ok("b = 11, 19, 27 give integral T(5,b;5+b)".into())
}

fn oracle_suite() -> Outcome {
    // closed form of ν_q(φ(n!)) for n <= 2000
    let n_max = 2000;
    let table = lib(PhiFactorialTable::build(n_max))?;
    let pt = lib(PrimeTable::new(n_max + 1))?;
    let ex = PhiExponents::new(n_max);
    let mut closed_checks = 0;
    for &q in &ex.primes {
        let fact = oracle::factorial_valuations(n_max, q);
        let mut shifted = 0; // ν_q(∏_{p≤n}(p−1))
        for n in 1..=n_max {
            if oracle::is_prime_trial(n) {
                shifted += oracle::nu(n - 1, q);
            }
            if q > n {
                continue;
            }
            let closed = fact[n as usize] as i64 - 1 + shifted as i64;
            let lib_closed = legendre_valuation(n, q) as i64 - 1
                + lib(shifted_prime_product_valuation(n + 1, q, &pt))? as i64;
            let got = lib(table.valuation(q, n))? as i64;
            ensure(
                got == closed && lib_closed == closed && ex.get(q, n) == closed,
                format!("ν_{q}(φ({n}!)): table {got}, closed {closed}"),
            )?;
            closed_checks += 1;
        }
    }

    // c_of against ascent on random pairs
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let big = lib(PhiFactorialTable::build(table_size_for(200)))?;
    let ex = PhiExponents::new(table_size_for(200));
    for _ in 0..1000 {
        let (a, b) = (rng.gen_range(1..=200), rng.gen_range(1..=200));
        let got = lib(big.c_of(a, b))?.c;
        let want = ex.c_ascent(a, b).ok_or("ascent ran out")?;
        ensure(got == want, format!("c({a},{b}) = {got}, ascent {want}"))?;
    }

    // Legendre floor sum against the digit form
    let primes_100: Vec<u64> = (2..=100).filter(|&p| oracle::is_prime_trial(p)).collect();
    for &p in &primes_100 {
        let naive = oracle::factorial_valuations(100_000, p);
        for n in 0..=100_000u64 {
            let mut digits = 0;
            let mut m = n;
            while m > 0 {
                digits += m % p;
                m /= p;
            }
            let digit_form = (n - digits) / (p - 1);
            let floor_sum = legendre_valuation(n, p);
            ensure(
                floor_sum == digit_form
                    && legendre_by_digits(n, p) == digit_form
                    && naive[n as usize] == digit_form,
                format!("ν_{p}({n}!)"),
            )?;
        }
    }

    // Kummer carries against the Legendre difference
    for p in [2, 3, 5, 7, 11] {
        let l = oracle::factorial_valuations(4000, p);
        for a in 0..=2000u64 {
            for b in 0..=2000u64 {
                let want = l[(a + b) as usize] - l[a as usize] - l[b as usize];
                ensure(
                    kummer_carries(a, b, p) == want,
                    format!("carries({a},{b}) base {p}"),
                )?;
            }
        }
    }
    Ok(format!(
        "closed form ({closed_checks} values), 1000 random c_of, Legendre n ≤ 10⁵ p ≤ 100, Kummer a,b ≤ 2000"
    ))
}

fn lemma6_and_7() -> Outcome {
    let table = lib(PrimeTable::new(100_000))?;
    let l6 = lib(check_lemma6(100_000, 50, &table))?;
    ensure(l6.passed, l6.to_json_line())?;
    // spot the exhaustive part against direct factoring
    for q in [11, 13, 47] {
        for a in [100u64, 1000, 5000, 10_000] {
            let v = oracle::shifted_product_valuation(a + 1, q) as f64;
            let bound = 0.23 * a as f64 / (q - 1) as f64 + 7.0 * (a as f64).ln() / (q as f64).ln();
            ensure(v <= bound, format!("oracle: a = {a}, q = {q}"))?;
        }
    }
    let l7 = lib(check_lemma7_sweep(1000, 500))?;
    ensure(l7.passed, l7.to_json_line())?;
    // independent sweep over the same d, n
    let is = oracle::sieve(1000 * 500 + 1);
    let mut cells = 0u64;
    for d in (8..=1000u64).filter(|d| d % 3 != 0 && d % 5 != 0 && d % 7 != 0) {
        let mut count = 0u64;
        for n in 1..=500u64 {
            count += u64::from(is[(n * d + 1) as usize]);
            ensure(100 * count <= 46 * n + 700, format!("oracle: d = {d}, n = {n}"))?;
            cells += 1;
        }
    }
    ensure(cells == l7.checked_count, format!("oracle checked {cells}, library {}", l7.checked_count))?;
    Ok(format!(
        "valuation bound: {} checks (a ≤ 10⁵, 7 < q ≤ 50); progression bound: {} (d ≤ 1000, n ≤ 500)",
        l6.checked_count, l7.checked_count
    ))
}

fn theorem2() -> Outcome {
    let report = lib(scan_theorem2(100, 300, 1))?;
    ensure(report.checked_count == 201 * 202 / 2, "pair count")?;
    let violations = report.counterexamples.len();
    let max_r = &report.parameters["max_r"];
    // only a ratio above 9/8 at a+b >= 400 fails the criterion
    let large = &report.parameters["max_r_large_sum"];
    let (num, den) = (
        large["r"]["num"].as_u64().ok_or("missing max_r_large_sum")?,
        large["r"]["den"].as_u64().ok_or("missing max_r_large_sum")?,
    );
    ensure(
        Rational::new(num, den) <= Rational::new(9, 8),
        format!("max r at a+b ≥ 400 is {num}/{den} > 9/8"),
    )?;
    Ok(format!(
        "{} pairs, {violations} above the ceiling, max r = {} at {}, max r at a+b ≥ 400 = {num}/{den}",
        report.checked_count, max_r["dec"], report.parameters["max_r_pair"]
    ))
}

fn lemma2() -> Outcome {
    let x = 1_000_000;
    let table = lib(PrimeTable::new(x))?;
    let report = lib(check_lemma2_ratio(2, x, &table))?;
    let exact = oracle::shifted_product_valuation(x, 2);
    ensure(
        report.parameters["valuation"] == exact,
        format!("valuation {} vs oracle {exact}", report.parameters["valuation"]),
    )?;
    let ratio = exact as f64 / (2.0 * x as f64 / (x as f64).ln());
    ensure((0.9..=1.3).contains(&ratio), format!("ratio {ratio:.4} outside [0.9, 1.3]"))?;
    ensure(report.passed, report.to_json_line())?;
    Ok(format!("ν₂ = {exact}, ratio to 2x/ln x = {ratio:.4} ∈ [0.9, 1.3]"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("table1 N=100 -> 0.249", || table1_row(100, 249)),
        ("table1 N=200 -> 0.643", || table1_row(200, 643)),
        ("residue sieve mod 105, k <= 173", lemma8),
        ("witness facts q = 131", witness_131),
        ("c(1049,1049) >= 9n/4 - 9/4", theorem5),
        ("phi(a!) identity, a = 4..7", identity),
        ("shifted-primorial pairs, a = 5", prop10),
        ("oracle equivalence suite", oracle_suite),
        ("shifted-prime and progression bounds", lemma6_and_7),
        ("ceiling scan 100 <= a <= b <= 300", theorem2),
        ("shifted-prime valuation ratio at 10^6", lemma2),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{secs:7.2}s] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL [{secs:7.2}s] {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
