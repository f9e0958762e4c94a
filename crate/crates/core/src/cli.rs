//! Command-line front end. [`run`] is the whole program; `main` only wires it to
//! the process streams.
//!
//! Exit codes: 0 success, 1 a verification found a counterexample, 2 usage or
//! domain error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dickson::{self, SearchMode};
use crate::error::{Error, Result};
use crate::experiments::{self, PairCounting, Table1Row, Validation};
use crate::phi_factorial::{PairResult, PhiFactorialTable};
use crate::primes::PrimeTable;
use crate::rational::to_decimal;
use crate::verifiers::{self, VerificationReport};

/// Directory holding the default pair cache.
pub const CACHE_ENV: &str = "PHIFACT_CACHE";
const CACHE_FILE: &str = "pairs.csv";

#[derive(Debug, Parser)]
#[command(name = "phifact", version, about = "Least c with φ(a!)φ(b!) | φ(c!), and checks around it")]
struct Cli {
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    json: bool,

    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for scans. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    jobs: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Counting {
    /// all N² ordered pairs
    Ordered,
    /// ordered pairs with a >= 2, N(N−1) of them
    FromTwo,
    /// a <= b
    Unordered,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// c(a,b) and r(a,b) for one pair
    Pair { a: u64, b: u64 },
    /// Proportion of pairs with r(a,b) > 1 for each N
    Table1 {
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        n: Vec<u64>,
        /// Count a <= b only (same as `--counting unordered`)
        #[arg(long, conflicts_with = "counting")]
        unordered: bool,
        #[arg(long, value_enum)]
        counting: Option<Counting>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// c(a,b) for every 1 <= a,b <= N
    Fig1 {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Pair cache to serve from and refresh; defaults to $PHIFACT_CACHE/pairs.csv
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Ignore any cache, including $PHIFACT_CACHE
        #[arg(long, conflicts_with = "cache")]
        no_cache: bool,
    },
    /// r(n,n) for 1 <= n <= max
    Fig2 {
        #[arg(long, default_value_t = experiments::FIGURE2_DEFAULT_MAX)]
        max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite checks of individual claims
    Verify {
        #[arg(value_enum)]
        claim: Claim,
        #[command(flatten)]
        opts: VerifyOpts,
    },
    /// Witness primes q and the c(8q+1, 8q+1) check
    Dickson {
        #[arg(value_enum)]
        action: DicksonAction,
        /// Witness to check
        #[arg(long, default_value_t = 131, conflicts_with = "limit")]
        q: u64,
        /// Search bound
        #[arg(long)]
        limit: Option<u64>,
        /// Stop after this many witnesses
        #[arg(long, default_value_t = 10)]
        max_count: usize,
        /// Search only q ≡ 54 (mod 77)
        #[arg(long)]
        congruence: bool,
        /// Largest q whose table the check may build
        #[arg(long, default_value_t = dickson::DEFAULT_MAX_Q)]
        max_q: u64,
    },
    /// Range scans over pairs
    Scan {
        #[arg(value_enum)]
        kind: ScanKind,
        #[arg(long)]
        min: u64,
        #[arg(long)]
        max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Store, load or verify a pair cache
    Cache {
        #[arg(value_enum)]
        action: CacheAction,
        /// Defaults to $PHIFACT_CACHE/pairs.csv
        #[arg(long)]
        path: Option<PathBuf>,
        /// Grid size for `store`
        #[arg(long, default_value_t = 100)]
        n: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Claim {
    Lemma2,
    Lemma6,
    Lemma7,
    Lemma8,
    Prop10,
    Identity,
    Floor,
}

#[derive(Debug, Args)]
struct VerifyOpts {
    /// Prime q (lemma2; lemma8 direct count)
    #[arg(long)]
    q: Option<u64>,
    /// lemma2: bound x
    #[arg(long, default_value_t = 1_000_000)]
    x: u64,
    /// lemma6
    #[arg(long, default_value_t = 100_000)]
    a_max: u64,
    /// lemma6
    #[arg(long, default_value_t = 50)]
    q_max: u64,
    /// lemma7: a single d instead of the sweep
    #[arg(long)]
    d: Option<u64>,
    /// lemma7 sweep
    #[arg(long, default_value_t = 1000)]
    d_max: u64,
    /// lemma7: progression length
    #[arg(long, default_value_t = 500)]
    n: u64,
    /// lemma8 residue check
    #[arg(long, default_value_t = 173)]
    k_max: u64,
    /// prop10 multipliers; lemma8 direct count length
    #[arg(long, value_delimiter = ',')]
    k: Vec<u64>,
    /// prop10 and identity
    #[arg(long, value_delimiter = ',')]
    a: Vec<u64>,
    /// floor identity
    #[arg(long, default_value_t = 10_000)]
    sample_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DicksonAction {
    Search,
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanKind {
    Theorem2,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CacheAction {
    Store,
    Load,
    Verify,
}

/// What a command produced: data already written, plus whether every check passed.
struct Outcome {
    passed: bool,
}

const OK: Outcome = Outcome { passed: true };

/// Parses `argv` (program name first) and runs it. Data goes to `out`,
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs as usize)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return 2;
        }
    };
    // the pool needs a Send closure, so buffer both streams
    let (result, data, diag) = pool.install(|| {
        let (mut data, mut diag) = (Vec::new(), Vec::new());
        let result = dispatch(&cli, &mut data, &mut diag);
        (result, data, diag)
    });
    let _ = out.write_all(&data);
    let _ = out.flush();
    let _ = err.write_all(&diag);
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            // a cache that fails validation is a failed verification
            match e {
                Error::Parse { .. } => 1,
                _ => 2,
            }
        }
    }
}

impl Cli {
    fn format(&self, default: Format) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format.unwrap_or(default)
        }
    }
}

fn default_cache() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(|dir| PathBuf::from(dir).join(CACHE_FILE))
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    let jobs = cli.jobs as usize;
    match &cli.command {
        Command::Pair { a, b } => {
            let pair = experiments::solve_pairs(&[(*a, *b)], 0, jobs)?.0[0];
            match cli.format(Format::Text) {
                Format::Text => writeln!(out, "{pair}")?,
                Format::Json => writeln!(out, "{}", pair_json(&pair))?,
                Format::Csv => experiments::write_pairs_csv(&mut *out, &[pair])?,
            }
            Ok(OK)
        }
        Command::Table1 {
            n,
            unordered,
            counting,
            out: path,
        } => {
            let counting = match (counting, unordered) {
                (_, true) | (Some(Counting::Unordered), _) => PairCounting::Unordered,
                (Some(Counting::Ordered), _) => PairCounting::Ordered,
                (Some(Counting::FromTwo), _) | (None, false) => PairCounting::OrderedFromTwo,
            };
            let rows = experiments::table1_proportions(n, counting, jobs)?;
            emit(cli.format(Format::Csv), path.as_deref(), out, |fmt, w| match fmt {
                Format::Json => rows
                    .iter()
                    .try_for_each(|r| writeln!(w, "{}", table1_json(r)).map_err(Error::from)),
                Format::Text => rows.iter().try_for_each(|r| {
                    writeln!(
                        w,
                        "N={} {}/{} {}",
                        r.n,
                        r.count_gt,
                        r.total,
                        r.proportion_3dp()
                    )
                    .map_err(Error::from)
                }),
                Format::Csv => experiments::write_table1_csv(w, &rows),
            })?;
            Ok(OK)
        }
        Command::Fig1 {
            n,
            out: path,
            cache,
            no_cache,
        } => {
            let cache = if *no_cache {
                None
            } else {
                cache.clone().or_else(default_cache)
            };
            let rows = match &cache {
                Some(c) => experiments::figure1_cached(*n, c, jobs)?,
                None => experiments::figure1_data(*n, jobs)?,
            };
            emit_pairs(cli.format(Format::Csv), path.as_deref(), out, &rows, false)?;
            Ok(OK)
        }
        Command::Fig2 { max, out: path } => {
            let rows = experiments::figure2_data(*max, jobs)?;
            emit_pairs(cli.format(Format::Csv), path.as_deref(), out, &rows, true)?;
            Ok(OK)
        }
        Command::Verify { claim, opts } => {
            let reports = verify(*claim, opts)?;
            emit_reports(cli.format(Format::Text), out, &reports)
        }
        Command::Dickson {
            action,
            q,
            limit,
            max_count,
            congruence,
            max_q,
        } => match action {
            DicksonAction::Search => {
                let limit = limit.unwrap_or(10_000);
                let mode = if *congruence {
                    SearchMode::Congruence
                } else {
                    SearchMode::Exhaustive
                };
                let found = dickson::search_witnesses(limit, *max_count, mode);
                if found.is_empty() {
                    writeln!(err, "no witness q <= {limit}")?;
                }
                for w in &found {
                    match cli.format(Format::Text) {
                        Format::Json => writeln!(out, "{}", w.to_json_line())?,
                        Format::Csv | Format::Text => writeln!(out, "{}", w.q)?,
                    }
                }
                Ok(OK)
            }
            DicksonAction::Check => {
                if *q > *max_q {
                    return Err(Error::Bounds(format!("q = {q} exceeds --max-q {max_q}")));
                }
                let facts = dickson::verify_witness_facts(*q)?;
                let mut passed = facts.passed;
                emit_reports(cli.format(Format::Text), out, std::slice::from_ref(&facts))?;
                if dickson::is_dickson_witness(*q) {
                    let t5 = dickson::check_theorem5(*q, dickson::budget_for_max_q(*max_q))?;
                    passed &= t5.satisfied;
                    match cli.format(Format::Text) {
                        Format::Json => writeln!(out, "{}", t5.to_json_line())?,
                        _ => writeln!(
                            out,
                            "theorem5: {} n={} c={} bound={}/{} m={} r={}/{} ({})",
                            if t5.satisfied { "PASS" } else { "FAIL" },
                            t5.witness.n,
                            t5.c_value,
                            t5.bound.numer(),
                            t5.bound.denom(),
                            t5.m,
                            t5.r().numer(),
                            t5.r().denom(),
                            to_decimal(&t5.r(), 6),
                        )?,
                    }
                }
                Ok(Outcome { passed })
            }
        },
        Command::Scan {
            kind,
            min,
            max,
            out: path,
        } => match kind {
            ScanKind::Theorem2 => {
                let report = experiments::scan_theorem2(*min, *max, jobs)?;
                // violations of the ceiling are findings; only a large ratio
                // at large a+b fails the scan
                let large_ok = theorem2_large_ok(&report);
                if !report.passed {
                    writeln!(err, "note: {}", report.notes)?;
                }
                emit_reports(cli.format(Format::Text), out, std::slice::from_ref(&report))?;
                Ok(Outcome { passed: large_ok })
            }
            ScanKind::Lower => {
                let rows = experiments::scan_lower_bound(*min, *max, jobs)?;
                emit(cli.format(Format::Csv), path.as_deref(), out, |fmt, w| match fmt {
                    Format::Json => rows.iter().try_for_each(|r| {
                        writeln!(
                            w,
                            "{}",
                            json!({ "b": r.b, "a": r.a, "c": r.c, "delta": r.delta })
                        )
                        .map_err(Error::from)
                    }),
                    _ => experiments::write_lower_csv(w, &rows),
                })?;
                Ok(OK)
            }
        },
        Command::Cache { action, path, n } => {
            let path = path
                .clone()
                .or_else(default_cache)
                .ok_or_else(|| Error::Domain(format!("no --path and {CACHE_ENV} is unset")))?;
            let (rows, verb) = match action {
                CacheAction::Store => {
                    let rows = experiments::figure1_data(*n, jobs)?;
                    experiments::cache_store(&path, &rows)?;
                    (rows, "stored")
                }
                CacheAction::Load => (experiments::cache_load(&path, Validation::SpotCheck)?, "loaded"),
                CacheAction::Verify => (experiments::cache_load(&path, Validation::Strict)?, "verified"),
            };
            match cli.format(Format::Text) {
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({ "action": verb, "path": path.display().to_string(), "rows": rows.len() })
                )?,
                _ => writeln!(out, "{verb} {} rows: {}", rows.len(), path.display())?,
            }
            Ok(OK)
        }
    }
}

fn theorem2_large_ok(report: &VerificationReport) -> bool {
    let Some(large) = report.parameters.get("max_r_large_sum") else {
        return true;
    };
    let (Some(num), Some(den)) = (large["r"]["num"].as_u64(), large["r"]["den"].as_u64()) else {
        return true;
    };
    // num/den <= 9/8
    8 * num as u128 <= 9 * den as u128
}

fn verify(claim: Claim, o: &VerifyOpts) -> Result<Vec<VerificationReport>> {
    Ok(match claim {
        Claim::Lemma2 => {
            let q = o.q.unwrap_or(2);
            let table = PrimeTable::new(o.x.max(2))?;
            vec![verifiers::check_lemma2_ratio(q, o.x, &table)?]
        }
        Claim::Lemma6 => {
            let table = PrimeTable::new(o.a_max.max(o.q_max).max(2))?;
            vec![verifiers::check_lemma6(o.a_max, o.q_max, &table)?]
        }
        Claim::Lemma7 => match o.d {
            Some(d) => vec![verifiers::check_lemma7(d, o.n)?],
            None => vec![verifiers::check_lemma7_sweep(o.d_max, o.n)?],
        },
        Claim::Lemma8 => {
            let mut reports = vec![verifiers::check_lemma8_residues(o.k_max)?];
            if let Some(q) = o.q {
                let ks = if o.k.is_empty() { vec![o.k_max] } else { o.k.clone() };
                for k in ks {
                    let count = verifiers::count_lemma8_direct(q, k)?;
                    let mut r = VerificationReport::new("lemma8_direct")
                        .param("q", q)
                        .param("k", k)
                        .param("prime_count", count)
                        .param("bound", k / 2 + 1);
                    r.checked_count = 1;
                    if count > k / 2 + 1 {
                        r.fail(json!({ "q": q, "k": k, "count": count }));
                    }
                    reports.push(r);
                }
            }
            reports
        }
        Claim::Prop10 => {
            let a_values = if o.a.is_empty() { vec![5] } else { o.a.clone() };
            let ks = if o.k.is_empty() { vec![2, 3, 4] } else { o.k.clone() };
            let mut reports = Vec::new();
            for &a in &a_values {
                for &k in &ks {
                    reports.push(verifiers::construct_prop10_pair(a, k, None)?.1);
                }
            }
            reports
        }
        Claim::Identity => {
            let a_values = if o.a.is_empty() { vec![4, 5, 6, 7] } else { o.a.clone() };
            let m_max = a_values.iter().map(|&a| phi_factorial_upper(a)).max().unwrap_or(0);
            let table = match m_max {
                0 => None,
                m => Some(PhiFactorialTable::build(m)?),
            };
            a_values
                .iter()
                .map(|&a| verifiers::check_phi_identity(a, table.as_ref()))
                .collect::<Result<_>>()?
        }
        Claim::Floor => vec![verifiers::check_floor_identity(o.sample_max)?],
    })
}

/// φ(a!) for the identity check's range, so one table serves every `a`.
fn phi_factorial_upper(a: u64) -> u64 {
    if !(4..=8).contains(&a) {
        return 0;
    }
    let fact: u64 = (1..=a).product();
    crate::primes::totient(fact).unwrap_or(0)
}

fn emit_reports(fmt: Format, out: &mut dyn Write, reports: &[VerificationReport]) -> Result<Outcome> {
    let mut passed = true;
    for r in reports {
        passed &= r.passed;
        match fmt {
            Format::Json => writeln!(out, "{}", r.to_json_line())?,
            Format::Text | Format::Csv => {
                let params: Vec<String> = r
                    .parameters
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                writeln!(
                    out,
                    "{}: {} ({} checked) {}",
                    r.claim_id,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.checked_count,
                    params.join(" ")
                )?;
                for c in &r.counterexamples {
                    writeln!(out, "  counterexample: {}", serde_json::to_string(c).expect("json"))?;
                }
                if !r.notes.is_empty() {
                    writeln!(out, "  note: {}", r.notes)?;
                }
            }
        }
    }
    Ok(Outcome { passed })
}

fn pair_json(p: &PairResult) -> serde_json::Value {
    let r = p.r();
    json!({
        "a": p.a, "b": p.b, "sum": p.sum(), "c": p.c,
        "r_num": r.numer(), "r_den": r.denom(), "r_dec": to_decimal(&r, 6),
    })
}

fn table1_json(r: &Table1Row) -> serde_json::Value {
    json!({
        "N": r.n, "count_gt": r.count_gt, "total": r.total,
        "proportion": r.proportion_3dp(),
        "proportion_num": r.proportion.numer(), "proportion_den": r.proportion.denom(),
    })
}

fn emit_pairs(
    fmt: Format,
    path: Option<&Path>,
    out: &mut dyn Write,
    rows: &[PairResult],
    diagonal: bool,
) -> Result<()> {
    emit(fmt, path, out, |fmt, w| match fmt {
        Format::Json => rows
            .iter()
            .try_for_each(|p| writeln!(w, "{}", pair_json(p)).map_err(Error::from)),
        Format::Text => rows
            .iter()
            .try_for_each(|p| writeln!(w, "({},{}) {p}", p.a, p.b).map_err(Error::from)),
        Format::Csv if diagonal => experiments::write_figure2_csv(w, rows),
        Format::Csv => experiments::write_pairs_csv(w, rows),
    })
}

/// Renders into `path` atomically when given, otherwise onto `out`.
fn emit<F>(fmt: Format, path: Option<&Path>, out: &mut dyn Write, render: F) -> Result<()>
where
    F: FnOnce(Format, &mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            render(fmt, &mut buf)?;
            experiments::write_atomic(p, &buf)
        }
        None => render(fmt, out),
    }
}
