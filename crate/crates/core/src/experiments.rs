//! Pair scans over `1 <= a, b <= N`: the proportion table for `r(a,b) > 1`, the
//! `c(a,b)` scatter and `r(n,n)` series datasets, the `⌊(a+b)/8⌋` ceiling scan,
//! the lower-bound summary, and the pair-result CSV cache.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::phi_factorial::{table_size_for, PairResult, PhiFactorialTable};
use crate::rational::{to_decimal, Rational};
use crate::verifiers::VerificationReport;

pub const PAIRS_HEADER: [&str; 7] = ["a", "b", "sum", "c", "r_num", "r_den", "r_dec"];
pub const TABLE1_HEADER: [&str; 4] = ["N", "count_gt", "total", "proportion"];
pub const FIGURE2_HEADER: [&str; 5] = ["n", "c", "r_num", "r_den", "r_dec"];
pub const LOWER_HEADER: [&str; 4] = ["b", "a", "c", "delta"];

/// Default `n` range of the `r(n,n)` series.
pub const FIGURE2_DEFAULT_MAX: u64 = 500;

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub n_min: u64,
    pub n_max: u64,
    /// Added on top of [`table_size_for`] when sizing the first table.
    pub table_slack: u64,
    pub output_path: Option<PathBuf>,
    pub parallelism: usize,
    pub cache_path: Option<PathBuf>,
}

impl ScanConfig {
    pub fn new(n_min: u64, n_max: u64) -> Self {
        ScanConfig {
            n_min,
            n_max,
            table_slack: 0,
            output_path: None,
            parallelism: 1,
            cache_path: None,
        }
    }

    pub fn jobs(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(Error::Domain(format!(
                "invalid range [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        if self.parallelism < 1 {
            return Err(Error::Domain("parallelism must be at least 1".into()));
        }
        Ok(())
    }
}

/// Solves every pair, rebuilding the table larger whenever it runs out.
/// Output order equals input order for any parallelism.
pub fn solve_pairs(
    pairs: &[(u64, u64)],
    table_slack: u64,
    parallelism: usize,
) -> Result<(Vec<PairResult>, PhiFactorialTable)> {
    let max_ab = pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    let mut size = table_size_for(max_ab) + table_slack;
    loop {
        let table = PhiFactorialTable::build(size)?;
        let solver = table.pair_solver(max_ab)?;
        let solved: Result<Vec<PairResult>> =
            pool.install(|| pairs.par_iter().map(|&(a, b)| solver.c_of(a, b)).collect());
        match solved {
            Ok(rows) => {
                drop(solver);
                return Ok((rows, table));
            }
            Err(Error::TableExhausted { lower_bound, .. }) => {
                size = (2 * size).max(lower_bound);
            }
            Err(e) => return Err(e),
        }
    }
}

/// `c(a,b)` for all `1 <= a, b <= n`, stored row-major.
pub struct PairGrid {
    n: u64,
    c: Vec<u64>,
}

impl PairGrid {
    pub fn solve(n: u64, parallelism: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        // c is symmetric: solve a <= b, mirror the rest
        let pairs: Vec<(u64, u64)> = (1..=n).flat_map(|a| (a..=n).map(move |b| (a, b))).collect();
        let (rows, _) = solve_pairs(&pairs, 0, parallelism)?;
        let mut c = vec![0; (n * n) as usize];
        for p in rows {
            c[((p.a - 1) * n + p.b - 1) as usize] = p.c;
            c[((p.b - 1) * n + p.a - 1) as usize] = p.c;
        }
        Ok(PairGrid { n, c })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn get(&self, a: u64, b: u64) -> PairResult {
        PairResult {
            a,
            b,
            c: self.c[((a - 1) * self.n + b - 1) as usize],
        }
    }
}

/// Which pairs `(a,b)` in `[1,N]²` make up a proportion's population.
///
/// The default, [`PairCounting::OrderedFromTwo`], is the convention whose
/// proportions match the published table (0.249 at N = 100, 0.643 at N = 200).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairCounting {
    /// All `N²` ordered pairs.
    Ordered,
    /// Ordered pairs with `a >= 2`: `N(N−1)` of them. Pairs with `a = 1`
    /// never have `r > 1` (`c(1,b) <= b`), so only the denominator differs
    /// from [`PairCounting::Ordered`].
    #[default]
    OrderedFromTwo,
    /// `a <= b`: `N(N+1)/2` pairs.
    Unordered,
}

impl PairCounting {
    fn contains(self, a: u64, b: u64) -> bool {
        match self {
            PairCounting::Ordered => true,
            PairCounting::OrderedFromTwo => a >= 2,
            PairCounting::Unordered => a <= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table1Row {
    pub n: u64,
    pub count_gt: u64,
    pub total: u64,
    pub proportion: Rational,
}

impl Table1Row {
    /// Three decimals, round half to even.
    pub fn proportion_3dp(&self) -> String {
        to_decimal(&self.proportion, 3)
    }
}

/// Proportion of pairs with `r(a,b) > 1` (strict; ties do not count).
pub fn table1_proportions(
    n_values: &[u64],
    counting: PairCounting,
    parallelism: usize,
) -> Result<Vec<Table1Row>> {
    if n_values.iter().any(|&n| n < 1) {
        return Err(Error::Domain("every N must be at least 1".into()));
    }
    let Some(&n_big) = n_values.iter().max() else {
        return Ok(Vec::new());
    };
    let grid = PairGrid::solve(n_big, parallelism)?;
    Ok(n_values
        .iter()
        .map(|&n| table1_row(&grid, n, counting))
        .collect())
}

pub fn table1_row(grid: &PairGrid, n: u64, counting: PairCounting) -> Table1Row {
    assert!(n <= grid.n());
    let mut count_gt = 0;
    let mut total = 0;
    for a in 1..=n {
        for b in 1..=n {
            if !counting.contains(a, b) {
                continue;
            }
            total += 1;
            let p = grid.get(a, b);
            if p.r() > Rational::from_integer(1) {
                count_gt += 1;
            }
        }
    }
    let proportion = if total == 0 {
        Rational::from_integer(0)
    } else {
        Rational::new(count_gt, total)
    };
    Table1Row {
        n,
        count_gt,
        total,
        proportion,
    }
}

/// One row per ordered pair `1 <= a, b <= n`, `a` major.
pub fn figure1_data(n: u64, parallelism: usize) -> Result<Vec<PairResult>> {
    let grid = PairGrid::solve(n, parallelism)?;
    Ok((1..=n)
        .flat_map(|a| (1..=n).map(move |b| (a, b)))
        .map(|(a, b)| grid.get(a, b))
        .collect())
}

/// Like [`figure1_data`] but served from a pair cache when it covers the range;
/// otherwise computed and written back to the cache.
pub fn figure1_cached(n: u64, cache: &Path, parallelism: usize) -> Result<Vec<PairResult>> {
    if cache.exists() {
        let rows = cache_load(cache, Validation::SpotCheck)?;
        let mut grid: Vec<Option<u64>> = vec![None; (n * n) as usize];
        for p in rows.iter().filter(|p| p.a <= n && p.b <= n) {
            grid[((p.a - 1) * n + p.b - 1) as usize] = Some(p.c);
        }
        if grid.iter().all(Option::is_some) {
            return Ok((1..=n)
                .flat_map(|a| (1..=n).map(move |b| (a, b)))
                .map(|(a, b)| PairResult {
                    a,
                    b,
                    c: grid[((a - 1) * n + b - 1) as usize].expect("covered"),
                })
                .collect());
        }
    }
    let rows = figure1_data(n, parallelism)?;
    cache_store(cache, &rows)?;
    Ok(rows)
}

/// `(n, n)` for every `1 <= n <= n_max`.
pub fn figure2_data(n_max: u64, parallelism: usize) -> Result<Vec<PairResult>> {
    if n_max < 1 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let pairs: Vec<(u64, u64)> = (1..=n_max).map(|n| (n, n)).collect();
    Ok(solve_pairs(&pairs, 0, parallelism)?.0)
}

fn ratio_json(r: &Rational) -> serde_json::Value {
    json!({ "num": r.numer(), "den": r.denom(), "dec": to_decimal(r, 6) })
}

/// Sum `a+b` from which a ratio above 9/8 would count against the ceiling.
pub const THEOREM2_LARGE_SUM: u64 = 400;

/// For all `n_min <= a <= b <= n_max`, checks `c(a,b) <= a+b+⌊(a+b)/8⌋`.
/// Violations are findings; the largest observed `r` is recorded overall and
/// among pairs with `a+b >= 400`.
pub fn scan_theorem2(n_min: u64, n_max: u64, parallelism: usize) -> Result<VerificationReport> {
    ScanConfig::new(n_min, n_max).jobs(parallelism).validate()?;
    let pairs: Vec<(u64, u64)> = (n_min..=n_max)
        .flat_map(|a| (a..=n_max).map(move |b| (a, b)))
        .collect();
    let (rows, _) = solve_pairs(&pairs, 0, parallelism)?;

    let mut report = VerificationReport::new("theorem2")
        .param("n_min", n_min)
        .param("n_max", n_max);
    report.checked_count = rows.len() as u64;
    let mut failures = 0;
    let mut max_r: Option<PairResult> = None;
    let mut max_r_large: Option<PairResult> = None;
    for p in &rows {
        let s = p.sum();
        let ceiling = s + s / 8;
        if p.c > ceiling {
            failures += 1;
            report.fail(json!({ "a": p.a, "b": p.b, "c": p.c, "ceiling": ceiling }));
        }
        if max_r.is_none_or(|m| p.r() > m.r()) {
            max_r = Some(*p);
        }
        if s >= THEOREM2_LARGE_SUM && max_r_large.is_none_or(|m| p.r() > m.r()) {
            max_r_large = Some(*p);
        }
    }
    if let Some(m) = max_r {
        report = report
            .param("max_r", ratio_json(&m.r()))
            .param("max_r_pair", json!([m.a, m.b, m.c]));
    }
    report = report.param(
        "max_r_large_sum",
        max_r_large.map_or(serde_json::Value::Null, |m| {
            json!({ "r": ratio_json(&m.r()), "pair": [m.a, m.b, m.c] })
        }),
    );
    report.note("ceiling is asymptotic; violations are findings, listed smallest pair first");
    if failures > 0 {
        report.note(&format!("{failures} pairs exceed a+b+floor((a+b)/8)"));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LowerBoundRow {
    pub b: u64,
    pub a: u64,
    pub c: u64,
    /// `c(a,b) − (a+b)`, minimised over `1 <= a <= b` (smallest `a` on ties)
    pub delta: i64,
}

pub fn scan_lower_bound(n_min: u64, n_max: u64, parallelism: usize) -> Result<Vec<LowerBoundRow>> {
    if n_min < 2 {
        return Err(Error::Domain("lower-bound scan needs n_min >= 2".into()));
    }
    ScanConfig::new(n_min, n_max).jobs(parallelism).validate()?;
    let pairs: Vec<(u64, u64)> = (n_min..=n_max)
        .flat_map(|b| (1..=b).map(move |a| (a, b)))
        .collect();
    let (rows, _) = solve_pairs(&pairs, 0, parallelism)?;
    let mut out: Vec<LowerBoundRow> = Vec::new();
    for p in rows {
        let delta = p.c as i64 - p.sum() as i64;
        match out.last_mut() {
            Some(last) if last.b == p.b => {
                if delta < last.delta {
                    *last = LowerBoundRow { b: p.b, a: p.a, c: p.c, delta };
                }
            }
            _ => out.push(LowerBoundRow { b: p.b, a: p.a, c: p.c, delta }),
        }
    }
    Ok(out)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(w)
}

pub fn write_pairs_csv<W: Write>(w: W, rows: &[PairResult]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(PAIRS_HEADER)?;
    for p in rows {
        let r = p.r();
        out.write_record([
            p.a.to_string(),
            p.b.to_string(),
            p.sum().to_string(),
            p.c.to_string(),
            r.numer().to_string(),
            r.denom().to_string(),
            to_decimal(&r, 6),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_table1_csv<W: Write>(w: W, rows: &[Table1Row]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(TABLE1_HEADER)?;
    for row in rows {
        out.write_record([
            row.n.to_string(),
            row.count_gt.to_string(),
            row.total.to_string(),
            row.proportion_3dp(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_figure2_csv<W: Write>(w: W, rows: &[PairResult]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(FIGURE2_HEADER)?;
    for p in rows {
        let r = p.r();
        out.write_record([
            p.a.to_string(),
            p.c.to_string(),
            r.numer().to_string(),
            r.denom().to_string(),
            to_decimal(&r, 6),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_lower_csv<W: Write>(w: W, rows: &[LowerBoundRow]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(LOWER_HEADER)?;
    for row in rows {
        out.write_record([
            row.b.to_string(),
            row.a.to_string(),
            row.c.to_string(),
            row.delta.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `bytes` to `path` via a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn cache_store(path: &Path, rows: &[PairResult]) -> Result<()> {
    let mut buf = Vec::new();
    write_pairs_csv(&mut buf, rows)?;
    write_atomic(path, &buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    /// Schema and arithmetic consistency only.
    None,
    /// Plus minimality of a deterministic sample of rows.
    SpotCheck,
    /// Plus minimality of every row.
    Strict,
}

/// Rows checked for minimality in [`Validation::SpotCheck`] mode.
const SPOT_CHECKS: usize = 64;

fn parse_field(field: Option<&str>, line: u64, name: &str) -> Result<u64> {
    field
        .ok_or_else(|| Error::Parse {
            line,
            msg: format!("missing field {name}"),
        })?
        .parse()
        .map_err(|e| Error::Parse {
            line,
            msg: format!("field {name}: {e}"),
        })
}

pub fn read_pairs_csv<R: io::Read>(r: R) -> Result<Vec<(u64, PairResult)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(PAIRS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "header `{}` does not match `{}`",
                header.iter().collect::<Vec<_>>().join(","),
                PAIRS_HEADER.join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let f = |i: usize| parse_field(rec.get(i), line, PAIRS_HEADER[i]);
        let p = PairResult {
            a: f(0)?,
            b: f(1)?,
            c: f(3)?,
        };
        let bad = |msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        if p.a == 0 || p.b == 0 || p.c == 0 {
            return Err(bad("a, b and c must be positive"));
        }
        if f(2)? != p.sum() {
            return Err(bad("sum != a + b"));
        }
        let r = p.r();
        if f(4)? != *r.numer() || f(5)? != *r.denom() {
            return Err(bad("r_num/r_den is not c/(a+b) in lowest terms"));
        }
        if rec.get(6) != Some(to_decimal(&r, 6).as_str()) {
            return Err(bad("r_dec does not match r_num/r_den"));
        }
        rows.push((line, p));
    }
    Ok(rows)
}

/// Loads a pair cache, checking minimality of the stored `c` values per `mode`.
pub fn cache_load(path: &Path, mode: Validation) -> Result<Vec<PairResult>> {
    let rows = read_pairs_csv(File::open(path)?)?;
    let picked: Vec<&(u64, PairResult)> = match mode {
        Validation::None => Vec::new(),
        Validation::Strict => rows.iter().collect(),
        Validation::SpotCheck => {
            let step = (rows.len() / SPOT_CHECKS).max(1);
            rows.iter().step_by(step).collect()
        }
    };
    if let Some(c_max) = picked.iter().map(|(_, p)| p.c.max(p.a).max(p.b)).max() {
        let table = PhiFactorialTable::build(c_max)?;
        for (line, p) in picked {
            if !table.is_minimal(p)? {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("c = {} is not c({}, {})", p.c, p.a, p.b),
                });
            }
        }
    }
    Ok(rows.into_iter().map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_table1() {
        let rows = table1_proportions(&[1], PairCounting::Ordered, 1).unwrap();
        assert_eq!(rows[0].count_gt, 0);
        assert_eq!(rows[0].total, 1);
        assert_eq!(rows[0].proportion_3dp(), "0.000");
    }

    #[test]
    fn figure1_rows() {
        let rows = figure1_data(10, 2).unwrap();
        assert_eq!(rows.len(), 100);
        assert_eq!(rows[0], PairResult { a: 1, b: 1, c: 1 });
        assert_eq!(rows[3 * 10 + 6], PairResult { a: 4, b: 7, c: 8 });
    }

    #[test]
    fn lower_bound_rows() {
        let rows = scan_lower_bound(2, 10, 1).unwrap();
        assert_eq!(rows.len(), 9);
        let b7 = rows.iter().find(|r| r.b == 7).unwrap();
        assert!(b7.delta <= -3);
        assert!(scan_lower_bound(1, 10, 1).is_err());
    }

    #[test]
    fn csv_roundtrip_and_schema_guard() {
        let rows = figure1_data(12, 1).unwrap();
        let mut buf = Vec::new();
        write_pairs_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("a,b,sum,c,r_num,r_den,r_dec\n1,1,2,1,1,2,0.500000\n"));
        let back: Vec<PairResult> = read_pairs_csv(&buf[..]).unwrap().into_iter().map(|x| x.1).collect();
        assert_eq!(back, rows);

        let bad = text.replacen("r_dec", "r_decimal", 1);
        assert!(matches!(read_pairs_csv(bad.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let bad = text.replacen("1,1,2,1,1,2,0.500000", "1,1,3,1,1,2,0.500000", 1);
        assert!(matches!(read_pairs_csv(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn cache_detects_wrong_c() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.csv");
        let mut rows = figure1_data(20, 1).unwrap();
        cache_store(&path, &rows).unwrap();
        assert_eq!(cache_load(&path, Validation::Strict).unwrap(), rows);
        // (4,7) has c = 8; 9 is not minimal
        let i = rows.iter().position(|p| (p.a, p.b) == (4, 7)).unwrap();
        rows[i].c = 9;
        cache_store(&path, &rows).unwrap();
        match cache_load(&path, Validation::Strict) {
            Err(Error::Parse { line, .. }) => assert_eq!(line as usize, i + 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
