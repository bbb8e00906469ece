//! Monte-Carlo critical values for the record goodness-of-fit statistics.
//!
//! With the Weibull parameters replaced by their MLEs, the null distribution
//! of `D`, `W2` and `DS` given at least two records does not depend on the
//! true `(alpha, sigma)`, so one table per `n` simulated from `W(1, 1)`
//! serves every Weibull null.
//!
//! Replicate `j` for sample size `n` draws from its own ChaCha stream keyed
//! by `(seed, n)` with stream id `j`. Results therefore depend only on the
//! inputs and never on how replicates are spread over threads.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{Parent, WeibullParams};
use crate::error::{Error, Result};
use crate::estimate::{fit_weibull, npmle};
use crate::gof::{statistics_from_step, GofStatistics, Statistic};
use crate::records::{generate_records, SamplingPlan};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Records required for a replicate to count.
pub const MIN_RECORDS: usize = 2;

/// Quantile levels tabulated by default.
pub const DEFAULT_LEVELS: [f64; 9] = [0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99];

/// Sample sizes tabulated by default.
pub const DEFAULT_SIZES: [u64; 4] = [5, 10, 20, 50];

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generator for replicate `j` of sample size `n`.
pub fn replicate_rng(seed: u64, n: u64, j: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(n)));
    rng.set_stream(j);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullSampleSet {
    pub n: u64,
    /// One entry per replicate, in replicate order.
    pub draws: Vec<GofStatistics>,
    /// Samples redrawn because they had fewer than two records.
    pub discarded: u64,
    /// Samples redrawn because the fit or a statistic failed.
    pub solver_failures: u64,
}

impl NullSampleSet {
    pub fn values(&self, statistic: Statistic) -> Vec<f64> {
        self.draws.iter().map(|d| d.get(statistic)).collect()
    }
}

struct Replicate {
    stats: GofStatistics,
    discarded: u64,
    failures: u64,
}

fn run_replicate(parent: &Parent, n: u64, seed: u64, j: u64) -> Replicate {
    let mut rng = replicate_rng(seed, n, j);
    let mut discarded = 0;
    let mut failures = 0;
    loop {
        let rs = generate_records(parent, SamplingPlan::Random { n }, &mut rng)
            .expect("parent and plan validated by caller");
        if rs.m() < MIN_RECORDS {
            discarded += 1;
            continue;
        }
        let stats = fit_weibull(&rs)
            .and_then(|fit| statistics_from_step(&npmle(&rs), &fit.params, n));
        match stats {
            Ok(stats) if stats.is_finite() => {
                return Replicate {
                    stats,
                    discarded,
                    failures,
                }
            }
            _ => failures += 1,
        }
    }
}

/// Runs `f` over `0..count`, returning results in index order.
struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    /// `workers <= 1` runs on the calling thread.
    fn new(workers: usize) -> Result<Self> {
        #[cfg(feature = "parallel")]
        {
            let pool = if workers > 1 {
                Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .build()
                        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?,
                )
            } else {
                None
            };
            Ok(Self { pool })
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Ok(Self {})
        }
    }

    fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| (0..count).into_par_iter().map(&f).collect());
        }
        (0..count).map(f).collect()
    }
}

fn check_simulation_inputs(n: u64, reps: u64) -> Result<()> {
    if n < MIN_RECORDS as u64 {
        return Err(Error::InvalidParameter(format!(
            "sample size must be at least {MIN_RECORDS}, got {n}"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("replication count must be positive".into()));
    }
    Ok(())
}

fn simulate_on(exec: &Executor, parent: &Parent, n: u64, reps: u64, seed: u64) -> Result<NullSampleSet> {
    check_simulation_inputs(n, reps)?;
    parent.validate()?;
    let results = exec.map(reps, |j| run_replicate(parent, n, seed, j));
    let mut set = NullSampleSet {
        n,
        draws: Vec::with_capacity(results.len()),
        discarded: 0,
        solver_failures: 0,
    };
    for r in results {
        set.draws.push(r.stats);
        set.discarded += r.discarded;
        set.solver_failures += r.failures;
    }
    Ok(set)
}

/// Null draws of `(D, W2, DS)` from `W(1, 1)` on the calling thread.
pub fn simulate_null_statistics(n: u64, reps: u64, seed: u64) -> Result<NullSampleSet> {
    simulate_null_statistics_from(&Parent::Weibull(WeibullParams::unit()), n, reps, seed, 1)
}

/// Null draws from an arbitrary parent, spread over `workers` threads.
pub fn simulate_null_statistics_from(
    parent: &Parent,
    n: u64,
    reps: u64,
    seed: u64,
    workers: usize,
) -> Result<NullSampleSet> {
    simulate_on(&Executor::new(workers)?, parent, n, reps, seed)
}

/// 1-based nearest rank `ceil(gamma * len)`, robust to `gamma * len` landing
/// a hair above an integer.
fn nearest_rank(len: usize, gamma: f64) -> usize {
    let x = gamma * len as f64;
    let rounded = x.round();
    let rank = if (x - rounded).abs() <= 1e-9 * x.max(1.0) {
        rounded
    } else {
        x.ceil()
    };
    (rank as usize).clamp(1, len)
}

fn quantile_sorted(sorted: &[f64], gamma: f64) -> f64 {
    sorted[nearest_rank(sorted.len(), gamma) - 1]
}

/// Nearest-rank empirical quantile: the `ceil(gamma * M)`-th smallest value.
pub fn empirical_quantile(values: &[f64], gamma: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {gamma}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    #[serde(rename = "M")]
    pub reps: u64,
    pub seed: u64,
    pub min_records: usize,
    pub engine_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<Parent>,
    /// Wall-clock stamp; omitted when byte-reproducible output is wanted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl TableMeta {
    pub fn new(reps: u64, seed: u64) -> Self {
        Self {
            reps,
            seed,
            min_records: MIN_RECORDS,
            engine_version: ENGINE_VERSION.into(),
            parent: None,
            generated_at: None,
        }
    }
}

/// One tabulated quantile; `gamma` is the quantile level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: u64,
    pub statistic: Statistic,
    pub gamma: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalTable {
    pub meta: TableMeta,
    pub rows: Vec<TableRow>,
}

fn same_level(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

impl CriticalTable {
    /// Quantile at `level` for `(n, statistic)`, if tabulated.
    pub fn lookup(&self, n: u64, statistic: Statistic, level: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.statistic == statistic && same_level(r.gamma, level))
            .map(|r| r.value)
    }

    /// Like [`CriticalTable::lookup`], but linearly interpolates between the
    /// nearest tabulated sizes when `n` itself is missing. No extrapolation.
    pub fn lookup_interpolated(&self, n: u64, statistic: Statistic, level: f64) -> Option<f64> {
        if let Some(v) = self.lookup(n, statistic, level) {
            return Some(v);
        }
        let candidates = || {
            self.rows
                .iter()
                .filter(move |r| r.statistic == statistic && same_level(r.gamma, level))
        };
        let below = candidates().filter(|r| r.n < n).max_by_key(|r| r.n)?;
        let above = candidates().filter(|r| r.n > n).min_by_key(|r| r.n)?;
        let t = (n - below.n) as f64 / (above.n - below.n) as f64;
        Some(below.value + t * (above.value - below.value))
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.n).collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Distinct quantile levels in increasing order.
    pub fn levels(&self) -> Vec<f64> {
        let mut levels: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !levels.iter().any(|&l| same_level(l, r.gamma)) {
                levels.push(r.gamma);
            }
        }
        levels.sort_by(f64::total_cmp);
        levels
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// CSV with one row per `(n, statistic)` and one column per level.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let levels = self.levels();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n".to_string(), "statistic".to_string()];
        header.extend(levels.iter().map(|l| l.to_string()));
        w.write_record(&header)?;
        for n in self.sizes() {
            for stat in Statistic::ALL {
                if !self.rows.iter().any(|r| r.n == n && r.statistic == stat) {
                    continue;
                }
                let mut row = vec![n.to_string(), stat.to_string()];
                row.extend(levels.iter().map(|&l| {
                    self.lookup(n, stat, l).map(|v| v.to_string()).unwrap_or_default()
                }));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn check_grid(sizes: &[u64], levels: &[f64], reps: u64) -> Result<()> {
    if sizes.is_empty() || levels.is_empty() {
        return Err(Error::InvalidParameter("size and level grids must be non-empty".into()));
    }
    for &n in sizes {
        check_simulation_inputs(n, reps)?;
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "quantile levels must lie in (0, 1), got {l}"
        )));
    }
    Ok(())
}

/// Tabulates the null quantiles of all three statistics for every size in
/// `sizes` and every level in `levels`. The output is a pure function of
/// `(sizes, levels, reps, seed)`; `workers` only changes the wall time.
pub fn build_table(
    sizes: &[u64],
    levels: &[f64],
    reps: u64,
    seed: u64,
    workers: usize,
) -> Result<CriticalTable> {
    build_table_from(&Parent::Weibull(WeibullParams::unit()), sizes, levels, reps, seed, workers)
}

pub fn build_table_from(
    parent: &Parent,
    sizes: &[u64],
    levels: &[f64],
    reps: u64,
    seed: u64,
    workers: usize,
) -> Result<CriticalTable> {
    check_grid(sizes, levels, reps)?;
    let exec = Executor::new(workers)?;
    let mut sorted_levels = levels.to_vec();
    sorted_levels.sort_by(f64::total_cmp);
    sorted_levels.dedup_by(|a, b| same_level(*a, *b));

    let mut meta = TableMeta::new(reps, seed);
    if *parent != Parent::Weibull(WeibullParams::unit()) {
        meta.parent = Some(*parent);
    }
    let mut rows = Vec::new();
    for &n in sizes {
        let set = simulate_on(&exec, parent, n, reps, seed).map_err(|e| Error::Simulation {
            n,
            source: Box::new(e),
        })?;
        for stat in Statistic::ALL {
            let mut values = set.values(stat);
            values.sort_by(f64::total_cmp);
            rows.extend(sorted_levels.iter().map(|&gamma| TableRow {
                n,
                statistic: stat,
                gamma,
                value: quantile_sorted(&values, gamma),
            }));
        }
    }
    Ok(CriticalTable { meta, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn nearest_rank_quantiles() {
        assert_eq!(empirical_quantile(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), 2.0);
        assert_eq!(empirical_quantile(&[1.0, 2.0, 3.0, 4.0], 0.51).unwrap(), 3.0);
        assert_eq!(empirical_quantile(&[7.0], 0.01).unwrap(), 7.0);
        assert_eq!(empirical_quantile(&[7.0], 0.99).unwrap(), 7.0);
        assert!(empirical_quantile(&[], 0.5).is_err());
        assert!(empirical_quantile(&[1.0], 1.0).is_err());
        // 0.1 * 20000 is not exactly 2000 in floating point.
        assert_eq!(nearest_rank(20_000, 0.1), 2000);
        assert_eq!(nearest_rank(100_000, 0.975), 97_500);
    }

    #[test]
    fn uniform_quantile() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let q = empirical_quantile(&values, 0.9).unwrap();
        assert!((q - 0.9).abs() < 0.005, "{q}");
    }

    #[test]
    fn replicate_streams_are_distinct_and_stable() {
        let a: u64 = replicate_rng(1, 5, 0).random();
        let b: u64 = replicate_rng(1, 5, 1).random();
        let c: u64 = replicate_rng(1, 6, 0).random();
        let d: u64 = replicate_rng(2, 5, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_eq!(a, replicate_rng(1, 5, 0).random::<u64>());
    }

    #[test]
    fn single_replicate_is_deterministic() {
        let a = simulate_null_statistics(5, 1, 42).unwrap();
        let b = simulate_null_statistics(5, 1, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.draws.len(), 1);
        assert!(a.draws[0].is_finite());
    }

    #[test]
    fn extending_replications_keeps_earlier_draws() {
        let short = simulate_null_statistics(10, 50, 3).unwrap();
        let long = simulate_null_statistics(10, 120, 3).unwrap();
        assert_eq!(short.draws[..], long.draws[..50]);
    }

    #[test]
    fn conditioning_discards_single_record_samples() {
        // P(m = 1) = P(first draw is the minimum) = 1/n.
        let n = 5;
        let reps = 20_000;
        let set = simulate_null_statistics(n, reps, 17).unwrap();
        let total = (reps + set.discarded + set.solver_failures) as f64;
        let freq = set.discarded as f64 / total;
        let se = (0.2 * 0.8 / total).sqrt();
        assert!((freq - 0.2).abs() < 4.0 * se, "{freq}");
    }

    #[test]
    fn degenerate_single_replication_table() {
        let t = build_table(&[5, 10], &DEFAULT_LEVELS, 1, 9, 1).unwrap();
        let set = simulate_null_statistics(5, 1, 9).unwrap();
        for &g in &DEFAULT_LEVELS {
            assert_eq!(t.lookup(5, Statistic::Ks, g), Some(set.draws[0].d_n));
            assert_eq!(t.lookup(5, Statistic::Ds, g), Some(set.draws[0].ds_n));
        }
    }

    #[test]
    fn table_rows_are_monotone_in_level() {
        let t = build_table(&[5, 20], &DEFAULT_LEVELS, 400, 1, 1).unwrap();
        for n in [5, 20] {
            for stat in Statistic::ALL {
                let qs: Vec<f64> = DEFAULT_LEVELS.iter().map(|&g| t.lookup(n, stat, g).unwrap()).collect();
                assert!(qs.windows(2).all(|w| w[0] <= w[1]));
                assert!(qs.iter().all(|&q| q >= 0.0));
                if stat == Statistic::Ks {
                    assert!(qs.iter().all(|&q| q <= 1.0));
                }
            }
        }
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(build_table(&[], &DEFAULT_LEVELS, 10, 1, 1).is_err());
        assert!(build_table(&[1], &DEFAULT_LEVELS, 10, 1, 1).is_err());
        assert!(build_table(&[5], &[0.0], 10, 1, 1).is_err());
        assert!(build_table(&[5], &DEFAULT_LEVELS, 0, 1, 1).is_err());
    }

    #[test]
    fn table_json_layout_and_csv() {
        let t = build_table(&[5], &[0.5, 0.9], 20, 4, 1).unwrap();
        let json = t.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["meta"]["M"], 20);
        assert_eq!(v["meta"]["seed"], 4);
        assert_eq!(v["meta"]["min_records"], 2);
        assert!(v["meta"].get("generated_at").is_none());
        assert_eq!(v["rows"][0]["statistic"], "ks");
        assert_eq!(serde_json::from_str::<CriticalTable>(&json).unwrap(), t);

        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,statistic,0.5,0.9");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("5,ks,"));
    }
}
