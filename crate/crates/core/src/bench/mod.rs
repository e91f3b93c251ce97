//! Benchmark harness: initial load, power and throughput tests, the
//! node-count scaling experiment, and their metrics.

pub mod report;
mod svg;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::thread;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cluster::{Cluster, Dataset, EngineConfig, Topology};
use crate::datagen::tbl::read_tbl;
use crate::datagen::{row_count, GenSeed, Generator, ScaleFactor, Table};
use crate::error::{Error, Result};
use crate::exec::{execute, plan_for, PlanContext, QueryId, QueryParams, RefreshId, ResultSet};

pub use report::{emit_report, run_manifest, ReportFormat, ReportSet};

/// Rows handed to the cluster per ingest call during initial load.
pub const LOAD_CHUNK_ROWS: u64 = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimingKind {
    Query(QueryId),
    Refresh(RefreshId),
    Load(Table),
}

impl fmt::Display for TimingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimingKind::Query(q) => write!(f, "{q}"),
            TimingKind::Refresh(r) => write!(f, "{r}"),
            TimingKind::Load(t) => f.write_str(table_label(*t)),
        }
    }
}

impl FromStr for TimingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<TimingKind> {
        match s {
            "RF1" => Ok(TimingKind::Refresh(RefreshId::Rf1)),
            "RF2" => Ok(TimingKind::Refresh(RefreshId::Rf2)),
            _ if s.starts_with('Q') => Ok(TimingKind::Query(s.parse()?)),
            _ => Table::ALL
                .into_iter()
                .find(|t| table_label(*t) == s)
                .map(TimingKind::Load)
                .ok_or_else(|| Error::Parse(format!("unknown timing label '{s}'"))),
        }
    }
}

/// Row label used by the load report.
pub fn table_label(t: Table) -> &'static str {
    match t {
        Table::Region => "Region",
        Table::Nation => "Nation",
        Table::Supplier => "Supplier",
        Table::Customer => "Customer",
        Table::Part => "Part",
        Table::PartSupp => "Part supp.",
        Table::Orders => "Orders",
        Table::LineItem => "Line item",
    }
}

/// Row order of the load report.
pub const LOAD_ORDER: [Table; 8] = [
    Table::Customer,
    Table::Nation,
    Table::Orders,
    Table::Part,
    Table::PartSupp,
    Table::Region,
    Table::Supplier,
    Table::LineItem,
];

/// Seconds at millisecond resolution, never below 1 ms.
pub fn quantize_seconds(seconds: f64) -> f64 {
    let ms = if seconds.is_finite() {
        (seconds * 1000.0).round().max(1.0)
    } else {
        1.0
    };
    ms / 1000.0
}

pub fn elapsed_seconds(d: Duration) -> f64 {
    quantize_seconds(d.as_secs_f64())
}

/// Hours rounded to two decimals.
pub fn hours(seconds: f64) -> f64 {
    (seconds / 3600.0 * 100.0).round() / 100.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingRecord {
    pub kind: TimingKind,
    pub stream: usize,
    pub seconds: f64,
}

impl TimingRecord {
    pub fn new(kind: TimingKind, stream: usize, seconds: f64) -> TimingRecord {
        TimingRecord {
            kind,
            stream,
            seconds: quantize_seconds(seconds),
        }
    }
}

/// `3600 * SF / geometric-mean` of the 22 query and 2 refresh timings.
pub fn compute_power(records: &[TimingRecord], sf: f64) -> Result<f64> {
    let mut queries = BTreeMap::new();
    let mut refreshes = BTreeMap::new();
    for r in records {
        if !(r.seconds.is_finite() && r.seconds > 0.0) {
            return Err(Error::Bench(format!(
                "{} has non-positive timing {}",
                r.kind, r.seconds
            )));
        }
        let dup = match r.kind {
            TimingKind::Query(q) => queries.insert(q, r.seconds).is_some(),
            TimingKind::Refresh(f) => refreshes.insert(f, r.seconds).is_some(),
            TimingKind::Load(_) => {
                return Err(Error::Bench(
                    "load timings do not enter the power metric".into(),
                ))
            }
        };
        if dup {
            return Err(Error::Bench(format!("duplicate timing for {}", r.kind)));
        }
    }
    if queries.len() != 22 || refreshes.len() != 2 {
        return Err(Error::Bench(format!(
            "power needs 22 query and 2 refresh timings, got {} and {}",
            queries.len(),
            refreshes.len()
        )));
    }
    if !(sf.is_finite() && sf > 0.0) {
        return Err(Error::Bench(format!("invalid scale factor {sf}")));
    }
    let log_sum: f64 = queries
        .values()
        .chain(refreshes.values())
        .map(|s| s.ln())
        .sum();
    Ok(3600.0 * (-log_sum / 24.0).exp() * sf)
}

/// `S * 22 * 3600 * SF / T_s`.
pub fn compute_throughput(streams: usize, sf: f64, elapsed: f64) -> Result<f64> {
    if streams == 0 || !(elapsed.is_finite() && elapsed > 0.0) {
        return Err(Error::Bench(format!(
            "invalid throughput inputs: {streams} streams over {elapsed} s"
        )));
    }
    Ok(streams as f64 * 22.0 * 3600.0 * sf / elapsed)
}

/// Relative gain of the larger cluster: `(t_small - t_large) / t_small`.
pub fn improvement(t_small: f64, t_large: f64) -> f64 {
    (t_small - t_large) / t_small
}

/// `1st`, `2nd`, `3rd`, `4th`, ...
pub fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

fn loaded_dataset(cluster: &Cluster) -> Result<Dataset> {
    cluster
        .dataset()
        .ok_or_else(|| Error::Bench("no data loaded; run load first".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadRow {
    pub table: Table,
    pub rows: u64,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadReport {
    pub sf: ScaleFactor,
    pub node_count: usize,
    pub tables: Vec<LoadRow>,
    pub moveout_seconds: f64,
}

impl LoadReport {
    pub fn total_seconds(&self) -> f64 {
        quantize_seconds(self.tables.iter().map(|t| t.seconds).sum::<f64>() + self.moveout_seconds)
    }

    pub fn succeeded(&self) -> bool {
        self.tables.len() == 8 && self.tables.iter().all(|t| t.error.is_none())
    }

    pub fn row(&self, table: Table) -> Option<&LoadRow> {
        self.tables.iter().find(|r| r.table == table)
    }
}

#[derive(Clone, Debug)]
pub enum LoadSource<'a> {
    Generate(GenSeed),
    /// Directory of `<table>.tbl` files produced for `seed`.
    Tbl {
        dir: &'a Path,
        seed: GenSeed,
    },
}

/// Loads all eight tables into an empty cluster, then moves every WOS out.
/// A failing table is marked in the report and the cluster is left without a
/// dataset, so it must be reset before benchmarking.
pub fn run_initial_load(
    cluster: &Cluster,
    sf: ScaleFactor,
    source: LoadSource<'_>,
) -> Result<LoadReport> {
    for t in Table::ALL {
        if cluster.row_count(t)? != 0 {
            return Err(Error::Bench(format!(
                "initial load needs an empty cluster; {t} has rows"
            )));
        }
    }
    cluster.set_dataset(None);
    let seed = match source {
        LoadSource::Generate(s) | LoadSource::Tbl { seed: s, .. } => s,
    };
    let gen = Generator::new(sf, seed);
    let mut tables = Vec::new();
    for table in LOAD_ORDER {
        let start = Instant::now();
        let loaded = match &source {
            LoadSource::Generate(_) => cluster.load_generated(&gen, table, LOAD_CHUNK_ROWS),
            LoadSource::Tbl { dir, .. } => {
                read_tbl(table, &dir.join(format!("{}.tbl", table.name())))
                    .and_then(|rows| ingest_chunked(cluster, table, rows))
            }
        };
        let (rows, error) = match loaded {
            Ok(n) => (n, None),
            Err(e) => (0, Some(e.to_string())),
        };
        tables.push(LoadRow {
            table,
            rows,
            seconds: elapsed_seconds(start.elapsed()),
            error,
        });
    }
    let start = Instant::now();
    cluster.moveout_all()?;
    let report = LoadReport {
        sf,
        node_count: cluster.node_count(),
        tables,
        moveout_seconds: elapsed_seconds(start.elapsed()),
    };
    if report.succeeded() {
        cluster.set_dataset(Some(Dataset { sf, seed }));
    }
    Ok(report)
}

fn ingest_chunked(
    cluster: &Cluster,
    table: Table,
    mut rows: Vec<crate::types::Row>,
) -> Result<u64> {
    let mut total = 0;
    while !rows.is_empty() {
        let rest = rows.split_off(rows.len().min(LOAD_CHUNK_ROWS as usize));
        total += cluster.ingest(table, rows)?;
        rows = rest;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerReport {
    pub sf: ScaleFactor,
    pub node_count: usize,
    pub run_index: usize,
    /// RF1, the queries in execution order, then RF2.
    pub timings: Vec<TimingRecord>,
    pub power: f64,
    pub total_seconds: f64,
    pub total_hours: f64,
    pub results: BTreeMap<QueryId, ResultSet>,
}

impl PowerReport {
    pub fn from_timings(
        sf: ScaleFactor,
        node_count: usize,
        run_index: usize,
        timings: Vec<TimingRecord>,
        results: BTreeMap<QueryId, ResultSet>,
    ) -> Result<PowerReport> {
        let power = compute_power(&timings, sf.as_f64())?;
        let total_seconds = quantize_seconds(timings.iter().map(|t| t.seconds).sum());
        Ok(PowerReport {
            sf,
            node_count,
            run_index,
            timings,
            power,
            total_seconds,
            total_hours: hours(total_seconds),
            results,
        })
    }

    pub fn seconds(&self, kind: TimingKind) -> Option<f64> {
        self.timings
            .iter()
            .find(|t| t.kind == kind)
            .map(|t| t.seconds)
    }

    /// Column label such as `SF 0.01, 5 nodes, 1st run`.
    pub fn label(&self) -> String {
        format!(
            "SF {}, {} nodes, {} run",
            self.sf,
            self.node_count,
            ordinal(self.run_index)
        )
    }
}

/// A power-test step about to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PowerStep {
    pub index: usize,
    pub kind: TimingKind,
}

pub fn run_power(cluster: &Cluster, run_index: usize) -> Result<PowerReport> {
    run_power_with(cluster, run_index, &mut |_, _| {})
}

/// Power test: RF1, the 22 queries in the configured stream-0 order, RF2.
/// The engine configuration is frozen for the whole run; `before_step` is
/// invoked ahead of each of the 24 steps.
pub fn run_power_with(
    cluster: &Cluster,
    run_index: usize,
    before_step: &mut dyn FnMut(PowerStep, &Cluster),
) -> Result<PowerReport> {
    let ds = loaded_dataset(cluster)?;
    if !cluster.is_safe() {
        return Err(Error::ClusterUnsafe(
            "power test needs a safe cluster".into(),
        ));
    }
    let _guard = cluster.freeze(&format!("power run {run_index}"))?;
    let cfg = cluster.config();
    let ctx = PlanContext::new(ds.sf, cfg.broadcast_threshold);
    let mut steps = vec![TimingKind::Refresh(RefreshId::Rf1)];
    for &q in &cfg.stream_order {
        steps.push(TimingKind::Query(QueryId::new(q)?));
    }
    steps.push(TimingKind::Refresh(RefreshId::Rf2));

    let mut timings = Vec::with_capacity(24);
    let mut results = BTreeMap::new();
    for (index, kind) in steps.into_iter().enumerate() {
        before_step(PowerStep { index, kind }, cluster);
        let seconds = match kind {
            TimingKind::Query(q) => {
                let start = Instant::now();
                let plan = plan_for(&QueryParams::defaults(q), &ctx)?;
                let out = execute(&plan, cluster)?;
                results.insert(q, out.result);
                start.elapsed().as_secs_f64()
            }
            TimingKind::Refresh(rf) => {
                let start = Instant::now();
                crate::exec::run_refresh(rf, cluster)?;
                start.elapsed().as_secs_f64()
            }
            TimingKind::Load(_) => unreachable!("power steps are queries and refreshes"),
        };
        timings.push(TimingRecord::new(kind, 0, seconds));
    }
    if cluster.config() != cfg {
        return Err(Error::Bench(
            "engine configuration changed during the power test".into(),
        ));
    }
    let report =
        PowerReport::from_timings(ds.sf, cluster.node_count(), run_index, timings, results)?;
    debug_assert_eq!(
        compute_power(&report.timings, ds.sf.as_f64()).ok(),
        Some(report.power)
    );
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThroughputOptions {
    pub streams: usize,
    pub seed: u64,
    /// Run the refresh stream alongside the query streams.
    pub refresh: bool,
}

impl Default for ThroughputOptions {
    fn default() -> Self {
        ThroughputOptions {
            streams: 2,
            seed: 1,
            refresh: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamResult {
    pub stream: usize,
    pub params: QueryParams,
    pub result: ResultSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThroughputReport {
    pub sf: ScaleFactor,
    pub node_count: usize,
    pub streams: usize,
    /// Query streams are numbered from 1; the refresh stream is 0.
    pub records: Vec<TimingRecord>,
    pub elapsed: f64,
    pub metric: f64,
    pub results: Vec<StreamResult>,
}

/// Parameters for query stream `stream` (numbered from 1).
pub fn stream_params(seed: u64, stream: usize) -> Vec<QueryParams> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream as u64);
    QueryId::all()
        .map(|q| QueryParams::random(q, &mut rng))
        .collect()
}

/// Stream `s` runs the configured order rotated left by `s` positions.
fn stream_order(order: &[u8], stream: usize) -> Vec<u8> {
    let mut o = order.to_vec();
    let n = o.len();
    o.rotate_left(stream % n);
    o
}

/// `S` concurrent query streams, each an independent sequential client with
/// its own parameters, plus an optional refresh stream of `S` RF1/RF2 pairs.
pub fn run_throughput(cluster: &Cluster, opts: ThroughputOptions) -> Result<ThroughputReport> {
    if opts.streams == 0 {
        return Err(Error::InvalidParameter(
            "throughput test needs at least one stream".into(),
        ));
    }
    let ds = loaded_dataset(cluster)?;
    if !cluster.is_safe() {
        return Err(Error::ClusterUnsafe(
            "throughput test needs a safe cluster".into(),
        ));
    }
    let _guard = cluster.freeze("throughput")?;
    let cfg = cluster.config();
    let ctx = PlanContext::new(ds.sf, cfg.broadcast_threshold);
    let start = Instant::now();
    type StreamOut = Result<(Vec<TimingRecord>, Vec<StreamResult>, Instant)>;
    let outcomes: Vec<StreamOut> = thread::scope(|scope| {
        let mut handles = Vec::new();
        for stream in 1..=opts.streams {
            let ctx = &ctx;
            let order = stream_order(&cfg.stream_order, stream);
            handles.push(scope.spawn(move || -> StreamOut {
                let params = stream_params(opts.seed, stream);
                let mut records = Vec::new();
                let mut results = Vec::new();
                for q in order {
                    let p = params[q as usize - 1].clone();
                    let t = Instant::now();
                    let out = execute(&plan_for(&p, ctx)?, cluster)?;
                    records.push(TimingRecord::new(
                        TimingKind::Query(p.query()),
                        stream,
                        t.elapsed().as_secs_f64(),
                    ));
                    results.push(StreamResult {
                        stream,
                        params: p,
                        result: out.result,
                    });
                }
                Ok((records, results, Instant::now()))
            }));
        }
        if opts.refresh {
            handles.push(scope.spawn(move || -> StreamOut {
                let mut records = Vec::new();
                for _ in 0..opts.streams {
                    for rf in [RefreshId::Rf1, RefreshId::Rf2] {
                        let t = Instant::now();
                        crate::exec::run_refresh(rf, cluster)?;
                        records.push(TimingRecord::new(
                            TimingKind::Refresh(rf),
                            0,
                            t.elapsed().as_secs_f64(),
                        ));
                    }
                }
                Ok((records, Vec::new(), Instant::now()))
            }));
        }
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Bench("stream thread panicked".into())))
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut results = Vec::new();
    let mut last = start;
    for o in outcomes {
        let (r, s, end) = o?;
        records.extend(r);
        results.extend(s);
        last = last.max(end);
    }
    let elapsed = elapsed_seconds(last - start);
    let metric = compute_throughput(opts.streams, ds.sf.as_f64(), elapsed)?;
    Ok(ThroughputReport {
        sf: ds.sf,
        node_count: cluster.node_count(),
        streams: opts.streams,
        records,
        elapsed,
        metric,
        results,
    })
}

#[derive(Clone, Debug)]
pub struct ScaleOptions {
    pub sf: ScaleFactor,
    pub seed: GenSeed,
    pub node_counts: Vec<usize>,
    pub runs: usize,
    pub k_safety: usize,
    pub config: EngineConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleCell {
    pub nodes: usize,
    pub run_index: usize,
    pub report: Option<PowerReport>,
    pub error: Option<String>,
}

impl ScaleCell {
    pub fn total_seconds(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.total_seconds)
    }

    pub fn label(&self) -> String {
        format!("{} nodes {} run", self.nodes, ordinal(self.run_index))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Improvement {
    pub run_index: usize,
    pub small: usize,
    pub large: usize,
    /// Fraction, not percent.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleReport {
    pub sf: ScaleFactor,
    pub cells: Vec<ScaleCell>,
    pub improvements: Vec<Improvement>,
    pub loads: Vec<LoadReport>,
    /// Whether every valid run of every node count produced the same results.
    pub results_consistent: bool,
    /// Whether the machine had at least as many cores as the largest node count.
    pub honest_parallelism: bool,
}

impl ScaleReport {
    pub fn cell(&self, nodes: usize, run_index: usize) -> Option<&ScaleCell> {
        self.cells
            .iter()
            .find(|c| c.nodes == nodes && c.run_index == run_index)
    }
}

/// Improvement of each node count over the next smaller one, per run.
pub fn improvements(cells: &[ScaleCell]) -> Vec<Improvement> {
    let mut counts: Vec<usize> = cells.iter().map(|c| c.nodes).collect();
    counts.sort_unstable();
    counts.dedup();
    let mut runs: Vec<usize> = cells.iter().map(|c| c.run_index).collect();
    runs.sort_unstable();
    runs.dedup();
    let total = |n: usize, r: usize| {
        cells
            .iter()
            .find(|c| c.nodes == n && c.run_index == r)?
            .total_seconds()
    };
    let mut out = Vec::new();
    for &r in &runs {
        for pair in counts.windows(2) {
            if let (Some(a), Some(b)) = (total(pair[0], r), total(pair[1], r)) {
                out.push(Improvement {
                    run_index: r,
                    small: pair[0],
                    large: pair[1],
                    value: improvement(a, b),
                });
            }
        }
    }
    out
}

/// For each node count: a fresh cluster, an initial load, then `runs` power
/// tests. A failing load or run invalidates its cells only.
pub fn run_scale_experiment(opts: &ScaleOptions) -> Result<ScaleReport> {
    if opts.node_counts.is_empty() || opts.runs == 0 {
        return Err(Error::InvalidParameter(
            "scale experiment needs node counts and at least one run".into(),
        ));
    }
    let cores = thread::available_parallelism().map_or(1, |n| n.get());
    let mut cells = Vec::new();
    let mut loads = Vec::new();
    // Run i of every node count sees the same refresh batch, so results are
    // compared per run index.
    let mut reference: BTreeMap<usize, BTreeMap<QueryId, ResultSet>> = BTreeMap::new();
    let mut consistent = true;
    for &nodes in &opts.node_counts {
        let k = opts.k_safety.min(nodes.saturating_sub(1));
        let cluster = Cluster::new(Topology::new(nodes, k, None), opts.config.clone())?;
        let load = run_initial_load(&cluster, opts.sf, LoadSource::Generate(opts.seed));
        let load_error = match &load {
            Ok(l) if l.succeeded() => None,
            Ok(l) => Some(
                l.tables
                    .iter()
                    .filter_map(|t| t.error.as_ref().map(|e| format!("{}: {e}", t.table)))
                    .collect::<Vec<_>>()
                    .join("; "),
            ),
            Err(e) => Some(e.to_string()),
        };
        if let Ok(l) = load {
            loads.push(l);
        }
        for run_index in 1..=opts.runs {
            let (report, error) = match &load_error {
                Some(e) => (None, Some(format!("load failed: {e}"))),
                None => match run_power(&cluster, run_index) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                },
            };
            if let Some(r) = &report {
                match reference.get(&run_index) {
                    None => {
                        reference.insert(run_index, r.results.clone());
                    }
                    Some(want) => consistent &= *want == r.results,
                }
            }
            cells.push(ScaleCell {
                nodes,
                run_index,
                report,
                error,
            });
        }
    }
    Ok(ScaleReport {
        sf: opts.sf,
        improvements: improvements(&cells),
        cells,
        loads,
        results_consistent: consistent,
        honest_parallelism: opts.node_counts.iter().all(|&n| n <= cores),
    })
}

/// Expected row counts of every table, in load-report order.
pub fn expected_counts(sf: ScaleFactor) -> Vec<(Table, u64)> {
    LOAD_ORDER.iter().map(|&t| (t, row_count(t, sf))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn records(qs: &[f64], rf: [f64; 2]) -> Vec<TimingRecord> {
        let mut v: Vec<TimingRecord> = QueryId::all()
            .zip(qs)
            .map(|(q, s)| TimingRecord {
                kind: TimingKind::Query(q),
                stream: 0,
                seconds: *s,
            })
            .collect();
        v.push(TimingRecord {
            kind: TimingKind::Refresh(RefreshId::Rf1),
            stream: 0,
            seconds: rf[0],
        });
        v.push(TimingRecord {
            kind: TimingKind::Refresh(RefreshId::Rf2),
            stream: 0,
            seconds: rf[1],
        });
        v
    }

    #[test]
    fn power_trivial_cases() {
        let p = compute_power(&records(&[3600.0; 22], [3600.0; 2]), 1.0).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let p = compute_power(&records(&[1.0; 22], [1.0; 2]), 30.0).unwrap();
        assert!((p - 108_000.0).abs() / 108_000.0 < 1e-12);
    }

    #[test]
    fn power_rejects_bad_input() {
        let mut r = records(&[1.0; 22], [1.0; 2]);
        assert!(compute_power(&r[..23], 1.0).is_err());
        r[3].seconds = 0.0;
        assert!(compute_power(&r, 1.0).is_err());
        let mut r = records(&[1.0; 22], [1.0; 2]);
        r[1].kind = r[0].kind;
        assert!(compute_power(&r, 1.0).is_err());
    }

    #[test]
    fn timing_clamp_and_hours() {
        assert_eq!(
            TimingRecord::new(TimingKind::Query(QueryId::new(6).unwrap()), 0, 0.0).seconds,
            0.001
        );
        assert_eq!(quantize_seconds(1.23449), 1.234);
        assert_eq!(hours(4879.3), 1.36);
        assert_eq!(hours(6341.7), 1.76);
    }

    #[test]
    fn ordinals() {
        let got: Vec<String> = [1, 2, 3, 4, 11, 12, 13, 21, 22]
            .iter()
            .map(|&n| ordinal(n))
            .collect();
        assert_eq!(
            got,
            ["1st", "2nd", "3rd", "4th", "11th", "12th", "13th", "21st", "22nd"]
        );
    }

    #[test]
    fn timing_labels_parse() {
        for k in [
            TimingKind::Query(QueryId::new(17).unwrap()),
            TimingKind::Refresh(RefreshId::Rf2),
            TimingKind::Load(Table::PartSupp),
        ] {
            assert_eq!(k.to_string().parse::<TimingKind>().unwrap(), k);
        }
    }

    #[test]
    fn throughput_formula() {
        let m = compute_throughput(1, 0.01, 22.0).unwrap();
        assert!((m - 36.0).abs() < 1e-9);
        assert!(compute_throughput(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn improvement_pairs() {
        let cell = |nodes, run_index, t: f64| ScaleCell {
            nodes,
            run_index,
            report: Some(
                PowerReport::from_timings(
                    "1".parse().unwrap(),
                    nodes,
                    run_index,
                    records(&[t / 24.0; 22], [t / 24.0; 2]),
                    BTreeMap::new(),
                )
                .unwrap(),
            ),
            error: None,
        };
        let cells = vec![cell(3, 1, 240.0), cell(5, 1, 180.0), cell(3, 2, 120.0)];
        let imp = improvements(&cells);
        assert_eq!(imp.len(), 1);
        assert_eq!((imp[0].small, imp[0].large, imp[0].run_index), (3, 5, 1));
        assert!((imp[0].value - 0.25).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn power_permutation_invariant(ts in prop::collection::vec(0.001f64..5000.0, 24), seed in any::<u64>()) {
            let base = records(&ts[..22], [ts[22], ts[23]]);
            let mut perm: Vec<f64> = ts[..22].to_vec();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            let a = compute_power(&base, 1.0).unwrap();
            let b = compute_power(&records(&perm, [ts[22], ts[23]]), 1.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }

        #[test]
        fn power_scaling_laws(ts in prop::collection::vec(0.001f64..5000.0, 24), c in 0.01f64..100.0, sf in 0.001f64..3000.0) {
            let a = compute_power(&records(&ts[..22], [ts[22], ts[23]]), sf).unwrap();
            let scaled: Vec<f64> = ts.iter().map(|t| t * c).collect();
            let b = compute_power(&records(&scaled[..22], [scaled[22], scaled[23]]), sf).unwrap();
            prop_assert!((b - a / c).abs() <= 1e-9 * (a / c));
            let d = compute_power(&records(&ts[..22], [ts[22], ts[23]]), sf * c).unwrap();
            prop_assert!((d - a * c).abs() <= 1e-9 * (a * c));
        }
    }
}
