//! Report files: CSV tables in the load / per-query / scaling layouts, SVG
//! bar charts, and the `key=value` run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bench::svg::{BarChart, Series};
use crate::bench::{
    hours, ordinal, table_label, LoadReport, PowerReport, ScaleReport, ThroughputReport,
    TimingKind, LOAD_ORDER,
};
use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::exec::{QueryId, RefreshId};
use crate::kv::KvFile;

pub const LOAD_CSV: &str = "load.csv";
pub const POWER_CSV: &str = "power.csv";
pub const THROUGHPUT_CSV: &str = "throughput.csv";
pub const SCALE_CSV: &str = "scale.csv";
pub const IMPROVEMENT_CSV: &str = "scale_improvement.csv";
pub const QUERY_SVG: &str = "query_duration.svg";
pub const TOTAL_SVG: &str = "total_duration.svg";
pub const IMPROVEMENT_SVG: &str = "improvement.svg";
pub const MANIFEST: &str = "manifest.txt";

const LOAD_HEADER: [&str; 4] = [
    "Table",
    "No. of rows",
    "Duration in [s]",
    "Duration in hours",
];
const LOAD_TOTAL: &str = "Total load duration in hours";
const FAILED: &str = "FAILED";
const POWER_ROW: &str = "Power@Size";
const SECONDS_ROW: &str = "Results in seconds";
const HOURS_ROW: &str = "Results in hours";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Svg,
    Both,
}

impl ReportFormat {
    fn csv(self) -> bool {
        self != ReportFormat::Svg
    }

    fn svg(self) -> bool {
        self != ReportFormat::Csv
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReportFormat> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "svg" => Ok(ReportFormat::Svg),
            "both" | "csv,svg" | "svg,csv" => Ok(ReportFormat::Both),
            _ => Err(Error::InvalidParameter(format!(
                "unknown report format '{s}' (csv, svg, both)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ReportSet {
    pub load: Option<LoadReport>,
    pub power: Vec<PowerReport>,
    pub throughput: Option<ThroughputReport>,
    pub scale: Option<ScaleReport>,
}

fn secs(v: f64) -> String {
    format!("{v:.3}")
}

fn hrs(v: f64) -> String {
    format!("{v:.2}")
}

fn to_csv(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| Ok(rec?.iter().map(String::from).collect()))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

fn num(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("expected a number, got '{s}'")))
}

fn opt_num(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        num(s).map(Some)
    }
}

fn strings<const N: usize>(a: [&str; N]) -> Vec<String> {
    a.iter().map(|s| s.to_string()).collect()
}

pub fn load_csv(r: &LoadReport) -> Result<String> {
    let mut rows = Vec::new();
    for t in LOAD_ORDER {
        let Some(row) = r.row(t) else { continue };
        let count = if row.error.is_some() {
            FAILED.to_string()
        } else {
            row.rows.to_string()
        };
        rows.push(vec![
            table_label(t).to_string(),
            count,
            secs(row.seconds),
            hrs(hours(row.seconds)),
        ]);
    }
    let total = r.total_seconds();
    rows.push(vec![
        LOAD_TOTAL.to_string(),
        String::new(),
        secs(total),
        hrs(hours(total)),
    ]);
    to_csv(&strings(LOAD_HEADER), &rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadCsvRow {
    pub label: String,
    /// `None` for a failed table or the total row.
    pub rows: Option<u64>,
    pub seconds: f64,
    pub hours: f64,
}

pub fn parse_load_csv(text: &str) -> Result<Vec<LoadCsvRow>> {
    let (header, rows) = read_csv(text)?;
    if header != strings(LOAD_HEADER) {
        return Err(Error::Parse(format!(
            "unexpected load report header {header:?}"
        )));
    }
    rows.iter()
        .map(|r| {
            if r.len() != 4 {
                return Err(Error::Parse(format!(
                    "load report row has {} fields",
                    r.len()
                )));
            }
            let count = match r[1].as_str() {
                "" | FAILED => None,
                n => Some(
                    n.parse()
                        .map_err(|_| Error::Parse(format!("bad row count '{n}'")))?,
                ),
            };
            Ok(LoadCsvRow {
                label: r[0].clone(),
                rows: count,
                seconds: num(&r[2])?,
                hours: num(&r[3])?,
            })
        })
        .collect()
}

fn power_row_kinds() -> Vec<TimingKind> {
    QueryId::all()
        .map(TimingKind::Query)
        .chain([
            TimingKind::Refresh(RefreshId::Rf1),
            TimingKind::Refresh(RefreshId::Rf2),
        ])
        .collect()
}

/// One column per report; rows Q1..Q22, RF1, RF2, then the metric and totals.
pub fn power_csv(reports: &[PowerReport]) -> Result<String> {
    let mut header = vec!["Query".to_string()];
    header.extend(reports.iter().map(|r| r.label()));
    let mut rows = Vec::new();
    for kind in power_row_kinds() {
        let mut row = vec![kind.to_string()];
        row.extend(
            reports
                .iter()
                .map(|r| r.seconds(kind).map(secs).unwrap_or_default()),
        );
        rows.push(row);
    }
    let tail: [(&str, fn(&PowerReport) -> String); 3] = [
        (POWER_ROW, |r| r.power.to_string()),
        (SECONDS_ROW, |r| secs(r.total_seconds)),
        (HOURS_ROW, |r| hrs(r.total_hours)),
    ];
    for (label, f) in tail {
        let mut row = vec![label.to_string()];
        row.extend(reports.iter().map(f));
        rows.push(row);
    }
    to_csv(&header, &rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerColumn {
    pub label: String,
    pub timings: Vec<(TimingKind, f64)>,
    pub power: f64,
    pub total_seconds: f64,
    pub total_hours: f64,
}

pub fn parse_power_csv(text: &str) -> Result<Vec<PowerColumn>> {
    let (header, rows) = read_csv(text)?;
    if header.first().map(String::as_str) != Some("Query") {
        return Err(Error::Parse(
            "power report must start with a Query column".into(),
        ));
    }
    let mut cols: Vec<PowerColumn> = header[1..]
        .iter()
        .map(|l| PowerColumn {
            label: l.clone(),
            timings: Vec::new(),
            power: 0.0,
            total_seconds: 0.0,
            total_hours: 0.0,
        })
        .collect();
    let mut seen = 0;
    for r in &rows {
        if r.len() != header.len() {
            return Err(Error::Parse(format!(
                "power report row '{}' has {} fields",
                r[0],
                r.len()
            )));
        }
        for (c, cell) in cols.iter_mut().zip(&r[1..]) {
            match r[0].as_str() {
                POWER_ROW => c.power = num(cell)?,
                SECONDS_ROW => c.total_seconds = num(cell)?,
                HOURS_ROW => c.total_hours = num(cell)?,
                label => {
                    if let Some(v) = opt_num(cell)? {
                        c.timings.push((label.parse()?, v));
                    }
                }
            }
        }
        seen += 1;
    }
    if seen != 27 {
        return Err(Error::Parse(format!(
            "power report has {seen} rows, expected 27"
        )));
    }
    Ok(cols)
}

pub fn throughput_csv(r: &ThroughputReport) -> Result<String> {
    let header = strings(["Stream", "Step", "Duration in [s]"]);
    let mut rows: Vec<Vec<String>> = r
        .records
        .iter()
        .map(|t| vec![t.stream.to_string(), t.kind.to_string(), secs(t.seconds)])
        .collect();
    rows.push(vec![String::new(), "Elapsed".into(), secs(r.elapsed)]);
    rows.push(vec![
        r.streams.to_string(),
        "Throughput@Size".into(),
        r.metric.to_string(),
    ]);
    to_csv(&header, &rows)
}

/// Table-4 layout: one row for the data size, one column per cell.
pub fn scale_csv(r: &ScaleReport) -> Result<String> {
    let mut header = vec!["Data size".to_string()];
    header.extend(r.cells.iter().map(|c| c.label()));
    let mut row = vec![format!("Results in [s] for SF {}", r.sf)];
    row.extend(r.cells.iter().map(|c| {
        c.total_seconds()
            .map(secs)
            .unwrap_or_else(|| "invalid".into())
    }));
    to_csv(&header, &[row])
}

pub fn improvement_csv(r: &ScaleReport) -> Result<String> {
    let header = strings(["Run", "From nodes", "To nodes", "Improvement in [%]"]);
    let rows: Vec<Vec<String>> = r
        .improvements
        .iter()
        .map(|i| {
            vec![
                ordinal(i.run_index),
                i.small.to_string(),
                i.large.to_string(),
                (i.value * 100.0).to_string(),
            ]
        })
        .collect();
    to_csv(&header, &rows)
}

/// `(cell label, total seconds)`; `None` marks an invalid cell.
pub fn parse_scale_csv(text: &str) -> Result<Vec<(String, Option<f64>)>> {
    let (header, rows) = read_csv(text)?;
    let row = match rows.as_slice() {
        [row] if row.len() == header.len() => row,
        _ => {
            return Err(Error::Parse(
                "scale report must have exactly one data row".into(),
            ))
        }
    };
    header[1..]
        .iter()
        .zip(&row[1..])
        .map(|(h, v)| Ok((h.clone(), if v == "invalid" { None } else { Some(num(v)?) })))
        .collect()
}

impl From<&PowerReport> for PowerColumn {
    fn from(r: &PowerReport) -> PowerColumn {
        PowerColumn {
            label: r.label(),
            timings: r.timings.iter().map(|t| (t.kind, t.seconds)).collect(),
            power: r.power,
            total_seconds: r.total_seconds,
            total_hours: r.total_hours,
        }
    }
}

pub fn query_chart(reports: &[PowerReport]) -> String {
    let cols: Vec<PowerColumn> = reports.iter().map(PowerColumn::from).collect();
    let title = match reports.first() {
        Some(r) => format!("Query duration, SF {}", r.sf),
        None => "Query duration".into(),
    };
    query_chart_titled(&title, &cols)
}

/// Per-query duration bars, one series per column.
pub fn query_chart_columns(cols: &[PowerColumn]) -> String {
    query_chart_titled("Query duration", cols)
}

fn query_chart_titled(title: &str, cols: &[PowerColumn]) -> String {
    let kinds = power_row_kinds();
    BarChart {
        title: title.into(),
        y_label: "Duration [s]".into(),
        categories: kinds.iter().map(|k| k.to_string()).collect(),
        series: cols
            .iter()
            .map(|c| Series {
                name: c.label.clone(),
                values: kinds
                    .iter()
                    .map(|k| c.timings.iter().find(|t| t.0 == *k).map(|t| t.1))
                    .collect(),
            })
            .collect(),
    }
    .render()
}

/// One bar per (node count, run).
pub fn total_chart(title: &str, bars: &[(String, Option<f64>)]) -> String {
    BarChart {
        title: title.into(),
        y_label: "Total duration [s]".into(),
        categories: bars.iter().map(|b| b.0.clone()).collect(),
        series: vec![Series {
            name: "total".into(),
            values: bars.iter().map(|b| b.1).collect(),
        }],
    }
    .render()
}

pub fn improvement_chart(r: &ScaleReport) -> String {
    let bars: Vec<(String, f64)> = r
        .improvements
        .iter()
        .map(|i| {
            (
                format!(
                    "{} to {} nodes, {} run",
                    i.small,
                    i.large,
                    ordinal(i.run_index)
                ),
                i.value * 100.0,
            )
        })
        .collect();
    improvement_bars(&format!("Improvement with more nodes, SF {}", r.sf), &bars)
}

/// Redraws the improvement chart from an improvement CSV.
pub fn improvement_chart_from(text: &str) -> Result<String> {
    let (_, rows) = read_csv(text)?;
    let bars = rows
        .iter()
        .map(|r| match r.as_slice() {
            [run, from, to, pct] => Ok((format!("{from} to {to} nodes, {run} run"), num(pct)?)),
            _ => Err(Error::Parse("improvement rows need 4 fields".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(improvement_bars("Improvement with more nodes", &bars))
}

fn improvement_bars(title: &str, bars: &[(String, f64)]) -> String {
    BarChart {
        title: title.into(),
        y_label: "Improvement [%]".into(),
        categories: bars.iter().map(|b| b.0.clone()).collect(),
        series: vec![Series {
            name: "improvement".into(),
            values: bars.iter().map(|b| Some(b.1)).collect(),
        }],
    }
    .render()
}

/// Writes every report in `set` under `dir` and returns the written paths.
pub fn emit_report(set: &ReportSet, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    if format.csv() {
        if let Some(l) = &set.load {
            put(LOAD_CSV, load_csv(l)?)?;
        }
        if !set.power.is_empty() {
            put(POWER_CSV, power_csv(&set.power)?)?;
        }
        if let Some(t) = &set.throughput {
            put(THROUGHPUT_CSV, throughput_csv(t)?)?;
        }
        if let Some(s) = &set.scale {
            put(SCALE_CSV, scale_csv(s)?)?;
            put(IMPROVEMENT_CSV, improvement_csv(s)?)?;
        }
    }
    if format.svg() {
        if !set.power.is_empty() {
            put(QUERY_SVG, query_chart(&set.power))?;
        }
        let totals: Vec<(String, Option<f64>)> = match &set.scale {
            Some(s) => s
                .cells
                .iter()
                .map(|c| (c.label(), c.total_seconds()))
                .collect(),
            None => set
                .power
                .iter()
                .map(|r| {
                    (
                        format!("{} nodes {} run", r.node_count, ordinal(r.run_index)),
                        Some(r.total_seconds),
                    )
                })
                .collect(),
        };
        if !totals.is_empty() {
            put(TOTAL_SVG, total_chart("Total power-test duration", &totals))?;
        }
        if let Some(s) = &set.scale {
            put(IMPROVEMENT_SVG, improvement_chart(s))?;
        }
    }
    Ok(written)
}

/// Everything needed to repeat a run: dataset, topology, engine settings and
/// versions, plus caller-supplied entries.
pub fn run_manifest(cluster: &Cluster, extra: &[(&str, String)]) -> KvFile {
    let mut kv = KvFile::new();
    kv.set("deskmpp_version", env!("CARGO_PKG_VERSION"))
        .set("parallel_feature", cfg!(feature = "parallel"))
        .set("os", std::env::consts::OS)
        .set("arch", std::env::consts::ARCH);
    if let Some(ds) = cluster.dataset() {
        kv.set("sf", ds.sf).set("seed", ds.seed.0);
    }
    let topo = cluster.topology();
    kv.set("nodes", topo.nodes)
        .set("k_safety", topo.k_safety)
        .set("buckets", topo.buckets);
    let cfg = cluster.config();
    kv.set("wos_budget", cfg.wos_budget)
        .set("broadcast_threshold", cfg.broadcast_threshold)
        .set("max_operator_rows", cfg.max_operator_rows)
        .set("parallelism", cfg.parallelism)
        .set(
            "stream_order",
            cfg.stream_order
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
    for (k, v) in extra {
        kv.set(k, v);
    }
    kv
}
