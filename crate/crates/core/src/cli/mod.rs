//! Command-line entry point.

pub mod batch;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bench::report::{
    improvement_chart_from, parse_power_csv, parse_scale_csv, query_chart_columns, total_chart,
    IMPROVEMENT_CSV, IMPROVEMENT_SVG, MANIFEST, POWER_CSV, QUERY_SVG, SCALE_CSV, TOTAL_SVG,
};
use crate::bench::{
    elapsed_seconds, emit_report, run_initial_load, run_manifest, run_power, run_scale_experiment,
    run_throughput, LoadSource, ReportFormat, ReportSet, ScaleOptions, ThroughputOptions,
};
use crate::cluster::{parse_u8_list, Cluster, EngineConfig, Topology};
use crate::datagen::{generate_table, write_tbl, GenSeed, ScaleFactor, Table};
use crate::error::{Error, Result};
use crate::exec::queries::STREAM0_ORDER;
use crate::kv::KvFile;
use crate::par::Parallelism;

pub use batch::{ingest_batch, BatchOutcome};

pub const DATA_DIR_ENV: &str = "DESKMPP_DATA_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "deskmpp",
    version,
    about = "Desk-scale columnar MPP database and benchmark harness"
)]
struct Cli {
    /// Root for the persisted cluster and run outputs.
    #[arg(long, global = true, env = DATA_DIR_ENV, default_value = "deskmpp-data")]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the eight tables as `.tbl` files.
    Gen {
        #[arg(long)]
        sf: ScaleFactor,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Create a cluster and run the initial load.
    Load {
        #[command(flatten)]
        setup: Setup,
        /// Read `.tbl` files from this directory instead of generating.
        #[arg(long)]
        tbl_dir: Option<PathBuf>,
        /// Replace an existing cluster.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Ingest a ZIP packet of per-table CSV files into the cluster.
    IngestBatch {
        packet: PathBuf,
        /// Seconds the packet must be ingested within; a miss fails the report, not the run.
        #[arg(long)]
        deadline: Option<f64>,
    },
    /// Convert a directory of `.tbl` files into a ZIP packet.
    Pack {
        #[arg(long)]
        tbl_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Power test: RF1, 22 queries, RF2.
    Power {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Throughput test: concurrent query streams plus a refresh stream.
    Throughput {
        #[command(flatten)]
        setup: Setup,
        /// Number of query streams.
        #[arg(long, short = 's', default_value_t = 2)]
        streams: usize,
        /// Seed for the streams' query parameters.
        #[arg(long, default_value_t = 1)]
        param_seed: u64,
        #[arg(long)]
        no_refresh: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Fresh load and power runs for each node count.
    ScaleTest {
        #[arg(long)]
        sf: ScaleFactor,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "3,5")]
        nodes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        runs: usize,
        #[command(flatten)]
        engine: Engine,
        #[command(flatten)]
        out: Output,
    },
    /// Redraw charts from the CSVs of an earlier run directory.
    Report {
        run_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect or change node state of the persisted cluster.
    Cluster {
        #[command(subcommand)]
        action: ClusterAction,
    },
}

#[derive(Subcommand, Debug)]
enum ClusterAction {
    Status,
    Kill { nodes: Vec<usize> },
    Recover { nodes: Vec<usize> },
}

#[derive(Args, Debug, Clone)]
struct Setup {
    /// Scale factor; when it differs from the persisted cluster a fresh one is loaded.
    #[arg(long)]
    sf: Option<ScaleFactor>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    buckets: Option<u32>,
    #[command(flatten)]
    engine: Engine,
}

#[derive(Args, Debug, Clone)]
struct Engine {
    /// `parallel` or `sequential`.
    #[arg(long)]
    parallelism: Option<String>,
    #[arg(long)]
    broadcast_threshold: Option<u64>,
    /// Comma-separated query numbers, or `stream0` for the customary permutation.
    #[arg(long)]
    stream_order: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// `csv`, `svg` or `both`.
    #[arg(long, default_value = "both")]
    format: ReportFormat,
}

impl Engine {
    fn apply(&self, cfg: &mut EngineConfig) -> Result<()> {
        if let Some(p) = &self.parallelism {
            cfg.parallelism = Parallelism::parse(p).ok_or_else(|| {
                Error::Config(format!(
                    "parallelism must be parallel or sequential, got '{p}'"
                ))
            })?;
        }
        if let Some(t) = self.broadcast_threshold {
            cfg.broadcast_threshold = t;
        }
        if let Some(o) = &self.stream_order {
            cfg.stream_order = if o == "stream0" {
                STREAM0_ORDER.to_vec()
            } else {
                parse_u8_list(o)?
            };
        }
        cfg.validate()
    }

    fn is_empty(&self) -> bool {
        self.parallelism.is_none()
            && self.broadcast_threshold.is_none()
            && self.stream_order.is_none()
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status: 0 on success, 1 on a failed run, 2 on bad usage.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cluster_dir(data_dir: &Path) -> PathBuf {
    data_dir.join("cluster")
}

/// A fresh timestamped directory under `<data_dir>/runs`.
fn run_dir(data_dir: &Path, command: &str) -> Result<PathBuf> {
    let stamp = chrono::Local::now()
        .format("%Y%m%d-%H%M%S%.3f")
        .to_string()
        .replace('.', "-");
    let base = data_dir.join("runs");
    let mut dir = base.join(format!("{stamp}-{command}"));
    let mut n = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{command}-{n}"));
        n += 1;
    }
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn open_cluster(data_dir: &Path) -> Result<Cluster> {
    let dir = cluster_dir(data_dir);
    if !dir.join("topology").exists() {
        return Err(Error::Config(format!(
            "no cluster at {}; run `load` first",
            dir.display()
        )));
    }
    Cluster::open(&dir)
}

fn new_cluster(setup: &Setup, nodes: usize, k: usize) -> Result<Cluster> {
    let mut cfg = EngineConfig::default();
    setup.engine.apply(&mut cfg)?;
    Cluster::new(Topology::new(nodes, k, setup.buckets), cfg)
}

fn load_fresh(
    data_dir: &Path,
    setup: &Setup,
    source: LoadSource<'_>,
) -> Result<(Cluster, crate::bench::LoadReport)> {
    let sf = setup
        .sf
        .ok_or_else(|| Error::Config("--sf is required to load a cluster".into()))?;
    let nodes = setup.nodes.unwrap_or(5);
    let k = setup.k.unwrap_or(if nodes > 2 { 2 } else { nodes - 1 });
    let cluster = new_cluster(setup, nodes, k)?;
    let report = run_initial_load(&cluster, sf, source)?;
    if !report.succeeded() {
        for t in report.tables.iter().filter(|t| t.error.is_some()) {
            eprintln!(
                "load of {} failed: {}",
                t.table,
                t.error.as_deref().unwrap_or("")
            );
        }
        return Err(Error::Bench(
            "initial load failed; the cluster must be reset".into(),
        ));
    }
    let dir = cluster_dir(data_dir);
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    cluster.save(&dir)?;
    Ok((cluster, report))
}

/// Reuses the persisted cluster when it agrees with every given option,
/// otherwise loads a fresh one.
fn resolve_cluster(
    data_dir: &Path,
    setup: &Setup,
) -> Result<(Cluster, Option<crate::bench::LoadReport>)> {
    if cluster_dir(data_dir).join("topology").exists() {
        let c = open_cluster(data_dir)?;
        let topo = c.topology();
        let ds = c.dataset();
        let matches = setup.sf.is_none_or(|sf| ds.is_some_and(|d| d.sf == sf))
            && setup.seed.is_none_or(|s| ds.is_some_and(|d| d.seed.0 == s))
            && setup.nodes.is_none_or(|n| n == topo.nodes)
            && setup.k.is_none_or(|k| k == topo.k_safety)
            && setup.buckets.is_none_or(|b| b == topo.buckets);
        if matches && ds.is_some() {
            if !setup.engine.is_empty() {
                let mut cfg = c.config();
                setup.engine.apply(&mut cfg)?;
                c.update_config("command-line engine options", |x| *x = cfg)?;
            }
            return Ok((c, None));
        }
        if setup.sf.is_none() {
            return Err(Error::Config(
                "persisted cluster has no data and no --sf was given".into(),
            ));
        }
    }
    let seed = GenSeed(setup.seed.unwrap_or(1));
    let (c, r) = load_fresh(data_dir, setup, LoadSource::Generate(seed))?;
    Ok((c, Some(r)))
}

fn write_manifest(
    dir: &Path,
    cluster: &Cluster,
    command: &str,
    extra: &[(&str, String)],
) -> Result<()> {
    let mut entries = vec![("command", command.to_string())];
    entries.extend_from_slice(extra);
    run_manifest(cluster, &entries).write(&dir.join(MANIFEST))
}

fn run(cli: Cli) -> Result<()> {
    let data_dir = cli.data_dir;
    match cli.command {
        Command::Gen { sf, seed, out } => {
            fs::create_dir_all(&out)?;
            let start = Instant::now();
            for t in Table::ALL {
                let path = out.join(format!("{}.tbl", t.name()));
                write_tbl(t, generate_table(t, sf, GenSeed(seed)), &path)?;
                println!("{}", path.display());
            }
            let mut kv = KvFile::new();
            kv.set("command", "gen")
                .set("sf", sf)
                .set("seed", seed)
                .set("deskmpp_version", env!("CARGO_PKG_VERSION"));
            kv.write(&out.join(MANIFEST))?;
            println!(
                "generated SF {sf} in {:.3} s",
                elapsed_seconds(start.elapsed())
            );
        }
        Command::Load {
            setup,
            tbl_dir,
            force,
            out,
        } => {
            if cluster_dir(&data_dir).exists() && !force {
                return Err(Error::Config(format!(
                    "a cluster already exists at {}; pass --force to replace it",
                    cluster_dir(&data_dir).display()
                )));
            }
            let seed = GenSeed(setup.seed.unwrap_or(1));
            let source = match &tbl_dir {
                Some(dir) => LoadSource::Tbl { dir, seed },
                None => LoadSource::Generate(seed),
            };
            let (cluster, report) = load_fresh(&data_dir, &setup, source)?;
            let dir = run_dir(&data_dir, "load")?;
            emit_report(
                &ReportSet {
                    load: Some(report.clone()),
                    ..Default::default()
                },
                out.format,
                &dir,
            )?;
            write_manifest(&dir, &cluster, "load", &[])?;
            for row in &report.tables {
                println!(
                    "{:<10} {:>10} rows {:>9.3} s",
                    row.table, row.rows, row.seconds
                );
            }
            println!(
                "total {:.3} s; reports in {}",
                report.total_seconds(),
                dir.display()
            );
        }
        Command::IngestBatch { packet, deadline } => {
            let cluster = open_cluster(&data_dir)?;
            let outcome = batch::ingest_batch_file(&packet, &cluster)?;
            cluster.save(&cluster_dir(&data_dir))?;
            let dir = run_dir(&data_dir, "ingest-batch")?;
            let mut kv = KvFile::new();
            kv.set("packet", packet.display())
                .set("seconds", format!("{:.3}", outcome.seconds));
            for (t, n) in &outcome.inserted {
                kv.set(&format!("inserted.{t}"), n);
            }
            kv.set("rejected_files", outcome.rejects.len())
                .set("skipped_members", outcome.skipped.join(";"));
            if let Some(d) = deadline {
                kv.set("deadline_seconds", d)
                    .set("deadline_met", outcome.seconds <= d);
            }
            kv.write(&dir.join("batch.txt"))?;
            fs::write(dir.join("rejects.csv"), outcome.rejects_csv()?)?;
            write_manifest(
                &dir,
                &cluster,
                "ingest-batch",
                &[("packet", packet.display().to_string())],
            )?;
            for (t, n) in outcome.inserted.iter().filter(|(_, n)| **n > 0) {
                println!("{t}: {n} rows");
            }
            for r in &outcome.rejects {
                eprintln!(
                    "rejected {} (line {}): {}",
                    r.member,
                    r.line.map_or("-".into(), |l| l.to_string()),
                    r.reason
                );
            }
            for s in &outcome.skipped {
                println!("skipped non-CSV member {s}");
            }
            println!("note: re-ingesting the same packet duplicates its rows");
            if let Some(d) = deadline {
                println!(
                    "deadline {d} s: {}",
                    if outcome.seconds <= d {
                        "met"
                    } else {
                        "MISSED"
                    }
                );
            }
            println!("report in {}", dir.display());
        }
        Command::Pack { tbl_dir, out } => {
            for (t, n) in batch::pack_tbl_dir(&tbl_dir, &out)? {
                println!("{t}: {n} rows");
            }
        }
        Command::Power { setup, runs, out } => {
            if runs == 0 {
                return Err(Error::InvalidParameter("--runs must be at least 1".into()));
            }
            let (cluster, load) = resolve_cluster(&data_dir, &setup)?;
            let mut reports = Vec::new();
            for i in 1..=runs {
                let r = run_power(&cluster, i)?;
                println!(
                    "{}: power {:.3}, total {:.3} s ({:.2} h)",
                    r.label(),
                    r.power,
                    r.total_seconds,
                    r.total_hours
                );
                reports.push(r);
            }
            cluster.save(&cluster_dir(&data_dir))?;
            let dir = run_dir(&data_dir, "power")?;
            emit_report(
                &ReportSet {
                    load,
                    power: reports,
                    ..Default::default()
                },
                out.format,
                &dir,
            )?;
            write_manifest(&dir, &cluster, "power", &[("runs", runs.to_string())])?;
            println!("reports in {}", dir.display());
        }
        Command::Throughput {
            setup,
            streams,
            param_seed,
            no_refresh,
            out,
        } => {
            let (cluster, load) = resolve_cluster(&data_dir, &setup)?;
            let opts = ThroughputOptions {
                streams,
                seed: param_seed,
                refresh: !no_refresh,
            };
            let r = run_throughput(&cluster, opts)?;
            println!(
                "{} streams: elapsed {:.3} s, throughput {:.3}",
                r.streams, r.elapsed, r.metric
            );
            cluster.save(&cluster_dir(&data_dir))?;
            let dir = run_dir(&data_dir, "throughput")?;
            emit_report(
                &ReportSet {
                    load,
                    throughput: Some(r),
                    ..Default::default()
                },
                out.format,
                &dir,
            )?;
            write_manifest(
                &dir,
                &cluster,
                "throughput",
                &[
                    ("streams", streams.to_string()),
                    ("param_seed", param_seed.to_string()),
                    ("refresh", (!no_refresh).to_string()),
                ],
            )?;
            println!("reports in {}", dir.display());
        }
        Command::ScaleTest {
            sf,
            seed,
            nodes,
            k,
            runs,
            engine,
            out,
        } => {
            let mut config = EngineConfig::default();
            engine.apply(&mut config)?;
            let opts = ScaleOptions {
                sf,
                seed: GenSeed(seed),
                node_counts: nodes.clone(),
                runs,
                k_safety: k,
                config,
            };
            let r = run_scale_experiment(&opts)?;
            if !r.honest_parallelism {
                eprintln!("warning: fewer cores than nodes; node-count comparisons are not meaningful here");
            }
            for c in &r.cells {
                match (&c.report, &c.error) {
                    (Some(p), _) => println!("{}: {:.3} s", c.label(), p.total_seconds),
                    (None, e) => {
                        println!("{}: invalid ({})", c.label(), e.as_deref().unwrap_or(""))
                    }
                }
            }
            for i in &r.improvements {
                println!(
                    "{} to {} nodes, run {}: {:.1}%",
                    i.small,
                    i.large,
                    i.run_index,
                    i.value * 100.0
                );
            }
            let dir = run_dir(&data_dir, "scale-test")?;
            let power = r.cells.iter().filter_map(|c| c.report.clone()).collect();
            emit_report(
                &ReportSet {
                    power,
                    scale: Some(r.clone()),
                    ..Default::default()
                },
                out.format,
                &dir,
            )?;
            let mut kv = KvFile::new();
            kv.set("command", "scale-test")
                .set("sf", sf)
                .set("seed", seed)
                .set(
                    "nodes",
                    nodes
                        .iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                )
                .set("k_safety", k)
                .set("runs", runs)
                .set("parallelism", opts.config.parallelism)
                .set("results_consistent", r.results_consistent)
                .set("deskmpp_version", env!("CARGO_PKG_VERSION"));
            kv.write(&dir.join(MANIFEST))?;
            println!("reports in {}", dir.display());
            if !r.results_consistent {
                return Err(Error::Bench(
                    "query results differ between node counts".into(),
                ));
            }
        }
        Command::Report { run_dir: src, out } => {
            let dest = out.unwrap_or_else(|| src.clone());
            fs::create_dir_all(&dest)?;
            let mut written = 0;
            if let Ok(text) = fs::read_to_string(src.join(POWER_CSV)) {
                let cols = parse_power_csv(&text)?;
                fs::write(dest.join(QUERY_SVG), query_chart_columns(&cols))?;
                if !src.join(SCALE_CSV).exists() {
                    let bars: Vec<_> = cols
                        .iter()
                        .map(|c| (c.label.clone(), Some(c.total_seconds)))
                        .collect();
                    fs::write(
                        dest.join(TOTAL_SVG),
                        total_chart("Total power-test duration", &bars),
                    )?;
                }
                written += 1;
            }
            if let Ok(text) = fs::read_to_string(src.join(SCALE_CSV)) {
                let bars = parse_scale_csv(&text)?;
                fs::write(
                    dest.join(TOTAL_SVG),
                    total_chart("Total power-test duration", &bars),
                )?;
                written += 1;
            }
            if let Ok(text) = fs::read_to_string(src.join(IMPROVEMENT_CSV)) {
                fs::write(dest.join(IMPROVEMENT_SVG), improvement_chart_from(&text)?)?;
                written += 1;
            }
            if written == 0 {
                return Err(Error::Bench(format!(
                    "no report CSVs found in {}",
                    src.display()
                )));
            }
            println!("charts in {}", dest.display());
        }
        Command::Cluster { action } => {
            let cluster = open_cluster(&data_dir)?;
            let dir = cluster_dir(&data_dir);
            match action {
                ClusterAction::Status => print_status(&cluster),
                ClusterAction::Kill { nodes } => {
                    check_nodes(&cluster, &nodes)?;
                    for n in nodes {
                        cluster.kill_node(n)?;
                        println!("node {n} down");
                    }
                    cluster.save_state(&dir)?;
                    if !cluster.is_safe() {
                        eprintln!("warning: cluster is now unsafe; queries will be refused");
                    }
                }
                ClusterAction::Recover { nodes } => {
                    check_nodes(&cluster, &nodes)?;
                    for &n in &nodes {
                        if !cluster.state().nodes[n].up {
                            cluster.set_node_state(n, true)?;
                        }
                    }
                    if !cluster.is_safe() {
                        cluster.save_state(&dir)?;
                        return Err(Error::ClusterUnsafe(
                            "some bucket has no current replica; reload with `load --force`".into(),
                        ));
                    }
                    for n in nodes {
                        let r = cluster.recover_node(n)?;
                        println!(
                            "node {n} recovered: {} segments, {} rows copied",
                            r.segments_copied, r.rows_copied
                        );
                    }
                    cluster.save(&dir)?;
                }
            }
        }
    }
    Ok(())
}

fn check_nodes(cluster: &Cluster, nodes: &[usize]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("name at least one node".into()));
    }
    match nodes.iter().find(|&&n| n >= cluster.node_count()) {
        Some(n) => Err(Error::InvalidParameter(format!(
            "no node {n}; cluster has {}",
            cluster.node_count()
        ))),
        None => Ok(()),
    }
}

fn print_status(cluster: &Cluster) {
    let topo = cluster.topology();
    println!(
        "nodes {} k_safety {} buckets {}",
        topo.nodes, topo.k_safety, topo.buckets
    );
    match cluster.dataset() {
        Some(d) => println!("dataset sf {} seed {}", d.sf, d.seed.0),
        None => println!("dataset none"),
    }
    for (n, s) in cluster.state().nodes.iter().enumerate() {
        let v = match (s.up, s.recovered) {
            (false, _) => "down",
            (true, true) => "up",
            (true, false) => "up (needs recovery)",
        };
        println!("node {n}: {v}");
    }
    println!("safe: {}", cluster.is_safe());
    if cluster.is_safe() {
        for t in Table::ALL {
            if let Ok(c) = cluster.row_count(t) {
                println!("{t}: {c} rows");
            }
        }
    }
}
