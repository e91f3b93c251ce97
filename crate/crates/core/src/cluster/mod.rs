//! Simulated shared-nothing cluster: hash segmentation over N in-process
//! nodes, K-safe replica placement, node failure and recovery.
//!
//! Each node owns one [`TableCatalog`]. Segmented tables store bucket `b` as
//! catalog segment `b` on every replica of `b`; nation and region are small
//! and are replicated whole to every node under segment 0.

pub mod segmentation;
pub mod state;

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use crate::datagen::{GenSeed, Generator, ScaleFactor, Table};
use crate::error::{Error, Result};
use crate::kv::KvFile;
use crate::par::{self, Parallelism};
use crate::storage::persist;
use crate::storage::{
    CatalogSnapshot, ColumnPredicate, ScanOptions, SegmentCopy, TableCatalog, DEFAULT_WOS_BUDGET,
};
use crate::types::Row;

pub use segmentation::{build_segmentation, key_hash, NodeId, SegmentationMap};
pub use state::{ClusterState, NodeState};

/// Tunables read by ingest and query execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub wos_budget: usize,
    /// Join inputs with at most this many estimated rows are broadcast.
    pub broadcast_threshold: u64,
    /// Upper bound on rows any single operator instance may materialize.
    pub max_operator_rows: usize,
    pub parallelism: Parallelism,
    /// Power-test query order, as query numbers 1..=22.
    pub stream_order: Vec<u8>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            wos_budget: DEFAULT_WOS_BUDGET,
            broadcast_threshold: 100_000,
            max_operator_rows: 50_000_000,
            parallelism: Parallelism::default(),
            stream_order: (1..=22).collect(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.wos_budget == 0 {
            return Err(Error::Config("WOS byte budget must be positive".into()));
        }
        if self.max_operator_rows == 0 {
            return Err(Error::Config("operator row limit must be positive".into()));
        }
        let mut order = self.stream_order.clone();
        order.sort_unstable();
        if order != (1..=22).collect::<Vec<u8>>() {
            return Err(Error::Config(
                "stream order must be a permutation of 1..22".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Topology {
    pub nodes: usize,
    pub k_safety: usize,
    pub buckets: u32,
}

impl Topology {
    /// `buckets` defaults to eight per node.
    pub fn new(nodes: usize, k_safety: usize, buckets: Option<u32>) -> Topology {
        Topology {
            nodes,
            k_safety,
            buckets: buckets.unwrap_or(nodes as u32 * 8),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub sf: ScaleFactor,
    pub seed: GenSeed,
}

/// Refresh bookkeeping: RF1 batches inserted but not yet deleted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefreshLog {
    pub next_batch: u64,
    pub pending: VecDeque<(i64, i64)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RecoveryReport {
    pub segments_copied: usize,
    pub rows_copied: u64,
    /// Source nodes that failed while being copied from.
    pub failed_sources: Vec<NodeId>,
}

/// Called before each segment copy during recovery with (table, segment,
/// source). Returning `true` simulates that source failing mid-copy.
pub type RecoveryFault = Box<dyn FnMut(Table, u32, NodeId) -> bool + Send>;

/// Consistent read view used by one query.
#[derive(Clone, Debug)]
pub struct ReadView {
    pub map: Arc<SegmentationMap>,
    /// Snapshot per node; `None` for nodes that are not serving.
    pub snapshots: Vec<Option<CatalogSnapshot>>,
    /// Serving node for each bucket.
    pub serving: Vec<NodeId>,
    /// Node that answers reads of replicated tables.
    pub replicated_from: NodeId,
    pub epoch: u64,
}

impl ReadView {
    pub fn node_count(&self) -> usize {
        self.snapshots.len()
    }

    /// Per-node segment filter selecting the buckets each node serves.
    pub fn segment_filters(&self) -> Vec<Arc<Vec<bool>>> {
        let mut f = vec![vec![false; self.serving.len()]; self.node_count()];
        for (b, n) in self.serving.iter().enumerate() {
            f[*n][b] = true;
        }
        f.into_iter().map(Arc::new).collect()
    }

    pub fn node_for_hash(&self, h: u64) -> NodeId {
        self.serving[self.map.bucket_of_hash(h) as usize]
    }
}

pub struct Cluster {
    map: Arc<SegmentationMap>,
    nodes: Vec<RwLock<TableCatalog>>,
    state: RwLock<ClusterState>,
    epoch: AtomicU64,
    config: RwLock<EngineConfig>,
    frozen: Mutex<Option<String>>,
    dataset: RwLock<Option<Dataset>>,
    refresh: Mutex<RefreshLog>,
    recovery_fault: Mutex<Option<RecoveryFault>>,
}

/// Keeps the configuration frozen until dropped.
pub struct FreezeGuard<'a> {
    cluster: &'a Cluster,
}

impl Drop for FreezeGuard<'_> {
    fn drop(&mut self) {
        *self.cluster.frozen.lock() = None;
    }
}

impl Cluster {
    pub fn new(topology: Topology, config: EngineConfig) -> Result<Cluster> {
        config.validate()?;
        let map = build_segmentation(topology.nodes, topology.k_safety, topology.buckets)?;
        let nodes = (0..topology.nodes)
            .map(|_| {
                RwLock::new(
                    TableCatalog::new(config.wos_budget).with_parallelism(Parallelism::Sequential),
                )
            })
            .collect();
        Ok(Cluster {
            map: Arc::new(map),
            nodes,
            state: RwLock::new(ClusterState::all_up(topology.nodes)),
            epoch: AtomicU64::new(0),
            config: RwLock::new(config),
            frozen: Mutex::new(None),
            dataset: RwLock::new(None),
            refresh: Mutex::new(RefreshLog::default()),
            recovery_fault: Mutex::new(None),
        })
    }

    pub fn map(&self) -> &SegmentationMap {
        &self.map
    }

    pub fn topology(&self) -> Topology {
        Topology {
            nodes: self.map.node_count,
            k_safety: self.map.k_safety,
            buckets: self.map.bucket_count,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn state(&self) -> ClusterState {
        self.state.read().clone()
    }

    pub fn epoch(&self) -> u64 {
        self.epoch.load(Ordering::SeqCst)
    }

    pub fn is_safe(&self) -> bool {
        self.state.read().is_safe(&self.map)
    }

    pub fn config(&self) -> EngineConfig {
        self.config.read().clone()
    }

    /// Applies `f` to the engine configuration unless a benchmark run has
    /// frozen it.
    pub fn update_config(&self, what: &str, f: impl FnOnce(&mut EngineConfig)) -> Result<()> {
        let frozen = self.frozen.lock();
        if frozen.is_some() {
            return Err(Error::ConfigFrozen(what.to_string()));
        }
        let mut next = self.config.read().clone();
        f(&mut next);
        next.validate()?;
        if next.wos_budget != self.config.read().wos_budget {
            for n in &self.nodes {
                n.write().set_wos_budget(next.wos_budget);
            }
        }
        *self.config.write() = next;
        Ok(())
    }

    pub fn freeze(&self, run: &str) -> Result<FreezeGuard<'_>> {
        let mut frozen = self.frozen.lock();
        if let Some(other) = frozen.as_ref() {
            return Err(Error::Bench(format!(
                "run '{other}' already holds the configuration"
            )));
        }
        *frozen = Some(run.to_string());
        Ok(FreezeGuard { cluster: self })
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen.lock().is_some()
    }

    pub fn dataset(&self) -> Option<Dataset> {
        *self.dataset.read()
    }

    pub fn set_dataset(&self, d: Option<Dataset>) {
        *self.dataset.write() = d;
    }

    pub fn refresh_log(&self) -> parking_lot::MutexGuard<'_, RefreshLog> {
        self.refresh.lock()
    }

    pub fn set_recovery_fault(&self, hook: Option<RecoveryFault>) {
        *self.recovery_fault.lock() = hook;
    }

    pub fn set_node_state(&self, node: NodeId, up: bool) -> Result<()> {
        self.state.write().set_node_state(node, up)?;
        self.epoch.fetch_add(1, Ordering::SeqCst);
        Ok(())
    }

    pub fn kill_node(&self, node: NodeId) -> Result<()> {
        self.set_node_state(node, false)
    }

    /// Discards all data held by `node`, as after a disk replacement.
    pub fn wipe_node(&self, node: NodeId) -> Result<()> {
        self.nodes
            .get(node)
            .ok_or_else(|| Error::InvalidParameter(format!("no node {node}")))?
            .write()
            .wipe();
        Ok(())
    }

    pub fn node_catalog(&self, node: NodeId) -> parking_lot::RwLockReadGuard<'_, TableCatalog> {
        self.nodes[node].read()
    }

    pub fn read_view(&self) -> Result<ReadView> {
        let state = self.state.read();
        let serving = state.serving_assignment(&self.map)?;
        let replicated_from = state
            .any_serving()
            .ok_or_else(|| Error::ClusterUnsafe("no serving node".into()))?;
        let snapshots = (0..self.nodes.len())
            .map(|n| state.is_serving(n).then(|| self.nodes[n].read().snapshot()))
            .collect();
        Ok(ReadView {
            map: self.map.clone(),
            snapshots,
            serving,
            replicated_from,
            epoch: self.epoch(),
        })
    }

    fn writable_nodes(&self) -> Result<Vec<bool>> {
        let state = self.state.read();
        state.serving_assignment(&self.map)?;
        Ok((0..self.nodes.len()).map(|n| state.is_serving(n)).collect())
    }

    /// Routes rows to every serving replica of their bucket and stages them in
    /// each node's WOS. All rows are validated before any node is touched.
    pub fn ingest(&self, table: Table, rows: Vec<Row>) -> Result<u64> {
        if rows.is_empty() {
            return Ok(0);
        }
        let n = rows.len() as u64;
        let rows = rows
            .into_iter()
            .map(|r| crate::storage::wos::conform_row(table, r))
            .collect::<Result<Vec<_>>>()?;
        let writable = self.writable_nodes()?;
        let mut per_node: Vec<Vec<(u32, Vec<Row>)>> = vec![Vec::new(); self.nodes.len()];
        match table.segmentation_column() {
            None => {
                for (node, w) in writable.iter().enumerate() {
                    if *w {
                        per_node[node].push((0, rows.clone()));
                    }
                }
            }
            Some(col) => {
                let idx = table
                    .def()
                    .column_index(col)
                    .expect("segmentation column in schema");
                let mut buckets: BTreeMap<u32, Vec<Row>> = BTreeMap::new();
                for r in rows {
                    buckets
                        .entry(self.map.bucket_of(&r[idx]))
                        .or_default()
                        .push(r);
                }
                for (b, rs) in buckets {
                    for node in self.map.replicas(b) {
                        if writable[*node] {
                            per_node[*node].push((b, rs.clone()));
                        }
                    }
                }
            }
        }
        let mode = self.config.read().parallelism;
        par::try_map_indexed(mode, self.nodes.len(), |node| {
            let mut cat = self.nodes[node].write();
            for (seg, rs) in per_node[node].clone() {
                cat.ingest_rows(table, seg, rs)?;
            }
            Ok::<_, Error>(())
        })?;
        Ok(n)
    }

    /// Deletes matching rows on every serving node; returns the logical count.
    pub fn delete(&self, table: Table, predicates: &[ColumnPredicate]) -> Result<u64> {
        let writable = self.writable_nodes()?;
        let serving = self.state.read().serving_assignment(&self.map)?;
        let mode = self.config.read().parallelism;
        let counts = par::try_map_indexed(mode, self.nodes.len(), |node| {
            if !writable[node] {
                return Ok(BTreeMap::new());
            }
            self.nodes[node].write().delete_rows(table, predicates)
        })?;
        Ok(match table.segmentation_column() {
            None => counts
                .iter()
                .find(|c| !c.is_empty())
                .map_or(0, |c| c.values().sum()),
            Some(_) => counts
                .iter()
                .enumerate()
                .flat_map(|(node, c)| {
                    let serving = &serving;
                    c.iter()
                        .filter(move |(b, _)| serving[**b as usize] == node)
                        .map(|(_, n)| *n)
                })
                .sum(),
        })
    }

    pub fn moveout_all(&self) -> Result<()> {
        let mode = self.config.read().parallelism;
        par::try_map_indexed(mode, self.nodes.len(), |node| {
            self.nodes[node].write().moveout_all().map(|_| ())
        })?;
        Ok(())
    }

    /// Generates `table` for `gen` and ingests it in `chunk_rows`-sized pieces.
    pub fn load_generated(&self, gen: &Generator, table: Table, chunk_rows: u64) -> Result<u64> {
        let total = crate::datagen::row_count(table, gen.sf());
        let mode = self.config.read().parallelism;
        let chunk_rows = chunk_rows.max(1);
        let mut loaded = 0;
        let mut start = 0;
        while start < total {
            let end = (start + chunk_rows).min(total);
            let pieces = 16u64.min(end - start);
            let per = (end - start).div_ceil(pieces);
            let rows: Vec<Row> = par::map_indexed(mode, pieces as usize, |i| {
                let lo = start + i as u64 * per;
                let hi = (lo + per).min(end);
                gen.rows(table, lo..hi.max(lo)).collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect();
            loaded += self.ingest(table, rows)?;
            start = end;
        }
        Ok(loaded)
    }

    /// Logical row count as seen by queries.
    pub fn row_count(&self, table: Table) -> Result<u64> {
        let view = self.read_view()?;
        Ok(match table.segmentation_column() {
            None => view.snapshots[view.replicated_from]
                .as_ref()
                .unwrap()
                .count(table),
            Some(_) => view
                .serving
                .iter()
                .enumerate()
                .map(|(b, n)| {
                    view.snapshots[*n]
                        .as_ref()
                        .unwrap()
                        .table(table)
                        .live_rows(Some(b as u32))
                })
                .sum(),
        })
    }

    /// Full logical contents of `table`, read from serving replicas.
    pub fn scan_table(
        &self,
        table: Table,
        columns: &[&str],
        predicates: &[ColumnPredicate],
    ) -> Result<Vec<Row>> {
        let view = self.read_view()?;
        if table.segmentation_column().is_none() {
            let snap = view.snapshots[view.replicated_from].as_ref().unwrap();
            return Ok(snap
                .scan(table, columns, predicates, &ScanOptions::default())?
                .0);
        }
        let filters = view.segment_filters();
        let mut out = Vec::new();
        for (node, snap) in view.snapshots.iter().enumerate() {
            if let Some(s) = snap {
                let opts = ScanOptions {
                    prune: true,
                    segments: Some(filters[node].clone()),
                };
                out.extend(s.scan(table, columns, predicates, &opts)?.0);
            }
        }
        Ok(out)
    }

    /// Repopulates `node` from serving replicas and lets it serve reads again.
    /// Segments whose version already matches the source are not copied. If
    /// no replica can supply some segment, nothing is installed.
    pub fn recover_node(&self, node: NodeId) -> Result<RecoveryReport> {
        {
            let state = self.state.read();
            let s = *state
                .nodes
                .get(node)
                .ok_or_else(|| Error::InvalidParameter(format!("no node {node}")))?;
            if !s.up {
                return Err(Error::Recovery(format!("node {node} is down")));
            }
            if s.recovered {
                return Ok(RecoveryReport::default());
            }
            if !state.is_safe(&self.map) {
                return Err(Error::ClusterUnsafe(format!(
                    "cannot recover node {node}: a bucket has no serving replica"
                )));
            }
        }
        let mut work: Vec<(Table, u32, Vec<NodeId>)> = Vec::new();
        for t in Table::ALL {
            if t.segmentation_column().is_none() {
                work.push((t, 0, (0..self.nodes.len()).collect()));
            } else {
                for b in self.map.buckets_on(node) {
                    work.push((t, b, self.map.replicas(b).to_vec()));
                }
            }
        }
        let mut report = RecoveryReport::default();
        let mut staged: Vec<(Table, u32, SegmentCopy)> = Vec::new();
        for (table, seg, candidates) in work {
            let local_version = self.nodes[node].read().segment_version(table, seg);
            let mut done = false;
            for src in candidates.into_iter().filter(|s| *s != node) {
                if !self.state.read().is_serving(src) {
                    continue;
                }
                let fail = self
                    .recovery_fault
                    .lock()
                    .as_mut()
                    .is_some_and(|f| f(table, seg, src));
                if fail {
                    self.set_node_state(src, false)?;
                    report.failed_sources.push(src);
                    continue;
                }
                let copy = self.nodes[src].read().export_segment(table, seg);
                if copy.version != local_version {
                    report.segments_copied += 1;
                    report.rows_copied += copy.rows();
                    staged.push((table, seg, copy));
                }
                done = true;
                break;
            }
            if !done {
                return Err(Error::Recovery(format!(
                    "node {node}: no serving replica left for {table} segment {seg}"
                )));
            }
        }
        {
            let mut cat = self.nodes[node].write();
            for (t, s, c) in staged {
                cat.install_segment(t, s, c);
            }
        }
        self.state.write().mark_recovered(node);
        self.epoch.fetch_add(1, Ordering::SeqCst);
        Ok(report)
    }

    /// Writes topology, state, dataset and every node's ROS under `dir`.
    /// Staged WOS rows are moved out first.
    pub fn save(&self, dir: &Path) -> Result<()> {
        self.moveout_all()?;
        fs::create_dir_all(dir)?;
        let topo = self.topology();
        let mut kv = KvFile::new();
        kv.set("nodes", topo.nodes)
            .set("k_safety", topo.k_safety)
            .set("buckets", topo.buckets);
        for n in 0..self.nodes.len() {
            kv.set(&format!("node.{n}.dir"), node_dir_name(n));
        }
        kv.write(&dir.join("topology"))?;
        self.save_state(dir)?;
        let cfg = self.config();
        let mut e = KvFile::new();
        e.set("wos_budget", cfg.wos_budget)
            .set("broadcast_threshold", cfg.broadcast_threshold)
            .set("max_operator_rows", cfg.max_operator_rows)
            .set("parallelism", cfg.parallelism)
            .set("stream_order", join_u8(&cfg.stream_order));
        e.write(&dir.join("engine"))?;
        let mut d = KvFile::new();
        if let Some(ds) = self.dataset() {
            d.set("sf", ds.sf).set("seed", ds.seed.0);
        }
        let log = self.refresh.lock().clone();
        d.set("refresh.next_batch", log.next_batch);
        d.set(
            "refresh.pending",
            log.pending
                .iter()
                .map(|(a, b)| format!("{a}-{b}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        d.write(&dir.join("dataset"))?;
        for (n, node) in self.nodes.iter().enumerate() {
            persist::save_catalog(&node.read(), &dir.join(node_dir_name(n)))?;
        }
        Ok(())
    }

    /// Writes only the node state file.
    pub fn save_state(&self, dir: &Path) -> Result<()> {
        let mut kv = KvFile::new();
        for (n, s) in self.state.read().nodes.iter().enumerate() {
            let v = match (s.up, s.recovered) {
                (false, _) => "down",
                (true, true) => "up",
                (true, false) => "up-unrecovered",
            };
            kv.set(&format!("node.{n}"), v);
        }
        kv.write(&dir.join("state"))
    }

    pub fn open(dir: &Path) -> Result<Cluster> {
        let topo_kv = KvFile::read(&dir.join("topology"))
            .map_err(|e| Error::Config(format!("cannot read cluster at {}: {e}", dir.display())))?;
        let topo = Topology {
            nodes: topo_kv.require("nodes")?,
            k_safety: topo_kv.require("k_safety")?,
            buckets: topo_kv.require("buckets")?,
        };
        let mut cfg = EngineConfig::default();
        if let Ok(e) = KvFile::read(&dir.join("engine")) {
            cfg.wos_budget = e.require("wos_budget")?;
            cfg.broadcast_threshold = e.require("broadcast_threshold")?;
            cfg.max_operator_rows = e.require("max_operator_rows")?;
            cfg.parallelism = e
                .get("parallelism")
                .and_then(Parallelism::parse)
                .ok_or_else(|| Error::Config("invalid parallelism".into()))?;
            cfg.stream_order = parse_u8_list(e.get("stream_order").unwrap_or(""))?;
        }
        let cluster = Cluster::new(topo, cfg.clone())?;
        for n in 0..topo.nodes {
            let sub: PathBuf = topo_kv
                .get(&format!("node.{n}.dir"))
                .map(|d| dir.join(d))
                .unwrap_or_else(|| dir.join(node_dir_name(n)));
            if sub.exists() {
                let cat = persist::load_catalog(&sub, cfg.wos_budget)?
                    .with_parallelism(Parallelism::Sequential);
                *cluster.nodes[n].write() = cat;
            }
        }
        if let Ok(s) = KvFile::read(&dir.join("state")) {
            let mut st = cluster.state.write();
            for n in 0..topo.nodes {
                let v = s.get(&format!("node.{n}")).unwrap_or("up");
                st.nodes[n] = match v {
                    "up" => NodeState {
                        up: true,
                        recovered: true,
                    },
                    "up-unrecovered" => NodeState {
                        up: true,
                        recovered: false,
                    },
                    "down" => NodeState {
                        up: false,
                        recovered: false,
                    },
                    other => {
                        return Err(Error::Config(format!("node {n}: unknown state '{other}'")))
                    }
                };
            }
        }
        if let Ok(d) = KvFile::read(&dir.join("dataset")) {
            if d.get("sf").is_some() {
                cluster.set_dataset(Some(Dataset {
                    sf: d.require("sf")?,
                    seed: GenSeed(d.require("seed")?),
                }));
            }
            let mut log = cluster.refresh.lock();
            log.next_batch = d
                .get("refresh.next_batch")
                .map_or(Ok(0), |_| d.require("refresh.next_batch"))?;
            for p in d
                .get("refresh.pending")
                .unwrap_or("")
                .split(',')
                .filter(|p| !p.is_empty())
            {
                let (a, b) = p
                    .split_once('-')
                    .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                    .ok_or_else(|| Error::Config(format!("invalid refresh batch '{p}'")))?;
                log.pending.push_back((a, b));
            }
        }
        Ok(cluster)
    }
}

fn node_dir_name(n: usize) -> String {
    format!("node{n}")
}

fn join_u8(v: &[u8]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_u8_list(s: &str) -> Result<Vec<u8>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim()
                .parse::<u8>()
                .map_err(|_| Error::Config(format!("invalid number '{x}'")))
        })
        .collect()
}
