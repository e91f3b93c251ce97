use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::datagen::Table;
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::storage::container::RosContainer;
use crate::storage::predicate::ColumnPredicate;
use crate::storage::wos::{self, WosBatch, WosBuffer, DEFAULT_WOS_BUDGET};
use crate::types::{Row, Value};

/// Maximum values per column chunk.
pub const CHUNK_ROWS: usize = 64 * 1024;

/// One table's containers and staging buffer.
#[derive(Clone, Debug)]
pub struct TableData {
    pub containers: Vec<Arc<RosContainer>>,
    pub wos: WosBuffer,
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Skip containers whose statistics exclude a predicate.
    pub prune: bool,
    /// Segments to read, indexed by segment id; `None` reads all.
    pub segments: Option<Arc<Vec<bool>>>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            prune: true,
            segments: None,
        }
    }
}

impl ScanOptions {
    fn wants(&self, segment: u32) -> bool {
        self.segments
            .as_ref()
            .is_none_or(|s| s.get(segment as usize).copied().unwrap_or(false))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanStats {
    pub containers: u64,
    pub containers_pruned: u64,
    pub rows_examined: u64,
    pub rows_returned: u64,
}

impl ScanStats {
    pub fn merge(&mut self, o: &ScanStats) {
        self.containers += o.containers;
        self.containers_pruned += o.containers_pruned;
        self.rows_examined += o.rows_examined;
        self.rows_returned += o.rows_returned;
    }
}

/// Wholesale copy of a (table, segment) used by recovery.
#[derive(Clone, Debug)]
pub struct SegmentCopy {
    pub version: u64,
    pub containers: Vec<Arc<RosContainer>>,
    pub wos: Vec<Arc<WosBatch>>,
}

impl SegmentCopy {
    pub fn rows(&self) -> u64 {
        self.containers.iter().map(|c| c.live_rows()).sum::<u64>()
            + self.wos.iter().map(|b| b.rows.len() as u64).sum::<u64>()
    }
}

/// Read-only view of every table at one instant.
#[derive(Clone, Debug)]
pub struct CatalogSnapshot {
    tables: Vec<Arc<TableData>>,
}

impl CatalogSnapshot {
    pub fn table(&self, table: Table) -> &TableData {
        &self.tables[table.index()]
    }

    pub fn scan(
        &self,
        table: Table,
        columns: &[&str],
        predicates: &[ColumnPredicate],
        opts: &ScanOptions,
    ) -> Result<(Vec<Row>, ScanStats)> {
        let proj = resolve(table, columns)?;
        let preds = predicates
            .iter()
            .map(|p| Ok((resolve(table, &[p.column.as_str()])?[0], p)))
            .collect::<Result<Vec<_>>>()?;
        self.table(table).scan(&proj, &preds, opts)
    }

    pub fn count(&self, table: Table) -> u64 {
        self.table(table).live_rows(None)
    }
}

fn resolve(table: Table, columns: &[&str]) -> Result<Vec<usize>> {
    let def = table.def();
    columns
        .iter()
        .map(|c| {
            def.column_index(c)
                .ok_or_else(|| Error::UnknownColumn(format!("{table}.{c}")))
        })
        .collect()
}

fn matches_all(row: &Row, preds: &[(usize, &ColumnPredicate)]) -> bool {
    preds.iter().all(|(i, p)| p.matches(&row[*i]))
}

impl TableData {
    fn new(table: Table, budget: usize) -> TableData {
        TableData {
            containers: Vec::new(),
            wos: WosBuffer::new(table, budget),
        }
    }

    pub fn live_rows(&self, segment: Option<u32>) -> u64 {
        let want = |s: u32| segment.is_none_or(|x| x == s);
        let ros: u64 = self
            .containers
            .iter()
            .filter(|c| want(c.segment))
            .map(|c| c.live_rows())
            .sum();
        let wos: u64 = self
            .wos
            .batches
            .iter()
            .filter(|b| want(b.segment))
            .map(|b| b.rows.len() as u64)
            .sum();
        ros + wos
    }

    pub fn ros_bytes(&self) -> usize {
        self.containers.iter().map(|c| c.encoded_bytes()).sum()
    }

    fn scan(
        &self,
        proj: &[usize],
        preds: &[(usize, &ColumnPredicate)],
        opts: &ScanOptions,
    ) -> Result<(Vec<Row>, ScanStats)> {
        let mut out = Vec::new();
        let mut stats = ScanStats::default();
        for c in &self.containers {
            if !opts.wants(c.segment) {
                continue;
            }
            stats.containers += 1;
            if c.live_rows() == 0 {
                stats.containers_pruned += 1;
                continue;
            }
            if opts.prune
                && preds.iter().any(|(i, p)| match &c.chunks[*i].min_max {
                    Some((lo, hi)) => !p.may_match(lo, hi),
                    None => true,
                })
            {
                stats.containers_pruned += 1;
                continue;
            }
            scan_container(c, proj, preds, &mut out, &mut stats)?;
        }
        for b in &self.wos.batches {
            if !opts.wants(b.segment) {
                continue;
            }
            for r in &b.rows {
                stats.rows_examined += 1;
                if matches_all(r, preds) {
                    out.push(proj.iter().map(|&i| r[i].clone()).collect());
                }
            }
        }
        stats.rows_returned = out.len() as u64;
        Ok((out, stats))
    }
}

fn scan_container(
    c: &RosContainer,
    proj: &[usize],
    preds: &[(usize, &ColumnPredicate)],
    out: &mut Vec<Row>,
    stats: &mut ScanStats,
) -> Result<()> {
    let n = c.row_count as usize;
    stats.rows_examined += n as u64;
    let mut decoded: HashMap<usize, Vec<Value>> = HashMap::new();
    let mut keep: Vec<bool> = (0..n)
        .map(|i| !c.delete_vector.is_deleted(i as u64))
        .collect();
    for (col, p) in preds {
        if !decoded.contains_key(col) {
            decoded.insert(*col, c.decode_column(*col)?);
        }
        let vals = &decoded[col];
        for (k, v) in keep.iter_mut().zip(vals) {
            if *k && !p.matches(v) {
                *k = false;
            }
        }
    }
    if !keep.iter().any(|k| *k) {
        return Ok(());
    }
    for &col in proj {
        if let std::collections::hash_map::Entry::Vacant(e) = decoded.entry(col) {
            e.insert(c.decode_column(col)?);
        }
    }
    let cols: Vec<&Vec<Value>> = proj.iter().map(|c| &decoded[c]).collect();
    for (i, _) in keep.iter().enumerate().filter(|(_, k)| **k) {
        out.push(cols.iter().map(|v| v[i].clone()).collect());
    }
    Ok(())
}

/// Storage for one node: every table's ROS containers and WOS.
#[derive(Clone, Debug)]
pub struct TableCatalog {
    tables: Vec<Arc<TableData>>,
    budget: usize,
    next_id: u64,
    versions: BTreeMap<(Table, u32), u64>,
    mode: Parallelism,
}

impl Default for TableCatalog {
    fn default() -> Self {
        Self::new(DEFAULT_WOS_BUDGET)
    }
}

impl TableCatalog {
    pub fn new(wos_budget: usize) -> TableCatalog {
        TableCatalog {
            tables: Table::ALL
                .iter()
                .map(|t| Arc::new(TableData::new(*t, wos_budget)))
                .collect(),
            budget: wos_budget,
            next_id: 1,
            versions: BTreeMap::new(),
            mode: Parallelism::default(),
        }
    }

    pub fn with_parallelism(mut self, mode: Parallelism) -> TableCatalog {
        self.mode = mode;
        self
    }

    pub fn wos_budget(&self) -> usize {
        self.budget
    }

    pub fn set_wos_budget(&mut self, budget: usize) {
        self.budget = budget;
        for t in &mut self.tables {
            Arc::make_mut(t).wos.byte_budget = budget;
        }
    }

    pub fn snapshot(&self) -> CatalogSnapshot {
        CatalogSnapshot {
            tables: self.tables.clone(),
        }
    }

    pub fn table(&self, table: Table) -> &TableData {
        &self.tables[table.index()]
    }

    fn table_mut(&mut self, table: Table) -> &mut TableData {
        Arc::make_mut(&mut self.tables[table.index()])
    }

    fn bump(&mut self, table: Table, segment: u32) {
        *self.versions.entry((table, segment)).or_insert(0) += 1;
    }

    pub fn segment_version(&self, table: Table, segment: u32) -> u64 {
        self.versions.get(&(table, segment)).copied().unwrap_or(0)
    }

    pub fn versions(&self) -> &BTreeMap<(Table, u32), u64> {
        &self.versions
    }

    /// Stages `rows` for `segment`, moving the table out when the WOS exceeds
    /// its budget. Rows are schema-checked before anything is staged.
    pub fn ingest_rows(&mut self, table: Table, segment: u32, rows: Vec<Row>) -> Result<u64> {
        if self.budget == 0 {
            return Err(Error::Config("WOS byte budget must be positive".into()));
        }
        if rows.is_empty() {
            return Ok(0);
        }
        let rows = rows
            .into_iter()
            .map(|r| wos::conform_row(table, r))
            .collect::<Result<Vec<_>>>()?;
        let n = rows.len() as u64;
        self.table_mut(table).wos.push(segment, rows);
        self.bump(table, segment);
        if self.table(table).wos.over_budget() {
            self.moveout(table)?;
        }
        Ok(n)
    }

    /// Encodes all WOS rows of `table` into new containers, one or more per
    /// segment. Nothing changes if encoding fails.
    pub fn moveout(&mut self, table: Table) -> Result<usize> {
        let data = self.table(table);
        if data.wos.is_empty() {
            return Ok(0);
        }
        let mut by_segment: BTreeMap<u32, Vec<Row>> = BTreeMap::new();
        for b in &data.wos.batches {
            by_segment
                .entry(b.segment)
                .or_default()
                .extend(b.rows.iter().cloned());
        }
        let sort_idx: Vec<usize> = table
            .sort_columns()
            .iter()
            .map(|c| table.def().column_index(c).expect("sort column in schema"))
            .collect();
        let mut jobs = Vec::new();
        for (segment, mut rows) in by_segment {
            rows.sort_by(|a, b| {
                sort_idx
                    .iter()
                    .map(|&i| a[i].cmp(&b[i]))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let mut rest = rows;
            while !rest.is_empty() {
                let tail = rest.split_off(rest.len().min(CHUNK_ROWS));
                jobs.push((segment, self.next_id + jobs.len() as u64, rest));
                rest = tail;
            }
        }
        let built = par::try_map_indexed(self.mode, jobs.len(), |i| {
            let (segment, id, rows) = &jobs[i];
            RosContainer::build(table, *segment, *id, rows)
        })?;
        let n = built.len();
        self.next_id += n as u64;
        let t = self.table_mut(table);
        t.containers.extend(built.into_iter().map(Arc::new));
        t.wos.clear();
        Ok(n)
    }

    pub fn moveout_all(&mut self) -> Result<usize> {
        let mut n = 0;
        for t in Table::ALL {
            n += self.moveout(t)?;
        }
        Ok(n)
    }

    pub fn scan(
        &self,
        table: Table,
        columns: &[&str],
        predicates: &[ColumnPredicate],
        opts: &ScanOptions,
    ) -> Result<(Vec<Row>, ScanStats)> {
        self.snapshot().scan(table, columns, predicates, opts)
    }

    /// Marks every live row matching all `predicates` as deleted. Returns the
    /// number of deleted rows per segment.
    pub fn delete_rows(
        &mut self,
        table: Table,
        predicates: &[ColumnPredicate],
    ) -> Result<BTreeMap<u32, u64>> {
        let preds: Vec<(usize, &ColumnPredicate)> = predicates
            .iter()
            .map(|p| Ok((resolve(table, &[p.column.as_str()])?[0], p)))
            .collect::<Result<_>>()?;
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        let data = self.table(table);
        let mut new_containers = data.containers.clone();
        for c in new_containers.iter_mut() {
            if c.live_rows() == 0
                || preds.iter().any(|(i, p)| match &c.chunks[*i].min_max {
                    Some((lo, hi)) => !p.may_match(lo, hi),
                    None => true,
                })
            {
                continue;
            }
            let cols: HashMap<usize, Vec<Value>> = preds
                .iter()
                .map(|(i, _)| Ok((*i, c.decode_column(*i)?)))
                .collect::<Result<_>>()?;
            let mut dv = (*c.delete_vector).clone();
            let mut hit = 0;
            for pos in 0..c.row_count as usize {
                if preds.iter().all(|(i, p)| p.matches(&cols[i][pos])) && dv.mark(pos as u64) {
                    hit += 1;
                }
            }
            if hit > 0 {
                *counts.entry(c.segment).or_insert(0) += hit;
                *c = Arc::new(c.with_deletes(dv));
            }
        }
        let mut new_batches = Vec::with_capacity(data.wos.batches.len());
        for b in &data.wos.batches {
            let before = b.rows.len();
            if !b.rows.iter().any(|r| matches_all(r, &preds)) {
                new_batches.push(b.clone());
                continue;
            }
            let rows: Vec<Row> = b
                .rows
                .iter()
                .filter(|r| !matches_all(r, &preds))
                .cloned()
                .collect();
            *counts.entry(b.segment).or_insert(0) += (before - rows.len()) as u64;
            if !rows.is_empty() {
                let bytes = rows.iter().map(wos::row_bytes).sum();
                new_batches.push(Arc::new(WosBatch {
                    segment: b.segment,
                    rows,
                    bytes,
                }));
            }
        }
        if counts.is_empty() {
            return Ok(counts);
        }
        let t = self.table_mut(table);
        t.containers = new_containers;
        t.wos.batches = new_batches;
        t.wos.bytes = t.wos.batches.iter().map(|b| b.bytes).sum();
        for s in counts.keys().copied().collect::<Vec<_>>() {
            self.bump(table, s);
        }
        Ok(counts)
    }

    /// Segments holding any data or history for `table`.
    pub fn segments(&self, table: Table) -> Vec<u32> {
        let mut s: Vec<u32> = self
            .versions
            .keys()
            .filter(|(t, _)| *t == table)
            .map(|(_, s)| *s)
            .collect();
        s.sort_unstable();
        s
    }

    pub fn export_segment(&self, table: Table, segment: u32) -> SegmentCopy {
        let data = self.table(table);
        SegmentCopy {
            version: self.segment_version(table, segment),
            containers: data
                .containers
                .iter()
                .filter(|c| c.segment == segment)
                .cloned()
                .collect(),
            wos: data
                .wos
                .batches
                .iter()
                .filter(|b| b.segment == segment)
                .cloned()
                .collect(),
        }
    }

    /// Replaces everything stored for (table, segment) with `copy`.
    pub fn install_segment(&mut self, table: Table, segment: u32, copy: SegmentCopy) {
        let t = self.table_mut(table);
        t.containers.retain(|c| c.segment != segment);
        t.containers.extend(copy.containers);
        t.wos.retain_segments(|s| s != segment);
        t.wos.bytes += copy.wos.iter().map(|b| b.bytes).sum::<usize>();
        t.wos.batches.extend(copy.wos);
        self.versions.insert((table, segment), copy.version);
    }

    /// Drops all data, as after a disk loss.
    pub fn wipe(&mut self) {
        let budget = self.budget;
        let mode = self.mode;
        *self = TableCatalog::new(budget).with_parallelism(mode);
    }

    pub fn ros_bytes(&self, table: Table) -> usize {
        self.table(table).ros_bytes()
    }

    pub(crate) fn restore(
        &mut self,
        containers: Vec<RosContainer>,
        versions: BTreeMap<(Table, u32), u64>,
    ) {
        for c in containers {
            self.next_id = self.next_id.max(c.id + 1);
            let t = c.table;
            self.table_mut(t).containers.push(Arc::new(c));
        }
        for t in &mut self.tables {
            Arc::make_mut(t)
                .containers
                .sort_by_key(|c| (c.segment, c.id));
        }
        self.versions = versions;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{GenSeed, Generator, ScaleFactor};
    use crate::storage::encoding::Encoding;

    fn sorted(mut rows: Vec<Row>) -> Vec<Row> {
        rows.sort();
        rows
    }

    fn all_columns(t: Table) -> Vec<&'static str> {
        t.def().columns.iter().map(|c| c.name).collect()
    }

    #[test]
    fn empty_ingest_is_identity() {
        let mut c = TableCatalog::default();
        assert_eq!(c.ingest_rows(Table::Nation, 0, vec![]).unwrap(), 0);
        assert!(c.versions().is_empty());
        assert_eq!(c.snapshot().count(Table::Nation), 0);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let mut c = TableCatalog::new(0);
        let g = Generator::new(ScaleFactor::new(0.001).unwrap(), GenSeed(1));
        assert!(matches!(
            c.ingest_rows(Table::Region, 0, vec![g.region(0).to_row()]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn moveout_preserves_contents_and_budget_triggers_it() {
        let g = Generator::new(ScaleFactor::new(0.001).unwrap(), GenSeed(3));
        let rows = g.table_rows(Table::Orders, Parallelism::Sequential);
        let mut c = TableCatalog::new(16 << 10);
        for (i, chunk) in rows.chunks(100).enumerate() {
            c.ingest_rows(Table::Orders, (i % 3) as u32, chunk.to_vec())
                .unwrap();
        }
        assert!(
            !c.table(Table::Orders).containers.is_empty(),
            "budget should trigger moveout"
        );
        let cols = all_columns(Table::Orders);
        let before = sorted(
            c.scan(Table::Orders, &cols, &[], &ScanOptions::default())
                .unwrap()
                .0,
        );
        c.moveout(Table::Orders).unwrap();
        assert!(c.table(Table::Orders).wos.is_empty());
        let after = sorted(
            c.scan(Table::Orders, &cols, &[], &ScanOptions::default())
                .unwrap()
                .0,
        );
        assert_eq!(before, after);
        assert_eq!(after, sorted(rows));
    }

    #[test]
    fn constant_column_becomes_single_run() {
        let mut c = TableCatalog::default();
        let rows: Vec<Row> = (0..1000)
            .map(|i| {
                vec![
                    Value::Int(i),
                    Value::str("SAME"),
                    Value::Int(1),
                    Value::str("x"),
                ]
            })
            .collect();
        c.ingest_rows(Table::Nation, 0, rows).unwrap();
        c.moveout(Table::Nation).unwrap();
        let ch = &c.table(Table::Nation).containers[0].chunks[1];
        assert_eq!(ch.encoding, Encoding::RunLength);
        assert_eq!(ch.bytes[0], 1, "one run");
    }

    #[test]
    fn pruning_skips_containers_without_changing_results() {
        let g = Generator::new(ScaleFactor::new(0.01).unwrap(), GenSeed(5));
        let rows = g.table_rows(Table::Orders, Parallelism::Sequential);
        let mut c = TableCatalog::default();
        for part in rows.chunks(1000) {
            c.ingest_rows(Table::Orders, 0, part.to_vec()).unwrap();
            c.moveout(Table::Orders).unwrap();
        }
        let p = [ColumnPredicate::between(
            "o_orderkey",
            Value::Int(10),
            Value::Int(20),
        )];
        let (a, sa) = c
            .scan(Table::Orders, &["o_orderkey"], &p, &ScanOptions::default())
            .unwrap();
        let no_prune = ScanOptions {
            prune: false,
            ..Default::default()
        };
        let (b, sb) = c
            .scan(Table::Orders, &["o_orderkey"], &p, &no_prune)
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 11);
        assert!(sa.containers_pruned > 0);
        assert!(sa.rows_examined < sb.rows_examined);
    }

    #[test]
    fn deletes_hide_rows_in_ros_and_wos() {
        let g = Generator::new(ScaleFactor::new(0.001).unwrap(), GenSeed(9));
        let rows = g.table_rows(Table::Orders, Parallelism::Sequential);
        let n = rows.len() as u64;
        let mut c = TableCatalog::default();
        c.ingest_rows(Table::Orders, 0, rows[..1000].to_vec())
            .unwrap();
        c.moveout(Table::Orders).unwrap();
        c.ingest_rows(Table::Orders, 1, rows[1000..].to_vec())
            .unwrap();
        let snap = c.snapshot();
        let keys: Vec<Value> = (995..1005)
            .map(Value::Int)
            .chain([Value::Int(999_999)])
            .collect();
        let d = c
            .delete_rows(
                Table::Orders,
                &[ColumnPredicate::in_list("o_orderkey", keys)],
            )
            .unwrap();
        assert_eq!(d.values().sum::<u64>(), 10);
        assert_eq!(d.get(&0), Some(&6));
        assert_eq!(c.snapshot().count(Table::Orders), n - 10);
        assert_eq!(snap.count(Table::Orders), n, "older snapshot is unaffected");
        let none = c
            .delete_rows(
                Table::Orders,
                &[ColumnPredicate::eq("o_orderkey", Value::Int(-1))],
            )
            .unwrap();
        assert!(none.is_empty());
        c.delete_rows(Table::Orders, &[]).unwrap();
        assert_eq!(c.snapshot().count(Table::Orders), 0);
        let (r, _) = c
            .scan(Table::Orders, &["o_orderkey"], &[], &ScanOptions::default())
            .unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn segment_filter_and_unknown_column() {
        let mut c = TableCatalog::default();
        let g = Generator::new(ScaleFactor::new(0.001).unwrap(), GenSeed(1));
        c.ingest_rows(Table::Region, 0, vec![g.region(0).to_row()])
            .unwrap();
        c.ingest_rows(Table::Region, 1, vec![g.region(1).to_row()])
            .unwrap();
        let opts = ScanOptions {
            segments: Some(Arc::new(vec![false, true])),
            ..Default::default()
        };
        let (r, _) = c.scan(Table::Region, &["r_regionkey"], &[], &opts).unwrap();
        assert_eq!(r, vec![vec![Value::Int(1)]]);
        assert!(matches!(
            c.scan(Table::Region, &["nope"], &[], &ScanOptions::default()),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn export_install_round_trip() {
        let g = Generator::new(ScaleFactor::new(0.001).unwrap(), GenSeed(2));
        let mut a = TableCatalog::default();
        a.ingest_rows(
            Table::Customer,
            4,
            g.table_rows(Table::Customer, Parallelism::Sequential),
        )
        .unwrap();
        a.moveout(Table::Customer).unwrap();
        let mut b = TableCatalog::default();
        b.install_segment(Table::Customer, 4, a.export_segment(Table::Customer, 4));
        assert_eq!(
            b.segment_version(Table::Customer, 4),
            a.segment_version(Table::Customer, 4)
        );
        assert_eq!(
            b.snapshot().count(Table::Customer),
            a.snapshot().count(Table::Customer)
        );
    }
}
