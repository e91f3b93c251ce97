//! Runs a [`PhysicalPlan`] against a cluster read view.
//!
//! Intermediate data is either partitioned (one row set per node), replicated
//! (the same complete set on every node) or single (complete, on the
//! coordinator). Each operator runs once per partition; partitions are
//! processed in parallel across nodes.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use crate::cluster::segmentation::key_hash;
use crate::cluster::{Cluster, ReadView};
use crate::error::{Error, Result};
use crate::exec::plan::{AggExpr, AggFunc, AggMode, ExchangeKind, JoinKind, PhysicalPlan, SortKey};
use crate::exec::result::ResultSet;
use crate::par::{self, Parallelism};
use crate::storage::ScanOptions;
use crate::types::{Row, Value};

#[derive(Clone, Debug)]
enum Dist {
    Part(Vec<Vec<Row>>),
    Repl(Arc<Vec<Row>>),
    Single(Vec<Row>),
}

impl Dist {
    fn total_rows(&self) -> usize {
        match self {
            Dist::Part(p) => p.iter().map(Vec::len).sum(),
            Dist::Repl(r) => r.len(),
            Dist::Single(r) => r.len(),
        }
    }

    fn into_whole(self) -> Vec<Row> {
        match self {
            Dist::Part(p) => p.into_iter().flatten().collect(),
            Dist::Repl(r) => Arc::try_unwrap(r).unwrap_or_else(|a| (*a).clone()),
            Dist::Single(r) => r,
        }
    }
}

/// Counters collected while running one plan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecStats {
    pub containers_scanned: u64,
    pub containers_pruned: u64,
    pub rows_scanned: u64,
    pub rows_exchanged: usize,
    /// Attempts discarded because a node stopped serving mid-query.
    pub retries: usize,
}

pub struct QueryOutput {
    pub result: ResultSet,
    /// Coordinator wall time, millisecond resolution, including the merge.
    pub seconds: f64,
    pub stats: ExecStats,
}

/// Test hook invoked once all scan fragments of an attempt have completed.
pub type FragmentProbe<'a> = &'a (dyn Fn(&Cluster) + Sync);

#[derive(Clone, Copy, Default)]
pub struct ExecOptions<'a> {
    pub after_scans: Option<FragmentProbe<'a>>,
    pub max_attempts: Option<usize>,
}

struct Ctx<'v> {
    view: &'v ReadView,
    filters: Vec<Arc<Vec<bool>>>,
    mode: Parallelism,
    max_rows: usize,
    stats: parking_lot::Mutex<ExecStats>,
}

pub fn execute(plan: &PhysicalPlan, cluster: &Cluster) -> Result<QueryOutput> {
    execute_with(plan, cluster, ExecOptions::default())
}

/// Executes `plan`. If a node used by an attempt stops serving before the
/// attempt finishes, the attempt is discarded and the query restarts on the
/// surviving replicas; once no replica is left for some bucket the query
/// fails with [`Error::ClusterUnsafe`].
pub fn execute_with(
    plan: &PhysicalPlan,
    cluster: &Cluster,
    opts: ExecOptions<'_>,
) -> Result<QueryOutput> {
    plan.validate()?;
    let start = Instant::now();
    let cfg = cluster.config();
    let mut retries = 0;
    let attempts = opts.max_attempts.unwrap_or(cluster.node_count() + 1);
    loop {
        let view = cluster.read_view()?;
        let ctx = Ctx {
            filters: view.segment_filters(),
            view: &view,
            mode: cfg.parallelism,
            max_rows: cfg.max_operator_rows,
            stats: parking_lot::Mutex::new(ExecStats::default()),
        };
        let out = run_root(plan, &ctx, cluster, &opts);
        let state = cluster.state();
        let lost =
            (0..view.node_count()).any(|n| view.snapshots[n].is_some() && !state.is_serving(n));
        if lost {
            retries += 1;
            if retries >= attempts {
                return Err(Error::ClusterUnsafe(
                    "nodes kept failing during the query".into(),
                ));
            }
            continue;
        }
        let rows = out?;
        let mut stats = ctx.stats.into_inner();
        stats.retries = retries;
        let ms = start.elapsed().as_millis() as f64;
        return Ok(QueryOutput {
            result: ResultSet::new(plan.output_names(), rows),
            seconds: ms / 1000.0,
            stats,
        });
    }
}

fn run_root(
    plan: &PhysicalPlan,
    ctx: &Ctx<'_>,
    cluster: &Cluster,
    opts: &ExecOptions<'_>,
) -> Result<Vec<Row>> {
    let PhysicalPlan::FinalMerge { input, keys, limit } = plan else {
        return Err(Error::Plan("plan root must be FinalMerge".into()));
    };
    let data = run(input, ctx)?;
    if let Some(probe) = opts.after_scans {
        probe(cluster);
    }
    let mut rows = data.into_whole();
    sort_rows(&mut rows, keys);
    if let Some(n) = limit {
        rows.truncate(*n);
    }
    Ok(rows)
}

fn check_limit(ctx: &Ctx<'_>, op: &str, rows: usize) -> Result<()> {
    if rows > ctx.max_rows {
        return Err(Error::ResourceExhausted(format!(
            "{op} produced {rows} rows, limit is {}",
            ctx.max_rows
        )));
    }
    Ok(())
}

/// Applies `f` to every partition (or once to whole data).
fn map_dist(
    ctx: &Ctx<'_>,
    d: Dist,
    f: impl Fn(Vec<Row>) -> Result<Vec<Row>> + Sync + Send,
) -> Result<Dist> {
    Ok(match d {
        Dist::Part(parts) => Dist::Part(
            par::map_vec(ctx.mode, parts, &f)
                .into_iter()
                .collect::<Result<_>>()?,
        ),
        Dist::Repl(r) => Dist::Repl(Arc::new(f(
            Arc::try_unwrap(r).unwrap_or_else(|a| (*a).clone())
        )?)),
        Dist::Single(r) => Dist::Single(f(r)?),
    })
}

fn run(plan: &PhysicalPlan, ctx: &Ctx<'_>) -> Result<Dist> {
    let out = match plan {
        PhysicalPlan::SegmentScan {
            table,
            columns,
            predicates,
        } => {
            let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
            if table.segmentation_column().is_none() {
                let snap = ctx.view.snapshots[ctx.view.replicated_from]
                    .as_ref()
                    .expect("serving node snapshot");
                let (rows, st) = snap.scan(*table, &cols, predicates, &ScanOptions::default())?;
                record_scan(ctx, &st);
                Dist::Repl(Arc::new(rows))
            } else {
                let n = ctx.view.node_count();
                let parts = par::try_map_indexed(ctx.mode, n, |node| {
                    let Some(snap) = ctx.view.snapshots[node].as_ref() else {
                        return Ok(Vec::new());
                    };
                    let opts = ScanOptions {
                        prune: true,
                        segments: Some(ctx.filters[node].clone()),
                    };
                    let (rows, st) = snap.scan(*table, &cols, predicates, &opts)?;
                    record_scan(ctx, &st);
                    Ok::<_, Error>(rows)
                })?;
                Dist::Part(parts)
            }
        }
        PhysicalPlan::Filter { input, predicate } => map_dist(ctx, run(input, ctx)?, |rows| {
            Ok(rows.into_iter().filter(|r| predicate.is_true(r)).collect())
        })?,
        PhysicalPlan::Project { input, exprs } => map_dist(ctx, run(input, ctx)?, |rows| {
            Ok(rows
                .iter()
                .map(|r| exprs.iter().map(|(e, _)| e.eval(r)).collect())
                .collect())
        })?,
        PhysicalPlan::HashJoin {
            left,
            right,
            left_keys,
            right_keys,
            kind,
            residual,
        } => {
            let l = run(left, ctx)?;
            let r = run(right, ctx)?;
            let rw = right.width();
            let join = |probe: &[Row], build: &[Row]| {
                hash_join(
                    probe,
                    build,
                    left_keys,
                    right_keys,
                    *kind,
                    residual.as_ref(),
                    rw,
                    ctx.max_rows,
                )
            };
            match (l, r) {
                (Dist::Part(lp), Dist::Part(rp)) => {
                    let pairs: Vec<(Vec<Row>, Vec<Row>)> = lp.into_iter().zip(rp).collect();
                    let parts = par::map_vec(ctx.mode, pairs, |(a, b)| join(&a, &b));
                    Dist::Part(parts.into_iter().collect::<Result<_>>()?)
                }
                (Dist::Part(lp), whole) => {
                    let b = whole.into_whole();
                    let parts = par::map_vec(ctx.mode, lp, |a| join(&a, &b));
                    Dist::Part(parts.into_iter().collect::<Result<_>>()?)
                }
                (whole, Dist::Part(rp)) => {
                    if *kind != JoinKind::Inner {
                        return Err(Error::Plan(format!(
                            "{kind:?} join needs the probe side partitioned or whole"
                        )));
                    }
                    let a = whole.into_whole();
                    let parts = par::map_vec(ctx.mode, rp, |b| join(&a, &b));
                    Dist::Part(parts.into_iter().collect::<Result<_>>()?)
                }
                (Dist::Repl(a), Dist::Repl(b)) => Dist::Repl(Arc::new(join(&a, &b)?)),
                (a, b) => Dist::Single(join(&a.into_whole(), &b.into_whole())?),
            }
        }
        PhysicalPlan::HashAggregate {
            input,
            group,
            aggs,
            mode,
        } => map_dist(ctx, run(input, ctx)?, |rows| {
            Ok(aggregate(&rows, group, aggs, *mode))
        })?,
        PhysicalPlan::Sort { input, keys } => map_dist(ctx, run(input, ctx)?, |mut rows| {
            sort_rows(&mut rows, keys);
            Ok(rows)
        })?,
        PhysicalPlan::Limit { input, n } => map_dist(ctx, run(input, ctx)?, |mut rows| {
            rows.truncate(*n);
            Ok(rows)
        })?,
        PhysicalPlan::Exchange { input, kind } => {
            let d = run(input, ctx)?;
            let moved = d.total_rows();
            ctx.stats.lock().rows_exchanged += moved;
            match kind {
                ExchangeKind::Gather => Dist::Single(d.into_whole()),
                ExchangeKind::Broadcast => Dist::Repl(Arc::new(d.into_whole())),
                ExchangeKind::Repartition(keys) => {
                    let mut parts = vec![Vec::new(); ctx.view.node_count()];
                    for r in d.into_whole() {
                        let vals: Vec<&Value> = keys.iter().map(|k| &r[*k]).collect();
                        parts[ctx.view.node_for_hash(key_hash(&vals))].push(r);
                    }
                    Dist::Part(parts)
                }
            }
        }
        PhysicalPlan::FinalMerge { .. } => {
            return Err(Error::Plan("FinalMerge below the root".into()))
        }
    };
    check_limit(ctx, plan.operator_name(), out.total_rows())?;
    Ok(out)
}

fn record_scan(ctx: &Ctx<'_>, st: &crate::storage::ScanStats) {
    let mut s = ctx.stats.lock();
    s.containers_scanned += st.containers;
    s.containers_pruned += st.containers_pruned;
    s.rows_scanned += st.rows_examined;
}

/// Sort on `keys`, then on every column ascending so equal-key rows come out
/// in a node-count-independent order.
pub fn sort_rows(rows: &mut [Row], keys: &[SortKey]) {
    rows.sort_by(|a, b| {
        for k in keys {
            let o = a[k.col].cmp(&b[k.col]);
            if o.is_ne() {
                return if k.desc { o.reverse() } else { o };
            }
        }
        a.cmp(b)
    });
}

#[allow(clippy::too_many_arguments)]
fn hash_join(
    probe: &[Row],
    build: &[Row],
    left_keys: &[usize],
    right_keys: &[usize],
    kind: JoinKind,
    residual: Option<&crate::exec::expr::Expr>,
    right_width: usize,
    max_rows: usize,
) -> Result<Vec<Row>> {
    let mut table: HashMap<Vec<&Value>, Vec<usize>> = HashMap::with_capacity(build.len());
    for (i, r) in build.iter().enumerate() {
        let key: Vec<&Value> = right_keys.iter().map(|k| &r[*k]).collect();
        if key.iter().any(|v| v.is_null()) {
            continue;
        }
        table.entry(key).or_default().push(i);
    }
    let mut out = Vec::new();
    let mut joined: Row = Vec::new();
    for l in probe {
        let key: Vec<&Value> = left_keys.iter().map(|k| &l[*k]).collect();
        let matches: &[usize] = if key.iter().any(|v| v.is_null()) {
            &[]
        } else {
            table.get(&key).map(Vec::as_slice).unwrap_or(&[])
        };
        let mut any = false;
        for &m in matches {
            let pass = match residual {
                None => true,
                Some(e) => {
                    joined.clear();
                    joined.extend_from_slice(l);
                    joined.extend_from_slice(&build[m]);
                    e.is_true(&joined)
                }
            };
            if !pass {
                continue;
            }
            any = true;
            match kind {
                JoinKind::Inner | JoinKind::Left => {
                    let mut row = l.clone();
                    row.extend_from_slice(&build[m]);
                    out.push(row);
                    if out.len() > max_rows {
                        return Err(Error::ResourceExhausted(format!(
                            "HashJoin exceeded {max_rows} rows"
                        )));
                    }
                }
                JoinKind::Semi | JoinKind::Anti => break,
            }
        }
        match kind {
            JoinKind::Left if !any => {
                let mut row = l.clone();
                row.extend(std::iter::repeat_n(Value::Null, right_width));
                out.push(row);
            }
            JoinKind::Semi if any => out.push(l.clone()),
            JoinKind::Anti if !any => out.push(l.clone()),
            _ => {}
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Acc {
    Sum(Value),
    Count(i64),
    Min(Value),
    Max(Value),
    Avg(Value, i64),
    Distinct(HashSet<Value>),
}

fn add_opt(acc: &mut Value, v: &Value) {
    if v.is_null() {
        return;
    }
    *acc = if acc.is_null() { v.clone() } else { acc.add(v) };
}

impl Acc {
    fn new(f: AggFunc) -> Acc {
        match f {
            AggFunc::Sum => Acc::Sum(Value::Null),
            AggFunc::Count | AggFunc::CountStar => Acc::Count(0),
            AggFunc::Min => Acc::Min(Value::Null),
            AggFunc::Max => Acc::Max(Value::Null),
            AggFunc::Avg => Acc::Avg(Value::Null, 0),
            AggFunc::CountDistinct => Acc::Distinct(HashSet::new()),
        }
    }

    fn update(&mut self, a: &AggExpr, row: &Row) {
        let v = match &a.arg {
            Some(e) => e.eval(row),
            None => Value::Int(1),
        };
        match self {
            Acc::Sum(s) => add_opt(s, &v),
            Acc::Count(c) => *c += !v.is_null() as i64,
            Acc::Min(m) => {
                if !v.is_null() && (m.is_null() || v < *m) {
                    *m = v
                }
            }
            Acc::Max(m) => {
                if !v.is_null() && (m.is_null() || v > *m) {
                    *m = v
                }
            }
            Acc::Avg(s, c) => {
                if !v.is_null() {
                    add_opt(s, &v);
                    *c += 1;
                }
            }
            Acc::Distinct(set) => {
                if !v.is_null() {
                    set.insert(v);
                }
            }
        }
    }

    /// Folds partial-state columns starting at `row[at]`.
    fn merge(&mut self, row: &Row, at: usize) {
        match self {
            Acc::Sum(s) => add_opt(s, &row[at]),
            Acc::Count(c) => *c += row[at].as_int().unwrap_or(0),
            Acc::Min(m) => {
                if !row[at].is_null() && (m.is_null() || row[at] < *m) {
                    *m = row[at].clone()
                }
            }
            Acc::Max(m) => {
                if !row[at].is_null() && (m.is_null() || row[at] > *m) {
                    *m = row[at].clone()
                }
            }
            Acc::Avg(s, c) => {
                add_opt(s, &row[at]);
                *c += row[at + 1].as_int().unwrap_or(0);
            }
            Acc::Distinct(_) => unreachable!("rejected by plan validation"),
        }
    }

    fn finish(self, partial: bool, out: &mut Row) {
        match self {
            Acc::Sum(s) | Acc::Min(s) | Acc::Max(s) => out.push(s),
            Acc::Count(c) => out.push(Value::Int(c)),
            Acc::Avg(s, c) if partial => {
                out.push(s);
                out.push(Value::Int(c));
            }
            Acc::Avg(s, c) => out.push(if c == 0 {
                Value::Null
            } else {
                s.div(&Value::Int(c), 2)
            }),
            Acc::Distinct(set) => out.push(Value::Int(set.len() as i64)),
        }
    }
}

fn aggregate(rows: &[Row], group: &[usize], aggs: &[AggExpr], mode: AggMode) -> Vec<Row> {
    let fresh = || aggs.iter().map(|a| Acc::new(a.func)).collect::<Vec<_>>();
    let mut groups: HashMap<Vec<Value>, Vec<Acc>> = HashMap::new();
    for r in rows {
        let key: Vec<Value> = group.iter().map(|g| r[*g].clone()).collect();
        let accs = groups.entry(key).or_insert_with(fresh);
        if mode == AggMode::Final {
            let mut at = group.len();
            for (acc, a) in accs.iter_mut().zip(aggs) {
                acc.merge(r, at);
                at += a.func.state_width();
            }
        } else {
            for (acc, a) in accs.iter_mut().zip(aggs) {
                acc.update(a, r);
            }
        }
    }
    if group.is_empty() && groups.is_empty() {
        groups.insert(Vec::new(), fresh());
    }
    groups
        .into_iter()
        .map(|(mut key, accs)| {
            for acc in accs {
                acc.finish(mode == AggMode::Partial, &mut key);
            }
            key
        })
        .collect()
}
