//! Relational plan builder used by the query definitions.
//!
//! A [`Rel`] tracks the plan built so far, its output column names and how
//! its rows are distributed, and picks exchange placement for joins and
//! aggregates.

use crate::datagen::{row_count, ScaleFactor, Table};
use crate::error::{Error, Result};
use crate::exec::expr::{lookup, Expr};
use crate::exec::plan::{AggExpr, AggFunc, AggMode, ExchangeKind, JoinKind, PhysicalPlan, SortKey};
use crate::storage::ColumnPredicate;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelDist {
    /// Each row lives on exactly one node, placed by hashing any one of the
    /// listed column tuples.
    Partitioned(Vec<Vec<String>>),
    /// Complete copy on every node.
    Replicated,
    /// Complete, on the coordinator.
    Single,
}

impl RelDist {
    fn is_whole(&self) -> bool {
        !matches!(self, RelDist::Partitioned(_))
    }
}

/// Inputs that influence plan shape.
#[derive(Clone, Copy, Debug)]
pub struct PlanContext {
    pub sf: ScaleFactor,
    /// Build sides estimated at or below this many rows are broadcast.
    pub broadcast_threshold: u64,
}

impl PlanContext {
    pub fn new(sf: ScaleFactor, broadcast_threshold: u64) -> PlanContext {
        PlanContext {
            sf,
            broadcast_threshold,
        }
    }

    pub fn scan(&self, table: Table, columns: &[&str], predicates: Vec<ColumnPredicate>) -> Rel {
        let dist = match table.segmentation_column() {
            Some(c) => RelDist::Partitioned(vec![vec![c.to_string()]]),
            None => RelDist::Replicated,
        };
        Rel {
            plan: PhysicalPlan::SegmentScan {
                table,
                columns: columns.iter().map(|c| c.to_string()).collect(),
                predicates,
            },
            names: columns.iter().map(|c| c.to_string()).collect(),
            dist,
            est_rows: row_count(table, self.sf),
            threshold: self.broadcast_threshold,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rel {
    pub plan: PhysicalPlan,
    pub names: Vec<String>,
    pub dist: RelDist,
    pub est_rows: u64,
    threshold: u64,
}

fn boxed(p: PhysicalPlan) -> Box<PhysicalPlan> {
    Box::new(p)
}

impl Rel {
    fn idx(&self, name: &str) -> Result<usize> {
        lookup(&self.names, name)
    }

    fn with(self, plan: PhysicalPlan, names: Vec<String>, dist: RelDist, est_rows: u64) -> Rel {
        Rel {
            plan,
            names,
            dist,
            est_rows,
            threshold: self.threshold,
        }
    }

    fn exchange(self, kind: ExchangeKind) -> Rel {
        let dist = match &kind {
            ExchangeKind::Gather => RelDist::Single,
            ExchangeKind::Broadcast => RelDist::Replicated,
            ExchangeKind::Repartition(k) => {
                RelDist::Partitioned(vec![k.iter().map(|i| self.names[*i].clone()).collect()])
            }
        };
        let names = self.names.clone();
        let est = self.est_rows;
        let plan = PhysicalPlan::Exchange {
            input: boxed(self.plan.clone()),
            kind,
        };
        self.with(plan, names, dist, est)
    }

    fn repartition(self, cols: &[String]) -> Result<Rel> {
        if let RelDist::Partitioned(alts) = &self.dist {
            if alts.iter().any(|a| a.as_slice() == cols) {
                return Ok(self);
            }
        }
        let keys = cols
            .iter()
            .map(|c| self.idx(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.exchange(ExchangeKind::Repartition(keys)))
    }

    pub fn filter(self, predicate: Expr) -> Result<Rel> {
        let predicate = predicate.resolve(&self.names)?;
        let (names, dist, est) = (self.names.clone(), self.dist.clone(), self.est_rows);
        let plan = PhysicalPlan::Filter {
            input: boxed(self.plan.clone()),
            predicate,
        };
        Ok(self.with(plan, names, dist, est))
    }

    /// Computes `exprs`; plain column references carry partitioning through
    /// under their new names.
    pub fn project(self, exprs: Vec<(Expr, &str)>) -> Result<Rel> {
        let names: Vec<String> = exprs.iter().map(|(_, n)| n.to_string()).collect();
        let dist = match &self.dist {
            RelDist::Partitioned(alts) => {
                let rename = |c: &String| {
                    exprs.iter().find_map(|(e, n)| match e {
                        Expr::Named(src) if src == c => Some(n.to_string()),
                        _ => None,
                    })
                };
                let kept: Vec<Vec<String>> = alts
                    .iter()
                    .filter_map(|a| a.iter().map(rename).collect::<Option<Vec<_>>>())
                    .collect();
                RelDist::Partitioned(kept)
            }
            d => d.clone(),
        };
        let resolved = exprs
            .into_iter()
            .map(|(e, n)| Ok((e.resolve(&self.names)?, n.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let est = self.est_rows;
        let plan = PhysicalPlan::Project {
            input: boxed(self.plan.clone()),
            exprs: resolved,
        };
        Ok(self.with(plan, names, dist, est))
    }

    /// Keeps the listed columns, optionally renamed with `old AS new`
    /// pairs where `new` is non-empty.
    pub fn select(self, cols: &[&str]) -> Result<Rel> {
        let exprs = cols
            .iter()
            .map(|c| match c.split_once(" AS ") {
                Some((old, new)) => (Expr::Named(old.to_string()), new),
                None => (Expr::Named(c.to_string()), *c),
            })
            .collect();
        self.project(exprs)
    }

    pub fn join(self, right: Rel, on: &[(&str, &str)], kind: JoinKind) -> Result<Rel> {
        self.join_residual(right, on, kind, None)
    }

    /// Hash join where `self` probes and `right` is built. `residual` is
    /// evaluated over the concatenated left and right columns.
    pub fn join_residual(
        self,
        right: Rel,
        on: &[(&str, &str)],
        kind: JoinKind,
        residual: Option<Expr>,
    ) -> Result<Rel> {
        let lcols: Vec<String> = on.iter().map(|(l, _)| l.to_string()).collect();
        let rcols: Vec<String> = on.iter().map(|(_, r)| r.to_string()).collect();
        let colocated = match (&self.dist, &right.dist) {
            (RelDist::Partitioned(la), RelDist::Partitioned(ra)) => la.iter().any(|a| {
                ra.iter().any(|b| {
                    a.len() == b.len()
                        && !a.is_empty()
                        && a.iter()
                            .zip(b)
                            .all(|(x, y)| (0..on.len()).any(|p| lcols[p] == *x && rcols[p] == *y))
                })
            }),
            _ => false,
        };
        let (left, right) = if colocated || right.dist.is_whole() {
            (self, right)
        } else if on.is_empty() || right.est_rows <= self.threshold {
            (self, right.exchange(ExchangeKind::Broadcast))
        } else if self.dist.is_whole() && kind == JoinKind::Inner {
            (self, right)
        } else {
            (self.repartition(&lcols)?, right.repartition(&rcols)?)
        };
        let left_keys = lcols
            .iter()
            .map(|c| left.idx(c))
            .collect::<Result<Vec<_>>>()?;
        let right_keys = rcols
            .iter()
            .map(|c| right.idx(c))
            .collect::<Result<Vec<_>>>()?;
        let mut names = left.names.clone();
        if matches!(kind, JoinKind::Inner | JoinKind::Left) {
            names.extend(right.names.iter().cloned());
        }
        let residual = match residual {
            Some(e) => {
                let mut all = left.names.clone();
                all.extend(right.names.iter().cloned());
                Some(e.resolve(&all)?)
            }
            None => None,
        };
        let dist = match (&left.dist, &right.dist) {
            (RelDist::Partitioned(la), RelDist::Partitioned(ra)) if kind == JoinKind::Inner => {
                RelDist::Partitioned(la.iter().chain(ra).cloned().collect())
            }
            (RelDist::Partitioned(la), _) => RelDist::Partitioned(la.clone()),
            (_, RelDist::Partitioned(ra)) => RelDist::Partitioned(ra.clone()),
            (RelDist::Replicated, RelDist::Replicated) => RelDist::Replicated,
            _ => RelDist::Single,
        };
        let est = match kind {
            JoinKind::Inner if on.is_empty() => left.est_rows.saturating_mul(right.est_rows.max(1)),
            JoinKind::Inner => left.est_rows.max(right.est_rows),
            _ => left.est_rows,
        };
        let plan = PhysicalPlan::HashJoin {
            left: boxed(left.plan.clone()),
            right: boxed(right.plan),
            left_keys,
            right_keys,
            kind,
            residual,
        };
        Ok(left.with(plan, names, dist, est))
    }

    /// Grouped aggregation. Output columns are the group columns followed by
    /// the aggregates.
    pub fn aggregate(self, group: &[&str], aggs: Vec<AggExpr>) -> Result<Rel> {
        let gnames: Vec<String> = group.iter().map(|g| g.to_string()).collect();
        let mut names = gnames.clone();
        names.extend(aggs.iter().map(|a| a.name.clone()));
        let est = if group.is_empty() { 1 } else { self.est_rows };
        let distinct = aggs.iter().any(|a| a.func == AggFunc::CountDistinct);
        let local = match &self.dist {
            RelDist::Partitioned(alts) => alts
                .iter()
                .find(|a| a.iter().all(|c| gnames.contains(c)))
                .map(|a| RelDist::Partitioned(vec![a.clone()])),
            d => Some(d.clone()),
        };
        let complete = |rel: Rel, dist: RelDist| -> Result<Rel> {
            let group_idx = gnames
                .iter()
                .map(|g| rel.idx(g))
                .collect::<Result<Vec<_>>>()?;
            let aggs = resolve_aggs(&aggs, &rel.names)?;
            let plan = PhysicalPlan::HashAggregate {
                input: boxed(rel.plan.clone()),
                group: group_idx,
                aggs,
                mode: AggMode::Complete,
            };
            Ok(rel.with(plan, names.clone(), dist, est))
        };
        if let Some(dist) = local {
            return complete(self, dist);
        }
        if distinct {
            return if gnames.is_empty() {
                complete(self.exchange(ExchangeKind::Gather), RelDist::Single)
            } else {
                let rel = self.repartition(&gnames)?;
                complete(rel, RelDist::Partitioned(vec![gnames.clone()]))
            };
        }
        let group_idx = gnames
            .iter()
            .map(|g| self.idx(g))
            .collect::<Result<Vec<_>>>()?;
        let resolved = resolve_aggs(&aggs, &self.names)?;
        let partial = PhysicalPlan::HashAggregate {
            input: boxed(self.plan.clone()),
            group: group_idx,
            aggs: resolved.clone(),
            mode: AggMode::Partial,
        };
        let pnames = partial.output_names();
        let partial = self.with(partial, pnames, RelDist::Single, est);
        let (moved, dist) = if gnames.is_empty() {
            (partial.exchange(ExchangeKind::Gather), RelDist::Single)
        } else {
            let keys: Vec<usize> = (0..gnames.len()).collect();
            (
                partial.exchange(ExchangeKind::Repartition(keys)),
                RelDist::Partitioned(vec![gnames.clone()]),
            )
        };
        let plan = PhysicalPlan::HashAggregate {
            input: boxed(moved.plan.clone()),
            group: (0..gnames.len()).collect(),
            aggs: resolved,
            mode: AggMode::Final,
        };
        Ok(moved.with(plan, names, dist, est))
    }

    fn sort_keys(&self, order: &[(&str, bool)]) -> Result<Vec<SortKey>> {
        order
            .iter()
            .map(|(c, desc)| {
                Ok(SortKey {
                    col: self.idx(c)?,
                    desc: *desc,
                })
            })
            .collect()
    }

    /// Closes the plan with the coordinator merge. `order` lists
    /// `(column, descending)`; with a limit each node pre-sorts and keeps
    /// its own top rows.
    pub fn finish(self, order: &[(&str, bool)], limit: Option<usize>) -> Result<PhysicalPlan> {
        let keys = self.sort_keys(order)?;
        let mut input = self.plan.clone();
        if let (Some(n), RelDist::Partitioned(_)) = (limit, &self.dist) {
            input = PhysicalPlan::Limit {
                input: boxed(PhysicalPlan::Sort {
                    input: boxed(input),
                    keys: keys.clone(),
                }),
                n,
            };
        }
        let plan = PhysicalPlan::FinalMerge {
            input: boxed(input),
            keys,
            limit,
        };
        plan.validate()?;
        Ok(plan)
    }
}

fn resolve_aggs(aggs: &[AggExpr], names: &[String]) -> Result<Vec<AggExpr>> {
    aggs.iter()
        .map(|a| {
            Ok(AggExpr {
                func: a.func,
                arg: a.arg.as_ref().map(|e| e.resolve(names)).transpose()?,
                name: a.name.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e: Error| Error::Plan(format!("aggregate: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::expr::col;
    use crate::exec::plan::sum;

    fn ctx(threshold: u64) -> PlanContext {
        PlanContext::new("1".parse().unwrap(), threshold)
    }

    #[test]
    fn co_segmented_join_needs_no_exchange() {
        let c = ctx(0);
        let o = c.scan(Table::Orders, &["o_orderkey", "o_orderdate"], vec![]);
        let l = c.scan(Table::LineItem, &["l_orderkey", "l_quantity"], vec![]);
        let plan = l
            .join(o, &[("l_orderkey", "o_orderkey")], JoinKind::Inner)
            .unwrap()
            .aggregate(&["l_orderkey"], vec![sum(col("l_quantity"), "q")])
            .unwrap()
            .finish(&[("q", true)], Some(10))
            .unwrap();
        assert_eq!(plan.count_operator("Exchange"), 0);
        assert_eq!(plan.count_operator("Limit"), 1);
    }

    #[test]
    fn large_build_side_is_repartitioned() {
        let c = ctx(0);
        let l = c.scan(Table::LineItem, &["l_partkey", "l_quantity"], vec![]);
        let p = c.scan(Table::Part, &["p_partkey", "p_brand"], vec![]);
        let o = c.scan(Table::Orders, &["o_custkey"], vec![]);
        let j = l
            .join(o, &[("l_partkey", "o_custkey")], JoinKind::Inner)
            .unwrap();
        assert!(matches!(j.plan, PhysicalPlan::HashJoin { .. }));
        assert_eq!(j.plan.count_operator("Exchange"), 2);
        let plan = c
            .scan(Table::LineItem, &["l_partkey"], vec![])
            .join(p, &[("l_partkey", "p_partkey")], JoinKind::Semi)
            .unwrap()
            .finish(&[], None)
            .unwrap();
        assert_eq!(plan.count_operator("Exchange"), 1);
    }

    #[test]
    fn global_aggregate_gathers_partials() {
        let c = ctx(100_000);
        let plan = c
            .scan(Table::LineItem, &["l_quantity"], vec![])
            .aggregate(&[], vec![sum(col("l_quantity"), "q")])
            .unwrap()
            .finish(&[], None)
            .unwrap();
        let ops: Vec<&str> = plan.operators().iter().map(|p| p.operator_name()).collect();
        assert_eq!(
            ops,
            [
                "FinalMerge",
                "HashAggregate",
                "Exchange",
                "HashAggregate",
                "SegmentScan"
            ]
        );
        assert!(c
            .scan(Table::Part, &["nope"], vec![])
            .finish(&[], None)
            .is_err());
    }
}
