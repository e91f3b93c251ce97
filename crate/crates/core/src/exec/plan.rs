use std::fmt;

use crate::datagen::Table;
use crate::error::{Error, Result};
use crate::exec::expr::Expr;
use crate::storage::ColumnPredicate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JoinKind {
    Inner,
    /// Left outer: unmatched probe rows are padded with NULLs.
    Left,
    Semi,
    Anti,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggFunc {
    Sum,
    Count,
    CountStar,
    Min,
    Max,
    /// Rendered at two fraction digits, half away from zero.
    Avg,
    CountDistinct,
}

impl AggFunc {
    /// Number of partial-state columns.
    pub fn state_width(self) -> usize {
        match self {
            AggFunc::Avg => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggExpr {
    pub func: AggFunc,
    /// `None` only for `CountStar`.
    pub arg: Option<Expr>,
    pub name: String,
}

impl AggExpr {
    pub fn new(func: AggFunc, arg: Expr, name: &str) -> AggExpr {
        AggExpr {
            func,
            arg: Some(arg),
            name: name.to_string(),
        }
    }

    pub fn count_star(name: &str) -> AggExpr {
        AggExpr {
            func: AggFunc::CountStar,
            arg: None,
            name: name.to_string(),
        }
    }
}

pub fn sum(e: Expr, name: &str) -> AggExpr {
    AggExpr::new(AggFunc::Sum, e, name)
}
pub fn count(e: Expr, name: &str) -> AggExpr {
    AggExpr::new(AggFunc::Count, e, name)
}
pub fn avg(e: Expr, name: &str) -> AggExpr {
    AggExpr::new(AggFunc::Avg, e, name)
}
pub fn min(e: Expr, name: &str) -> AggExpr {
    AggExpr::new(AggFunc::Min, e, name)
}
pub fn max(e: Expr, name: &str) -> AggExpr {
    AggExpr::new(AggFunc::Max, e, name)
}
pub fn count_distinct(e: Expr, name: &str) -> AggExpr {
    AggExpr::new(AggFunc::CountDistinct, e, name)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggMode {
    /// Whole groups are present in each input partition.
    Complete,
    /// Emits per-partition state columns for a later `Final`.
    Partial,
    /// Consumes `Partial` output: group columns first, then states.
    Final,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExchangeKind {
    /// All partitions to the coordinator.
    Gather,
    /// A full copy to every node.
    Broadcast,
    /// Rows to the node serving the bucket of the hashed key columns.
    Repartition(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SortKey {
    pub col: usize,
    pub desc: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PhysicalPlan {
    SegmentScan {
        table: Table,
        columns: Vec<String>,
        /// Pushed-down conjunctive predicates, also used for pruning.
        predicates: Vec<ColumnPredicate>,
    },
    Filter {
        input: Box<PhysicalPlan>,
        predicate: Expr,
    },
    Project {
        input: Box<PhysicalPlan>,
        exprs: Vec<(Expr, String)>,
    },
    /// `left` probes a hash table built from `right`. Inner and left joins
    /// output left columns followed by right columns; semi and anti joins
    /// output left columns only. `residual` sees the concatenated row.
    HashJoin {
        left: Box<PhysicalPlan>,
        right: Box<PhysicalPlan>,
        left_keys: Vec<usize>,
        right_keys: Vec<usize>,
        kind: JoinKind,
        residual: Option<Expr>,
    },
    HashAggregate {
        input: Box<PhysicalPlan>,
        group: Vec<usize>,
        aggs: Vec<AggExpr>,
        mode: AggMode,
    },
    /// Keys, then every column ascending as tie-break.
    Sort {
        input: Box<PhysicalPlan>,
        keys: Vec<SortKey>,
    },
    Limit {
        input: Box<PhysicalPlan>,
        n: usize,
    },
    Exchange {
        input: Box<PhysicalPlan>,
        kind: ExchangeKind,
    },
    /// Coordinator-side gather, total ordering and optional limit.
    FinalMerge {
        input: Box<PhysicalPlan>,
        keys: Vec<SortKey>,
        limit: Option<usize>,
    },
}

impl PhysicalPlan {
    pub fn output_names(&self) -> Vec<String> {
        match self {
            PhysicalPlan::SegmentScan { columns, .. } => columns.clone(),
            PhysicalPlan::Filter { input, .. }
            | PhysicalPlan::Sort { input, .. }
            | PhysicalPlan::Limit { input, .. }
            | PhysicalPlan::Exchange { input, .. }
            | PhysicalPlan::FinalMerge { input, .. } => input.output_names(),
            PhysicalPlan::Project { exprs, .. } => exprs.iter().map(|(_, n)| n.clone()).collect(),
            PhysicalPlan::HashJoin {
                left, right, kind, ..
            } => {
                let mut n = left.output_names();
                if matches!(kind, JoinKind::Inner | JoinKind::Left) {
                    n.extend(right.output_names());
                }
                n
            }
            PhysicalPlan::HashAggregate {
                input,
                group,
                aggs,
                mode,
            } => {
                let inames = input.output_names();
                let mut n: Vec<String> = group
                    .iter()
                    .map(|g| inames.get(*g).cloned().unwrap_or_default())
                    .collect();
                for a in aggs {
                    if *mode == AggMode::Partial {
                        match a.func {
                            AggFunc::Avg => {
                                n.push(format!("{}$sum", a.name));
                                n.push(format!("{}$count", a.name));
                            }
                            _ => n.push(format!("{}$state", a.name)),
                        }
                    } else {
                        n.push(a.name.clone());
                    }
                }
                n
            }
        }
    }

    pub fn width(&self) -> usize {
        self.output_names().len()
    }

    pub fn children(&self) -> Vec<&PhysicalPlan> {
        match self {
            PhysicalPlan::SegmentScan { .. } => vec![],
            PhysicalPlan::HashJoin { left, right, .. } => vec![left, right],
            PhysicalPlan::Filter { input, .. }
            | PhysicalPlan::Project { input, .. }
            | PhysicalPlan::HashAggregate { input, .. }
            | PhysicalPlan::Sort { input, .. }
            | PhysicalPlan::Limit { input, .. }
            | PhysicalPlan::Exchange { input, .. }
            | PhysicalPlan::FinalMerge { input, .. } => vec![input],
        }
    }

    pub fn operator_name(&self) -> &'static str {
        match self {
            PhysicalPlan::SegmentScan { .. } => "SegmentScan",
            PhysicalPlan::Filter { .. } => "Filter",
            PhysicalPlan::Project { .. } => "Project",
            PhysicalPlan::HashJoin { .. } => "HashJoin",
            PhysicalPlan::HashAggregate { .. } => "HashAggregate",
            PhysicalPlan::Sort { .. } => "Sort",
            PhysicalPlan::Limit { .. } => "Limit",
            PhysicalPlan::Exchange { .. } => "Exchange",
            PhysicalPlan::FinalMerge { .. } => "FinalMerge",
        }
    }

    /// Pre-order list of every operator.
    pub fn operators(&self) -> Vec<&PhysicalPlan> {
        let mut out = vec![self];
        for c in self.children() {
            out.extend(c.operators());
        }
        out
    }

    pub fn scanned_tables(&self) -> Vec<Table> {
        let mut t: Vec<Table> = self
            .operators()
            .into_iter()
            .filter_map(|p| match p {
                PhysicalPlan::SegmentScan { table, .. } => Some(*table),
                _ => None,
            })
            .collect();
        t.sort();
        t.dedup();
        t
    }

    pub fn count_operator(&self, name: &str) -> usize {
        self.operators()
            .iter()
            .filter(|p| p.operator_name() == name)
            .count()
    }

    /// Checks that every referenced column is produced below its use, that
    /// scans read real columns and that the only `FinalMerge` is the root.
    pub fn validate(&self) -> Result<()> {
        if !matches!(self, PhysicalPlan::FinalMerge { .. }) {
            return Err(Error::Plan("plan root must be FinalMerge".into()));
        }
        if self.count_operator("FinalMerge") != 1 {
            return Err(Error::Plan("exactly one FinalMerge allowed".into()));
        }
        self.validate_node()
    }

    fn validate_node(&self) -> Result<()> {
        for c in self.children() {
            c.validate_node()?;
        }
        let in_width = |p: &PhysicalPlan| p.width();
        let bad = |m: String| Err(Error::Plan(m));
        match self {
            PhysicalPlan::SegmentScan {
                table,
                columns,
                predicates,
            } => {
                let def = table.def();
                for c in columns.iter().chain(predicates.iter().map(|p| &p.column)) {
                    if def.column_index(c).is_none() {
                        return bad(format!("{table} has no column {c}"));
                    }
                }
            }
            PhysicalPlan::Filter { input, predicate } => predicate.check(in_width(input))?,
            PhysicalPlan::Project { input, exprs } => {
                for (e, _) in exprs {
                    e.check(in_width(input))?;
                }
            }
            PhysicalPlan::HashJoin {
                left,
                right,
                left_keys,
                right_keys,
                residual,
                ..
            } => {
                if left_keys.len() != right_keys.len() {
                    return bad("join key lists differ in length".into());
                }
                let (lw, rw) = (in_width(left), in_width(right));
                if left_keys.iter().any(|k| *k >= lw) || right_keys.iter().any(|k| *k >= rw) {
                    return bad("join key out of range".into());
                }
                if let Some(r) = residual {
                    r.check(lw + rw)?;
                }
            }
            PhysicalPlan::HashAggregate {
                input,
                group,
                aggs,
                mode,
            } => {
                let w = in_width(input);
                if group.iter().any(|g| *g >= w) {
                    return bad("group column out of range".into());
                }
                match mode {
                    AggMode::Final => {
                        let states: usize = aggs.iter().map(|a| a.func.state_width()).sum();
                        if *group != (0..group.len()).collect::<Vec<_>>()
                            || group.len() + states != w
                        {
                            return bad(
                                "final aggregate input does not match partial layout".into()
                            );
                        }
                    }
                    _ => {
                        for a in aggs {
                            match (&a.arg, a.func) {
                                (None, AggFunc::CountStar) => {}
                                (Some(e), f) if f != AggFunc::CountStar => e.check(w)?,
                                _ => {
                                    return bad(format!("aggregate {} has a bad argument", a.name))
                                }
                            }
                        }
                    }
                }
                if *mode != AggMode::Complete
                    && aggs.iter().any(|a| a.func == AggFunc::CountDistinct)
                {
                    return bad("count distinct cannot be split into partial/final".into());
                }
            }
            PhysicalPlan::Sort { input, keys } | PhysicalPlan::FinalMerge { input, keys, .. } => {
                if keys.iter().any(|k| k.col >= in_width(input)) {
                    return bad("sort key out of range".into());
                }
            }
            PhysicalPlan::Exchange {
                input,
                kind: ExchangeKind::Repartition(keys),
            } => {
                if keys.is_empty() || keys.iter().any(|k| *k >= in_width(input)) {
                    return bad("repartition key out of range".into());
                }
            }
            PhysicalPlan::Limit { .. } | PhysicalPlan::Exchange { .. } => {}
        }
        Ok(())
    }

    fn fmt_tree(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        match self {
            PhysicalPlan::SegmentScan {
                table,
                columns,
                predicates,
            } => {
                write!(f, "{pad}SegmentScan {table} [{}]", columns.join(", "))?;
                if !predicates.is_empty() {
                    write!(
                        f,
                        " pushdown {}",
                        predicates
                            .iter()
                            .map(|p| p.column.as_str())
                            .collect::<Vec<_>>()
                            .join(",")
                    )?;
                }
            }
            PhysicalPlan::Filter { predicate, .. } => write!(f, "{pad}Filter {predicate}")?,
            PhysicalPlan::Project { exprs, .. } => write!(
                f,
                "{pad}Project {}",
                exprs
                    .iter()
                    .map(|(e, n)| format!("{e} AS {n}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )?,
            PhysicalPlan::HashJoin {
                kind,
                left_keys,
                right_keys,
                ..
            } => write!(f, "{pad}HashJoin {kind:?} {left_keys:?}={right_keys:?}")?,
            PhysicalPlan::HashAggregate {
                group, aggs, mode, ..
            } => write!(
                f,
                "{pad}HashAggregate {mode:?} group {group:?} [{}]",
                aggs.iter()
                    .map(|a| format!("{:?} {}", a.func, a.name))
                    .collect::<Vec<_>>()
                    .join(", ")
            )?,
            PhysicalPlan::Sort { keys, .. } => write!(f, "{pad}Sort {keys:?}")?,
            PhysicalPlan::Limit { n, .. } => write!(f, "{pad}Limit {n}")?,
            PhysicalPlan::Exchange { kind, .. } => write!(f, "{pad}Exchange {kind:?}")?,
            PhysicalPlan::FinalMerge { keys, limit, .. } => {
                write!(f, "{pad}FinalMerge {keys:?} limit {limit:?}")?
            }
        }
        writeln!(f)?;
        for c in self.children() {
            c.fmt_tree(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for PhysicalPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_tree(f, 0)
    }
}
