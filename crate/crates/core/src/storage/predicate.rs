//! Single-column predicates that scans can evaluate and prune with.

use std::ops::Bound;

use crate::types::Value;

#[derive(Clone, Debug, PartialEq)]
pub enum PredOp {
    Eq(Value),
    Range {
        lower: Bound<Value>,
        upper: Bound<Value>,
    },
    /// Sorted and deduplicated by [`ColumnPredicate::in_list`].
    In(Vec<Value>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnPredicate {
    pub column: String,
    pub op: PredOp,
}

impl ColumnPredicate {
    pub fn eq(column: &str, v: Value) -> Self {
        ColumnPredicate {
            column: column.to_string(),
            op: PredOp::Eq(v),
        }
    }

    pub fn range(column: &str, lower: Bound<Value>, upper: Bound<Value>) -> Self {
        ColumnPredicate {
            column: column.to_string(),
            op: PredOp::Range { lower, upper },
        }
    }

    /// `lo <= column <= hi`
    pub fn between(column: &str, lo: Value, hi: Value) -> Self {
        Self::range(column, Bound::Included(lo), Bound::Included(hi))
    }

    /// `lo <= column < hi`
    pub fn half_open(column: &str, lo: Value, hi: Value) -> Self {
        Self::range(column, Bound::Included(lo), Bound::Excluded(hi))
    }

    pub fn in_list(column: &str, mut vs: Vec<Value>) -> Self {
        vs.sort();
        vs.dedup();
        ColumnPredicate {
            column: column.to_string(),
            op: PredOp::In(vs),
        }
    }

    pub fn matches(&self, v: &Value) -> bool {
        if v.is_null() {
            return false;
        }
        match &self.op {
            PredOp::Eq(x) => v == x,
            PredOp::Range { lower, upper } => above(v, lower) && below(v, upper),
            PredOp::In(xs) => xs.binary_search(v).is_ok(),
        }
    }

    /// Whether any value in `[min, max]` could satisfy the predicate.
    pub fn may_match(&self, min: &Value, max: &Value) -> bool {
        match &self.op {
            PredOp::Eq(x) => x >= min && x <= max,
            PredOp::Range { lower, upper } => {
                let lower_ok = match lower {
                    Bound::Included(l) => max >= l,
                    Bound::Excluded(l) => max > l,
                    Bound::Unbounded => true,
                };
                let upper_ok = match upper {
                    Bound::Included(u) => min <= u,
                    Bound::Excluded(u) => min < u,
                    Bound::Unbounded => true,
                };
                lower_ok && upper_ok && range_nonempty(lower, upper)
            }
            PredOp::In(xs) => {
                let first = xs.partition_point(|x| x < min);
                xs.get(first).is_some_and(|x| x <= max)
            }
        }
    }
}

fn above(v: &Value, b: &Bound<Value>) -> bool {
    match b {
        Bound::Included(l) => v >= l,
        Bound::Excluded(l) => v > l,
        Bound::Unbounded => true,
    }
}

fn below(v: &Value, b: &Bound<Value>) -> bool {
    match b {
        Bound::Included(u) => v <= u,
        Bound::Excluded(u) => v < u,
        Bound::Unbounded => true,
    }
}

fn range_nonempty(lower: &Bound<Value>, upper: &Bound<Value>) -> bool {
    match (lower, upper) {
        (Bound::Included(l), Bound::Included(u)) => l <= u,
        (Bound::Included(l) | Bound::Excluded(l), Bound::Excluded(u) | Bound::Included(u)) => l < u,
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_matching_and_pruning() {
        let p = ColumnPredicate::half_open("x", Value::Int(10), Value::Int(20));
        assert!(p.matches(&Value::Int(10)));
        assert!(!p.matches(&Value::Int(20)));
        assert!(!p.matches(&Value::Null));
        assert!(p.may_match(&Value::Int(0), &Value::Int(10)));
        assert!(!p.may_match(&Value::Int(20), &Value::Int(30)));
        assert!(!p.may_match(&Value::Int(0), &Value::Int(9)));
    }

    #[test]
    fn contradictory_range_never_matches() {
        let p = ColumnPredicate::between("x", Value::Int(5), Value::Int(1));
        assert!(!p.may_match(&Value::Int(i64::MIN), &Value::Int(i64::MAX)));
        assert!(!p.matches(&Value::Int(3)));
    }

    #[test]
    fn in_list_pruning() {
        let p = ColumnPredicate::in_list("k", vec![Value::Int(3), Value::Int(50)]);
        assert!(p.may_match(&Value::Int(40), &Value::Int(60)));
        assert!(!p.may_match(&Value::Int(4), &Value::Int(49)));
    }
}
