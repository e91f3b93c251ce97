use std::sync::Arc;

use crate::datagen::{ColumnType, Table};
use crate::error::{Error, Result};
use crate::types::{Decimal, Row, Value};

pub const DEFAULT_WOS_BUDGET: usize = 32 << 20;

/// Rows ingested together for one segment. Immutable once staged so that
/// snapshots can share it.
#[derive(Debug)]
pub struct WosBatch {
    pub segment: u32,
    pub rows: Vec<Row>,
    pub bytes: usize,
}

/// Row-oriented staging area for one table.
#[derive(Clone, Debug)]
pub struct WosBuffer {
    pub table: Table,
    pub batches: Vec<Arc<WosBatch>>,
    pub bytes: usize,
    pub byte_budget: usize,
}

impl WosBuffer {
    pub fn new(table: Table, byte_budget: usize) -> WosBuffer {
        WosBuffer {
            table,
            batches: Vec::new(),
            bytes: 0,
            byte_budget,
        }
    }

    pub fn row_count(&self) -> u64 {
        self.batches.iter().map(|b| b.rows.len() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.iter().all(|b| b.rows.is_empty())
    }

    pub fn over_budget(&self) -> bool {
        self.bytes > self.byte_budget
    }

    pub fn push(&mut self, segment: u32, rows: Vec<Row>) {
        if rows.is_empty() {
            return;
        }
        let bytes = rows.iter().map(row_bytes).sum();
        self.bytes += bytes;
        self.batches.push(Arc::new(WosBatch {
            segment,
            rows,
            bytes,
        }));
    }

    pub fn clear(&mut self) {
        self.batches.clear();
        self.bytes = 0;
    }

    pub fn retain_segments(&mut self, keep: impl Fn(u32) -> bool) {
        self.batches.retain(|b| keep(b.segment));
        self.bytes = self.batches.iter().map(|b| b.bytes).sum();
    }
}

pub(crate) fn row_bytes(r: &Row) -> usize {
    r.iter().map(Value::approx_bytes).sum::<usize>() + 8
}

/// Checks `row` against the schema and brings decimals to two fraction digits.
pub fn conform_row(table: Table, mut row: Row) -> Result<Row> {
    let def = table.def();
    if row.len() != def.width() {
        return Err(Error::SchemaMismatch(format!(
            "{table}: row has {} fields, expected {}",
            row.len(),
            def.width()
        )));
    }
    for (v, c) in row.iter_mut().zip(def.columns) {
        let ok = match (c.ty, &*v) {
            (ColumnType::Int64, Value::Int(_)) | (ColumnType::Date, Value::Date(_)) => true,
            (ColumnType::Decimal, Value::Dec(d)) if d.scale <= 2 => {
                let cents = d.rescale_up(2);
                match i64::try_from(cents) {
                    Ok(c) => {
                        *v = Value::Dec(Decimal::from_cents(c));
                        true
                    }
                    Err(_) => false,
                }
            }
            (ColumnType::FixedStr(n) | ColumnType::VarStr(n), Value::Str(s)) => {
                s.chars().count() <= n as usize
            }
            _ => false,
        };
        if !ok {
            return Err(Error::SchemaMismatch(format!(
                "{table}.{}: value {v:?} does not fit {:?}",
                c.name, c.ty
            )));
        }
    }
    Ok(row)
}
