//! Refresh functions: RF1 inserts a batch of new orders with their line
//! items, RF2 deletes the oldest batch RF1 inserted.

use std::fmt;
use std::time::Instant;

use crate::cluster::Cluster;
use crate::datagen::{Generator, ScaleFactor, Table};
use crate::error::{Error, Result};
use crate::storage::ColumnPredicate;
use crate::types::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RefreshId {
    Rf1,
    Rf2,
}

impl fmt::Display for RefreshId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RefreshId::Rf1 => "RF1",
            RefreshId::Rf2 => "RF2",
        })
    }
}

/// Orders per refresh batch: `max(1, floor(1500 * SF))`.
pub fn batch_size(sf: ScaleFactor) -> i64 {
    sf.scale(1500).max(1) as i64
}

/// Order key range `[lo, hi]` of RF1 batch `i`.
pub fn batch_keys(order_count: i64, sf: ScaleFactor, i: u64) -> (i64, i64) {
    let b = batch_size(sf);
    let lo = order_count + i as i64 * b + 1;
    (lo, lo + b - 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefreshOutcome {
    pub rf: RefreshId,
    pub orders: u64,
    pub lineitems: u64,
    pub keys: (i64, i64),
    pub seconds: f64,
}

pub fn run_refresh(rf: RefreshId, cluster: &Cluster) -> Result<RefreshOutcome> {
    let ds = cluster
        .dataset()
        .ok_or_else(|| Error::Refresh("no dataset loaded; run load first".into()))?;
    let start = Instant::now();
    let outcome = match rf {
        RefreshId::Rf1 => {
            let gen = Generator::new(ds.sf, ds.seed);
            let batch = cluster.refresh_log().next_batch;
            let (lo, hi) = batch_keys(gen.order_count(), ds.sf, batch);
            let (orders, lines) = gen.orders_with_lines(lo..hi + 1);
            let orders =
                cluster.ingest(Table::Orders, orders.iter().map(|o| o.to_row()).collect())?;
            let lineitems =
                cluster.ingest(Table::LineItem, lines.iter().map(|l| l.to_row()).collect())?;
            let mut log = cluster.refresh_log();
            log.next_batch = batch + 1;
            log.pending.push_back((lo, hi));
            RefreshOutcome {
                rf,
                orders,
                lineitems,
                keys: (lo, hi),
                seconds: 0.0,
            }
        }
        RefreshId::Rf2 => {
            let (lo, hi) = cluster
                .refresh_log()
                .pending
                .front()
                .copied()
                .ok_or_else(|| Error::Refresh("RF2 has no inserted batch to delete".into()))?;
            let range = |c: &str| ColumnPredicate::between(c, Value::Int(lo), Value::Int(hi));
            let lineitems = cluster.delete(Table::LineItem, &[range("l_orderkey")])?;
            let orders = cluster.delete(Table::Orders, &[range("o_orderkey")])?;
            cluster.refresh_log().pending.pop_front();
            RefreshOutcome {
                rf,
                orders,
                lineitems,
                keys: (lo, hi),
                seconds: 0.0,
            }
        }
    };
    let ms = start.elapsed().as_millis() as f64;
    Ok(RefreshOutcome {
        seconds: ms / 1000.0,
        ..outcome
    })
}
