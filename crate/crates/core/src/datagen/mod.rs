//! Deterministic, seedable generator for the eight benchmark tables.
//!
//! Every row draws from its own ChaCha stream keyed by `(seed, table, key)`, so
//! any contiguous key range can be produced independently and the output is
//! byte-identical across runs, thread counts and partitionings.

pub mod schema;
pub mod tbl;
pub mod text;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::types::{mix64, Date, Row, Value};

pub use schema::{ColumnDef, ColumnType, Table, TableDef};
pub use tbl::{format_row, parse_field, parse_tbl_line, write_tbl};

/// Scale factor held as an exact count of millionths (1.0 == 1_000_000).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScaleFactor(u64);

impl ScaleFactor {
    pub const MICROS: u64 = 1_000_000;

    pub fn from_micros(micros: u64) -> Result<ScaleFactor> {
        if micros == 0 {
            return Err(Error::Config("scale factor must be > 0".into()));
        }
        Ok(ScaleFactor(micros))
    }

    pub fn new(sf: f64) -> Result<ScaleFactor> {
        if !sf.is_finite() || sf <= 0.0 {
            return Err(Error::Config(format!("scale factor must be > 0, got {sf}")));
        }
        Self::from_micros((sf * Self::MICROS as f64).round() as u64)
    }

    pub fn micros(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / Self::MICROS as f64
    }

    /// `floor(base * sf)` computed exactly.
    pub fn scale(self, base: u64) -> u64 {
        ((base as u128 * self.0 as u128) / Self::MICROS as u128) as u64
    }
}

impl fmt::Display for ScaleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let int = self.0 / Self::MICROS;
        let frac = self.0 % Self::MICROS;
        if frac == 0 {
            return write!(f, "{int}");
        }
        let s = format!("{frac:06}");
        write!(f, "{int}.{}", s.trim_end_matches('0'))
    }
}

impl FromStr for ScaleFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = crate::types::Decimal::parse(s)
            .map_err(|_| Error::Config(format!("invalid scale factor '{s}'")))?;
        if d.scale > 6 {
            return Err(Error::Config(format!("scale factor '{s}' finer than 1e-6")));
        }
        let micros = d.rescale_up(6);
        if micros <= 0 {
            return Err(Error::Config(format!(
                "scale factor must be > 0, got '{s}'"
            )));
        }
        ScaleFactor::from_micros(micros as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct GenSeed(pub u64);

pub const START_DATE: (i32, u32, u32) = (1992, 1, 1);
pub const END_DATE: (i32, u32, u32) = (1998, 12, 31);
/// Ship/receipt dates after this day yield open (`O`) / not-returned (`N`) lines.
pub const CURRENT_DATE: (i32, u32, u32) = (1995, 6, 17);

pub fn start_date() -> Date {
    Date::from_ymd(START_DATE.0, START_DATE.1, START_DATE.2)
}

pub fn current_date() -> Date {
    Date::from_ymd(CURRENT_DATE.0, CURRENT_DATE.1, CURRENT_DATE.2)
}

fn last_order_date() -> Date {
    Date::from_ymd(END_DATE.0, END_DATE.1, END_DATE.2).add_days(-151)
}

const LINE_COUNT_SALT: u64 = 0x6c69_6e65_6974_656d;

/// Number of line items of an order. Depends only on the order key so that
/// table cardinalities are independent of the generation seed.
pub fn line_count(orderkey: u64) -> u64 {
    1 + mix64(orderkey ^ LINE_COUNT_SALT) % 7
}

/// Exact number of rows `generate_table` emits for `table` at `sf`.
pub fn row_count(table: Table, sf: ScaleFactor) -> u64 {
    match table {
        Table::Region => 5,
        Table::Nation => 25,
        // at least four suppliers so every part has four distinct suppliers
        Table::Supplier => sf.scale(10_000).max(4),
        Table::Customer => sf.scale(150_000).max(1),
        Table::Part => sf.scale(200_000).max(1),
        Table::PartSupp => 4 * row_count(Table::Part, sf),
        Table::Orders => sf.scale(1_500_000).max(1),
        Table::LineItem => (1..=row_count(Table::Orders, sf)).map(line_count).sum(),
    }
}

/// Looks a table up by name, then counts its rows.
pub fn row_count_by_name(table: &str, sf: ScaleFactor) -> Result<u64> {
    Ok(row_count(table.parse()?, sf))
}

/// Stream of every row of `table`.
pub fn generate_table(
    table: Table,
    sf: ScaleFactor,
    seed: GenSeed,
) -> Box<dyn Iterator<Item = Row> + Send> {
    let g = Generator::new(sf, seed);
    let n = row_count(table, sf);
    g.rows(table, 0..n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionRow {
    pub regionkey: i64,
    pub name: String,
    pub comment: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NationRow {
    pub nationkey: i64,
    pub name: String,
    pub regionkey: i64,
    pub comment: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupplierRow {
    pub suppkey: i64,
    pub name: String,
    pub address: String,
    pub nationkey: i64,
    pub phone: String,
    pub acctbal: i64,
    pub comment: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CustomerRow {
    pub custkey: i64,
    pub name: String,
    pub address: String,
    pub nationkey: i64,
    pub phone: String,
    pub acctbal: i64,
    pub mktsegment: String,
    pub comment: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartRow {
    pub partkey: i64,
    pub name: String,
    pub mfgr: String,
    pub brand: String,
    pub ptype: String,
    pub size: i64,
    pub container: String,
    pub retailprice: i64,
    pub comment: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartSuppRow {
    pub partkey: i64,
    pub suppkey: i64,
    pub availqty: i64,
    pub supplycost: i64,
    pub comment: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderRow {
    pub orderkey: i64,
    pub custkey: i64,
    pub orderstatus: char,
    pub totalprice: i64,
    pub orderdate: Date,
    pub orderpriority: String,
    pub clerk: String,
    pub shippriority: i64,
    pub comment: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineItemRow {
    pub orderkey: i64,
    pub partkey: i64,
    pub suppkey: i64,
    pub linenumber: i64,
    /// Cents, like every decimal column.
    pub quantity: i64,
    pub extendedprice: i64,
    pub discount: i64,
    pub tax: i64,
    pub returnflag: char,
    pub linestatus: char,
    pub shipdate: Date,
    pub commitdate: Date,
    pub receiptdate: Date,
    pub shipinstruct: String,
    pub shipmode: String,
    pub comment: String,
}

fn s(v: &str) -> Value {
    Value::str(v)
}

fn c(ch: char) -> Value {
    let mut buf = [0u8; 4];
    Value::str(ch.encode_utf8(&mut buf))
}

impl RegionRow {
    pub fn to_row(&self) -> Row {
        vec![Value::Int(self.regionkey), s(&self.name), s(&self.comment)]
    }
}

impl NationRow {
    pub fn to_row(&self) -> Row {
        vec![
            Value::Int(self.nationkey),
            s(&self.name),
            Value::Int(self.regionkey),
            s(&self.comment),
        ]
    }
}

impl SupplierRow {
    pub fn to_row(&self) -> Row {
        vec![
            Value::Int(self.suppkey),
            s(&self.name),
            s(&self.address),
            Value::Int(self.nationkey),
            s(&self.phone),
            Value::cents(self.acctbal),
            s(&self.comment),
        ]
    }
}

impl CustomerRow {
    pub fn to_row(&self) -> Row {
        vec![
            Value::Int(self.custkey),
            s(&self.name),
            s(&self.address),
            Value::Int(self.nationkey),
            s(&self.phone),
            Value::cents(self.acctbal),
            s(&self.mktsegment),
            s(&self.comment),
        ]
    }
}

impl PartRow {
    pub fn to_row(&self) -> Row {
        vec![
            Value::Int(self.partkey),
            s(&self.name),
            s(&self.mfgr),
            s(&self.brand),
            s(&self.ptype),
            Value::Int(self.size),
            s(&self.container),
            Value::cents(self.retailprice),
            s(&self.comment),
        ]
    }
}

impl PartSuppRow {
    pub fn to_row(&self) -> Row {
        vec![
            Value::Int(self.partkey),
            Value::Int(self.suppkey),
            Value::Int(self.availqty),
            Value::cents(self.supplycost),
            s(&self.comment),
        ]
    }
}

impl OrderRow {
    pub fn to_row(&self) -> Row {
        vec![
            Value::Int(self.orderkey),
            Value::Int(self.custkey),
            c(self.orderstatus),
            Value::cents(self.totalprice),
            Value::Date(self.orderdate),
            s(&self.orderpriority),
            s(&self.clerk),
            Value::Int(self.shippriority),
            s(&self.comment),
        ]
    }
}

impl LineItemRow {
    pub fn to_row(&self) -> Row {
        vec![
            Value::Int(self.orderkey),
            Value::Int(self.partkey),
            Value::Int(self.suppkey),
            Value::Int(self.linenumber),
            Value::cents(self.quantity),
            Value::cents(self.extendedprice),
            Value::cents(self.discount),
            Value::cents(self.tax),
            c(self.returnflag),
            c(self.linestatus),
            Value::Date(self.shipdate),
            Value::Date(self.commitdate),
            Value::Date(self.receiptdate),
            s(&self.shipinstruct),
            s(&self.shipmode),
            s(&self.comment),
        ]
    }
}

/// Retail price in cents as a pure function of the part key.
pub fn retail_price(partkey: i64) -> i64 {
    90_000 + (partkey / 10) % 20_001 + 100 * (partkey % 1_000)
}

/// The `i`-th (0..4) supplier of a part. For `suppliers >= 4` the four keys
/// are distinct.
pub fn part_supplier(partkey: i64, i: i64, suppliers: i64) -> i64 {
    let step = (suppliers / 4).max(1);
    (partkey + i * step) % suppliers + 1
}

/// Row generator bound to one `(sf, seed)` pair.
#[derive(Clone, Copy, Debug)]
pub struct Generator {
    sf: ScaleFactor,
    seed: GenSeed,
    suppliers: i64,
    customers: i64,
    parts: i64,
    orders: i64,
    clerks: i64,
}

const SALT_REGION: u64 = 1;
const SALT_NATION: u64 = 2;
const SALT_SUPPLIER: u64 = 3;
const SALT_CUSTOMER: u64 = 4;
const SALT_PART: u64 = 5;
const SALT_PARTSUPP: u64 = 6;
const SALT_ORDER: u64 = 7;

impl Generator {
    pub fn new(sf: ScaleFactor, seed: GenSeed) -> Generator {
        Generator {
            sf,
            seed,
            suppliers: row_count(Table::Supplier, sf) as i64,
            customers: row_count(Table::Customer, sf) as i64,
            parts: row_count(Table::Part, sf) as i64,
            orders: row_count(Table::Orders, sf) as i64,
            clerks: sf.scale(1_000).max(1) as i64,
        }
    }

    pub fn sf(&self) -> ScaleFactor {
        self.sf
    }

    pub fn seed(&self) -> GenSeed {
        self.seed
    }

    /// Number of orders in the initial population; refresh batches use keys above it.
    pub fn order_count(&self) -> i64 {
        self.orders
    }

    fn rng(&self, salt: u64, key: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed.0 ^ mix64(salt));
        r.set_stream(key);
        r
    }

    pub fn region(&self, key: i64) -> RegionRow {
        let mut rng = self.rng(SALT_REGION, key as u64);
        RegionRow {
            regionkey: key,
            name: text::REGIONS[key as usize].to_string(),
            comment: text::comment(&mut rng, 31, 115),
        }
    }

    pub fn nation(&self, key: i64) -> NationRow {
        let mut rng = self.rng(SALT_NATION, key as u64);
        let (name, region) = text::NATIONS[key as usize];
        NationRow {
            nationkey: key,
            name: name.to_string(),
            regionkey: region,
            comment: text::comment(&mut rng, 31, 114),
        }
    }

    pub fn supplier(&self, key: i64) -> SupplierRow {
        let mut rng = self.rng(SALT_SUPPLIER, key as u64);
        let nationkey = rng.random_range(0..25);
        let address = text::address(&mut rng);
        let phone = text::phone(&mut rng, nationkey);
        let acctbal = rng.random_range(-99_999..=999_999);
        let mut comment = text::comment(&mut rng, 25, 100);
        let tag = rng.random_range(0..40);
        if tag < 2 {
            let tail = if tag == 0 { "Complaints" } else { "Recommends" };
            let head = text::comment(&mut rng, 5, 30);
            let mid = text::comment(&mut rng, 3, 20);
            comment = format!("{head} Customer {mid} {tail}");
            comment.truncate(101);
        }
        SupplierRow {
            suppkey: key,
            name: format!("Supplier#{key:09}"),
            address,
            nationkey,
            phone,
            acctbal,
            comment,
        }
    }

    pub fn customer(&self, key: i64) -> CustomerRow {
        let mut rng = self.rng(SALT_CUSTOMER, key as u64);
        let nationkey = rng.random_range(0..25);
        CustomerRow {
            custkey: key,
            name: format!("Customer#{key:09}"),
            address: text::address(&mut rng),
            nationkey,
            phone: text::phone(&mut rng, nationkey),
            acctbal: rng.random_range(-99_999..=999_999),
            mktsegment: text::SEGMENTS[rng.random_range(0..text::SEGMENTS.len())].to_string(),
            comment: text::comment(&mut rng, 29, 116),
        }
    }

    pub fn part(&self, key: i64) -> PartRow {
        let mut rng = self.rng(SALT_PART, key as u64);
        let mut colors: Vec<&str> = Vec::with_capacity(5);
        while colors.len() < 5 {
            let c = text::COLORS[rng.random_range(0..text::COLORS.len())];
            if !colors.contains(&c) {
                colors.push(c);
            }
        }
        let m = rng.random_range(1..=5);
        let n = rng.random_range(1..=5);
        let ptype = format!(
            "{} {} {}",
            text::TYPE_SIZE[rng.random_range(0..6)],
            text::TYPE_FINISH[rng.random_range(0..5)],
            text::TYPE_MATERIAL[rng.random_range(0..5)]
        );
        let size = rng.random_range(1..=50);
        let container = format!(
            "{} {}",
            text::CONTAINER_SIZE[rng.random_range(0..5)],
            text::CONTAINER_KIND[rng.random_range(0..8)]
        );
        PartRow {
            partkey: key,
            name: colors.join(" "),
            mfgr: format!("Manufacturer#{m}"),
            brand: format!("Brand#{m}{n}"),
            ptype,
            size,
            container,
            retailprice: retail_price(key),
            comment: text::comment(&mut rng, 5, 22),
        }
    }

    /// The `i`-th (0..4) supplier row of part `partkey`.
    pub fn partsupp(&self, partkey: i64, i: i64) -> PartSuppRow {
        let mut rng = self.rng(SALT_PARTSUPP, (partkey * 4 + i) as u64);
        PartSuppRow {
            partkey,
            suppkey: part_supplier(partkey, i, self.suppliers),
            availqty: rng.random_range(1..=9_999),
            supplycost: rng.random_range(100..=100_000),
            comment: text::comment(&mut rng, 49, 198),
        }
    }

    /// An order together with its line items. Valid for any positive key,
    /// including keys beyond the initial population (refresh inserts).
    pub fn order(&self, key: i64) -> (OrderRow, Vec<LineItemRow>) {
        let mut rng = self.rng(SALT_ORDER, key as u64);
        let custkey = loop {
            let c = rng.random_range(1..=self.customers);
            if c % 3 != 0 {
                break c;
            }
        };
        let span = last_order_date().0 - start_date().0;
        let orderdate = start_date().add_days(rng.random_range(0..=span));
        let orderpriority = text::PRIORITIES[rng.random_range(0..5)].to_string();
        let clerk = format!("Clerk#{:09}", rng.random_range(1..=self.clerks));
        let comment = text::comment(&mut rng, 19, 78);

        let current = current_date();
        let n = line_count(key as u64);
        let mut lines = Vec::with_capacity(n as usize);
        let mut total: i64 = 0;
        for ln in 1..=n as i64 {
            let partkey = rng.random_range(1..=self.parts);
            let suppkey = part_supplier(partkey, rng.random_range(0..4), self.suppliers);
            let qty = rng.random_range(1..=50i64);
            let extendedprice = qty * retail_price(partkey);
            let discount = rng.random_range(0..=10);
            let tax = rng.random_range(0..=8);
            let shipdate = orderdate.add_days(rng.random_range(1..=121));
            let commitdate = orderdate.add_days(rng.random_range(30..=90));
            let receiptdate = shipdate.add_days(rng.random_range(1..=30));
            let returnflag = if receiptdate <= current {
                if rng.random_bool(0.5) {
                    'R'
                } else {
                    'A'
                }
            } else {
                'N'
            };
            let linestatus = if shipdate > current { 'O' } else { 'F' };
            let shipinstruct = text::SHIP_INSTRUCT[rng.random_range(0..4)].to_string();
            let shipmode = text::SHIP_MODES[rng.random_range(0..7)].to_string();
            let lcomment = text::comment(&mut rng, 10, 43);
            // cents * (100 + tax) * (100 - discount) / 10^4, half-up
            let gross = extendedprice as i128 * (100 + tax) as i128 * (100 - discount) as i128;
            total += ((gross + 5_000) / 10_000) as i64;
            lines.push(LineItemRow {
                orderkey: key,
                partkey,
                suppkey,
                linenumber: ln,
                quantity: qty * 100,
                extendedprice,
                discount,
                tax,
                returnflag,
                linestatus,
                shipdate,
                commitdate,
                receiptdate,
                shipinstruct,
                shipmode,
                comment: lcomment,
            });
        }
        let orderstatus = if lines.iter().all(|l| l.linestatus == 'F') {
            'F'
        } else if lines.iter().all(|l| l.linestatus == 'O') {
            'O'
        } else {
            'P'
        };
        let order = OrderRow {
            orderkey: key,
            custkey,
            orderstatus,
            totalprice: total,
            orderdate,
            orderpriority,
            clerk,
            shippriority: 0,
            comment,
        };
        (order, lines)
    }

    /// Rows `range` (0-based row positions) of `table`.
    pub fn rows(&self, table: Table, range: Range<u64>) -> Box<dyn Iterator<Item = Row> + Send> {
        let g = *self;
        let end = range
            .end
            .min(row_count_fast(self, table).unwrap_or(range.end));
        let range = range.start.min(end)..end;
        match table {
            Table::Region => Box::new(range.map(move |i| g.region(i as i64).to_row())),
            Table::Nation => Box::new(range.map(move |i| g.nation(i as i64).to_row())),
            Table::Supplier => Box::new(range.map(move |i| g.supplier(i as i64 + 1).to_row())),
            Table::Customer => Box::new(range.map(move |i| g.customer(i as i64 + 1).to_row())),
            Table::Part => Box::new(range.map(move |i| g.part(i as i64 + 1).to_row())),
            Table::PartSupp => Box::new(
                range.map(move |i| g.partsupp((i / 4) as i64 + 1, (i % 4) as i64).to_row()),
            ),
            Table::Orders => Box::new(range.map(move |i| g.order(i as i64 + 1).0.to_row())),
            Table::LineItem => Box::new(LineItemRange::new(g, range)),
        }
    }

    /// Orders with keys in `keys` together with all their line items.
    pub fn orders_with_lines(&self, keys: Range<i64>) -> (Vec<OrderRow>, Vec<LineItemRow>) {
        let mut orders = Vec::with_capacity((keys.end - keys.start).max(0) as usize);
        let mut lines = Vec::new();
        for k in keys {
            let (o, l) = self.order(k);
            orders.push(o);
            lines.extend(l);
        }
        (orders, lines)
    }

    /// Full table materialized, with generation split into `chunks` key ranges
    /// that run in parallel when enabled. Output order equals the sequential stream.
    pub fn table_rows(&self, table: Table, mode: Parallelism) -> Vec<Row> {
        let n = row_count(table, self.sf);
        let chunks = 64u64.min(n.max(1));
        let per = n.div_ceil(chunks);
        let parts = par::map_indexed(mode, chunks as usize, |i| {
            let lo = i as u64 * per;
            let hi = ((i as u64 + 1) * per).min(n);
            self.rows(table, lo..hi.max(lo)).collect::<Vec<_>>()
        });
        parts.into_iter().flatten().collect()
    }

    pub fn all_regions(&self) -> Vec<RegionRow> {
        (0..5).map(|k| self.region(k)).collect()
    }

    pub fn all_nations(&self) -> Vec<NationRow> {
        (0..25).map(|k| self.nation(k)).collect()
    }

    pub fn all_suppliers(&self) -> Vec<SupplierRow> {
        (1..=self.suppliers).map(|k| self.supplier(k)).collect()
    }

    pub fn all_customers(&self) -> Vec<CustomerRow> {
        (1..=self.customers).map(|k| self.customer(k)).collect()
    }

    pub fn all_parts(&self) -> Vec<PartRow> {
        (1..=self.parts).map(|k| self.part(k)).collect()
    }

    pub fn all_partsupps(&self) -> Vec<PartSuppRow> {
        (1..=self.parts)
            .flat_map(|p| (0..4).map(move |i| (p, i)))
            .map(|(p, i)| self.partsupp(p, i))
            .collect()
    }
}

fn row_count_fast(g: &Generator, table: Table) -> Option<u64> {
    match table {
        Table::LineItem => None,
        t => Some(row_count(t, g.sf)),
    }
}

/// Line items at row positions `range`, walking orders in key order.
struct LineItemRange {
    g: Generator,
    next_order: i64,
    skip: u64,
    remaining: u64,
    buf: std::vec::IntoIter<LineItemRow>,
}

impl LineItemRange {
    fn new(g: Generator, range: Range<u64>) -> Self {
        // locate the order holding row `range.start`
        let mut pos = 0u64;
        let mut key = 1i64;
        while key <= g.orders {
            let n = line_count(key as u64);
            if pos + n > range.start {
                break;
            }
            pos += n;
            key += 1;
        }
        LineItemRange {
            g,
            next_order: key,
            skip: range.start - pos,
            remaining: range.end.saturating_sub(range.start),
            buf: Vec::new().into_iter(),
        }
    }
}

impl Iterator for LineItemRange {
    type Item = Row;

    fn next(&mut self) -> Option<Row> {
        if self.remaining == 0 {
            return None;
        }
        loop {
            if let Some(l) = self.buf.next() {
                if self.skip > 0 {
                    self.skip -= 1;
                    continue;
                }
                self.remaining -= 1;
                return Some(l.to_row());
            }
            if self.next_order > self.g.orders {
                return None;
            }
            let (_, lines) = self.g.order(self.next_order);
            self.next_order += 1;
            self.buf = lines.into_iter();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(s: &str) -> ScaleFactor {
        s.parse().unwrap()
    }

    #[test]
    fn scale_factor_parsing_is_exact() {
        assert_eq!(sf("0.01").micros(), 10_000);
        assert_eq!(sf("1000").micros(), 1_000_000_000);
        assert_eq!(sf("0.01").to_string(), "0.01");
        assert_eq!(sf("30").to_string(), "30");
        assert!("0".parse::<ScaleFactor>().is_err());
        assert!("-1".parse::<ScaleFactor>().is_err());
        assert!("0.0000001".parse::<ScaleFactor>().is_err());
        assert!(ScaleFactor::new(0.0).is_err());
    }

    #[test]
    fn fixed_and_scaled_counts() {
        assert_eq!(row_count(Table::Nation, sf("1000")), 25);
        assert_eq!(row_count(Table::Region, sf("1000")), 5);
        assert_eq!(row_count(Table::Customer, sf("1000")), 150_000_000);
        assert_eq!(row_count(Table::Orders, sf("1000")), 1_500_000_000);
        assert_eq!(row_count(Table::Part, sf("1000")), 200_000_000);
        assert_eq!(row_count(Table::PartSupp, sf("1000")), 800_000_000);
        assert_eq!(row_count(Table::Supplier, sf("1000")), 10_000_000);
        assert_eq!(row_count(Table::Customer, sf("0.01")), 1_500);
        assert!(row_count_by_name("lineitems", sf("1")).is_err());
    }

    #[test]
    fn line_counts_stay_in_one_to_seven() {
        let mut hist = [0u32; 8];
        for k in 1..10_000u64 {
            hist[line_count(k) as usize] += 1;
        }
        assert_eq!(hist[0], 0);
        assert!(hist[1..].iter().all(|&h| h > 1_000));
    }

    #[test]
    fn region_rows_are_keys_zero_to_four() {
        let rows: Vec<_> = generate_table(Table::Region, sf("0.01"), GenSeed(9)).collect();
        assert_eq!(rows.len(), 5);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r[0], Value::Int(i as i64));
        }
        assert_eq!(rows[0][1], Value::str("AFRICA"));
    }

    #[test]
    fn part_suppliers_are_distinct() {
        for suppliers in [4i64, 5, 10, 100, 1000] {
            for p in 1..500 {
                let mut ks: Vec<_> = (0..4).map(|i| part_supplier(p, i, suppliers)).collect();
                assert!(ks.iter().all(|&k| (1..=suppliers).contains(&k)));
                ks.sort();
                ks.dedup();
                assert_eq!(ks.len(), 4, "p={p} S={suppliers}");
            }
        }
    }

    #[test]
    fn order_derived_fields_are_consistent() {
        let g = Generator::new(sf("0.01"), GenSeed(42));
        for k in 1..200 {
            let (o, lines) = g.order(k);
            assert_eq!(lines.len() as u64, line_count(k as u64));
            assert!(o.custkey % 3 != 0);
            let status = if lines.iter().all(|l| l.linestatus == 'F') {
                'F'
            } else if lines.iter().all(|l| l.linestatus == 'O') {
                'O'
            } else {
                'P'
            };
            assert_eq!(o.orderstatus, status);
            for l in &lines {
                assert!((100..=5_000).contains(&l.quantity));
                assert!((0..=10).contains(&l.discount));
                assert!(l.shipdate > o.orderdate && l.receiptdate > l.shipdate);
                assert_eq!(l.extendedprice, l.quantity / 100 * retail_price(l.partkey));
            }
        }
    }

    #[test]
    fn lineitem_row_ranges_concatenate() {
        let g = Generator::new(sf("0.001"), GenSeed(3));
        let n = row_count(Table::LineItem, g.sf());
        let all: Vec<_> = g.rows(Table::LineItem, 0..n).collect();
        assert_eq!(all.len() as u64, n);
        let a: Vec<_> = g.rows(Table::LineItem, 0..1234).collect();
        let b: Vec<_> = g.rows(Table::LineItem, 1234..n).collect();
        assert_eq!([a, b].concat(), all);
        let par = g.table_rows(Table::LineItem, Parallelism::Parallel);
        assert_eq!(par, all);
    }
}
