//! Reference interpreter for the 22 queries: straight loops over the
//! generator's typed rows with money kept as integer units, independent of
//! the storage and execution layers. Also shared cluster fixtures.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};

use deskmpp::cluster::{Cluster, Dataset, EngineConfig, Topology};
use deskmpp::datagen::{
    CustomerRow, GenSeed, Generator, LineItemRow, NationRow, OrderRow, PartRow, PartSuppRow,
    RegionRow, ScaleFactor, SupplierRow, Table,
};
use deskmpp::exec::{QueryParams, ResultSet};
use deskmpp::types::{Date, Decimal, Row, Value};

pub struct Db {
    pub sf: ScaleFactor,
    pub region: Vec<RegionRow>,
    pub nation: Vec<NationRow>,
    pub supplier: Vec<SupplierRow>,
    pub customer: Vec<CustomerRow>,
    pub part: Vec<PartRow>,
    pub partsupp: Vec<PartSuppRow>,
    pub orders: Vec<OrderRow>,
    pub lineitem: Vec<LineItemRow>,
}

impl Db {
    pub fn generate(gen: &Generator) -> Db {
        let (orders, lineitem) = gen.orders_with_lines(1..gen.order_count() + 1);
        Db {
            sf: gen.sf(),
            region: gen.all_regions(),
            nation: gen.all_nations(),
            supplier: gen.all_suppliers(),
            customer: gen.all_customers(),
            part: gen.all_parts(),
            partsupp: gen.all_partsupps(),
            orders,
            lineitem,
        }
    }
}

pub fn sf(s: &str) -> ScaleFactor {
    s.parse().unwrap()
}

pub fn load_cluster(
    nodes: usize,
    k: usize,
    sf: ScaleFactor,
    seed: u64,
    config: EngineConfig,
) -> Cluster {
    let c = Cluster::new(Topology::new(nodes, k, None), config).unwrap();
    let gen = Generator::new(sf, GenSeed(seed));
    for t in Table::ALL {
        c.load_generated(&gen, t, 20_000).unwrap();
    }
    c.moveout_all().unwrap();
    c.set_dataset(Some(Dataset {
        sf,
        seed: GenSeed(seed),
    }));
    c
}

fn dec(units: i128, scale: u8) -> Value {
    Value::Dec(Decimal::new(units, scale))
}

fn money(cents: i128) -> Value {
    dec(cents, 2)
}

fn st(s: &str) -> Value {
    Value::str(s)
}

fn date(d: Date) -> Value {
    Value::Date(d)
}

/// Quotient rounded half away from zero.
fn div_round(num: i128, den: i128) -> i128 {
    let q = num / den;
    let r = num % den;
    if 2 * r.abs() >= den.abs() {
        q + if (num < 0) != (den < 0) { -1 } else { 1 }
    } else {
        q
    }
}

/// Price after discount, 4 fraction digits.
fn disc_price(l: &LineItemRow) -> i128 {
    l.extendedprice as i128 * (100 - l.discount) as i128
}

fn year(d: Date) -> i64 {
    d.year() as i64
}

fn ymd(y: i32, m: u32, d: u32) -> Date {
    Date::from_ymd(y, m, d)
}

/// `%a%b%` style match: `a` occurs, then `b` occurs after it.
fn contains_in_order(s: &str, a: &str, b: &str) -> bool {
    match s.find(a) {
        Some(i) => s[i + a.len()..].contains(b),
        None => false,
    }
}

fn nation_name(db: &Db, key: i64) -> &str {
    &db.nation.iter().find(|n| n.nationkey == key).unwrap().name
}

fn region_nations(db: &Db, region: &str) -> HashSet<i64> {
    let r = db
        .region
        .iter()
        .find(|r| r.name == region)
        .unwrap()
        .regionkey;
    db.nation
        .iter()
        .filter(|n| n.regionkey == r)
        .map(|n| n.nationkey)
        .collect()
}

/// Sort on `(column, desc)` keys, ties broken by whole-row order, then
/// truncate.
fn order(mut rows: Vec<Row>, keys: &[(usize, bool)], limit: Option<usize>) -> Vec<Row> {
    rows.sort_by(|a, b| {
        for (c, desc) in keys {
            let o = a[*c].cmp(&b[*c]);
            if o.is_ne() {
                return if *desc { o.reverse() } else { o };
            }
        }
        a.cmp(b)
    });
    if let Some(n) = limit {
        rows.truncate(n);
    }
    rows
}

fn names(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

pub fn reference(db: &Db, params: &QueryParams) -> ResultSet {
    let orders_by_key: HashMap<i64, &OrderRow> =
        db.orders.iter().map(|o| (o.orderkey, o)).collect();
    let supp_by_key: HashMap<i64, &SupplierRow> =
        db.supplier.iter().map(|s| (s.suppkey, s)).collect();
    let cust_by_key: HashMap<i64, &CustomerRow> =
        db.customer.iter().map(|c| (c.custkey, c)).collect();
    let part_by_key: HashMap<i64, &PartRow> = db.part.iter().map(|p| (p.partkey, p)).collect();
    match params {
        QueryParams::Q1 { delta_days } => {
            let cutoff = ymd(1998, 12, 1).add_days(-delta_days);
            #[derive(Default)]
            struct G {
                qty: i128,
                base: i128,
                disc_price: i128,
                charge: i128,
                disc: i128,
                n: i128,
            }
            let mut groups: BTreeMap<(char, char), G> = BTreeMap::new();
            for l in db.lineitem.iter().filter(|l| l.shipdate <= cutoff) {
                let g = groups.entry((l.returnflag, l.linestatus)).or_default();
                g.qty += l.quantity as i128;
                g.base += l.extendedprice as i128;
                g.disc_price += disc_price(l);
                g.charge += disc_price(l) * (100 + l.tax) as i128;
                g.disc += l.discount as i128;
                g.n += 1;
            }
            let rows = groups
                .into_iter()
                .map(|((rf, ls), g)| {
                    vec![
                        st(&rf.to_string()),
                        st(&ls.to_string()),
                        money(g.qty),
                        money(g.base),
                        dec(g.disc_price, 4),
                        dec(g.charge, 6),
                        money(div_round(g.qty, g.n)),
                        money(div_round(g.base, g.n)),
                        money(div_round(g.disc, g.n)),
                        Value::Int(g.n as i64),
                    ]
                })
                .collect();
            ResultSet::new(
                names(&[
                    "l_returnflag",
                    "l_linestatus",
                    "sum_qty",
                    "sum_base_price",
                    "sum_disc_price",
                    "sum_charge",
                    "avg_qty",
                    "avg_price",
                    "avg_disc",
                    "count_order",
                ]),
                order(rows, &[(0, false), (1, false)], None),
            )
        }
        QueryParams::Q2 {
            size,
            type_suffix,
            region,
        } => {
            let nations = region_nations(db, region);
            let in_region = |s: i64| nations.contains(&supp_by_key[&s].nationkey);
            let mut rows = Vec::new();
            for p in db
                .part
                .iter()
                .filter(|p| p.size == *size && p.ptype.ends_with(type_suffix.as_str()))
            {
                let offers: Vec<&PartSuppRow> = db
                    .partsupp
                    .iter()
                    .filter(|ps| ps.partkey == p.partkey && in_region(ps.suppkey))
                    .collect();
                let Some(min) = offers.iter().map(|ps| ps.supplycost).min() else {
                    continue;
                };
                for ps in offers.iter().filter(|ps| ps.supplycost == min) {
                    let s = supp_by_key[&ps.suppkey];
                    rows.push(vec![
                        money(s.acctbal as i128),
                        st(&s.name),
                        st(nation_name(db, s.nationkey)),
                        Value::Int(p.partkey),
                        st(&p.mfgr),
                        st(&s.address),
                        st(&s.phone),
                        st(&s.comment),
                    ]);
                }
            }
            ResultSet::new(
                names(&[
                    "s_acctbal",
                    "s_name",
                    "n_name",
                    "p_partkey",
                    "p_mfgr",
                    "s_address",
                    "s_phone",
                    "s_comment",
                ]),
                order(
                    rows,
                    &[(0, true), (2, false), (1, false), (3, false)],
                    Some(100),
                ),
            )
        }
        QueryParams::Q3 { segment, date: day } => {
            let custs: HashSet<i64> = db
                .customer
                .iter()
                .filter(|c| &c.mktsegment == segment)
                .map(|c| c.custkey)
                .collect();
            let mut rev: HashMap<i64, i128> = HashMap::new();
            for l in db.lineitem.iter().filter(|l| l.shipdate > *day) {
                let o = orders_by_key[&l.orderkey];
                if o.orderdate < *day && custs.contains(&o.custkey) {
                    *rev.entry(l.orderkey).or_default() += disc_price(l);
                }
            }
            let rows = rev
                .into_iter()
                .map(|(k, r)| {
                    let o = orders_by_key[&k];
                    vec![
                        Value::Int(k),
                        dec(r, 4),
                        date(o.orderdate),
                        Value::Int(o.shippriority),
                    ]
                })
                .collect();
            ResultSet::new(
                names(&["l_orderkey", "revenue", "o_orderdate", "o_shippriority"]),
                order(rows, &[(1, true), (2, false)], Some(10)),
            )
        }
        QueryParams::Q4 { date: day } => {
            let late: HashSet<i64> = db
                .lineitem
                .iter()
                .filter(|l| l.commitdate < l.receiptdate)
                .map(|l| l.orderkey)
                .collect();
            let end = day.add_months(3);
            let mut counts: BTreeMap<&str, i64> = BTreeMap::new();
            for o in db
                .orders
                .iter()
                .filter(|o| o.orderdate >= *day && o.orderdate < end && late.contains(&o.orderkey))
            {
                *counts.entry(&o.orderpriority).or_default() += 1;
            }
            let rows = counts
                .into_iter()
                .map(|(p, n)| vec![st(p), Value::Int(n)])
                .collect();
            ResultSet::new(
                names(&["o_orderpriority", "order_count"]),
                order(rows, &[(0, false)], None),
            )
        }
        QueryParams::Q5 { region, date: day } => {
            let nations = region_nations(db, region);
            let end = day.add_years(1);
            let mut rev: HashMap<i64, i128> = HashMap::new();
            for l in &db.lineitem {
                let o = orders_by_key[&l.orderkey];
                if o.orderdate < *day || o.orderdate >= end {
                    continue;
                }
                let cn = cust_by_key[&o.custkey].nationkey;
                let sn = supp_by_key[&l.suppkey].nationkey;
                if cn == sn && nations.contains(&sn) {
                    *rev.entry(sn).or_default() += disc_price(l);
                }
            }
            let rows = rev
                .into_iter()
                .map(|(n, r)| vec![st(nation_name(db, n)), dec(r, 4)])
                .collect();
            ResultSet::new(
                names(&["n_name", "revenue"]),
                order(rows, &[(1, true)], None),
            )
        }
        QueryParams::Q6 {
            date: day,
            discount,
            quantity,
        } => {
            let d = (discount.to_f64() * 100.0).round() as i64;
            let end = day.add_years(1);
            let mut total: Option<i128> = None;
            for l in &db.lineitem {
                if l.shipdate >= *day
                    && l.shipdate < end
                    && l.discount >= d - 1
                    && l.discount <= d + 1
                    && l.quantity < quantity * 100
                {
                    *total.get_or_insert(0) += l.extendedprice as i128 * l.discount as i128;
                }
            }
            ResultSet::new(
                names(&["revenue"]),
                vec![vec![total.map_or(Value::Null, |t| dec(t, 4))]],
            )
        }
        QueryParams::Q7 { nation1, nation2 } => {
            let (lo, hi) = (ymd(1995, 1, 1), ymd(1996, 12, 31));
            let mut groups: BTreeMap<(String, String, i64), i128> = BTreeMap::new();
            for l in db
                .lineitem
                .iter()
                .filter(|l| l.shipdate >= lo && l.shipdate <= hi)
            {
                let sn = nation_name(db, supp_by_key[&l.suppkey].nationkey);
                let cn = nation_name(
                    db,
                    cust_by_key[&orders_by_key[&l.orderkey].custkey].nationkey,
                );
                let pair = (sn == nation1 && cn == nation2) || (sn == nation2 && cn == nation1);
                if pair {
                    *groups
                        .entry((sn.to_string(), cn.to_string(), year(l.shipdate)))
                        .or_default() += disc_price(l);
                }
            }
            let rows = groups
                .into_iter()
                .map(|((s, c, y), v)| vec![st(&s), st(&c), Value::Int(y), dec(v, 4)])
                .collect();
            ResultSet::new(
                names(&["supp_nation", "cust_nation", "l_year", "revenue"]),
                order(rows, &[(0, false), (1, false), (2, false)], None),
            )
        }
        QueryParams::Q8 {
            nation,
            region,
            part_type,
        } => {
            let nations = region_nations(db, region);
            let (lo, hi) = (ymd(1995, 1, 1), ymd(1996, 12, 31));
            let mut groups: BTreeMap<i64, (i128, i128)> = BTreeMap::new();
            for l in &db.lineitem {
                if &part_by_key[&l.partkey].ptype != part_type {
                    continue;
                }
                let o = orders_by_key[&l.orderkey];
                if o.orderdate < lo
                    || o.orderdate > hi
                    || !nations.contains(&cust_by_key[&o.custkey].nationkey)
                {
                    continue;
                }
                let g = groups.entry(year(o.orderdate)).or_default();
                let v = disc_price(l);
                if nation_name(db, supp_by_key[&l.suppkey].nationkey) == nation {
                    g.0 += v;
                }
                g.1 += v;
            }
            let rows = groups
                .into_iter()
                .map(|(y, (n, t))| vec![Value::Int(y), money(div_round(n * 100, t))])
                .collect();
            ResultSet::new(
                names(&["o_year", "mkt_share"]),
                order(rows, &[(0, false)], None),
            )
        }
        QueryParams::Q9 { color } => {
            let cost: HashMap<(i64, i64), i64> = db
                .partsupp
                .iter()
                .map(|ps| ((ps.partkey, ps.suppkey), ps.supplycost))
                .collect();
            let mut groups: BTreeMap<(String, i64), i128> = BTreeMap::new();
            for l in &db.lineitem {
                if !part_by_key[&l.partkey].name.contains(color.as_str()) {
                    continue;
                }
                let amount =
                    disc_price(l) - cost[&(l.partkey, l.suppkey)] as i128 * l.quantity as i128;
                let n = nation_name(db, supp_by_key[&l.suppkey].nationkey).to_string();
                *groups
                    .entry((n, year(orders_by_key[&l.orderkey].orderdate)))
                    .or_default() += amount;
            }
            let rows = groups
                .into_iter()
                .map(|((n, y), v)| vec![st(&n), Value::Int(y), dec(v, 4)])
                .collect();
            ResultSet::new(
                names(&["nation", "o_year", "sum_profit"]),
                order(rows, &[(0, false), (1, true)], None),
            )
        }
        QueryParams::Q10 { date: day } => {
            let end = day.add_months(3);
            let mut rev: HashMap<i64, i128> = HashMap::new();
            for l in db.lineitem.iter().filter(|l| l.returnflag == 'R') {
                let o = orders_by_key[&l.orderkey];
                if o.orderdate >= *day && o.orderdate < end {
                    *rev.entry(o.custkey).or_default() += disc_price(l);
                }
            }
            let rows = rev
                .into_iter()
                .map(|(k, r)| {
                    let c = cust_by_key[&k];
                    vec![
                        Value::Int(k),
                        st(&c.name),
                        dec(r, 4),
                        money(c.acctbal as i128),
                        st(nation_name(db, c.nationkey)),
                        st(&c.address),
                        st(&c.phone),
                        st(&c.comment),
                    ]
                })
                .collect();
            ResultSet::new(
                names(&[
                    "c_custkey",
                    "c_name",
                    "revenue",
                    "c_acctbal",
                    "n_name",
                    "c_address",
                    "c_phone",
                    "c_comment",
                ]),
                order(rows, &[(2, true)], Some(20)),
            )
        }
        QueryParams::Q11 { nation } => {
            let mut value: HashMap<i64, i128> = HashMap::new();
            let mut total = 0i128;
            for ps in &db.partsupp {
                if nation_name(db, supp_by_key[&ps.suppkey].nationkey) != nation {
                    continue;
                }
                let v = ps.supplycost as i128 * ps.availqty as i128;
                *value.entry(ps.partkey).or_default() += v;
                total += v;
            }
            // fraction = 0.0001 / SF = 100 / micros
            let micros = db.sf.micros() as i128;
            let rows = value
                .into_iter()
                .filter(|(_, v)| v * micros > total * 100)
                .map(|(k, v)| vec![Value::Int(k), money(v)])
                .collect();
            ResultSet::new(
                names(&["ps_partkey", "value"]),
                order(rows, &[(1, true)], None),
            )
        }
        QueryParams::Q12 {
            shipmode1,
            shipmode2,
            date: day,
        } => {
            let end = day.add_years(1);
            let mut groups: BTreeMap<&str, (i64, i64)> = BTreeMap::new();
            for l in &db.lineitem {
                let mode_ok = &l.shipmode == shipmode1 || &l.shipmode == shipmode2;
                if mode_ok
                    && l.commitdate < l.receiptdate
                    && l.shipdate < l.commitdate
                    && l.receiptdate >= *day
                    && l.receiptdate < end
                {
                    let p = orders_by_key[&l.orderkey].orderpriority.as_str();
                    let g = groups.entry(&l.shipmode).or_default();
                    if p == "1-URGENT" || p == "2-HIGH" {
                        g.0 += 1;
                    } else {
                        g.1 += 1;
                    }
                }
            }
            let rows = groups
                .into_iter()
                .map(|(m, (h, lo))| vec![st(m), Value::Int(h), Value::Int(lo)])
                .collect();
            ResultSet::new(
                names(&["l_shipmode", "high_line_count", "low_line_count"]),
                order(rows, &[(0, false)], None),
            )
        }
        QueryParams::Q13 { word1, word2 } => {
            let mut per_cust: HashMap<i64, i64> =
                db.customer.iter().map(|c| (c.custkey, 0)).collect();
            for o in db
                .orders
                .iter()
                .filter(|o| !contains_in_order(&o.comment, word1, word2))
            {
                if let Some(n) = per_cust.get_mut(&o.custkey) {
                    *n += 1;
                }
            }
            let mut dist: BTreeMap<i64, i64> = BTreeMap::new();
            for n in per_cust.values() {
                *dist.entry(*n).or_default() += 1;
            }
            let rows = dist
                .into_iter()
                .map(|(c, n)| vec![Value::Int(c), Value::Int(n)])
                .collect();
            ResultSet::new(
                names(&["c_count", "custdist"]),
                order(rows, &[(1, true), (0, true)], None),
            )
        }
        QueryParams::Q14 { date: day } => {
            let end = day.add_months(1);
            let (mut promo, mut total, mut any) = (0i128, 0i128, false);
            for l in db
                .lineitem
                .iter()
                .filter(|l| l.shipdate >= *day && l.shipdate < end)
            {
                any = true;
                if part_by_key[&l.partkey].ptype.starts_with("PROMO") {
                    promo += disc_price(l);
                }
                total += disc_price(l);
            }
            let v = if any {
                money(div_round(promo * 10_000, total))
            } else {
                Value::Null
            };
            ResultSet::new(names(&["promo_revenue"]), vec![vec![v]])
        }
        QueryParams::Q15 { date: day } => {
            let end = day.add_months(3);
            let mut rev: HashMap<i64, i128> = HashMap::new();
            for l in db
                .lineitem
                .iter()
                .filter(|l| l.shipdate >= *day && l.shipdate < end)
            {
                *rev.entry(l.suppkey).or_default() += disc_price(l);
            }
            let best = rev.values().max().copied();
            let rows = rev
                .iter()
                .filter(|(_, r)| Some(**r) == best)
                .map(|(k, r)| {
                    let s = supp_by_key[k];
                    vec![
                        Value::Int(*k),
                        st(&s.name),
                        st(&s.address),
                        st(&s.phone),
                        dec(*r, 4),
                    ]
                })
                .collect();
            ResultSet::new(
                names(&[
                    "s_suppkey",
                    "s_name",
                    "s_address",
                    "s_phone",
                    "total_revenue",
                ]),
                order(rows, &[(0, false)], None),
            )
        }
        QueryParams::Q16 {
            brand,
            type_prefix,
            sizes,
        } => {
            let complainers: HashSet<i64> = db
                .supplier
                .iter()
                .filter(|s| contains_in_order(&s.comment, "Customer", "Complaints"))
                .map(|s| s.suppkey)
                .collect();
            let mut groups: BTreeMap<(String, String, i64), HashSet<i64>> = BTreeMap::new();
            for ps in db
                .partsupp
                .iter()
                .filter(|ps| !complainers.contains(&ps.suppkey))
            {
                let p = part_by_key[&ps.partkey];
                if &p.brand != brand
                    && !p.ptype.starts_with(type_prefix.as_str())
                    && sizes.contains(&p.size)
                {
                    groups
                        .entry((p.brand.clone(), p.ptype.clone(), p.size))
                        .or_default()
                        .insert(ps.suppkey);
                }
            }
            let rows = groups
                .into_iter()
                .map(|((b, t, z), s)| {
                    vec![st(&b), st(&t), Value::Int(z), Value::Int(s.len() as i64)]
                })
                .collect();
            ResultSet::new(
                names(&["p_brand", "p_type", "p_size", "supplier_cnt"]),
                order(rows, &[(3, true), (0, false), (1, false), (2, false)], None),
            )
        }
        QueryParams::Q17 { brand, container } => {
            let chosen: HashSet<i64> = db
                .part
                .iter()
                .filter(|p| &p.brand == brand && &p.container == container)
                .map(|p| p.partkey)
                .collect();
            let mut stats: HashMap<i64, (i128, i128)> = HashMap::new();
            for l in db.lineitem.iter().filter(|l| chosen.contains(&l.partkey)) {
                let s = stats.entry(l.partkey).or_default();
                s.0 += l.quantity as i128;
                s.1 += 1;
            }
            let mut total: Option<i128> = None;
            for l in db.lineitem.iter().filter(|l| chosen.contains(&l.partkey)) {
                let (sum, n) = stats[&l.partkey];
                if 5 * l.quantity as i128 * n < sum {
                    *total.get_or_insert(0) += l.extendedprice as i128;
                }
            }
            ResultSet::new(
                names(&["avg_yearly"]),
                vec![vec![total.map_or(Value::Null, |t| money(div_round(t, 7)))]],
            )
        }
        QueryParams::Q18 { quantity } => {
            let mut qty: HashMap<i64, i128> = HashMap::new();
            for l in &db.lineitem {
                *qty.entry(l.orderkey).or_default() += l.quantity as i128;
            }
            let rows = qty
                .into_iter()
                .filter(|(_, q)| *q > *quantity as i128 * 100)
                .map(|(k, q)| {
                    let o = orders_by_key[&k];
                    let c = cust_by_key[&o.custkey];
                    vec![
                        st(&c.name),
                        Value::Int(c.custkey),
                        Value::Int(k),
                        date(o.orderdate),
                        money(o.totalprice as i128),
                        money(q),
                    ]
                })
                .collect();
            ResultSet::new(
                names(&[
                    "c_name",
                    "c_custkey",
                    "o_orderkey",
                    "o_orderdate",
                    "o_totalprice",
                    "sum_quantity",
                ]),
                order(rows, &[(4, true), (3, false)], Some(100)),
            )
        }
        QueryParams::Q19 { quantities, brands } => {
            let containers: [&[&str]; 3] = [
                &["SM CASE", "SM BOX", "SM PACK", "SM PKG"],
                &["MED BAG", "MED BOX", "MED PKG", "MED PACK"],
                &["LG CASE", "LG BOX", "LG PACK", "LG PKG"],
            ];
            let max_size = [5, 10, 15];
            let mut total: Option<i128> = None;
            for l in &db.lineitem {
                if !(l.shipmode == "AIR" || l.shipmode == "AIR REG")
                    || l.shipinstruct != "DELIVER IN PERSON"
                {
                    continue;
                }
                let p = part_by_key[&l.partkey];
                let hit = (0..3).any(|i| {
                    p.brand == brands[i]
                        && containers[i].contains(&p.container.as_str())
                        && l.quantity >= quantities[i] * 100
                        && l.quantity <= (quantities[i] + 10) * 100
                        && p.size >= 1
                        && p.size <= max_size[i]
                });
                if hit {
                    *total.get_or_insert(0) += disc_price(l);
                }
            }
            ResultSet::new(
                names(&["revenue"]),
                vec![vec![total.map_or(Value::Null, |t| dec(t, 4))]],
            )
        }
        QueryParams::Q20 {
            color,
            date: day,
            nation,
        } => {
            let end = day.add_years(1);
            let mut shipped: HashMap<(i64, i64), i128> = HashMap::new();
            for l in db
                .lineitem
                .iter()
                .filter(|l| l.shipdate >= *day && l.shipdate < end)
            {
                *shipped.entry((l.partkey, l.suppkey)).or_default() += l.quantity as i128;
            }
            let mut candidates = HashSet::new();
            for ps in &db.partsupp {
                if !part_by_key[&ps.partkey].name.starts_with(color.as_str()) {
                    continue;
                }
                if let Some(q) = shipped.get(&(ps.partkey, ps.suppkey)) {
                    if 200 * ps.availqty as i128 > *q {
                        candidates.insert(ps.suppkey);
                    }
                }
            }
            let rows = db
                .supplier
                .iter()
                .filter(|s| {
                    candidates.contains(&s.suppkey) && nation_name(db, s.nationkey) == nation
                })
                .map(|s| vec![st(&s.name), st(&s.address)])
                .collect();
            ResultSet::new(
                names(&["s_name", "s_address"]),
                order(rows, &[(0, false)], None),
            )
        }
        QueryParams::Q21 { nation } => {
            let mut by_order: HashMap<i64, Vec<&LineItemRow>> = HashMap::new();
            for l in &db.lineitem {
                by_order.entry(l.orderkey).or_default().push(l);
            }
            let mut counts: HashMap<&str, i64> = HashMap::new();
            for l1 in db.lineitem.iter().filter(|l| l.receiptdate > l.commitdate) {
                let s = supp_by_key[&l1.suppkey];
                if nation_name(db, s.nationkey) != nation
                    || orders_by_key[&l1.orderkey].orderstatus != 'F'
                {
                    continue;
                }
                let lines = &by_order[&l1.orderkey];
                let multi = lines.iter().any(|l2| l2.suppkey != l1.suppkey);
                let other_late = lines
                    .iter()
                    .any(|l3| l3.suppkey != l1.suppkey && l3.receiptdate > l3.commitdate);
                if multi && !other_late {
                    *counts.entry(&s.name).or_default() += 1;
                }
            }
            let rows = counts
                .into_iter()
                .map(|(n, c)| vec![st(n), Value::Int(c)])
                .collect();
            ResultSet::new(
                names(&["s_name", "numwait"]),
                order(rows, &[(1, true), (0, false)], Some(100)),
            )
        }
        QueryParams::Q22 { codes } => {
            let code = |c: &CustomerRow| c.phone[..2].to_string();
            let pool: Vec<&CustomerRow> = db
                .customer
                .iter()
                .filter(|c| codes.contains(&code(c)))
                .collect();
            let positive: Vec<i128> = pool
                .iter()
                .filter(|c| c.acctbal > 0)
                .map(|c| c.acctbal as i128)
                .collect();
            let (sum, n) = (positive.iter().sum::<i128>(), positive.len() as i128);
            let has_orders: HashSet<i64> = db.orders.iter().map(|o| o.custkey).collect();
            let mut groups: BTreeMap<String, (i64, i128)> = BTreeMap::new();
            for c in pool {
                if n > 0 && c.acctbal as i128 * n > sum && !has_orders.contains(&c.custkey) {
                    let g = groups.entry(code(c)).or_default();
                    g.0 += 1;
                    g.1 += c.acctbal as i128;
                }
            }
            let rows = groups
                .into_iter()
                .map(|(k, (n, s))| vec![st(&k), Value::Int(n), money(s)])
                .collect();
            ResultSet::new(
                names(&["cntrycode", "numcust", "totacctbal"]),
                order(rows, &[(0, false)], None),
            )
        }
    }
}
