//! The 22 benchmark queries as plan constructors, with their substitution
//! parameters.

use std::fmt;
use std::ops::Bound;

use chrono::Datelike;
use rand::seq::{index, IndexedRandom};
use rand::Rng;

use crate::datagen::text::{
    COLORS, CONTAINER_KIND, CONTAINER_SIZE, NATIONS, REGIONS, SEGMENTS, SHIP_MODES, TYPE_FINISH,
    TYPE_MATERIAL, TYPE_SIZE,
};
use crate::datagen::Table;
use crate::error::{Error, Result};
use crate::exec::builder::{PlanContext, Rel};
use crate::exec::expr::{and, col, dec, int, or, text, Expr};
use crate::exec::plan::{
    avg, count, count_distinct, max, min, sum, AggExpr, JoinKind, PhysicalPlan,
};
use crate::storage::ColumnPredicate as P;
use crate::types::{Date, Decimal, Value};

use JoinKind::{Anti, Inner, Left, Semi};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QueryId(u8);

const NAMES: [&str; 22] = [
    "Pricing Summary Report",
    "Minimum Cost Supplier",
    "Shipping Priority",
    "Order Priority Checking",
    "Local Supplier Volume",
    "Forecasting Revenue Change",
    "Volume Shipping",
    "National Market Share",
    "Product Type Profit Measure",
    "Returned Item Reporting",
    "Important Stock Identification",
    "Shipping Modes and Order Priority",
    "Customer Distribution",
    "Promotion Effect",
    "Top Supplier",
    "Parts/Supplier Relationship",
    "Small-Quantity-Order Revenue",
    "Large Volume Customer",
    "Discounted Revenue",
    "Potential Part Promotion",
    "Suppliers Who Kept Orders Waiting",
    "Global Sales Opportunity",
];

/// Customary stream-0 permutation from the benchmark's ordering table.
pub const STREAM0_ORDER: [u8; 22] = [
    14, 2, 9, 20, 6, 17, 18, 8, 21, 13, 3, 22, 16, 4, 11, 15, 1, 10, 19, 5, 7, 12,
];

impl QueryId {
    pub fn new(n: u8) -> Result<QueryId> {
        if (1..=22).contains(&n) {
            Ok(QueryId(n))
        } else {
            Err(Error::InvalidParameter(format!(
                "no query Q{n}; expected 1..=22"
            )))
        }
    }

    pub fn all() -> impl Iterator<Item = QueryId> {
        (1..=22).map(QueryId)
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn name(self) -> &'static str {
        NAMES[self.0 as usize - 1]
    }

    /// `Q1 - Pricing Summary Report`
    pub fn title(self) -> String {
        format!("{self} - {}", self.name())
    }

    /// Whether the result order is fully defined by the query's sort keys.
    pub fn is_ordered(self) -> bool {
        !matches!(self.0, 6 | 14 | 17 | 19)
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

impl std::str::FromStr for QueryId {
    type Err = Error;
    fn from_str(s: &str) -> Result<QueryId> {
        let t = s.trim();
        let digits = t
            .strip_prefix('Q')
            .or_else(|| t.strip_prefix('q'))
            .unwrap_or(t);
        QueryId::new(
            digits
                .parse()
                .map_err(|_| Error::Parse(format!("invalid query id '{s}'")))?,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QueryParams {
    Q1 {
        delta_days: i32,
    },
    Q2 {
        size: i64,
        type_suffix: String,
        region: String,
    },
    Q3 {
        segment: String,
        date: Date,
    },
    Q4 {
        date: Date,
    },
    Q5 {
        region: String,
        date: Date,
    },
    Q6 {
        date: Date,
        discount: Decimal,
        quantity: i64,
    },
    Q7 {
        nation1: String,
        nation2: String,
    },
    Q8 {
        nation: String,
        region: String,
        part_type: String,
    },
    Q9 {
        color: String,
    },
    Q10 {
        date: Date,
    },
    /// The fraction is derived from the scale factor as `0.0001 / SF`.
    Q11 {
        nation: String,
    },
    Q12 {
        shipmode1: String,
        shipmode2: String,
        date: Date,
    },
    Q13 {
        word1: String,
        word2: String,
    },
    Q14 {
        date: Date,
    },
    Q15 {
        date: Date,
    },
    Q16 {
        brand: String,
        type_prefix: String,
        sizes: Vec<i64>,
    },
    Q17 {
        brand: String,
        container: String,
    },
    Q18 {
        quantity: i64,
    },
    Q19 {
        quantities: [i64; 3],
        brands: [String; 3],
    },
    Q20 {
        color: String,
        date: Date,
        nation: String,
    },
    Q21 {
        nation: String,
    },
    Q22 {
        codes: Vec<String>,
    },
}

const Q13_WORD1: [&str; 4] = ["special", "pending", "unusual", "express"];
const Q13_WORD2: [&str; 4] = ["packages", "requests", "accounts", "deposits"];

fn ymd(y: i32, m: u32, d: u32) -> Date {
    Date::from_ymd(y, m, d)
}

fn s(v: &str) -> String {
    v.to_string()
}

fn bad(q: u8, what: String) -> Error {
    Error::InvalidParameter(format!("Q{q}: {what}"))
}

fn member(q: u8, name: &str, v: &str, domain: &[&str]) -> Result<()> {
    if domain.contains(&v) {
        Ok(())
    } else {
        Err(bad(q, format!("{name} '{v}' is not one of {domain:?}")))
    }
}

fn nation_names() -> Vec<&'static str> {
    NATIONS.iter().map(|(n, _)| *n).collect()
}

fn first_of_month_in(q: u8, d: Date, from: (i32, u32), to: (i32, u32)) -> Result<()> {
    let n = d.to_naive();
    let ym = (n.year(), n.month());
    if n.day() != 1 || ym < from || ym > to {
        return Err(bad(
            q,
            format!("date {d} must be the first of a month in {from:?}..={to:?}"),
        ));
    }
    Ok(())
}

fn jan_first_in(q: u8, d: Date, years: std::ops::RangeInclusive<i32>) -> Result<()> {
    let n = d.to_naive();
    if n.month() != 1 || n.day() != 1 || !years.contains(&n.year()) {
        return Err(bad(
            q,
            format!("date {d} must be January 1st of a year in {years:?}"),
        ));
    }
    Ok(())
}

fn range<T: PartialOrd + fmt::Debug>(q: u8, name: &str, v: T, lo: T, hi: T) -> Result<()> {
    if v < lo || v > hi {
        return Err(bad(q, format!("{name} {v:?} outside {lo:?}..={hi:?}")));
    }
    Ok(())
}

fn brand_ok(q: u8, b: &str) -> Result<()> {
    let ok = b
        .strip_prefix("Brand#")
        .map(|mn| mn.len() == 2 && mn.bytes().all(|c| (b'1'..=b'5').contains(&c)))
        .unwrap_or(false);
    if ok {
        Ok(())
    } else {
        Err(bad(
            q,
            format!("brand '{b}' must be Brand#MN with M, N in 1..=5"),
        ))
    }
}

fn container_ok(q: u8, c: &str) -> Result<()> {
    match c.split_once(' ') {
        Some((a, b)) if CONTAINER_SIZE.contains(&a) && CONTAINER_KIND.contains(&b) => Ok(()),
        _ => Err(bad(q, format!("container '{c}' is not a valid container"))),
    }
}

fn distinct<T: Ord + Clone>(v: &[T]) -> bool {
    let mut x = v.to_vec();
    x.sort();
    x.dedup();
    x.len() == v.len()
}

fn random_brand<R: Rng>(rng: &mut R) -> String {
    format!(
        "Brand#{}{}",
        rng.random_range(1..=5),
        rng.random_range(1..=5)
    )
}

fn pick<R: Rng>(rng: &mut R, xs: &[&str]) -> String {
    xs.choose(rng).expect("non-empty domain").to_string()
}

fn random_month<R: Rng>(rng: &mut R, from: (i32, u32), months: u32) -> Date {
    ymd(from.0, from.1, 1).add_months(rng.random_range(0..months) as i32)
}

fn random_year<R: Rng>(rng: &mut R) -> Date {
    ymd(rng.random_range(1993..=1997), 1, 1)
}

impl QueryParams {
    /// Validation values from the benchmark's query definitions.
    pub fn defaults(q: QueryId) -> QueryParams {
        match q.0 {
            1 => QueryParams::Q1 { delta_days: 90 },
            2 => QueryParams::Q2 {
                size: 15,
                type_suffix: s("BRASS"),
                region: s("EUROPE"),
            },
            3 => QueryParams::Q3 {
                segment: s("BUILDING"),
                date: ymd(1995, 3, 15),
            },
            4 => QueryParams::Q4 {
                date: ymd(1993, 7, 1),
            },
            5 => QueryParams::Q5 {
                region: s("ASIA"),
                date: ymd(1994, 1, 1),
            },
            6 => QueryParams::Q6 {
                date: ymd(1994, 1, 1),
                discount: Decimal::from_cents(6),
                quantity: 24,
            },
            7 => QueryParams::Q7 {
                nation1: s("FRANCE"),
                nation2: s("GERMANY"),
            },
            8 => QueryParams::Q8 {
                nation: s("BRAZIL"),
                region: s("AMERICA"),
                part_type: s("ECONOMY ANODIZED STEEL"),
            },
            9 => QueryParams::Q9 { color: s("green") },
            10 => QueryParams::Q10 {
                date: ymd(1993, 10, 1),
            },
            11 => QueryParams::Q11 {
                nation: s("GERMANY"),
            },
            12 => QueryParams::Q12 {
                shipmode1: s("MAIL"),
                shipmode2: s("SHIP"),
                date: ymd(1994, 1, 1),
            },
            13 => QueryParams::Q13 {
                word1: s("special"),
                word2: s("requests"),
            },
            14 => QueryParams::Q14 {
                date: ymd(1995, 9, 1),
            },
            15 => QueryParams::Q15 {
                date: ymd(1996, 1, 1),
            },
            16 => QueryParams::Q16 {
                brand: s("Brand#45"),
                type_prefix: s("MEDIUM POLISHED"),
                sizes: vec![49, 14, 23, 45, 19, 3, 36, 9],
            },
            17 => QueryParams::Q17 {
                brand: s("Brand#23"),
                container: s("MED BOX"),
            },
            18 => QueryParams::Q18 { quantity: 300 },
            19 => QueryParams::Q19 {
                quantities: [1, 10, 20],
                brands: [s("Brand#12"), s("Brand#23"), s("Brand#34")],
            },
            20 => QueryParams::Q20 {
                color: s("forest"),
                date: ymd(1994, 1, 1),
                nation: s("CANADA"),
            },
            21 => QueryParams::Q21 {
                nation: s("SAUDI ARABIA"),
            },
            _ => QueryParams::Q22 {
                codes: ["13", "31", "23", "29", "30", "18", "17"].map(s).to_vec(),
            },
        }
    }

    /// Draws every parameter uniformly from its domain.
    pub fn random<R: Rng>(q: QueryId, rng: &mut R) -> QueryParams {
        match q.0 {
            1 => QueryParams::Q1 {
                delta_days: rng.random_range(60..=120),
            },
            2 => QueryParams::Q2 {
                size: rng.random_range(1..=50),
                type_suffix: pick(rng, &TYPE_MATERIAL),
                region: pick(rng, &REGIONS),
            },
            3 => QueryParams::Q3 {
                segment: pick(rng, &SEGMENTS),
                date: ymd(1995, 3, rng.random_range(1..=31)),
            },
            4 => QueryParams::Q4 {
                date: random_month(rng, (1993, 1), 58),
            },
            5 => QueryParams::Q5 {
                region: pick(rng, &REGIONS),
                date: random_year(rng),
            },
            6 => QueryParams::Q6 {
                date: random_year(rng),
                discount: Decimal::from_cents(rng.random_range(2..=9)),
                quantity: rng.random_range(24..=25),
            },
            7 => {
                let ix = index::sample(rng, NATIONS.len(), 2);
                QueryParams::Q7 {
                    nation1: s(NATIONS[ix.index(0)].0),
                    nation2: s(NATIONS[ix.index(1)].0),
                }
            }
            8 => {
                let (nation, region) = NATIONS[rng.random_range(0..NATIONS.len())];
                QueryParams::Q8 {
                    nation: s(nation),
                    region: s(REGIONS[region as usize]),
                    part_type: format!(
                        "{} {} {}",
                        pick(rng, &TYPE_SIZE),
                        pick(rng, &TYPE_FINISH),
                        pick(rng, &TYPE_MATERIAL)
                    ),
                }
            }
            9 => QueryParams::Q9 {
                color: pick(rng, &COLORS),
            },
            10 => QueryParams::Q10 {
                date: random_month(rng, (1993, 2), 24),
            },
            11 => QueryParams::Q11 {
                nation: pick(rng, &nation_names()),
            },
            12 => {
                let ix = index::sample(rng, SHIP_MODES.len(), 2);
                QueryParams::Q12 {
                    shipmode1: s(SHIP_MODES[ix.index(0)]),
                    shipmode2: s(SHIP_MODES[ix.index(1)]),
                    date: random_year(rng),
                }
            }
            13 => QueryParams::Q13 {
                word1: pick(rng, &Q13_WORD1),
                word2: pick(rng, &Q13_WORD2),
            },
            14 => QueryParams::Q14 {
                date: random_month(rng, (1993, 1), 60),
            },
            15 => QueryParams::Q15 {
                date: random_month(rng, (1993, 1), 58),
            },
            16 => QueryParams::Q16 {
                brand: random_brand(rng),
                type_prefix: format!("{} {}", pick(rng, &TYPE_SIZE), pick(rng, &TYPE_FINISH)),
                sizes: index::sample(rng, 50, 8)
                    .iter()
                    .map(|i| i as i64 + 1)
                    .collect(),
            },
            17 => QueryParams::Q17 {
                brand: random_brand(rng),
                container: format!(
                    "{} {}",
                    pick(rng, &CONTAINER_SIZE),
                    pick(rng, &CONTAINER_KIND)
                ),
            },
            18 => QueryParams::Q18 {
                quantity: rng.random_range(312..=315),
            },
            19 => QueryParams::Q19 {
                quantities: [
                    rng.random_range(1..=10),
                    rng.random_range(10..=20),
                    rng.random_range(20..=30),
                ],
                brands: [random_brand(rng), random_brand(rng), random_brand(rng)],
            },
            20 => QueryParams::Q20 {
                color: pick(rng, &COLORS),
                date: random_year(rng),
                nation: pick(rng, &nation_names()),
            },
            21 => QueryParams::Q21 {
                nation: pick(rng, &nation_names()),
            },
            _ => QueryParams::Q22 {
                codes: index::sample(rng, 25, 7)
                    .iter()
                    .map(|i| (i + 10).to_string())
                    .collect(),
            },
        }
    }

    pub fn query(&self) -> QueryId {
        QueryId(match self {
            QueryParams::Q1 { .. } => 1,
            QueryParams::Q2 { .. } => 2,
            QueryParams::Q3 { .. } => 3,
            QueryParams::Q4 { .. } => 4,
            QueryParams::Q5 { .. } => 5,
            QueryParams::Q6 { .. } => 6,
            QueryParams::Q7 { .. } => 7,
            QueryParams::Q8 { .. } => 8,
            QueryParams::Q9 { .. } => 9,
            QueryParams::Q10 { .. } => 10,
            QueryParams::Q11 { .. } => 11,
            QueryParams::Q12 { .. } => 12,
            QueryParams::Q13 { .. } => 13,
            QueryParams::Q14 { .. } => 14,
            QueryParams::Q15 { .. } => 15,
            QueryParams::Q16 { .. } => 16,
            QueryParams::Q17 { .. } => 17,
            QueryParams::Q18 { .. } => 18,
            QueryParams::Q19 { .. } => 19,
            QueryParams::Q20 { .. } => 20,
            QueryParams::Q21 { .. } => 21,
            QueryParams::Q22 { .. } => 22,
        })
    }

    /// Checks every parameter against its documented domain.
    pub fn validate(&self) -> Result<()> {
        let q = self.query().0;
        let nations = nation_names();
        match self {
            QueryParams::Q1 { delta_days } => range(q, "delta", *delta_days, 60, 120),
            QueryParams::Q2 {
                size,
                type_suffix,
                region,
            } => {
                range(q, "size", *size, 1, 50)?;
                member(q, "type", type_suffix, &TYPE_MATERIAL)?;
                member(q, "region", region, &REGIONS)
            }
            QueryParams::Q3 { segment, date } => {
                member(q, "segment", segment, &SEGMENTS)?;
                range(q, "date", *date, ymd(1995, 3, 1), ymd(1995, 3, 31))
            }
            QueryParams::Q4 { date } => first_of_month_in(q, *date, (1993, 1), (1997, 10)),
            QueryParams::Q5 { region, date } => {
                member(q, "region", region, &REGIONS)?;
                jan_first_in(q, *date, 1993..=1997)
            }
            QueryParams::Q6 {
                date,
                discount,
                quantity,
            } => {
                jan_first_in(q, *date, 1993..=1997)?;
                range(
                    q,
                    "discount",
                    *discount,
                    Decimal::from_cents(2),
                    Decimal::from_cents(9),
                )?;
                range(q, "quantity", *quantity, 24, 25)
            }
            QueryParams::Q7 { nation1, nation2 } => {
                member(q, "nation1", nation1, &nations)?;
                member(q, "nation2", nation2, &nations)?;
                if nation1 == nation2 {
                    return Err(bad(q, "nations must differ".into()));
                }
                Ok(())
            }
            QueryParams::Q8 {
                nation,
                region,
                part_type,
            } => {
                member(q, "nation", nation, &nations)?;
                member(q, "region", region, &REGIONS)?;
                let rk = NATIONS
                    .iter()
                    .find(|(n, _)| n == nation)
                    .map(|(_, r)| *r as usize)
                    .unwrap_or(0);
                if REGIONS[rk] != region {
                    return Err(bad(q, format!("{nation} is not in {region}")));
                }
                let parts: Vec<&str> = part_type.split(' ').collect();
                match parts.as_slice() {
                    [a, b, c]
                        if TYPE_SIZE.contains(a)
                            && TYPE_FINISH.contains(b)
                            && TYPE_MATERIAL.contains(c) =>
                    {
                        Ok(())
                    }
                    _ => Err(bad(
                        q,
                        format!("type '{part_type}' is not a valid part type"),
                    )),
                }
            }
            QueryParams::Q9 { color } => member(q, "color", color, &COLORS),
            QueryParams::Q10 { date } => first_of_month_in(q, *date, (1993, 2), (1995, 1)),
            QueryParams::Q11 { nation } => member(q, "nation", nation, &nations),
            QueryParams::Q12 {
                shipmode1,
                shipmode2,
                date,
            } => {
                member(q, "shipmode1", shipmode1, &SHIP_MODES)?;
                member(q, "shipmode2", shipmode2, &SHIP_MODES)?;
                if shipmode1 == shipmode2 {
                    return Err(bad(q, "ship modes must differ".into()));
                }
                jan_first_in(q, *date, 1993..=1997)
            }
            QueryParams::Q13 { word1, word2 } => {
                member(q, "word1", word1, &Q13_WORD1)?;
                member(q, "word2", word2, &Q13_WORD2)
            }
            QueryParams::Q14 { date } => first_of_month_in(q, *date, (1993, 1), (1997, 12)),
            QueryParams::Q15 { date } => first_of_month_in(q, *date, (1993, 1), (1997, 10)),
            QueryParams::Q16 {
                brand,
                type_prefix,
                sizes,
            } => {
                brand_ok(q, brand)?;
                match type_prefix.split_once(' ') {
                    Some((a, b)) if TYPE_SIZE.contains(&a) && TYPE_FINISH.contains(&b) => {}
                    _ => return Err(bad(q, format!("type prefix '{type_prefix}' is not valid"))),
                }
                if sizes.len() != 8
                    || !distinct(sizes)
                    || sizes.iter().any(|z| !(1..=50).contains(z))
                {
                    return Err(bad(q, "sizes must be 8 distinct values in 1..=50".into()));
                }
                Ok(())
            }
            QueryParams::Q17 { brand, container } => {
                brand_ok(q, brand)?;
                container_ok(q, container)
            }
            QueryParams::Q18 { quantity } => range(q, "quantity", *quantity, 300, 315),
            QueryParams::Q19 { quantities, brands } => {
                range(q, "quantity1", quantities[0], 1, 10)?;
                range(q, "quantity2", quantities[1], 10, 20)?;
                range(q, "quantity3", quantities[2], 20, 30)?;
                brands.iter().try_for_each(|b| brand_ok(q, b))
            }
            QueryParams::Q20 {
                color,
                date,
                nation,
            } => {
                member(q, "color", color, &COLORS)?;
                jan_first_in(q, *date, 1993..=1997)?;
                member(q, "nation", nation, &nations)
            }
            QueryParams::Q21 { nation } => member(q, "nation", nation, &nations),
            QueryParams::Q22 { codes } => {
                let ok = codes.len() == 7
                    && distinct(codes)
                    && codes.iter().all(|c| {
                        c.parse::<u8>().is_ok_and(|n| (10..=34).contains(&n)) && c.len() == 2
                    });
                if ok {
                    Ok(())
                } else {
                    Err(bad(
                        q,
                        "country codes must be 7 distinct values in 10..=34".into(),
                    ))
                }
            }
        }
    }
}

impl fmt::Display for QueryParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dbg = format!("{self:?}");
        let body = dbg.split_once(' ').map(|(_, b)| b).unwrap_or("");
        write!(f, "{body}")
    }
}

fn d(v: Date) -> Value {
    Value::Date(v)
}

fn sv(v: &str) -> Value {
    Value::str(v)
}

fn revenue() -> Expr {
    col("l_extendedprice").mul(dec("1").sub(col("l_discount")))
}

/// Builds the distributed plan for one query.
pub fn plan_for(params: &QueryParams, ctx: &PlanContext) -> Result<PhysicalPlan> {
    params.validate()?;
    let c = ctx;
    match params {
        QueryParams::Q1 { delta_days } => {
            let cutoff = ymd(1998, 12, 1).add_days(-delta_days);
            let charge = revenue().mul(dec("1").add(col("l_tax")));
            c.scan(
                Table::LineItem,
                &[
                    "l_returnflag",
                    "l_linestatus",
                    "l_quantity",
                    "l_extendedprice",
                    "l_discount",
                    "l_tax",
                    "l_shipdate",
                ],
                vec![P::range(
                    "l_shipdate",
                    Bound::Unbounded,
                    Bound::Included(d(cutoff)),
                )],
            )
            .aggregate(
                &["l_returnflag", "l_linestatus"],
                vec![
                    sum(col("l_quantity"), "sum_qty"),
                    sum(col("l_extendedprice"), "sum_base_price"),
                    sum(revenue(), "sum_disc_price"),
                    sum(charge, "sum_charge"),
                    avg(col("l_quantity"), "avg_qty"),
                    avg(col("l_extendedprice"), "avg_price"),
                    avg(col("l_discount"), "avg_disc"),
                    AggExpr::count_star("count_order"),
                ],
            )?
            .finish(&[("l_returnflag", false), ("l_linestatus", false)], None)
        }
        QueryParams::Q2 {
            size,
            type_suffix,
            region,
        } => {
            let ps_region = c
                .scan(
                    Table::PartSupp,
                    &["ps_partkey", "ps_suppkey", "ps_supplycost"],
                    vec![],
                )
                .join(
                    region_suppliers(c, region)?,
                    &[("ps_suppkey", "s_suppkey")],
                    Inner,
                )?;
            let min_cost = ps_region
                .clone()
                .aggregate(&["ps_partkey"], vec![min(col("ps_supplycost"), "min_cost")])?
                .select(&["ps_partkey AS mc_partkey", "min_cost"])?;
            let parts = c
                .scan(
                    Table::Part,
                    &["p_partkey", "p_mfgr", "p_size", "p_type"],
                    vec![P::eq("p_size", Value::Int(*size))],
                )
                .filter(col("p_type").like(&format!("%{type_suffix}")))?;
            ps_region
                .join(parts, &[("ps_partkey", "p_partkey")], Inner)?
                .join(
                    min_cost,
                    &[("ps_partkey", "mc_partkey"), ("ps_supplycost", "min_cost")],
                    Inner,
                )?
                .select(&[
                    "s_acctbal",
                    "s_name",
                    "n_name",
                    "p_partkey",
                    "p_mfgr",
                    "s_address",
                    "s_phone",
                    "s_comment",
                ])?
                .finish(
                    &[
                        ("s_acctbal", true),
                        ("n_name", false),
                        ("s_name", false),
                        ("p_partkey", false),
                    ],
                    Some(100),
                )
        }
        QueryParams::Q3 { segment, date: day } => {
            let cust = c.scan(
                Table::Customer,
                &["c_custkey", "c_mktsegment"],
                vec![P::eq("c_mktsegment", sv(segment))],
            );
            let orders = c
                .scan(
                    Table::Orders,
                    &["o_orderkey", "o_custkey", "o_orderdate", "o_shippriority"],
                    vec![P::range(
                        "o_orderdate",
                        Bound::Unbounded,
                        Bound::Excluded(d(*day)),
                    )],
                )
                .join(cust, &[("o_custkey", "c_custkey")], Semi)?;
            c.scan(
                Table::LineItem,
                &["l_orderkey", "l_extendedprice", "l_discount", "l_shipdate"],
                vec![P::range(
                    "l_shipdate",
                    Bound::Excluded(d(*day)),
                    Bound::Unbounded,
                )],
            )
            .join(orders, &[("l_orderkey", "o_orderkey")], Inner)?
            .aggregate(
                &["l_orderkey", "o_orderdate", "o_shippriority"],
                vec![sum(revenue(), "revenue")],
            )?
            .select(&["l_orderkey", "revenue", "o_orderdate", "o_shippriority"])?
            .finish(&[("revenue", true), ("o_orderdate", false)], Some(10))
        }
        QueryParams::Q4 { date: day } => {
            let late = c
                .scan(
                    Table::LineItem,
                    &["l_orderkey", "l_commitdate", "l_receiptdate"],
                    vec![],
                )
                .filter(col("l_commitdate").lt(col("l_receiptdate")))?;
            c.scan(
                Table::Orders,
                &["o_orderkey", "o_orderpriority", "o_orderdate"],
                vec![P::half_open("o_orderdate", d(*day), d(day.add_months(3)))],
            )
            .join(late, &[("o_orderkey", "l_orderkey")], Semi)?
            .aggregate(
                &["o_orderpriority"],
                vec![AggExpr::count_star("order_count")],
            )?
            .finish(&[("o_orderpriority", false)], None)
        }
        QueryParams::Q5 { region, date: day } => {
            let supp = c
                .scan(Table::Supplier, &["s_suppkey", "s_nationkey"], vec![])
                .join(
                    region_nations(c, region)?,
                    &[("s_nationkey", "n_nationkey")],
                    Inner,
                )?;
            let orders = c
                .scan(
                    Table::Orders,
                    &["o_orderkey", "o_custkey", "o_orderdate"],
                    vec![P::half_open("o_orderdate", d(*day), d(day.add_years(1)))],
                )
                .join(
                    c.scan(Table::Customer, &["c_custkey", "c_nationkey"], vec![]),
                    &[("o_custkey", "c_custkey")],
                    Inner,
                )?;
            c.scan(
                Table::LineItem,
                &["l_orderkey", "l_suppkey", "l_extendedprice", "l_discount"],
                vec![],
            )
            .join(orders, &[("l_orderkey", "o_orderkey")], Inner)?
            .join(
                supp,
                &[("l_suppkey", "s_suppkey"), ("c_nationkey", "s_nationkey")],
                Inner,
            )?
            .aggregate(&["n_name"], vec![sum(revenue(), "revenue")])?
            .finish(&[("revenue", true)], None)
        }
        QueryParams::Q6 {
            date: day,
            discount,
            quantity,
        } => {
            let step = Decimal::from_cents(1);
            c.scan(
                Table::LineItem,
                &["l_extendedprice", "l_discount", "l_shipdate", "l_quantity"],
                vec![
                    P::half_open("l_shipdate", d(*day), d(day.add_years(1))),
                    P::between(
                        "l_discount",
                        Value::Dec(discount.sub(step)),
                        Value::Dec(discount.add(step)),
                    ),
                    P::range(
                        "l_quantity",
                        Bound::Unbounded,
                        Bound::Excluded(Value::Int(*quantity)),
                    ),
                ],
            )
            .aggregate(
                &[],
                vec![sum(
                    col("l_extendedprice").mul(col("l_discount")),
                    "revenue",
                )],
            )?
            .finish(&[], None)
        }
        QueryParams::Q7 { nation1, nation2 } => {
            let pair = vec![sv(nation1), sv(nation2)];
            let n_supp = c
                .scan(
                    Table::Nation,
                    &["n_nationkey", "n_name"],
                    vec![P::in_list("n_name", pair.clone())],
                )
                .select(&["n_nationkey AS n1_nationkey", "n_name AS supp_nation"])?;
            let n_cust = c
                .scan(
                    Table::Nation,
                    &["n_nationkey", "n_name"],
                    vec![P::in_list("n_name", pair)],
                )
                .select(&["n_nationkey AS n2_nationkey", "n_name AS cust_nation"])?;
            let supp = c
                .scan(Table::Supplier, &["s_suppkey", "s_nationkey"], vec![])
                .join(n_supp, &[("s_nationkey", "n1_nationkey")], Inner)?;
            let cust = c
                .scan(Table::Customer, &["c_custkey", "c_nationkey"], vec![])
                .join(n_cust, &[("c_nationkey", "n2_nationkey")], Inner)?;
            let orders = c
                .scan(Table::Orders, &["o_orderkey", "o_custkey"], vec![])
                .join(cust, &[("o_custkey", "c_custkey")], Inner)?;
            let (n1, n2) = (text(nation1), text(nation2));
            c.scan(
                Table::LineItem,
                &[
                    "l_orderkey",
                    "l_suppkey",
                    "l_extendedprice",
                    "l_discount",
                    "l_shipdate",
                ],
                vec![P::between(
                    "l_shipdate",
                    d(ymd(1995, 1, 1)),
                    d(ymd(1996, 12, 31)),
                )],
            )
            .join(orders, &[("l_orderkey", "o_orderkey")], Inner)?
            .join(supp, &[("l_suppkey", "s_suppkey")], Inner)?
            .filter(or(vec![
                and(vec![
                    col("supp_nation").eq(n1.clone()),
                    col("cust_nation").eq(n2.clone()),
                ]),
                and(vec![col("supp_nation").eq(n2), col("cust_nation").eq(n1)]),
            ]))?
            .project(vec![
                (col("supp_nation"), "supp_nation"),
                (col("cust_nation"), "cust_nation"),
                (col("l_shipdate").year(), "l_year"),
                (revenue(), "volume"),
            ])?
            .aggregate(
                &["supp_nation", "cust_nation", "l_year"],
                vec![sum(col("volume"), "revenue")],
            )?
            .finish(
                &[
                    ("supp_nation", false),
                    ("cust_nation", false),
                    ("l_year", false),
                ],
                None,
            )
        }
        QueryParams::Q8 {
            nation,
            region,
            part_type,
        } => {
            let cust = c
                .scan(Table::Customer, &["c_custkey", "c_nationkey"], vec![])
                .join(
                    region_nations(c, region)?,
                    &[("c_nationkey", "n_nationkey")],
                    Semi,
                )?;
            let orders = c
                .scan(
                    Table::Orders,
                    &["o_orderkey", "o_custkey", "o_orderdate"],
                    vec![P::between(
                        "o_orderdate",
                        d(ymd(1995, 1, 1)),
                        d(ymd(1996, 12, 31)),
                    )],
                )
                .join(cust, &[("o_custkey", "c_custkey")], Semi)?;
            let supp_nation = c
                .scan(Table::Nation, &["n_nationkey", "n_name"], vec![])
                .select(&["n_nationkey AS n2_nationkey", "n_name AS nation"])?;
            let supp = c
                .scan(Table::Supplier, &["s_suppkey", "s_nationkey"], vec![])
                .join(supp_nation, &[("s_nationkey", "n2_nationkey")], Inner)?;
            let parts = c.scan(
                Table::Part,
                &["p_partkey", "p_type"],
                vec![P::eq("p_type", sv(part_type))],
            );
            c.scan(
                Table::LineItem,
                &[
                    "l_orderkey",
                    "l_partkey",
                    "l_suppkey",
                    "l_extendedprice",
                    "l_discount",
                ],
                vec![],
            )
            .join(orders, &[("l_orderkey", "o_orderkey")], Inner)?
            .join(parts, &[("l_partkey", "p_partkey")], Semi)?
            .join(supp, &[("l_suppkey", "s_suppkey")], Inner)?
            .project(vec![
                (col("o_orderdate").year(), "o_year"),
                (revenue(), "volume"),
                (col("nation"), "nation"),
            ])?
            .project(vec![
                (col("o_year"), "o_year"),
                (
                    Expr::case(col("nation").eq(text(nation)), col("volume"), dec("0.00")),
                    "nation_volume",
                ),
                (col("volume"), "volume"),
            ])?
            .aggregate(
                &["o_year"],
                vec![
                    sum(col("nation_volume"), "nation_sum"),
                    sum(col("volume"), "total_sum"),
                ],
            )?
            .project(vec![
                (col("o_year"), "o_year"),
                (col("nation_sum").div(col("total_sum"), 2), "mkt_share"),
            ])?
            .finish(&[("o_year", false)], None)
        }
        QueryParams::Q9 { color } => {
            let parts = c
                .scan(Table::Part, &["p_partkey", "p_name"], vec![])
                .filter(col("p_name").like(&format!("%{color}%")))?;
            let supp = c
                .scan(Table::Supplier, &["s_suppkey", "s_nationkey"], vec![])
                .join(
                    c.scan(Table::Nation, &["n_nationkey", "n_name"], vec![]),
                    &[("s_nationkey", "n_nationkey")],
                    Inner,
                )?;
            let ps = c.scan(
                Table::PartSupp,
                &["ps_partkey", "ps_suppkey", "ps_supplycost"],
                vec![],
            );
            c.scan(
                Table::LineItem,
                &[
                    "l_orderkey",
                    "l_partkey",
                    "l_suppkey",
                    "l_quantity",
                    "l_extendedprice",
                    "l_discount",
                ],
                vec![],
            )
            .join(
                c.scan(Table::Orders, &["o_orderkey", "o_orderdate"], vec![]),
                &[("l_orderkey", "o_orderkey")],
                Inner,
            )?
            .join(parts, &[("l_partkey", "p_partkey")], Semi)?
            .join(
                ps,
                &[("l_partkey", "ps_partkey"), ("l_suppkey", "ps_suppkey")],
                Inner,
            )?
            .join(supp, &[("l_suppkey", "s_suppkey")], Inner)?
            .project(vec![
                (col("n_name"), "nation"),
                (col("o_orderdate").year(), "o_year"),
                (
                    revenue().sub(col("ps_supplycost").mul(col("l_quantity"))),
                    "amount",
                ),
            ])?
            .aggregate(
                &["nation", "o_year"],
                vec![sum(col("amount"), "sum_profit")],
            )?
            .finish(&[("nation", false), ("o_year", true)], None)
        }
        QueryParams::Q10 { date: day } => {
            let cust = c
                .scan(
                    Table::Customer,
                    &[
                        "c_custkey",
                        "c_name",
                        "c_address",
                        "c_nationkey",
                        "c_phone",
                        "c_acctbal",
                        "c_comment",
                    ],
                    vec![],
                )
                .join(
                    c.scan(Table::Nation, &["n_nationkey", "n_name"], vec![]),
                    &[("c_nationkey", "n_nationkey")],
                    Inner,
                )?;
            let orders = c.scan(
                Table::Orders,
                &["o_orderkey", "o_custkey", "o_orderdate"],
                vec![P::half_open("o_orderdate", d(*day), d(day.add_months(3)))],
            );
            c.scan(
                Table::LineItem,
                &[
                    "l_orderkey",
                    "l_extendedprice",
                    "l_discount",
                    "l_returnflag",
                ],
                vec![P::eq("l_returnflag", sv("R"))],
            )
            .join(orders, &[("l_orderkey", "o_orderkey")], Inner)?
            .join(cust, &[("o_custkey", "c_custkey")], Inner)?
            .aggregate(
                &[
                    "c_custkey",
                    "c_name",
                    "c_acctbal",
                    "c_phone",
                    "n_name",
                    "c_address",
                    "c_comment",
                ],
                vec![sum(revenue(), "revenue")],
            )?
            .select(&[
                "c_custkey",
                "c_name",
                "revenue",
                "c_acctbal",
                "n_name",
                "c_address",
                "c_phone",
                "c_comment",
            ])?
            .finish(&[("revenue", true)], Some(20))
        }
        QueryParams::Q11 { nation } => {
            let supp = c
                .scan(Table::Supplier, &["s_suppkey", "s_nationkey"], vec![])
                .join(
                    c.scan(
                        Table::Nation,
                        &["n_nationkey", "n_name"],
                        vec![P::eq("n_name", sv(nation))],
                    ),
                    &[("s_nationkey", "n_nationkey")],
                    Semi,
                )?;
            let stock = c
                .scan(
                    Table::PartSupp,
                    &["ps_partkey", "ps_suppkey", "ps_availqty", "ps_supplycost"],
                    vec![],
                )
                .join(supp, &[("ps_suppkey", "s_suppkey")], Semi)?
                .project(vec![
                    (col("ps_partkey"), "ps_partkey"),
                    (col("ps_supplycost").mul(col("ps_availqty")), "v"),
                ])?;
            let total = stock.clone().aggregate(&[], vec![sum(col("v"), "total")])?;
            // value > total * 0.0001 / SF, with SF = micros / 10^6
            stock
                .aggregate(&["ps_partkey"], vec![sum(col("v"), "value")])?
                .join(total, &[], Inner)?
                .filter(
                    col("value")
                        .mul(int(c.sf.micros() as i64))
                        .gt(col("total").mul(int(100))),
                )?
                .select(&["ps_partkey", "value"])?
                .finish(&[("value", true)], None)
        }
        QueryParams::Q12 {
            shipmode1,
            shipmode2,
            date: day,
        } => {
            let high = col("o_orderpriority").in_list(vec![sv("1-URGENT"), sv("2-HIGH")]);
            c.scan(
                Table::LineItem,
                &[
                    "l_orderkey",
                    "l_shipmode",
                    "l_commitdate",
                    "l_receiptdate",
                    "l_shipdate",
                ],
                vec![
                    P::in_list("l_shipmode", vec![sv(shipmode1), sv(shipmode2)]),
                    P::half_open("l_receiptdate", d(*day), d(day.add_years(1))),
                ],
            )
            .filter(and(vec![
                col("l_commitdate").lt(col("l_receiptdate")),
                col("l_shipdate").lt(col("l_commitdate")),
            ]))?
            .join(
                c.scan(Table::Orders, &["o_orderkey", "o_orderpriority"], vec![]),
                &[("l_orderkey", "o_orderkey")],
                Inner,
            )?
            .project(vec![
                (col("l_shipmode"), "l_shipmode"),
                (Expr::case(high.clone(), int(1), int(0)), "high"),
                (Expr::case(high, int(0), int(1)), "low"),
            ])?
            .aggregate(
                &["l_shipmode"],
                vec![
                    sum(col("high"), "high_line_count"),
                    sum(col("low"), "low_line_count"),
                ],
            )?
            .finish(&[("l_shipmode", false)], None)
        }
        QueryParams::Q13 { word1, word2 } => {
            let orders = c
                .scan(
                    Table::Orders,
                    &["o_orderkey", "o_custkey", "o_comment"],
                    vec![],
                )
                .filter(col("o_comment").not_like(&format!("%{word1}%{word2}%")))?;
            c.scan(Table::Customer, &["c_custkey"], vec![])
                .join(orders, &[("c_custkey", "o_custkey")], Left)?
                .aggregate(&["c_custkey"], vec![count(col("o_orderkey"), "c_count")])?
                .aggregate(&["c_count"], vec![AggExpr::count_star("custdist")])?
                .finish(&[("custdist", true), ("c_count", true)], None)
        }
        QueryParams::Q14 { date: day } => c
            .scan(
                Table::LineItem,
                &["l_partkey", "l_extendedprice", "l_discount", "l_shipdate"],
                vec![P::half_open("l_shipdate", d(*day), d(day.add_months(1)))],
            )
            .join(
                c.scan(Table::Part, &["p_partkey", "p_type"], vec![]),
                &[("l_partkey", "p_partkey")],
                Inner,
            )?
            .project(vec![
                (
                    Expr::case(col("p_type").like("PROMO%"), revenue(), dec("0.00")),
                    "promo",
                ),
                (revenue(), "rev"),
            ])?
            .aggregate(
                &[],
                vec![sum(col("promo"), "promo_sum"), sum(col("rev"), "rev_sum")],
            )?
            .project(vec![(
                dec("100.00").mul(col("promo_sum")).div(col("rev_sum"), 2),
                "promo_revenue",
            )])?
            .finish(&[], None),
        QueryParams::Q15 { date: day } => {
            let revenue0 = c
                .scan(
                    Table::LineItem,
                    &["l_suppkey", "l_extendedprice", "l_discount", "l_shipdate"],
                    vec![P::half_open("l_shipdate", d(*day), d(day.add_months(3)))],
                )
                .aggregate(&["l_suppkey"], vec![sum(revenue(), "total_revenue")])?
                .select(&["l_suppkey AS supplier_no", "total_revenue"])?;
            let top = revenue0
                .clone()
                .aggregate(&[], vec![max(col("total_revenue"), "max_revenue")])?;
            c.scan(
                Table::Supplier,
                &["s_suppkey", "s_name", "s_address", "s_phone"],
                vec![],
            )
            .join(revenue0, &[("s_suppkey", "supplier_no")], Inner)?
            .join(top, &[("total_revenue", "max_revenue")], Semi)?
            .select(&[
                "s_suppkey",
                "s_name",
                "s_address",
                "s_phone",
                "total_revenue",
            ])?
            .finish(&[("s_suppkey", false)], None)
        }
        QueryParams::Q16 {
            brand,
            type_prefix,
            sizes,
        } => {
            let complaints = c
                .scan(Table::Supplier, &["s_suppkey", "s_comment"], vec![])
                .filter(col("s_comment").like("%Customer%Complaints%"))?;
            let parts = c
                .scan(
                    Table::Part,
                    &["p_partkey", "p_brand", "p_type", "p_size"],
                    vec![P::in_list(
                        "p_size",
                        sizes.iter().map(|z| Value::Int(*z)).collect(),
                    )],
                )
                .filter(and(vec![
                    col("p_brand").ne(text(brand)),
                    col("p_type").not_like(&format!("{type_prefix}%")),
                ]))?;
            c.scan(Table::PartSupp, &["ps_partkey", "ps_suppkey"], vec![])
                .join(parts, &[("ps_partkey", "p_partkey")], Inner)?
                .join(complaints, &[("ps_suppkey", "s_suppkey")], Anti)?
                .aggregate(
                    &["p_brand", "p_type", "p_size"],
                    vec![count_distinct(col("ps_suppkey"), "supplier_cnt")],
                )?
                .finish(
                    &[
                        ("supplier_cnt", true),
                        ("p_brand", false),
                        ("p_type", false),
                        ("p_size", false),
                    ],
                    None,
                )
        }
        QueryParams::Q17 { brand, container } => {
            let parts = c.scan(
                Table::Part,
                &["p_partkey", "p_brand", "p_container"],
                vec![
                    P::eq("p_brand", sv(brand)),
                    P::eq("p_container", sv(container)),
                ],
            );
            let lines = c
                .scan(
                    Table::LineItem,
                    &["l_partkey", "l_quantity", "l_extendedprice"],
                    vec![],
                )
                .join(parts, &[("l_partkey", "p_partkey")], Semi)?;
            let per_part = lines
                .clone()
                .aggregate(
                    &["l_partkey"],
                    vec![
                        sum(col("l_quantity"), "sum_qty"),
                        AggExpr::count_star("cnt"),
                    ],
                )?
                .select(&["l_partkey AS a_partkey", "sum_qty", "cnt"])?;
            // l_quantity < 0.2 * avg  <=>  5 * l_quantity * cnt < sum_qty
            lines
                .join(per_part, &[("l_partkey", "a_partkey")], Inner)?
                .filter(
                    int(5)
                        .mul(col("l_quantity"))
                        .mul(col("cnt"))
                        .lt(col("sum_qty")),
                )?
                .aggregate(&[], vec![sum(col("l_extendedprice"), "total")])?
                .project(vec![(col("total").div(dec("7.0"), 2), "avg_yearly")])?
                .finish(&[], None)
        }
        QueryParams::Q18 { quantity } => {
            let big = c
                .scan(Table::LineItem, &["l_orderkey", "l_quantity"], vec![])
                .aggregate(&["l_orderkey"], vec![sum(col("l_quantity"), "q")])?
                .filter(col("q").gt(int(*quantity)))?
                .select(&["l_orderkey AS big_orderkey"])?;
            let orders = c
                .scan(
                    Table::Orders,
                    &["o_orderkey", "o_custkey", "o_orderdate", "o_totalprice"],
                    vec![],
                )
                .join(big, &[("o_orderkey", "big_orderkey")], Semi)?;
            c.scan(Table::LineItem, &["l_orderkey", "l_quantity"], vec![])
                .join(orders, &[("l_orderkey", "o_orderkey")], Inner)?
                .join(
                    c.scan(Table::Customer, &["c_custkey", "c_name"], vec![]),
                    &[("o_custkey", "c_custkey")],
                    Inner,
                )?
                .aggregate(
                    &[
                        "c_name",
                        "c_custkey",
                        "o_orderkey",
                        "o_orderdate",
                        "o_totalprice",
                    ],
                    vec![sum(col("l_quantity"), "sum_quantity")],
                )?
                .finish(&[("o_totalprice", true), ("o_orderdate", false)], Some(100))
        }
        QueryParams::Q19 { quantities, brands } => {
            let containers = [
                ["SM CASE", "SM BOX", "SM PACK", "SM PKG"],
                ["MED BAG", "MED BOX", "MED PKG", "MED PACK"],
                ["LG CASE", "LG BOX", "LG PACK", "LG PKG"],
            ];
            let max_size = [5, 10, 15];
            let branches = (0..3)
                .map(|i| {
                    and(vec![
                        col("p_brand").eq(text(&brands[i])),
                        col("p_container").in_list(containers[i].iter().map(|x| sv(x)).collect()),
                        col("l_quantity").between(int(quantities[i]), int(quantities[i] + 10)),
                        col("p_size").between(int(1), int(max_size[i])),
                    ])
                })
                .collect();
            c.scan(
                Table::LineItem,
                &[
                    "l_partkey",
                    "l_quantity",
                    "l_extendedprice",
                    "l_discount",
                    "l_shipmode",
                    "l_shipinstruct",
                ],
                vec![
                    P::in_list("l_shipmode", vec![sv("AIR"), sv("AIR REG")]),
                    P::eq("l_shipinstruct", sv("DELIVER IN PERSON")),
                ],
            )
            .join(
                c.scan(
                    Table::Part,
                    &["p_partkey", "p_brand", "p_size", "p_container"],
                    vec![P::between("p_size", Value::Int(1), Value::Int(15))],
                ),
                &[("l_partkey", "p_partkey")],
                Inner,
            )?
            .filter(or(branches))?
            .aggregate(&[], vec![sum(revenue(), "revenue")])?
            .finish(&[], None)
        }
        QueryParams::Q20 {
            color,
            date: day,
            nation,
        } => {
            let parts = c
                .scan(Table::Part, &["p_partkey", "p_name"], vec![])
                .filter(col("p_name").like(&format!("{color}%")))?;
            let shipped = c
                .scan(
                    Table::LineItem,
                    &["l_partkey", "l_suppkey", "l_quantity", "l_shipdate"],
                    vec![P::half_open("l_shipdate", d(*day), d(day.add_years(1)))],
                )
                .aggregate(
                    &["l_partkey", "l_suppkey"],
                    vec![sum(col("l_quantity"), "sum_qty")],
                )?;
            // ps_availqty > 0.5 * sum  <=>  2 * ps_availqty > sum
            let excess = c
                .scan(
                    Table::PartSupp,
                    &["ps_partkey", "ps_suppkey", "ps_availqty"],
                    vec![],
                )
                .join(parts, &[("ps_partkey", "p_partkey")], Semi)?
                .join(
                    shipped,
                    &[("ps_partkey", "l_partkey"), ("ps_suppkey", "l_suppkey")],
                    Inner,
                )?
                .filter(int(2).mul(col("ps_availqty")).gt(col("sum_qty")))?
                .select(&["ps_suppkey"])?;
            c.scan(
                Table::Supplier,
                &["s_suppkey", "s_name", "s_address", "s_nationkey"],
                vec![],
            )
            .join(
                c.scan(
                    Table::Nation,
                    &["n_nationkey", "n_name"],
                    vec![P::eq("n_name", sv(nation))],
                ),
                &[("s_nationkey", "n_nationkey")],
                Semi,
            )?
            .join(excess, &[("s_suppkey", "ps_suppkey")], Semi)?
            .select(&["s_name", "s_address"])?
            .finish(&[("s_name", false)], None)
        }
        QueryParams::Q21 { nation } => {
            let late = |rel: Rel| rel.filter(col("l_receiptdate").gt(col("l_commitdate")));
            let lineitem = || {
                c.scan(
                    Table::LineItem,
                    &["l_orderkey", "l_suppkey", "l_commitdate", "l_receiptdate"],
                    vec![],
                )
            };
            let others =
                lineitem().select(&["l_orderkey AS l2_orderkey", "l_suppkey AS l2_suppkey"])?;
            let late_others = late(lineitem())?
                .select(&["l_orderkey AS l3_orderkey", "l_suppkey AS l3_suppkey"])?;
            let supp = c
                .scan(
                    Table::Supplier,
                    &["s_suppkey", "s_name", "s_nationkey"],
                    vec![],
                )
                .join(
                    c.scan(
                        Table::Nation,
                        &["n_nationkey", "n_name"],
                        vec![P::eq("n_name", sv(nation))],
                    ),
                    &[("s_nationkey", "n_nationkey")],
                    Semi,
                )?;
            late(lineitem())?
                .join(
                    c.scan(
                        Table::Orders,
                        &["o_orderkey", "o_orderstatus"],
                        vec![P::eq("o_orderstatus", sv("F"))],
                    ),
                    &[("l_orderkey", "o_orderkey")],
                    Semi,
                )?
                .join_residual(
                    others,
                    &[("l_orderkey", "l2_orderkey")],
                    Semi,
                    Some(col("l2_suppkey").ne(col("l_suppkey"))),
                )?
                .join_residual(
                    late_others,
                    &[("l_orderkey", "l3_orderkey")],
                    Anti,
                    Some(col("l3_suppkey").ne(col("l_suppkey"))),
                )?
                .join(supp, &[("l_suppkey", "s_suppkey")], Inner)?
                .aggregate(&["s_name"], vec![AggExpr::count_star("numwait")])?
                .finish(&[("numwait", true), ("s_name", false)], Some(100))
        }
        QueryParams::Q22 { codes } => {
            let codes: Vec<Value> = codes.iter().map(|x| sv(x)).collect();
            let cust = c
                .scan(
                    Table::Customer,
                    &["c_custkey", "c_phone", "c_acctbal"],
                    vec![],
                )
                .project(vec![
                    (col("c_custkey"), "c_custkey"),
                    (col("c_phone").substr(1, 2), "cntrycode"),
                    (col("c_acctbal"), "c_acctbal"),
                ])?
                .filter(col("cntrycode").in_list(codes))?;
            let positive = cust
                .clone()
                .filter(col("c_acctbal").gt(dec("0.00")))?
                .aggregate(
                    &[],
                    vec![
                        sum(col("c_acctbal"), "sum_bal"),
                        count(col("c_acctbal"), "n_bal"),
                    ],
                )?;
            // c_acctbal > avg  <=>  c_acctbal * n > sum
            cust.join(positive, &[], Inner)?
                .filter(col("c_acctbal").mul(col("n_bal")).gt(col("sum_bal")))?
                .join(
                    c.scan(Table::Orders, &["o_custkey"], vec![]),
                    &[("c_custkey", "o_custkey")],
                    Anti,
                )?
                .aggregate(
                    &["cntrycode"],
                    vec![
                        AggExpr::count_star("numcust"),
                        sum(col("c_acctbal"), "totacctbal"),
                    ],
                )?
                .finish(&[("cntrycode", false)], None)
        }
    }
}

fn region_nations(c: &PlanContext, region: &str) -> Result<Rel> {
    c.scan(
        Table::Nation,
        &["n_nationkey", "n_name", "n_regionkey"],
        vec![],
    )
    .join(
        c.scan(
            Table::Region,
            &["r_regionkey", "r_name"],
            vec![P::eq("r_name", sv(region))],
        ),
        &[("n_regionkey", "r_regionkey")],
        Semi,
    )
}

fn region_suppliers(c: &PlanContext, region: &str) -> Result<Rel> {
    c.scan(
        Table::Supplier,
        &[
            "s_suppkey",
            "s_name",
            "s_address",
            "s_nationkey",
            "s_phone",
            "s_acctbal",
            "s_comment",
        ],
        vec![],
    )
    .join(
        region_nations(c, region)?,
        &[("s_nationkey", "n_nationkey")],
        Inner,
    )
}

/// Plan with the default parameters.
pub fn default_plan(q: QueryId, ctx: &PlanContext) -> Result<PhysicalPlan> {
    plan_for(&QueryParams::defaults(q), ctx)
}
