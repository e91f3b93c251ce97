//! Scalar values shared by the generator, the column store and the executor.
//!
//! Money is never binary floating point: stored decimals are 64-bit cents and
//! every intermediate is an exact `i128` mantissa with an explicit scale.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// Calendar date stored as days since 1970-01-01.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date(pub i32);

impl Date {
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Date {
        let d = NaiveDate::from_ymd_opt(year, month, day).expect("valid calendar date");
        Date(days_from_epoch(d))
    }

    pub fn parse(s: &str) -> Result<Date> {
        let d = NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map_err(|_| Error::Parse(format!("invalid date '{s}'")))?;
        Ok(Date(days_from_epoch(d)))
    }

    pub fn to_naive(self) -> NaiveDate {
        epoch() + chrono::Duration::days(self.0 as i64)
    }

    pub fn year(self) -> i32 {
        self.to_naive().year()
    }

    pub fn add_days(self, days: i32) -> Date {
        Date(self.0 + days)
    }

    /// Calendar month arithmetic, clamping the day to the target month's length.
    pub fn add_months(self, months: i32) -> Date {
        let d = self.to_naive();
        let total = d.year() * 12 + d.month0() as i32 + months;
        let (y, m0) = (total.div_euclid(12), total.rem_euclid(12) as u32);
        let mut day = d.day();
        loop {
            if let Some(nd) = NaiveDate::from_ymd_opt(y, m0 + 1, day) {
                return Date(days_from_epoch(nd));
            }
            day -= 1;
        }
    }

    pub fn add_years(self, years: i32) -> Date {
        self.add_months(years * 12)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_naive().format("%Y-%m-%d"))
    }
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()
}

fn days_from_epoch(d: NaiveDate) -> i32 {
    (d - epoch()).num_days() as i32
}

/// Exact fixed-point decimal: `units / 10^scale`.
#[derive(Clone, Copy, Debug)]
pub struct Decimal {
    pub units: i128,
    pub scale: u8,
}

const POW10: [i128; 39] = {
    let mut t = [1i128; 39];
    let mut i = 1;
    while i < 39 {
        t[i] = t[i - 1] * 10;
        i += 1;
    }
    t
};

impl Decimal {
    pub const fn new(units: i128, scale: u8) -> Decimal {
        Decimal { units, scale }
    }

    pub const fn from_cents(cents: i64) -> Decimal {
        Decimal {
            units: cents as i128,
            scale: 2,
        }
    }

    pub fn from_int(v: i64) -> Decimal {
        Decimal {
            units: v as i128,
            scale: 0,
        }
    }

    /// Parses `-12.3`, `7`, `0.05`; the scale is the number of fraction digits.
    pub fn parse(s: &str) -> Result<Decimal> {
        let bad = || Error::Parse(format!("invalid decimal '{s}'"));
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int_part
            .bytes()
            .chain(frac.bytes())
            .all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        if frac.len() > 18 {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac}");
        let units: i128 = if digits.is_empty() {
            0
        } else {
            digits.parse().map_err(|_| bad())?
        };
        Ok(Decimal {
            units: if neg { -units } else { units },
            scale: frac.len() as u8,
        })
    }

    pub fn rescale_up(self, scale: u8) -> i128 {
        debug_assert!(scale >= self.scale);
        self.units * POW10[(scale - self.scale) as usize]
    }

    pub fn add(self, o: Decimal) -> Decimal {
        let s = self.scale.max(o.scale);
        Decimal::new(self.rescale_up(s) + o.rescale_up(s), s)
    }

    pub fn sub(self, o: Decimal) -> Decimal {
        let s = self.scale.max(o.scale);
        Decimal::new(self.rescale_up(s) - o.rescale_up(s), s)
    }

    pub fn mul(self, o: Decimal) -> Decimal {
        Decimal::new(self.units * o.units, self.scale + o.scale)
    }

    /// Quotient rounded half away from zero to `scale` fraction digits.
    pub fn div(self, o: Decimal, scale: u8) -> Option<Decimal> {
        if o.units == 0 {
            return None;
        }
        // self/o = (a / 10^sa) / (b / 10^sb); result units = a * 10^(scale + sb - sa) / b
        let shift = scale as i32 + o.scale as i32 - self.scale as i32;
        let (mut num, mut den) = (self.units, o.units);
        if shift >= 0 {
            num *= POW10[shift as usize];
        } else {
            den *= POW10[(-shift) as usize];
        }
        if den < 0 {
            num = -num;
            den = -den;
        }
        let q = num / den;
        let r = num % den;
        let q = if 2 * r.abs() >= den {
            q + num.signum()
        } else {
            q
        };
        Some(Decimal::new(q, scale))
    }

    /// Round half away from zero to fewer fraction digits.
    pub fn round_to(self, scale: u8) -> Decimal {
        if scale >= self.scale {
            return Decimal::new(self.rescale_up(scale), scale);
        }
        self.div(Decimal::from_int(1), scale).unwrap()
    }

    fn normalized(self) -> (i128, u8) {
        let (mut u, mut s) = (self.units, self.scale);
        while s > 0 && u % 10 == 0 {
            u /= 10;
            s -= 1;
        }
        (u, s)
    }

    pub fn to_f64(self) -> f64 {
        self.units as f64 / POW10[self.scale as usize] as f64
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Decimal {}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, o: &Self) -> Ordering {
        let s = self.scale.max(o.scale);
        self.rescale_up(s).cmp(&o.rescale_up(s))
    }
}

impl Hash for Decimal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.normalized().hash(state)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.units);
        }
        let p = POW10[self.scale as usize];
        let sign = if self.units < 0 { "-" } else { "" };
        let a = self.units.abs();
        write!(
            f,
            "{sign}{}.{:0width$}",
            a / p,
            a % p,
            width = self.scale as usize
        )
    }
}

/// Logical column/expression type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DataType {
    Int,
    /// Fixed-point with the given number of fraction digits.
    Decimal(u8),
    Date,
    Str,
    Bool,
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataType::Int => write!(f, "int64"),
            DataType::Decimal(s) => write!(f, "decimal({s})"),
            DataType::Date => write!(f, "date"),
            DataType::Str => write!(f, "string"),
            DataType::Bool => write!(f, "bool"),
        }
    }
}

/// A single cell.
#[derive(Clone, Debug)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Dec(Decimal),
    Date(Date),
    Str(Arc<str>),
}

pub type Row = Vec<Value>;

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Arc::from(s))
    }

    pub fn cents(c: i64) -> Value {
        Value::Dec(Decimal::from_cents(c))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_date(&self) -> Option<Date> {
        match self {
            Value::Date(d) => Some(*d),
            _ => None,
        }
    }

    pub fn as_decimal(&self) -> Option<Decimal> {
        match self {
            Value::Dec(d) => Some(*d),
            Value::Int(i) => Some(Decimal::from_int(*i)),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> bool {
        matches!(self, Value::Bool(true))
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Bool(_) => 1,
            Value::Int(_) | Value::Dec(_) => 2,
            Value::Date(_) => 3,
            Value::Str(_) => 4,
        }
    }

    /// Rough in-memory footprint used for write-buffer budgeting.
    pub fn approx_bytes(&self) -> usize {
        match self {
            Value::Str(s) => 16 + s.len(),
            _ => 8,
        }
    }

    pub fn add(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Int(a), Value::Int(b)) => Value::Int(a + b),
            (Value::Date(d), Value::Int(n)) => Value::Date(d.add_days(*n as i32)),
            _ => match (self.as_decimal(), o.as_decimal()) {
                (Some(a), Some(b)) => Value::Dec(a.add(b)),
                _ => Value::Null,
            },
        }
    }

    pub fn sub(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Int(a), Value::Int(b)) => Value::Int(a - b),
            _ => match (self.as_decimal(), o.as_decimal()) {
                (Some(a), Some(b)) => Value::Dec(a.sub(b)),
                _ => Value::Null,
            },
        }
    }

    pub fn mul(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Int(a), Value::Int(b)) => Value::Int(a * b),
            _ => match (self.as_decimal(), o.as_decimal()) {
                (Some(a), Some(b)) => Value::Dec(a.mul(b)),
                _ => Value::Null,
            },
        }
    }

    pub fn div(&self, o: &Value, scale: u8) -> Value {
        match (self.as_decimal(), o.as_decimal()) {
            (Some(a), Some(b)) => a.div(b, scale).map(Value::Dec).unwrap_or(Value::Null),
            _ => Value::Null,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self, o) {
            (Value::Null, Value::Null) => Ordering::Equal,
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Date(a), Value::Date(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Dec(_) | Value::Int(_), Value::Dec(_) | Value::Int(_)) => {
                self.as_decimal().unwrap().cmp(&o.as_decimal().unwrap())
            }
            _ => self.rank().cmp(&o.rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Null => {}
            Value::Bool(b) => b.hash(state),
            Value::Int(i) => Decimal::from_int(*i).hash(state),
            Value::Dec(d) => d.hash(state),
            Value::Date(d) => d.hash(state),
            Value::Str(s) => s.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Dec(d) => write!(f, "{d}"),
            Value::Date(d) => write!(f, "{d}"),
            Value::Str(s) => write!(f, "{s}"),
        }
    }
}

/// 64-bit mixer (splitmix64 finalizer). Stable across platforms and releases.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash used for segmentation and repartitioning; identical for equal values.
pub fn stable_hash(v: &Value) -> u64 {
    match v {
        Value::Int(i) => mix64(*i as u64),
        Value::Date(d) => mix64(d.0 as u64),
        Value::Str(s) => {
            // FNV-1a
            let mut h: u64 = 0xcbf2_9ce4_8422_2325;
            for b in s.bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
            mix64(h)
        }
        Value::Dec(d) => {
            let (u, s) = d.normalized();
            mix64((u as u64) ^ ((s as u64) << 56))
        }
        Value::Bool(b) => mix64(*b as u64),
        Value::Null => 0,
    }
}
