//! Scalar expressions evaluated against one row.
//!
//! Plans are written with [`Expr::Named`] column references; building an
//! operator resolves them to positional [`Expr::Col`] against the input
//! schema. Comparisons involving NULL yield NULL and filters keep only rows
//! that evaluate to `true`.

use std::fmt;

use crate::error::{Error, Result};
use crate::types::{Date, Decimal, Row, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Col(usize),
    Named(String),
    Lit(Value),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    /// Quotient rounded half away from zero to the given fraction digits.
    Div(Box<Expr>, Box<Expr>, u8),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    /// SQL `LIKE` with `%` and `_` wildcards.
    Like(Box<Expr>, String),
    InList(Box<Expr>, Vec<Value>),
    Case {
        when: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
    Year(Box<Expr>),
    /// 1-based character substring.
    Substr(Box<Expr>, usize, usize),
    IsNull(Box<Expr>),
}

pub fn col(name: &str) -> Expr {
    Expr::Named(name.to_string())
}

pub fn lit(v: Value) -> Expr {
    Expr::Lit(v)
}

pub fn int(v: i64) -> Expr {
    Expr::Lit(Value::Int(v))
}

/// Decimal literal from text such as `"0.06"`.
pub fn dec(s: &str) -> Expr {
    Expr::Lit(Value::Dec(
        Decimal::parse(s).expect("valid decimal literal"),
    ))
}

pub fn date(d: Date) -> Expr {
    Expr::Lit(Value::Date(d))
}

pub fn text(s: &str) -> Expr {
    Expr::Lit(Value::str(s))
}

pub fn and(es: Vec<Expr>) -> Expr {
    Expr::And(es)
}

pub fn or(es: Vec<Expr>) -> Expr {
    Expr::Or(es)
}

impl Expr {
    fn arith(self, op: ArithOp, o: Expr) -> Expr {
        Expr::Arith(op, Box::new(self), Box::new(o))
    }
    fn cmp(self, op: CmpOp, o: Expr) -> Expr {
        Expr::Cmp(op, Box::new(self), Box::new(o))
    }
    pub fn add(self, o: Expr) -> Expr {
        self.arith(ArithOp::Add, o)
    }
    pub fn sub(self, o: Expr) -> Expr {
        self.arith(ArithOp::Sub, o)
    }
    pub fn mul(self, o: Expr) -> Expr {
        self.arith(ArithOp::Mul, o)
    }
    pub fn div(self, o: Expr, scale: u8) -> Expr {
        Expr::Div(Box::new(self), Box::new(o), scale)
    }
    pub fn eq(self, o: Expr) -> Expr {
        self.cmp(CmpOp::Eq, o)
    }
    pub fn ne(self, o: Expr) -> Expr {
        self.cmp(CmpOp::Ne, o)
    }
    pub fn lt(self, o: Expr) -> Expr {
        self.cmp(CmpOp::Lt, o)
    }
    pub fn le(self, o: Expr) -> Expr {
        self.cmp(CmpOp::Le, o)
    }
    pub fn gt(self, o: Expr) -> Expr {
        self.cmp(CmpOp::Gt, o)
    }
    pub fn ge(self, o: Expr) -> Expr {
        self.cmp(CmpOp::Ge, o)
    }
    pub fn between(self, lo: Expr, hi: Expr) -> Expr {
        Expr::And(vec![self.clone().ge(lo), self.le(hi)])
    }
    pub fn like(self, pattern: &str) -> Expr {
        Expr::Like(Box::new(self), pattern.to_string())
    }
    pub fn not_like(self, pattern: &str) -> Expr {
        Expr::Not(Box::new(self.like(pattern)))
    }
    pub fn in_list(self, vs: Vec<Value>) -> Expr {
        Expr::InList(Box::new(self), vs)
    }
    pub fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }
    pub fn year(self) -> Expr {
        Expr::Year(Box::new(self))
    }
    pub fn substr(self, start: usize, len: usize) -> Expr {
        Expr::Substr(Box::new(self), start, len)
    }
    pub fn is_null(self) -> Expr {
        Expr::IsNull(Box::new(self))
    }
    pub fn case(when: Expr, then: Expr, otherwise: Expr) -> Expr {
        Expr::Case {
            when: Box::new(when),
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        }
    }

    /// Replaces names with positions in `schema`.
    pub fn resolve(&self, schema: &[String]) -> Result<Expr> {
        let r = |e: &Expr| e.resolve(schema).map(Box::new);
        Ok(match self {
            Expr::Named(n) => Expr::Col(lookup(schema, n)?),
            Expr::Col(i) => Expr::Col(*i),
            Expr::Lit(v) => Expr::Lit(v.clone()),
            Expr::Arith(op, a, b) => Expr::Arith(*op, r(a)?, r(b)?),
            Expr::Div(a, b, s) => Expr::Div(r(a)?, r(b)?, *s),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, r(a)?, r(b)?),
            Expr::And(es) => Expr::And(
                es.iter()
                    .map(|e| e.resolve(schema))
                    .collect::<Result<_>>()?,
            ),
            Expr::Or(es) => Expr::Or(
                es.iter()
                    .map(|e| e.resolve(schema))
                    .collect::<Result<_>>()?,
            ),
            Expr::Not(a) => Expr::Not(r(a)?),
            Expr::Like(a, p) => Expr::Like(r(a)?, p.clone()),
            Expr::InList(a, vs) => Expr::InList(r(a)?, vs.clone()),
            Expr::Case {
                when,
                then,
                otherwise,
            } => Expr::Case {
                when: r(when)?,
                then: r(then)?,
                otherwise: r(otherwise)?,
            },
            Expr::Year(a) => Expr::Year(r(a)?),
            Expr::Substr(a, s, l) => Expr::Substr(r(a)?, *s, *l),
            Expr::IsNull(a) => Expr::IsNull(r(a)?),
        })
    }

    /// Largest column position referenced, or an error for unresolved names.
    pub fn check(&self, width: usize) -> Result<()> {
        let mut err = None;
        self.visit(&mut |e| match e {
            Expr::Named(n) => err = Some(Error::Plan(format!("unresolved column '{n}'"))),
            Expr::Col(i) if *i >= width => {
                err = Some(Error::Plan(format!(
                    "column #{i} referenced but input has {width} columns"
                )))
            }
            _ => {}
        });
        err.map_or(Ok(()), Err)
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Arith(_, a, b) | Expr::Div(a, b, _) | Expr::Cmp(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.visit(f)),
            Expr::Not(a)
            | Expr::Like(a, _)
            | Expr::InList(a, _)
            | Expr::Year(a)
            | Expr::Substr(a, _, _)
            | Expr::IsNull(a) => a.visit(f),
            Expr::Case {
                when,
                then,
                otherwise,
            } => {
                when.visit(f);
                then.visit(f);
                otherwise.visit(f);
            }
            Expr::Col(_) | Expr::Named(_) | Expr::Lit(_) => {}
        }
    }

    pub fn eval(&self, row: &Row) -> Value {
        match self {
            Expr::Col(i) => row[*i].clone(),
            Expr::Named(_) => Value::Null,
            Expr::Lit(v) => v.clone(),
            Expr::Arith(op, a, b) => {
                let (x, y) = (a.eval(row), b.eval(row));
                match op {
                    ArithOp::Add => x.add(&y),
                    ArithOp::Sub => x.sub(&y),
                    ArithOp::Mul => x.mul(&y),
                }
            }
            Expr::Div(a, b, s) => a.eval(row).div(&b.eval(row), *s),
            Expr::Cmp(op, a, b) => {
                let (x, y) = (a.eval(row), b.eval(row));
                if x.is_null() || y.is_null() {
                    return Value::Null;
                }
                let o = x.cmp(&y);
                Value::Bool(match op {
                    CmpOp::Eq => o.is_eq(),
                    CmpOp::Ne => o.is_ne(),
                    CmpOp::Lt => o.is_lt(),
                    CmpOp::Le => o.is_le(),
                    CmpOp::Gt => o.is_gt(),
                    CmpOp::Ge => o.is_ge(),
                })
            }
            Expr::And(es) => {
                let mut null = false;
                for e in es {
                    match e.eval(row) {
                        Value::Bool(false) => return Value::Bool(false),
                        Value::Null => null = true,
                        _ => {}
                    }
                }
                if null {
                    Value::Null
                } else {
                    Value::Bool(true)
                }
            }
            Expr::Or(es) => {
                let mut null = false;
                for e in es {
                    match e.eval(row) {
                        Value::Bool(true) => return Value::Bool(true),
                        Value::Null => null = true,
                        _ => {}
                    }
                }
                if null {
                    Value::Null
                } else {
                    Value::Bool(false)
                }
            }
            Expr::Not(a) => match a.eval(row) {
                Value::Bool(b) => Value::Bool(!b),
                _ => Value::Null,
            },
            Expr::Like(a, p) => match a.eval(row) {
                Value::Str(s) => Value::Bool(like(&s, p)),
                _ => Value::Null,
            },
            Expr::InList(a, vs) => {
                let v = a.eval(row);
                if v.is_null() {
                    Value::Null
                } else {
                    Value::Bool(vs.contains(&v))
                }
            }
            Expr::Case {
                when,
                then,
                otherwise,
            } => {
                if when.eval(row).as_bool() {
                    then.eval(row)
                } else {
                    otherwise.eval(row)
                }
            }
            Expr::Year(a) => match a.eval(row) {
                Value::Date(d) => Value::Int(d.year() as i64),
                _ => Value::Null,
            },
            Expr::Substr(a, start, len) => match a.eval(row) {
                Value::Str(s) => Value::str(
                    &s.chars()
                        .skip(start.saturating_sub(1))
                        .take(*len)
                        .collect::<String>(),
                ),
                _ => Value::Null,
            },
            Expr::IsNull(a) => Value::Bool(a.eval(row).is_null()),
        }
    }

    pub fn is_true(&self, row: &Row) -> bool {
        self.eval(row).as_bool()
    }
}

pub(crate) fn lookup(schema: &[String], name: &str) -> Result<usize> {
    let mut hits = schema
        .iter()
        .enumerate()
        .filter(|(_, n)| *n == name)
        .map(|(i, _)| i);
    match (hits.next(), hits.next()) {
        (Some(i), None) => Ok(i),
        (Some(_), Some(_)) => Err(Error::Plan(format!("ambiguous column '{name}'"))),
        (None, _) => Err(Error::Plan(format!(
            "unknown column '{name}' (have: {})",
            schema.join(", ")
        ))),
    }
}

/// `%` matches any run of characters, `_` exactly one.
pub fn like(s: &str, pattern: &str) -> bool {
    let s: Vec<char> = s.chars().collect();
    let p: Vec<char> = pattern.chars().collect();
    let (mut i, mut j) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while i < s.len() {
        if j < p.len() && (p[j] == '_' || (p[j] != '%' && p[j] == s[i])) {
            i += 1;
            j += 1;
        } else if j < p.len() && p[j] == '%' {
            star = Some((j, i));
            j += 1;
        } else if let Some((sj, si)) = star {
            j = sj + 1;
            i = si + 1;
            star = Some((sj, si + 1));
        } else {
            return false;
        }
    }
    p[j..].iter().all(|c| *c == '%')
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Col(i) => write!(f, "#{i}"),
            Expr::Named(n) => write!(f, "{n}"),
            Expr::Lit(Value::Str(s)) => write!(f, "'{s}'"),
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Arith(op, a, b) => {
                let s = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Div(a, b, s) => write!(f, "({a} / {b} @{s})"),
            Expr::Cmp(op, a, b) => {
                let s = match op {
                    CmpOp::Eq => "=",
                    CmpOp::Ne => "<>",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                };
                write!(f, "{a} {s} {b}")
            }
            Expr::And(es) => write!(
                f,
                "({})",
                es.iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(" AND ")
            ),
            Expr::Or(es) => write!(
                f,
                "({})",
                es.iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(" OR ")
            ),
            Expr::Not(a) => write!(f, "NOT {a}"),
            Expr::Like(a, p) => write!(f, "{a} LIKE '{p}'"),
            Expr::InList(a, vs) => {
                write!(
                    f,
                    "{a} IN ({})",
                    vs.iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            }
            Expr::Case {
                when,
                then,
                otherwise,
            } => write!(f, "CASE WHEN {when} THEN {then} ELSE {otherwise} END"),
            Expr::Year(a) => write!(f, "YEAR({a})"),
            Expr::Substr(a, s, l) => write!(f, "SUBSTR({a}, {s}, {l})"),
            Expr::IsNull(a) => write!(f, "{a} IS NULL"),
        }
    }
}
