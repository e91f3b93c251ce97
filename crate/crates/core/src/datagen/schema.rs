//! The eight benchmark relations.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::types::DataType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Table {
    Region,
    Nation,
    Supplier,
    Customer,
    Part,
    PartSupp,
    Orders,
    LineItem,
}

impl Table {
    pub const ALL: [Table; 8] = [
        Table::Region,
        Table::Nation,
        Table::Supplier,
        Table::Customer,
        Table::Part,
        Table::PartSupp,
        Table::Orders,
        Table::LineItem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Table::Region => "region",
            Table::Nation => "nation",
            Table::Supplier => "supplier",
            Table::Customer => "customer",
            Table::Part => "part",
            Table::PartSupp => "partsupp",
            Table::Orders => "orders",
            Table::LineItem => "lineitem",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn def(self) -> &'static TableDef {
        &TABLES[self.index()]
    }

    /// Column whose hash places a row on a segment; `None` for tables
    /// replicated in full on every node.
    pub fn segmentation_column(self) -> Option<&'static str> {
        match self {
            Table::Region | Table::Nation => None,
            Table::Supplier => Some("s_suppkey"),
            Table::Customer => Some("c_custkey"),
            Table::Part => Some("p_partkey"),
            Table::PartSupp => Some("ps_partkey"),
            Table::Orders => Some("o_orderkey"),
            Table::LineItem => Some("l_orderkey"),
        }
    }

    /// Primary-key prefix used as the sort order of read-optimized containers.
    pub fn sort_columns(self) -> &'static [&'static str] {
        match self {
            Table::Region => &["r_regionkey"],
            Table::Nation => &["n_nationkey"],
            Table::Supplier => &["s_suppkey"],
            Table::Customer => &["c_custkey"],
            Table::Part => &["p_partkey"],
            Table::PartSupp => &["ps_partkey", "ps_suppkey"],
            Table::Orders => &["o_orderkey"],
            Table::LineItem => &["l_orderkey", "l_linenumber"],
        }
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Table {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Table::ALL
            .into_iter()
            .find(|t| t.name() == lower)
            .ok_or_else(|| Error::UnknownTable(s.to_string()))
    }
}

/// Physical column type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnType {
    Int64,
    /// decimal(15,2) held as integer cents.
    Decimal,
    /// Days since 1970-01-01.
    Date,
    FixedStr(u16),
    VarStr(u16),
}

impl ColumnType {
    pub fn data_type(self) -> DataType {
        match self {
            ColumnType::Int64 => DataType::Int,
            ColumnType::Decimal => DataType::Decimal(2),
            ColumnType::Date => DataType::Date,
            ColumnType::FixedStr(_) | ColumnType::VarStr(_) => DataType::Str,
        }
    }

    pub fn is_string(self) -> bool {
        matches!(self, ColumnType::FixedStr(_) | ColumnType::VarStr(_))
    }

    pub fn tag(self) -> u8 {
        match self {
            ColumnType::Int64 => 1,
            ColumnType::Decimal => 2,
            ColumnType::Date => 3,
            ColumnType::FixedStr(_) => 4,
            ColumnType::VarStr(_) => 5,
        }
    }
}

#[derive(Debug)]
pub struct ColumnDef {
    pub name: &'static str,
    pub ty: ColumnType,
}

#[derive(Debug)]
pub struct TableDef {
    pub table: Table,
    pub columns: &'static [ColumnDef],
}

impl TableDef {
    pub fn name(&self) -> &'static str {
        self.table.name()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }
}

const fn col(name: &'static str, ty: ColumnType) -> ColumnDef {
    ColumnDef { name, ty }
}

use ColumnType::{Date, Decimal, FixedStr, Int64, VarStr};

static TABLES: [TableDef; 8] = [
    TableDef {
        table: Table::Region,
        columns: &[
            col("r_regionkey", Int64),
            col("r_name", FixedStr(25)),
            col("r_comment", VarStr(152)),
        ],
    },
    TableDef {
        table: Table::Nation,
        columns: &[
            col("n_nationkey", Int64),
            col("n_name", FixedStr(25)),
            col("n_regionkey", Int64),
            col("n_comment", VarStr(152)),
        ],
    },
    TableDef {
        table: Table::Supplier,
        columns: &[
            col("s_suppkey", Int64),
            col("s_name", FixedStr(25)),
            col("s_address", VarStr(40)),
            col("s_nationkey", Int64),
            col("s_phone", FixedStr(15)),
            col("s_acctbal", Decimal),
            col("s_comment", VarStr(101)),
        ],
    },
    TableDef {
        table: Table::Customer,
        columns: &[
            col("c_custkey", Int64),
            col("c_name", VarStr(25)),
            col("c_address", VarStr(40)),
            col("c_nationkey", Int64),
            col("c_phone", FixedStr(15)),
            col("c_acctbal", Decimal),
            col("c_mktsegment", FixedStr(10)),
            col("c_comment", VarStr(117)),
        ],
    },
    TableDef {
        table: Table::Part,
        columns: &[
            col("p_partkey", Int64),
            col("p_name", VarStr(55)),
            col("p_mfgr", FixedStr(25)),
            col("p_brand", FixedStr(10)),
            col("p_type", VarStr(25)),
            col("p_size", Int64),
            col("p_container", FixedStr(10)),
            col("p_retailprice", Decimal),
            col("p_comment", VarStr(23)),
        ],
    },
    TableDef {
        table: Table::PartSupp,
        columns: &[
            col("ps_partkey", Int64),
            col("ps_suppkey", Int64),
            col("ps_availqty", Int64),
            col("ps_supplycost", Decimal),
            col("ps_comment", VarStr(199)),
        ],
    },
    TableDef {
        table: Table::Orders,
        columns: &[
            col("o_orderkey", Int64),
            col("o_custkey", Int64),
            col("o_orderstatus", FixedStr(1)),
            col("o_totalprice", Decimal),
            col("o_orderdate", Date),
            col("o_orderpriority", FixedStr(15)),
            col("o_clerk", FixedStr(15)),
            col("o_shippriority", Int64),
            col("o_comment", VarStr(79)),
        ],
    },
    TableDef {
        table: Table::LineItem,
        columns: &[
            col("l_orderkey", Int64),
            col("l_partkey", Int64),
            col("l_suppkey", Int64),
            col("l_linenumber", Int64),
            col("l_quantity", Decimal),
            col("l_extendedprice", Decimal),
            col("l_discount", Decimal),
            col("l_tax", Decimal),
            col("l_returnflag", FixedStr(1)),
            col("l_linestatus", FixedStr(1)),
            col("l_shipdate", Date),
            col("l_commitdate", Date),
            col("l_receiptdate", Date),
            col("l_shipinstruct", FixedStr(25)),
            col("l_shipmode", FixedStr(10)),
            col("l_comment", VarStr(44)),
        ],
    },
];
