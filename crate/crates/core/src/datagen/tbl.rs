//! Pipe-delimited `.tbl` text files: one row per line, `|` after every field.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::datagen::schema::{ColumnType, Table};
use crate::error::{Error, Result};
use crate::types::{Date, Decimal, Row, Value};

/// Text form of one cell: dates as `YYYY-MM-DD`, decimals with exactly two
/// fraction digits.
pub fn format_field(v: &Value) -> String {
    match v {
        Value::Dec(d) => d.round_to(2).to_string(),
        other => other.to_string(),
    }
}

/// One `.tbl` line including the trailing `|` and `\n`.
pub fn format_row(row: &Row) -> String {
    let mut line = String::with_capacity(row.len() * 12);
    for v in row {
        line.push_str(&format_field(v));
        line.push('|');
    }
    line.push('\n');
    line
}

/// Writes `rows` to `path`. On any I/O failure the partial file is removed.
pub fn write_tbl(table: Table, rows: impl IntoIterator<Item = Row>, path: &Path) -> Result<u64> {
    let width = table.def().width();
    let result = (|| -> Result<u64> {
        let mut w = BufWriter::with_capacity(1 << 20, File::create(path)?);
        let mut written = 0u64;
        for row in rows {
            if row.len() != width {
                return Err(Error::SchemaMismatch(format!(
                    "{table}: row has {} fields, expected {width}",
                    row.len()
                )));
            }
            let line = format_row(&row);
            w.write_all(line.as_bytes())?;
            written += line.len() as u64;
        }
        w.flush()?;
        Ok(written)
    })();
    if result.is_err() {
        let _ = fs::remove_file(path);
    }
    result
}

/// Parses one cell of the given column type.
pub fn parse_field(ty: ColumnType, raw: &str) -> Result<Value> {
    match ty {
        ColumnType::Int64 => raw
            .trim()
            .parse::<i64>()
            .map(Value::Int)
            .map_err(|_| Error::Parse(format!("invalid integer '{raw}'"))),
        ColumnType::Decimal => {
            let d = Decimal::parse(raw)?;
            if d.scale > 2 {
                return Err(Error::Parse(format!(
                    "decimal '{raw}' has more than 2 fraction digits"
                )));
            }
            Ok(Value::cents(d.rescale_up(2) as i64))
        }
        ColumnType::Date => Ok(Value::Date(Date::parse(raw.trim())?)),
        ColumnType::FixedStr(n) | ColumnType::VarStr(n) => {
            if raw.chars().count() > n as usize {
                return Err(Error::Parse(format!("string longer than {n} characters")));
            }
            Ok(Value::str(raw))
        }
    }
}

/// Parses one `.tbl` line (with or without the trailing newline).
pub fn parse_tbl_line(table: Table, line: &str) -> Result<Row> {
    let def = table.def();
    let line = line.strip_suffix('\n').unwrap_or(line);
    let line = line.strip_suffix('\r').unwrap_or(line);
    let body = line
        .strip_suffix('|')
        .ok_or_else(|| Error::Parse(format!("{table}: missing trailing '|'")))?;
    let fields: Vec<&str> = body.split('|').collect();
    if fields.len() != def.width() {
        return Err(Error::Parse(format!(
            "{table}: expected {} fields, found {}",
            def.width(),
            fields.len()
        )));
    }
    def.columns
        .iter()
        .zip(fields)
        .map(|(c, f)| parse_field(c.ty, f))
        .collect()
}

/// Reads a whole `.tbl` file.
pub fn read_tbl(table: Table, path: &Path) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| parse_tbl_line(table, l))
        .collect()
}
