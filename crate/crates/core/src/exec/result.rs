use std::io::Write;

use crate::error::Result;
use crate::types::{Row, Value};

/// Final query output, already in its defined order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultSet {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl ResultSet {
    pub fn new(columns: Vec<String>, rows: Vec<Row>) -> ResultSet {
        ResultSet { columns, rows }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Rows sorted on every column, for comparing unordered outputs.
    pub fn canonical(&self) -> ResultSet {
        let mut rows = self.rows.clone();
        rows.sort();
        ResultSet {
            columns: self.columns.clone(),
            rows,
        }
    }

    /// Header row then data rows, RFC-4180 quoting.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8_lossy(&buf).into_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_fields() {
        let rs = ResultSet::new(
            vec!["name".into(), "total".into()],
            vec![
                vec![Value::str("a, \"b\""), Value::cents(1234)],
                vec![Value::Null, Value::Int(-3)],
            ],
        );
        let text = rs.to_csv().unwrap();
        assert_eq!(text, "name,total\n\"a, \"\"b\"\"\",12.34\n,-3\n");
    }
}
