use std::sync::Arc;

use crate::datagen::ColumnType;
use crate::error::{Error, Result};
use crate::storage::encoding::{self, ColumnValues, Encoding};
use crate::types::{Date, Value};

/// One encoded column segment with the statistics used for pruning.
#[derive(Clone, Debug)]
pub struct ColumnChunk {
    pub column: String,
    pub ty: ColumnType,
    pub encoding: Encoding,
    pub value_count: u64,
    pub null_count: u64,
    /// `None` for an empty chunk.
    pub min_max: Option<(Value, Value)>,
    pub bytes: Vec<u8>,
}

/// Converts a stored integer back into the column's logical value.
pub fn int_value(ty: ColumnType, v: i64) -> Value {
    match ty {
        ColumnType::Decimal => Value::cents(v),
        ColumnType::Date => Value::Date(Date(v as i32)),
        _ => Value::Int(v),
    }
}

/// Extracts the physical representation of a column from logical values.
pub fn to_column_values(
    ty: ColumnType,
    values: impl Iterator<Item = Value>,
) -> Result<ColumnValues> {
    if ty.is_string() {
        values
            .map(|v| match v {
                Value::Str(s) => Ok(s),
                other => Err(Error::SchemaMismatch(format!(
                    "expected string, got {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ColumnValues::Str)
    } else {
        values
            .map(|v| physical_int(ty, &v))
            .collect::<Result<Vec<_>>>()
            .map(ColumnValues::Int)
    }
}

pub(crate) fn physical_int(ty: ColumnType, v: &Value) -> Result<i64> {
    match (ty, v) {
        (ColumnType::Int64, Value::Int(i)) => Ok(*i),
        (ColumnType::Date, Value::Date(d)) => Ok(d.0 as i64),
        (ColumnType::Decimal, Value::Dec(d)) if d.scale <= 2 => Ok(d.rescale_up(2) as i64),
        (ColumnType::Decimal, Value::Int(i)) => Ok(i * 100),
        _ => Err(Error::SchemaMismatch(format!(
            "value {v:?} does not fit {ty:?}"
        ))),
    }
}

impl ColumnChunk {
    /// Encodes with a specific encoding.
    pub fn encode(
        column: &str,
        ty: ColumnType,
        values: &ColumnValues,
        encoding: Encoding,
    ) -> Result<ColumnChunk> {
        check_kind(ty, values)?;
        let bytes = encoding::encode(values, encoding)?;
        Ok(Self::assemble(column, ty, values, encoding, bytes))
    }

    /// Encodes with whichever applicable encoding is smallest.
    pub fn encode_best(column: &str, ty: ColumnType, values: &ColumnValues) -> Result<ColumnChunk> {
        check_kind(ty, values)?;
        let (encoding, bytes) = encoding::encode_smallest(values);
        Ok(Self::assemble(column, ty, values, encoding, bytes))
    }

    fn assemble(
        column: &str,
        ty: ColumnType,
        values: &ColumnValues,
        encoding: Encoding,
        bytes: Vec<u8>,
    ) -> ColumnChunk {
        let min_max = match values {
            ColumnValues::Int(v) => match (v.iter().min(), v.iter().max()) {
                (Some(lo), Some(hi)) => Some((int_value(ty, *lo), int_value(ty, *hi))),
                _ => None,
            },
            ColumnValues::Str(v) => match (v.iter().min(), v.iter().max()) {
                (Some(lo), Some(hi)) => Some((Value::Str(lo.clone()), Value::Str(hi.clone()))),
                _ => None,
            },
        };
        ColumnChunk {
            column: column.to_string(),
            ty,
            encoding,
            value_count: values.len() as u64,
            null_count: 0,
            min_max,
            bytes,
        }
    }

    pub fn decode(&self) -> Result<ColumnValues> {
        encoding::decode(
            &self.bytes,
            self.encoding,
            self.ty.is_string(),
            self.value_count as usize,
        )
    }

    /// Decoded values in logical form.
    pub fn decode_values(&self) -> Result<Vec<Value>> {
        Ok(match self.decode()? {
            ColumnValues::Int(v) => v.into_iter().map(|x| int_value(self.ty, x)).collect(),
            ColumnValues::Str(v) => v.into_iter().map(Value::Str).collect(),
        })
    }

    pub fn encoded_len(&self) -> usize {
        self.bytes.len()
    }
}

fn check_kind(ty: ColumnType, values: &ColumnValues) -> Result<()> {
    match (ty.is_string(), values) {
        (true, ColumnValues::Str(_)) | (false, ColumnValues::Int(_)) => Ok(()),
        _ => Err(Error::SchemaMismatch(format!(
            "values do not match column type {ty:?}"
        ))),
    }
}

/// Encodes a column with the given encoding.
pub fn encode_column(
    column: &str,
    ty: ColumnType,
    values: &[Value],
    encoding: Encoding,
) -> Result<ColumnChunk> {
    let cv = to_column_values(ty, values.iter().cloned())?;
    ColumnChunk::encode(column, ty, &cv, encoding)
}

/// Decodes every value of a chunk.
pub fn decode_column(chunk: &ColumnChunk) -> Result<Vec<Value>> {
    chunk.decode_values()
}

pub(crate) fn shared(chunks: Vec<ColumnChunk>) -> Vec<Arc<ColumnChunk>> {
    chunks.into_iter().map(Arc::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_chunk_has_no_stats() {
        let c = encode_column("x", ColumnType::Int64, &[], Encoding::Plain).unwrap();
        assert_eq!(c.value_count, 0);
        assert!(c.min_max.is_none());
        assert!(decode_column(&c).unwrap().is_empty());
    }

    #[test]
    fn stats_bound_values() {
        let vals = vec![Value::cents(500), Value::cents(-20), Value::cents(999)];
        let c = encode_column("p", ColumnType::Decimal, &vals, Encoding::Delta).unwrap();
        let (lo, hi) = c.min_max.clone().unwrap();
        assert_eq!(lo, Value::cents(-20));
        assert_eq!(hi, Value::cents(999));
        assert_eq!(decode_column(&c).unwrap(), vals);
        assert_eq!(c.null_count, 0);
    }

    #[test]
    fn delta_on_string_column_is_rejected() {
        let vals = vec![Value::str("a")];
        assert!(matches!(
            encode_column("s", ColumnType::VarStr(4), &vals, Encoding::Delta),
            Err(Error::InapplicableEncoding { .. })
        ));
    }

    #[test]
    fn type_mismatch_is_rejected() {
        assert!(encode_column("d", ColumnType::Date, &[Value::Int(3)], Encoding::Plain).is_err());
    }
}
