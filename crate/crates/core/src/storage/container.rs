use std::sync::Arc;

use crate::datagen::{ColumnType, Table};
use crate::error::{Error, Result};
use crate::storage::chunk::{self, ColumnChunk};
use crate::storage::encoding::ColumnValues;
use crate::types::{Row, Value};

/// Bitmap of logically deleted row positions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeleteVector {
    len: u64,
    words: Vec<u64>,
    deleted: u64,
}

impl DeleteVector {
    pub fn new(len: u64) -> DeleteVector {
        DeleteVector {
            len,
            words: vec![0; len.div_ceil(64) as usize],
            deleted: 0,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn deleted(&self) -> u64 {
        self.deleted
    }

    pub fn is_deleted(&self, pos: u64) -> bool {
        self.words[(pos / 64) as usize] >> (pos % 64) & 1 == 1
    }

    /// Returns whether the position was live before.
    pub fn mark(&mut self, pos: u64) -> bool {
        let w = &mut self.words[(pos / 64) as usize];
        let bit = 1u64 << (pos % 64);
        if *w & bit != 0 {
            return false;
        }
        *w |= bit;
        self.deleted += 1;
        true
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn from_words(len: u64, words: Vec<u64>) -> Result<DeleteVector> {
        if words.len() != len.div_ceil(64) as usize {
            return Err(Error::Corrupt("delete vector length".into()));
        }
        if !len.is_multiple_of(64) && words.last().is_some_and(|w| w >> (len % 64) != 0) {
            return Err(Error::Corrupt("delete vector bits beyond row count".into()));
        }
        let deleted = words.iter().map(|w| w.count_ones() as u64).sum();
        Ok(DeleteVector {
            len,
            words,
            deleted,
        })
    }
}

/// Immutable, encoded batch of rows for one (table, segment). Deletes replace
/// the delete vector, never the chunks.
#[derive(Clone, Debug)]
pub struct RosContainer {
    pub table: Table,
    pub segment: u32,
    pub id: u64,
    pub row_count: u64,
    pub chunks: Vec<Arc<ColumnChunk>>,
    pub delete_vector: Arc<DeleteVector>,
}

impl RosContainer {
    /// Encodes `rows` (already in final order) column by column.
    pub fn build(table: Table, segment: u32, id: u64, rows: &[Row]) -> Result<RosContainer> {
        let def = table.def();
        let chunks = def
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let values = chunk::to_column_values(c.ty, rows.iter().map(|r| r[i].clone()))?;
                ColumnChunk::encode_best(c.name, c.ty, &values)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(
            table,
            segment,
            id,
            chunks,
            DeleteVector::new(rows.len() as u64),
        )
    }

    pub fn from_parts(
        table: Table,
        segment: u32,
        id: u64,
        chunks: Vec<ColumnChunk>,
        delete_vector: DeleteVector,
    ) -> Result<RosContainer> {
        let def = table.def();
        if chunks.len() != def.width() {
            return Err(Error::Corrupt(format!(
                "{table}: container has {} columns",
                chunks.len()
            )));
        }
        let row_count = delete_vector.len();
        for (c, d) in chunks.iter().zip(def.columns) {
            if c.column != d.name || c.ty.tag() != d.ty.tag() || c.value_count != row_count {
                return Err(Error::Corrupt(format!(
                    "{table}: chunk {} does not match schema",
                    c.column
                )));
            }
        }
        Ok(RosContainer {
            table,
            segment,
            id,
            row_count,
            chunks: chunk::shared(chunks),
            delete_vector: Arc::new(delete_vector),
        })
    }

    pub fn live_rows(&self) -> u64 {
        self.row_count - self.delete_vector.deleted()
    }

    pub fn encoded_bytes(&self) -> usize {
        self.chunks.iter().map(|c| c.encoded_len()).sum()
    }

    pub fn column_type(&self, col: usize) -> ColumnType {
        self.chunks[col].ty
    }

    pub fn decode_column(&self, col: usize) -> Result<Vec<Value>> {
        self.chunks[col].decode_values()
    }

    pub fn decode_raw(&self, col: usize) -> Result<ColumnValues> {
        self.chunks[col].decode()
    }

    /// Copy of this container with a replaced delete vector.
    pub fn with_deletes(&self, delete_vector: DeleteVector) -> RosContainer {
        RosContainer {
            delete_vector: Arc::new(delete_vector),
            ..self.clone()
        }
    }
}
