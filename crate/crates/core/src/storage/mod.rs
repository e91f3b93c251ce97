//! Per-node columnar storage: a row-oriented write store staged in front of
//! immutable, encoded column containers.

pub mod catalog;
pub mod chunk;
pub mod container;
pub mod encoding;
pub mod persist;
pub mod predicate;
pub mod wos;

pub use catalog::{CatalogSnapshot, ScanOptions, ScanStats, SegmentCopy, TableCatalog, CHUNK_ROWS};
pub use chunk::{decode_column, encode_column, ColumnChunk};
pub use container::{DeleteVector, RosContainer};
pub use encoding::{ColumnValues, Encoding};
pub use predicate::{ColumnPredicate, PredOp};
pub use wos::{WosBuffer, DEFAULT_WOS_BUDGET};
