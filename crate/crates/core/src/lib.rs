//! Desk-scale columnar MPP database with K-safe replication and a TPC-H style
//! benchmark harness.

pub mod bench;
pub mod cli;
pub mod cluster;
pub mod datagen;
pub mod error;
pub mod exec;
pub mod kv;
pub mod par;
pub mod storage;
pub mod types;

pub use error::{Error, Result};
