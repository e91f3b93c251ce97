//! Quarterly data packets: ZIP archives holding one CSV per table.
//!
//! Members ending in `.csv` are mapped to tables by file stem, or through an
//! optional `manifest.txt` member of `file=table` lines. A file with any bad
//! row is rejected as a whole and the others still load. Re-ingesting a
//! packet duplicates its rows; nothing deduplicates them.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Seek, Write};
use std::path::Path;
use std::time::Instant;

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipArchive, ZipWriter};

use crate::bench::elapsed_seconds;
use crate::cluster::Cluster;
use crate::datagen::tbl::{format_field, read_tbl};
use crate::datagen::{parse_field, Table};
use crate::error::{Error, Result};
use crate::kv::KvFile;
use crate::types::Row;

pub const PACKET_MANIFEST: &str = "manifest.txt";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reject {
    pub member: String,
    /// 1-based CSV record number including the header, when the fault is in a row.
    pub line: Option<u64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchOutcome {
    pub inserted: BTreeMap<Table, u64>,
    pub rejects: Vec<Reject>,
    /// Members that are not CSV, such as scanned images.
    pub skipped: Vec<String>,
    pub seconds: f64,
}

impl BatchOutcome {
    pub fn total(&self) -> u64 {
        self.inserted.values().sum()
    }

    pub fn rejects_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["member", "line", "reason"])?;
        for r in &self.rejects {
            w.write_record([
                r.member.as_str(),
                &r.line.map(|l| l.to_string()).unwrap_or_default(),
                &r.reason,
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn file_name(member: &str) -> &str {
    member.rsplit(['/', '\\']).next().unwrap_or(member)
}

/// Parses one CSV member into rows of `table`. The header must name every
/// column of the table exactly once, in any order.
pub fn parse_table_csv(table: Table, text: &[u8]) -> Result<Vec<Row>, (Option<u64>, String)> {
    let def = table.def();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text);
    let header = r.headers().map_err(|e| (Some(1), e.to_string()))?.clone();
    let mut positions = vec![None; def.width()];
    for (i, h) in header.iter().enumerate() {
        let idx = def
            .column_index(&h.trim().to_ascii_lowercase())
            .ok_or_else(|| (Some(1), format!("unknown column '{h}' for {table}")))?;
        if positions[idx].replace(i).is_some() {
            return Err((Some(1), format!("column '{h}' appears twice")));
        }
    }
    if let Some(missing) = positions.iter().position(Option::is_none) {
        return Err((
            Some(1),
            format!("missing column '{}'", def.columns[missing].name),
        ));
    }
    let positions: Vec<usize> = positions.into_iter().flatten().collect();
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let line = Some(n as u64 + 2);
        let rec = rec.map_err(|e| (line, e.to_string()))?;
        if rec.len() != def.width() {
            return Err((
                line,
                format!("expected {} fields, found {}", def.width(), rec.len()),
            ));
        }
        let row = def
            .columns
            .iter()
            .zip(&positions)
            .map(|(c, &p)| {
                parse_field(c.ty, &rec[p]).map_err(|e| (line, format!("{}: {e}", c.name)))
            })
            .collect::<Result<Row, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Loads every acceptable CSV member of the archive into `cluster`, then
/// moves the staged rows out to the read-optimized store.
pub fn ingest_batch<R: Read + Seek>(archive: R, cluster: &Cluster) -> Result<BatchOutcome> {
    if !cluster.is_safe() {
        return Err(Error::ClusterUnsafe(
            "cannot ingest into an unsafe cluster".into(),
        ));
    }
    let start = Instant::now();
    let mut zip = ZipArchive::new(archive)?;
    let mut mapping: BTreeMap<String, String> = BTreeMap::new();
    if let Some(i) = (0..zip.len()).find(|&i| {
        zip.name_for_index(i)
            .is_some_and(|n| file_name(n) == PACKET_MANIFEST)
    }) {
        let mut text = String::new();
        zip.by_index(i)?.read_to_string(&mut text)?;
        mapping = KvFile::parse(&text)?.to_map();
    }
    let mut out = BatchOutcome {
        inserted: Table::ALL.iter().map(|&t| (t, 0)).collect(),
        rejects: Vec::new(),
        skipped: Vec::new(),
        seconds: 0.0,
    };
    for i in 0..zip.len() {
        let mut member = zip.by_index(i)?;
        let name = member.name().to_string();
        if member.is_dir() || file_name(&name) == PACKET_MANIFEST {
            continue;
        }
        let base = file_name(&name).to_string();
        let Some(stem) = base
            .strip_suffix(".csv")
            .or_else(|| base.strip_suffix(".CSV"))
        else {
            out.skipped.push(name);
            continue;
        };
        let table_name = mapping
            .get(&base)
            .or_else(|| mapping.get(&name))
            .map_or(stem, |s| s.as_str());
        let table: Table = match table_name.parse() {
            Ok(t) => t,
            Err(e) => {
                out.rejects.push(Reject {
                    member: name,
                    line: None,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let mut bytes = Vec::new();
        member.read_to_end(&mut bytes)?;
        drop(member);
        match parse_table_csv(table, &bytes) {
            Ok(rows) => match cluster.ingest(table, rows) {
                Ok(n) => *out.inserted.entry(table).or_default() += n,
                Err(e) => out.rejects.push(Reject {
                    member: name,
                    line: None,
                    reason: e.to_string(),
                }),
            },
            Err((line, reason)) => out.rejects.push(Reject {
                member: name,
                line,
                reason,
            }),
        }
    }
    cluster.moveout_all()?;
    out.seconds = elapsed_seconds(start.elapsed());
    Ok(out)
}

pub fn ingest_batch_file(path: &Path, cluster: &Cluster) -> Result<BatchOutcome> {
    ingest_batch(File::open(path)?, cluster)
}

/// CSV text for `rows` of `table` with a header row.
pub fn table_csv(table: Table, rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(table.def().columns.iter().map(|c| c.name))?;
    for row in rows {
        w.write_record(row.iter().map(format_field))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes a packet holding one CSV member per entry.
pub fn write_packet<W: Write + Seek>(out: W, tables: &[(Table, Vec<Row>)]) -> Result<()> {
    let mut zip = ZipWriter::new(out);
    let opts = SimpleFileOptions::default().compression_method(CompressionMethod::Deflated);
    for (table, rows) in tables {
        zip.start_file(format!("{}.csv", table.name()), opts)?;
        zip.write_all(&table_csv(*table, rows)?)?;
    }
    zip.finish()?;
    Ok(())
}

/// Converts every `<table>.tbl` found in `dir` into one packet.
pub fn pack_tbl_dir(dir: &Path, out: &Path) -> Result<BTreeMap<Table, u64>> {
    let mut tables = Vec::new();
    for t in Table::ALL {
        let p = dir.join(format!("{}.tbl", t.name()));
        if p.exists() {
            tables.push((t, read_tbl(t, &p)?));
        }
    }
    if tables.is_empty() {
        return Err(Error::Batch(format!("no .tbl files in {}", dir.display())));
    }
    write_packet(File::create(out)?, &tables)?;
    Ok(tables.iter().map(|(t, r)| (*t, r.len() as u64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Value;
    use std::io::Cursor;

    #[test]
    fn header_may_reorder_columns() {
        let csv = b"r_comment,r_regionkey,r_name\n\"x, y\",7,MOON\n";
        let rows = parse_table_csv(Table::Region, csv).unwrap();
        assert_eq!(
            rows,
            vec![vec![Value::Int(7), Value::str("MOON"), Value::str("x, y")]]
        );
    }

    #[test]
    fn bad_rows_name_their_line() {
        let csv = b"r_regionkey,r_name,r_comment\n1,A,c\nzz,B,c\n";
        let (line, reason) = parse_table_csv(Table::Region, csv).unwrap_err();
        assert_eq!(line, Some(3));
        assert!(reason.contains("r_regionkey"));
        assert!(parse_table_csv(Table::Region, b"r_regionkey,r_name\n1,A\n").is_err());
    }

    #[test]
    fn packet_round_trip_through_writer() {
        let rows = vec![vec![Value::Int(1), Value::str("A"), Value::str("c")]];
        let mut buf = Cursor::new(Vec::new());
        write_packet(&mut buf, &[(Table::Region, rows.clone())]).unwrap();
        let mut zip = ZipArchive::new(Cursor::new(buf.into_inner())).unwrap();
        let mut text = Vec::new();
        zip.by_name("region.csv")
            .unwrap()
            .read_to_end(&mut text)
            .unwrap();
        assert_eq!(parse_table_csv(Table::Region, &text).unwrap(), rows);
    }
}
