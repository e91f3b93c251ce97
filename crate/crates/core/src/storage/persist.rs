//! On-disk ROS layout: `<dir>/<table>/seg_<segment>/c<id>.ros`, plus a
//! `versions` file listing per-segment mutation counters.
//!
//! Container file (all integers little-endian):
//!
//! ```text
//! "DMPROS" | format u16 | table u8 | segment u32 | id u64 | rows u64 | columns u16
//! per column: name (u16 len + bytes) | type tag u8 | encoding tag u8
//!             | values u64 | nulls u64 | has_stats u8 [min, max] | payload len u64
//! delete vector: words u64 + words
//! payloads, in column order
//! checksum u64 (FNV-1a over everything before it)
//! ```
//! Integer statistics are stored as their physical i64; string statistics as
//! u32 length + UTF-8 bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::datagen::{ColumnType, Table};
use crate::error::{Error, Result};
use crate::storage::catalog::TableCatalog;
use crate::storage::chunk::{self, ColumnChunk};
use crate::storage::container::{DeleteVector, RosContainer};
use crate::storage::encoding::Encoding;
use crate::types::Value;

const MAGIC: &[u8; 6] = b"DMPROS";
pub const FORMAT_VERSION: u16 = 1;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn put_stat(out: &mut Vec<u8>, ty: ColumnType, v: &Value) -> Result<()> {
    if ty.is_string() {
        let s = v
            .as_str()
            .ok_or_else(|| Error::Corrupt("string statistic".into()))?;
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s.as_bytes());
    } else {
        out.extend_from_slice(&chunk::physical_int(ty, v)?.to_le_bytes());
    }
    Ok(())
}

pub fn encode_container(c: &RosContainer) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(c.encoded_bytes() + 256);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(c.table.index() as u8);
    out.extend_from_slice(&c.segment.to_le_bytes());
    out.extend_from_slice(&c.id.to_le_bytes());
    out.extend_from_slice(&c.row_count.to_le_bytes());
    out.extend_from_slice(&(c.chunks.len() as u16).to_le_bytes());
    for ch in &c.chunks {
        out.extend_from_slice(&(ch.column.len() as u16).to_le_bytes());
        out.extend_from_slice(ch.column.as_bytes());
        out.push(ch.ty.tag());
        out.push(ch.encoding.tag());
        out.extend_from_slice(&ch.value_count.to_le_bytes());
        out.extend_from_slice(&ch.null_count.to_le_bytes());
        match &ch.min_max {
            Some((lo, hi)) => {
                out.push(1);
                put_stat(&mut out, ch.ty, lo)?;
                put_stat(&mut out, ch.ty, hi)?;
            }
            None => out.push(0),
        }
        out.extend_from_slice(&(ch.bytes.len() as u64).to_le_bytes());
    }
    let words = c.delete_vector.words();
    out.extend_from_slice(&(words.len() as u64).to_le_bytes());
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
    for ch in &c.chunks {
        out.extend_from_slice(&ch.bytes);
    }
    let sum = fnv1a(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Corrupt("container file truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn string(&mut self, n: usize) -> Result<String> {
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Corrupt("invalid UTF-8".into()))
    }
    fn stat(&mut self, ty: ColumnType) -> Result<Value> {
        if ty.is_string() {
            let n = self.u32()? as usize;
            Ok(Value::str(&self.string(n)?))
        } else {
            Ok(chunk::int_value(ty, self.i64()?))
        }
    }
}

struct ChunkHeader {
    name: String,
    ty: ColumnType,
    encoding: Encoding,
    values: u64,
    nulls: u64,
    stats: Option<(Value, Value)>,
    len: usize,
}

pub fn decode_container(bytes: &[u8]) -> Result<RosContainer> {
    if bytes.len() < MAGIC.len() + 8 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Corrupt("not a ROS container file".into()));
    }
    let (body, sum) = bytes.split_at(bytes.len() - 8);
    if fnv1a(body) != u64::from_le_bytes(sum.try_into().unwrap()) {
        return Err(Error::Corrupt("container checksum mismatch".into()));
    }
    let mut r = Cursor {
        buf: body,
        pos: MAGIC.len(),
    };
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::Corrupt(format!(
            "unsupported container format {version}"
        )));
    }
    let tidx = r.u8()? as usize;
    let table = *Table::ALL
        .get(tidx)
        .ok_or_else(|| Error::Corrupt(format!("table index {tidx}")))?;
    let segment = r.u32()?;
    let id = r.u64()?;
    let rows = r.u64()?;
    let ncols = r.u16()? as usize;
    let def = table.def();
    if ncols != def.width() {
        return Err(Error::Corrupt(format!("{table}: {ncols} columns in file")));
    }
    let mut headers = Vec::with_capacity(ncols);
    for col in def.columns {
        let n = r.u16()? as usize;
        let name = r.string(n)?;
        let tag = r.u8()?;
        if tag != col.ty.tag() {
            return Err(Error::Corrupt(format!("{table}.{name}: type tag {tag}")));
        }
        let encoding = Encoding::from_tag(r.u8()?)?;
        let values = r.u64()?;
        let nulls = r.u64()?;
        let stats = match r.u8()? {
            0 => None,
            _ => Some((r.stat(col.ty)?, r.stat(col.ty)?)),
        };
        let len = r.u64()? as usize;
        headers.push(ChunkHeader {
            name,
            ty: col.ty,
            encoding,
            values,
            nulls,
            stats,
            len,
        });
    }
    let nwords = r.u64()? as usize;
    if nwords != rows.div_ceil(64) as usize {
        return Err(Error::Corrupt("delete vector length".into()));
    }
    let words = (0..nwords).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    let dv = DeleteVector::from_words(rows, words)?;
    let mut chunks = Vec::with_capacity(ncols);
    for h in headers {
        chunks.push(ColumnChunk {
            column: h.name,
            ty: h.ty,
            encoding: h.encoding,
            value_count: h.values,
            null_count: h.nulls,
            min_max: h.stats,
            bytes: r.take(h.len)?.to_vec(),
        });
    }
    if r.pos != body.len() {
        return Err(Error::Corrupt("trailing bytes in container file".into()));
    }
    RosContainer::from_parts(table, segment, id, chunks, dv)
}

/// Writes every ROS container and the segment versions under `dir`, replacing
/// previous contents. WOS rows are not persisted; move them out first.
pub fn save_catalog(catalog: &TableCatalog, dir: &Path) -> Result<()> {
    let staging = dir.with_extension("saving");
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir_all(&staging)?;
    for t in Table::ALL {
        for c in &catalog.table(t).containers {
            let d = staging.join(t.name()).join(format!("seg_{:04}", c.segment));
            fs::create_dir_all(&d)?;
            fs::write(d.join(format!("c{:08}.ros", c.id)), encode_container(c)?)?;
        }
    }
    let mut versions = String::new();
    for ((t, s), v) in catalog.versions() {
        versions.push_str(&format!("{} {s} {v}\n", t.name()));
    }
    fs::write(staging.join("versions"), versions)?;
    if dir.exists() {
        fs::remove_dir_all(dir)?;
    }
    fs::rename(&staging, dir)?;
    Ok(())
}

pub fn load_catalog(dir: &Path, wos_budget: usize) -> Result<TableCatalog> {
    let mut containers = Vec::new();
    for t in Table::ALL {
        let tdir = dir.join(t.name());
        if !tdir.is_dir() {
            continue;
        }
        let mut segs: Vec<_> = fs::read_dir(&tdir)?.collect::<std::io::Result<_>>()?;
        segs.sort_by_key(|e| e.file_name());
        for seg in segs {
            let mut files: Vec<_> = fs::read_dir(seg.path())?.collect::<std::io::Result<_>>()?;
            files.sort_by_key(|e| e.file_name());
            for f in files {
                if f.path().extension().is_some_and(|e| e == "ros") {
                    let c = decode_container(&fs::read(f.path())?)?;
                    if c.table != t {
                        return Err(Error::Corrupt(format!(
                            "{} holds a {} container",
                            f.path().display(),
                            c.table
                        )));
                    }
                    containers.push(c);
                }
            }
        }
    }
    let mut versions = BTreeMap::new();
    let vpath = dir.join("versions");
    if vpath.exists() {
        for line in fs::read_to_string(&vpath)?
            .lines()
            .filter(|l| !l.trim().is_empty())
        {
            let f: Vec<&str> = line.split_whitespace().collect();
            let parsed = match f.as_slice() {
                [t, s, v] => (
                    t.parse::<Table>().ok(),
                    s.parse::<u32>().ok(),
                    v.parse::<u64>().ok(),
                ),
                _ => (None, None, None),
            };
            match parsed {
                (Some(t), Some(s), Some(v)) => {
                    versions.insert((t, s), v);
                }
                _ => return Err(Error::Corrupt(format!("versions line '{line}'"))),
            }
        }
    }
    let mut cat = TableCatalog::new(wos_budget);
    cat.restore(containers, versions);
    Ok(cat)
}
