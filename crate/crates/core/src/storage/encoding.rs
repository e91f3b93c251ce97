//! Column encodings: plain, run-length, dictionary and delta.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Decoded column values. Integers, cents and day numbers share `Int`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnValues {
    Int(Vec<i64>),
    Str(Vec<Arc<str>>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Int(v) => v.len(),
            ColumnValues::Str(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn kind(&self) -> &'static str {
        match self {
            ColumnValues::Int(_) => "integer",
            ColumnValues::Str(_) => "string",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Encoding {
    Plain,
    RunLength,
    Dictionary,
    Delta,
}

impl Encoding {
    pub const ALL: [Encoding; 4] = [
        Encoding::RunLength,
        Encoding::Dictionary,
        Encoding::Delta,
        Encoding::Plain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Encoding::Plain => "plain",
            Encoding::RunLength => "run-length",
            Encoding::Dictionary => "dictionary",
            Encoding::Delta => "delta",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Encoding::Plain => 0,
            Encoding::RunLength => 1,
            Encoding::Dictionary => 2,
            Encoding::Delta => 3,
        }
    }

    pub fn from_tag(t: u8) -> Result<Encoding> {
        Ok(match t {
            0 => Encoding::Plain,
            1 => Encoding::RunLength,
            2 => Encoding::Dictionary,
            3 => Encoding::Delta,
            _ => return Err(Error::Corrupt(format!("unknown encoding tag {t}"))),
        })
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Largest dictionary the selector will consider.
pub const MAX_DICTIONARY: usize = 4096;

pub(crate) fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub(crate) fn varint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        let mut shift = 0;
        loop {
            let b = *self
                .buf
                .get(self.pos)
                .ok_or_else(|| Error::Corrupt("truncated varint".into()))?;
            self.pos += 1;
            if shift >= 64 {
                return Err(Error::Corrupt("varint overflow".into()));
            }
            v |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
            shift += 7;
        }
    }

    pub(crate) fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Corrupt("truncated buffer".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    pub(crate) fn str(&mut self) -> Result<Arc<str>> {
        let n = self.varint()? as usize;
        let b = self.bytes(n)?;
        std::str::from_utf8(b)
            .map(Arc::from)
            .map_err(|_| Error::Corrupt("invalid utf-8".into()))
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_varint(out, s.len() as u64);
    out.extend_from_slice(s.as_bytes());
}

fn bit_width(max_code: usize) -> u8 {
    (usize::BITS - max_code.leading_zeros()) as u8
}

fn bitpack(out: &mut Vec<u8>, codes: impl Iterator<Item = u32>, width: u8) {
    out.push(width);
    if width == 0 {
        return;
    }
    let mut acc: u64 = 0;
    let mut bits = 0u32;
    for c in codes {
        acc |= (c as u64) << bits;
        bits += width as u32;
        while bits >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            bits -= 8;
        }
    }
    if bits > 0 {
        out.push(acc as u8);
    }
}

fn bitunpack(r: &mut Reader<'_>, n: usize) -> Result<Vec<u32>> {
    let width = r.u8()?;
    if width == 0 {
        return Ok(vec![0; n]);
    }
    if width > 32 {
        return Err(Error::Corrupt(format!("bit width {width}")));
    }
    let nbytes = (n * width as usize).div_ceil(8);
    let data = r.bytes(nbytes)?;
    let mask = (1u64 << width) - 1;
    let mut out = Vec::with_capacity(n);
    let mut acc: u64 = 0;
    let mut bits = 0u32;
    let mut it = data.iter();
    for _ in 0..n {
        while bits < width as u32 {
            acc |= (*it.next().unwrap() as u64) << bits;
            bits += 8;
        }
        out.push((acc & mask) as u32);
        acc >>= width;
        bits -= width as u32;
    }
    Ok(out)
}

/// Runs of equal adjacent values as `(value, run length)`.
pub fn runs<T: PartialEq + Clone>(values: &[T]) -> Vec<(T, u64)> {
    let mut out: Vec<(T, u64)> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some((last, n)) if last == v => *n += 1,
            _ => out.push((v.clone(), 1)),
        }
    }
    out
}

fn dictionary<T: std::hash::Hash + Eq + Clone + Ord>(values: &[T]) -> Option<(Vec<T>, Vec<u32>)> {
    let mut index: HashMap<&T, u32> = HashMap::new();
    for v in values {
        if !index.contains_key(v) {
            if index.len() == MAX_DICTIONARY {
                return None;
            }
            index.insert(v, 0);
        }
    }
    let mut dict: Vec<T> = index.keys().map(|v| (*v).clone()).collect();
    dict.sort();
    for (i, v) in dict.iter().enumerate() {
        *index.get_mut(v).unwrap() = i as u32;
    }
    let codes = values.iter().map(|v| index[v]).collect();
    Some((dict, codes))
}

/// Encodes `values` with `encoding`. Fails only for inapplicable combinations
/// (delta on strings, dictionary beyond [`MAX_DICTIONARY`] entries).
pub fn encode(values: &ColumnValues, encoding: Encoding) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match (values, encoding) {
        (ColumnValues::Int(v), Encoding::Plain) => {
            out.reserve(v.len() * 8);
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        (ColumnValues::Int(v), Encoding::RunLength) => {
            let rs = runs(v);
            put_varint(&mut out, rs.len() as u64);
            for (x, n) in rs {
                put_varint(&mut out, zigzag(x));
                put_varint(&mut out, n);
            }
        }
        (ColumnValues::Int(v), Encoding::Dictionary) => {
            let (dict, codes) = dictionary(v).ok_or(Error::InapplicableEncoding {
                encoding: "dictionary",
                column_type: "high-cardinality",
            })?;
            put_varint(&mut out, dict.len() as u64);
            let mut prev = 0i64;
            for x in &dict {
                put_varint(&mut out, zigzag(x.wrapping_sub(prev)));
                prev = *x;
            }
            bitpack(
                &mut out,
                codes.into_iter(),
                bit_width(dict.len().saturating_sub(1)),
            );
        }
        (ColumnValues::Int(v), Encoding::Delta) => {
            let mut prev = 0i64;
            for x in v {
                put_varint(&mut out, zigzag(x.wrapping_sub(prev)));
                prev = *x;
            }
        }
        (ColumnValues::Str(v), Encoding::Plain) => {
            for s in v {
                put_str(&mut out, s);
            }
        }
        (ColumnValues::Str(v), Encoding::RunLength) => {
            let rs = runs(v);
            put_varint(&mut out, rs.len() as u64);
            for (s, n) in rs {
                put_str(&mut out, &s);
                put_varint(&mut out, n);
            }
        }
        (ColumnValues::Str(v), Encoding::Dictionary) => {
            let (dict, codes) = dictionary(v).ok_or(Error::InapplicableEncoding {
                encoding: "dictionary",
                column_type: "high-cardinality",
            })?;
            put_varint(&mut out, dict.len() as u64);
            for s in &dict {
                put_str(&mut out, s);
            }
            bitpack(
                &mut out,
                codes.into_iter(),
                bit_width(dict.len().saturating_sub(1)),
            );
        }
        (ColumnValues::Str(_), Encoding::Delta) => {
            return Err(Error::InapplicableEncoding {
                encoding: "delta",
                column_type: values.kind(),
            })
        }
    }
    Ok(out)
}

/// Inverse of [`encode`]; `count` is the number of encoded values.
pub fn decode(
    bytes: &[u8],
    encoding: Encoding,
    is_string: bool,
    count: usize,
) -> Result<ColumnValues> {
    let mut r = Reader::new(bytes);
    let values = if !is_string {
        let mut v = Vec::with_capacity(count);
        match encoding {
            Encoding::Plain => {
                let b = r.bytes(count * 8)?;
                v.extend(
                    b.chunks_exact(8)
                        .map(|c| i64::from_le_bytes(c.try_into().unwrap())),
                );
            }
            Encoding::RunLength => {
                let n = r.varint()?;
                for _ in 0..n {
                    let x = unzigzag(r.varint()?);
                    let len = r.varint()? as usize;
                    if v.len() + len > count {
                        return Err(Error::Corrupt("run exceeds value count".into()));
                    }
                    v.extend(std::iter::repeat_n(x, len));
                }
            }
            Encoding::Dictionary => {
                let n = r.varint()? as usize;
                let mut dict = Vec::with_capacity(n);
                let mut prev = 0i64;
                for _ in 0..n {
                    prev = prev.wrapping_add(unzigzag(r.varint()?));
                    dict.push(prev);
                }
                for c in bitunpack(&mut r, count)? {
                    v.push(
                        *dict
                            .get(c as usize)
                            .ok_or_else(|| Error::Corrupt("dictionary code".into()))?,
                    );
                }
            }
            Encoding::Delta => {
                let mut prev = 0i64;
                for _ in 0..count {
                    prev = prev.wrapping_add(unzigzag(r.varint()?));
                    v.push(prev);
                }
            }
        }
        ColumnValues::Int(v)
    } else {
        let mut v: Vec<Arc<str>> = Vec::with_capacity(count);
        match encoding {
            Encoding::Plain => {
                for _ in 0..count {
                    v.push(r.str()?);
                }
            }
            Encoding::RunLength => {
                let n = r.varint()?;
                for _ in 0..n {
                    let s = r.str()?;
                    let len = r.varint()? as usize;
                    if v.len() + len > count {
                        return Err(Error::Corrupt("run exceeds value count".into()));
                    }
                    v.extend(std::iter::repeat_n(s, len));
                }
            }
            Encoding::Dictionary => {
                let n = r.varint()? as usize;
                let dict: Vec<Arc<str>> = (0..n).map(|_| r.str()).collect::<Result<_>>()?;
                for c in bitunpack(&mut r, count)? {
                    v.push(
                        dict.get(c as usize)
                            .ok_or_else(|| Error::Corrupt("dictionary code".into()))?
                            .clone(),
                    );
                }
            }
            Encoding::Delta => {
                return Err(Error::InapplicableEncoding {
                    encoding: "delta",
                    column_type: "string",
                })
            }
        }
        ColumnValues::Str(v)
    };
    if values.len() != count || !r.at_end() {
        return Err(Error::Corrupt(format!(
            "{encoding} chunk decoded {} of {count} values",
            values.len()
        )));
    }
    Ok(values)
}

/// Tries every applicable encoding and keeps the smallest output. A column
/// that is one single run is always run-length encoded.
pub fn encode_smallest(values: &ColumnValues) -> (Encoding, Vec<u8>) {
    let single_run = match values {
        ColumnValues::Int(v) => v.windows(2).all(|w| w[0] == w[1]),
        ColumnValues::Str(v) => v.windows(2).all(|w| w[0] == w[1]),
    };
    if single_run && !values.is_empty() {
        return (
            Encoding::RunLength,
            encode(values, Encoding::RunLength).expect("run-length always applies"),
        );
    }
    let mut best: Option<(Encoding, Vec<u8>)> = None;
    for e in Encoding::ALL {
        if let Ok(bytes) = encode(values, e) {
            if best.as_ref().is_none_or(|(_, b)| bytes.len() < b.len()) {
                best = Some((e, bytes));
            }
        }
    }
    best.expect("plain encoding always applies")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rle_runs_example() {
        let v = ColumnValues::Int(vec![5, 5, 5, 9]);
        assert_eq!(runs(&[5, 5, 5, 9]), vec![(5, 3), (9, 1)]);
        let b = encode(&v, Encoding::RunLength).unwrap();
        assert_eq!(decode(&b, Encoding::RunLength, false, 4).unwrap(), v);
    }

    #[test]
    fn delta_rejects_strings() {
        let v = ColumnValues::Str(vec![Arc::from("a")]);
        assert!(matches!(
            encode(&v, Encoding::Delta),
            Err(Error::InapplicableEncoding { .. })
        ));
    }

    #[test]
    fn empty_columns_round_trip() {
        for e in Encoding::ALL {
            let v = ColumnValues::Int(vec![]);
            let b = encode(&v, e).unwrap();
            assert_eq!(decode(&b, e, false, 0).unwrap(), v);
        }
    }

    #[test]
    fn identical_values_pick_run_length() {
        let v = ColumnValues::Int(vec![42; 1000]);
        let (e, bytes) = encode_smallest(&v);
        assert_eq!(e, Encoding::RunLength);
        assert!(bytes.len() < 8);
    }

    #[test]
    fn dictionary_refuses_high_cardinality() {
        let v = ColumnValues::Int((0..5000).collect());
        assert!(encode(&v, Encoding::Dictionary).is_err());
        let (e, _) = encode_smallest(&v);
        assert_eq!(e, Encoding::Delta);
    }

    #[test]
    fn truncated_input_is_corrupt() {
        let v = ColumnValues::Int(vec![1, 2, 3, 1000]);
        let b = encode(&v, Encoding::Delta).unwrap();
        assert!(decode(&b[..b.len() - 1], Encoding::Delta, false, 4).is_err());
        assert!(decode(&b, Encoding::Delta, false, 5).is_err());
    }

    proptest! {
        #[test]
        fn int_round_trip(v in prop::collection::vec(prop_oneof![any::<i64>(), -50i64..50], 0..2000)) {
            let col = ColumnValues::Int(v);
            for e in Encoding::ALL {
                if let Ok(b) = encode(&col, e) {
                    prop_assert_eq!(&decode(&b, e, false, col.len()).unwrap(), &col);
                }
            }
        }

        #[test]
        fn str_round_trip(v in prop::collection::vec("[a-c]{0,3}|[ -~]{0,20}", 0..500)) {
            let col = ColumnValues::Str(v.into_iter().map(Arc::from).collect());
            for e in [Encoding::Plain, Encoding::RunLength, Encoding::Dictionary] {
                let b = encode(&col, e).unwrap();
                prop_assert_eq!(&decode(&b, e, true, col.len()).unwrap(), &col);
            }
        }
    }
}
