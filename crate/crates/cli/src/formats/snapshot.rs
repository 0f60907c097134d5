//! Binary snapshot files.
//!
//! ```text
//! "ELSS"            4 bytes
//! version           u16 LE (1)
//! label length      u32 LE, then that many UTF-8 bytes
//! captured_at       i64 LE, seconds since the Unix epoch
//! count             u64 LE
//! ids               count LEB128 varints, each the wrapping difference
//!                   from the previous id (the first from 0)
//! ```
//!
//! A valid file has strictly positive deltas that never overflow; anything
//! else is rejected as an unsorted payload.

use std::fs;
use std::io::Write;
use std::path::Path;

use electorate_core::{Candidate, Snapshot, Timestamp};

use super::FormatError;

pub const MAGIC: &[u8; 4] = b"ELSS";
pub const VERSION: u16 = 1;

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

/// Encodes arbitrary parts; `ids` are not checked, so unsorted input
/// produces a file that [`decode`] rejects.
pub fn encode_parts(label: &str, captured_at: i64, ids: &[u64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(26 + label.len() + ids.len() * 3);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(label.len() as u32).to_le_bytes());
    out.extend_from_slice(label.as_bytes());
    out.extend_from_slice(&captured_at.to_le_bytes());
    out.extend_from_slice(&(ids.len() as u64).to_le_bytes());
    let mut prev = 0u64;
    for &id in ids {
        put_varint(&mut out, id.wrapping_sub(prev));
        prev = id;
    }
    out
}

pub fn encode(snapshot: &Snapshot) -> Vec<u8> {
    encode_parts(snapshot.candidate().as_str(), snapshot.captured_at().seconds(), snapshot.ids())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(FormatError::Truncated(what))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], FormatError> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn varint(&mut self) -> Result<u64, FormatError> {
        let mut value = 0u64;
        for shift in (0..64).step_by(7) {
            let byte = self.take(1, "id payload")?[0];
            let bits = (byte & 0x7f) as u64;
            if shift == 63 && bits > 1 {
                return Err(FormatError::CorruptHeader("varint overflows 64 bits".into()));
            }
            value |= bits << shift;
            if byte & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(FormatError::CorruptHeader("varint longer than 10 bytes".into()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot, FormatError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4, "magic").map_err(|_| FormatError::BadMagic { expected: "ELSS" })? != MAGIC {
        return Err(FormatError::BadMagic { expected: "ELSS" });
    }
    let version = u16::from_le_bytes(r.array("version")?);
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let label_len = u32::from_le_bytes(r.array("label length")?) as usize;
    let label = std::str::from_utf8(r.take(label_len, "label")?)
        .map_err(|e| FormatError::CorruptHeader(format!("label is not UTF-8: {e}")))?
        .to_owned();
    let captured_at = i64::from_le_bytes(r.array("timestamp")?);
    let count = u64::from_le_bytes(r.array("count")?);
    // Each id takes at least one byte.
    if count > (bytes.len() - r.pos) as u64 {
        return Err(FormatError::Truncated("id payload"));
    }
    let mut ids = Vec::with_capacity(count as usize);
    let mut prev = 0u64;
    for i in 0..count {
        let delta = r.varint()?;
        let id = if i == 0 {
            delta
        } else {
            match prev.checked_add(delta) {
                Some(id) if delta > 0 => id,
                _ => return Err(FormatError::Unsorted(i)),
            }
        };
        ids.push(id);
        prev = id;
    }
    if r.pos != bytes.len() {
        return Err(FormatError::TrailingBytes(bytes.len() - r.pos));
    }
    Snapshot::from_sorted(Candidate::new(label), Timestamp(captured_at), ids)
        .map_err(|e| FormatError::CorruptHeader(e.to_string()))
}

pub fn save(snapshot: &Snapshot, path: &Path) -> Result<(), FormatError> {
    fs::write(path, encode(snapshot))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Snapshot, FormatError> {
    decode(&fs::read(path)?)
}

/// One decimal id per line.
pub fn export_csv(snapshot: &Snapshot, path: &Path) -> Result<(), FormatError> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    super::ids::write_ids(&mut out, snapshot.ids())?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(ids: &[u64]) -> Snapshot {
        Snapshot::from_sorted("sanders".into(), Timestamp(1_462_838_400), ids.to_vec()).unwrap()
    }

    #[test]
    fn roundtrip_small() {
        let s = snap(&[1, 2, 3]);
        assert_eq!(decode(&encode(&s)).unwrap(), s);
        let empty = snap(&[]);
        assert_eq!(decode(&encode(&empty)).unwrap(), empty);
        let extremes = snap(&[0, 127, 128, u64::MAX - 1, u64::MAX]);
        assert_eq!(decode(&encode(&extremes)).unwrap(), extremes);
    }

    #[test]
    fn layout_is_bit_exact() {
        let bytes = encode(&Snapshot::from_sorted("ab".into(), Timestamp(-2), vec![5, 300]).unwrap());
        let mut want = b"ELSS".to_vec();
        want.extend([1, 0]);
        want.extend([2, 0, 0, 0]);
        want.extend(b"ab");
        want.extend((-2i64).to_le_bytes());
        want.extend(2u64.to_le_bytes());
        want.extend([5, 0xA7, 0x02]); // 5, then 295 = 0b10_0100111
        assert_eq!(bytes, want);
    }

    #[test]
    fn rejects_unsorted_payload() {
        let err = decode(&encode_parts("x", 0, &[2, 1])).unwrap_err();
        assert!(matches!(err, FormatError::Unsorted(1)));
        assert!(err.to_string().contains("unsorted payload"));
        assert!(matches!(decode(&encode_parts("x", 0, &[4, 4])).unwrap_err(), FormatError::Unsorted(1)));
    }

    #[test]
    fn rejects_corrupt_headers() {
        let good = encode(&snap(&[1, 2]));
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(FormatError::BadMagic { .. })));
        let mut bad = good.clone();
        bad[4] = 9;
        assert!(matches!(decode(&bad), Err(FormatError::UnsupportedVersion(9))));
        assert!(matches!(decode(&good[..good.len() - 1]), Err(FormatError::Truncated(_))));
        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(decode(&bad), Err(FormatError::TrailingBytes(1))));
        assert!(matches!(decode(b"EL"), Err(FormatError::BadMagic { .. })));
    }
}
