//! Face tensor files.
//!
//! `<name>.f32`: a u32 LE count, then `count` tensors of 28x28x3
//! little-endian `f32` values, row-major `(row, column, channel)`.
//! A sidecar `<name>.ids` lists the user ID of each tensor, one per line,
//! in the same order.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use electorate_core::image::{FaceTensor, TENSOR_LEN};

use super::ids::{read_ids, write_ids};
use super::FormatError;

pub fn ids_path(path: &Path) -> PathBuf {
    path.with_extension("ids")
}

pub fn encode(tensors: &[FaceTensor]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + tensors.len() * TENSOR_LEN * 4);
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in tensors {
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Decodes tensor data, pairing it with `ids` (or `0..count` when absent).
pub fn decode(bytes: &[u8], ids: Option<&[u64]>) -> Result<Vec<FaceTensor>, FormatError> {
    let header = bytes.get(..4).ok_or(FormatError::Truncated("tensor count"))?;
    let count = u32::from_le_bytes(header.try_into().unwrap()) as usize;
    let payload = &bytes[4..];
    if payload.len() != count * TENSOR_LEN * 4 {
        return Err(FormatError::Truncated("tensor payload"));
    }
    if let Some(ids) = ids {
        if ids.len() != count {
            return Err(FormatError::CorruptHeader(format!("{} ids for {count} tensors", ids.len())));
        }
    }
    payload
        .chunks_exact(TENSOR_LEN * 4)
        .enumerate()
        .map(|(i, chunk)| {
            let data = chunk.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
            let id = ids.map_or(i as u64, |ids| ids[i]);
            Ok(FaceTensor::new(id, data)?)
        })
        .collect()
}

pub fn save(path: &Path, tensors: &[FaceTensor]) -> Result<(), FormatError> {
    fs::write(path, encode(tensors))?;
    let mut ids = BufWriter::new(fs::File::create(ids_path(path))?);
    write_ids(&mut ids, &tensors.iter().map(|t| t.user_id).collect::<Vec<_>>())?;
    ids.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Vec<FaceTensor>, FormatError> {
    let bytes = fs::read(path)?;
    let sidecar = ids_path(path);
    let ids = if sidecar.exists() { Some(read_ids(BufReader::new(fs::File::open(sidecar)?))?) } else { None };
    decode(&bytes, ids.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use electorate_core::synthetic::noise_face;

    #[test]
    fn roundtrip_with_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("faces.f32");
        let tensors = vec![noise_face(42, 1), noise_face(7, 1)];
        save(&path, &tensors).unwrap();
        assert_eq!(load(&path).unwrap(), tensors);
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], &2u32.to_le_bytes());
        assert_eq!(&bytes[4..8], &tensors[0].data()[0].to_le_bytes());
        assert_eq!(bytes.len(), 4 + 2 * TENSOR_LEN * 4);
    }

    #[test]
    fn without_sidecar_ids_are_positions() {
        let bytes = encode(&[noise_face(42, 1)]);
        assert_eq!(decode(&bytes, None).unwrap()[0].user_id, 0);
        assert!(matches!(decode(&bytes[..10], None), Err(FormatError::Truncated(_))));
        assert!(matches!(decode(&bytes, Some(&[1, 2])), Err(FormatError::CorruptHeader(_))));
    }
}
