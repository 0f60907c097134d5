//! Serialized network parameters.
//!
//! ```text
//! "ELCNN"                 5 bytes
//! version                 u16 LE (1)
//! input side, channels,
//! kernel, padding, c1,
//! c2, classes             7 x u32 LE
//! parameters              f64 LE: conv1 weights, conv1 biases,
//!                         conv2 weights, conv2 biases, fc weights,
//!                         fc biases
//! ```

use std::fs;
use std::path::Path;

use electorate_core::cnn::{Architecture, NetworkParams, CLASSES, KERNEL, PADDING};
use electorate_core::image::{CHANNELS, FACE_SIZE};

use super::FormatError;

pub const MAGIC: &[u8; 5] = b"ELCNN";
pub const VERSION: u16 = 1;

pub fn encode(params: &NetworkParams) -> Vec<u8> {
    let arch = params.arch();
    let mut out = Vec::with_capacity(35 + 8 * arch.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [FACE_SIZE, CHANNELS, KERNEL, PADDING, arch.c1, arch.c2, CLASSES] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for block in params.blocks() {
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<NetworkParams, FormatError> {
    if bytes.len() < 7 || &bytes[..5] != MAGIC {
        return Err(FormatError::BadMagic { expected: "ELCNN" });
    }
    let version = u16::from_le_bytes([bytes[5], bytes[6]]);
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let header = bytes.get(7..35).ok_or(FormatError::Truncated("architecture constants"))?;
    let consts: Vec<usize> =
        header.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize).collect();
    let fixed = [FACE_SIZE, CHANNELS, KERNEL, PADDING];
    if consts[..4] != fixed || consts[6] != CLASSES {
        return Err(FormatError::CorruptHeader(format!(
            "architecture constants {consts:?} do not match this build"
        )));
    }
    let arch = Architecture::new(consts[4], consts[5]);
    let payload = &bytes[35..];
    if payload.len() != 8 * arch.param_count() {
        return Err(FormatError::Truncated("parameters"));
    }
    let mut values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let blocks = arch.shapes().map(|n| values.by_ref().take(n).collect::<Vec<_>>());
    Ok(NetworkParams::from_blocks(arch, blocks)?)
}

pub fn save(params: &NetworkParams, path: &Path) -> Result<(), FormatError> {
    fs::write(path, encode(params))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<NetworkParams, FormatError> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let params = NetworkParams::init(Architecture::default(), 3);
        let bytes = encode(&params);
        let back = decode(&bytes).unwrap();
        assert_eq!(back, params);
        assert_eq!(encode(&back), bytes);
        assert_eq!(bytes.len(), 35 + 8 * Architecture::default().param_count());
    }

    #[test]
    fn rejects_bad_files() {
        let bytes = encode(&NetworkParams::init(Architecture::new(2, 2), 1));
        assert!(matches!(decode(&bytes[..bytes.len() - 8]), Err(FormatError::Truncated(_))));
        assert!(matches!(decode(b"ELSS.."), Err(FormatError::BadMagic { .. })));
        let mut bad = bytes.clone();
        bad[7] = 32;
        assert!(matches!(decode(&bad), Err(FormatError::CorruptHeader(_))));
        let mut nan = bytes.clone();
        let at = nan.len() - 8;
        nan[at..].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode(&nan), Err(FormatError::Params(_))));
    }
}
