//! Binary field snapshots.
//!
//! Layout: the 8 ASCII bytes `GSGE0001` (a 4-byte tag and a 4-digit
//! version), then `n`, `nx`, `nt` as little-endian `u32`, then every value
//! as a little-endian `f64` in time-major, lexicographic-space order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpacetimeField};

const TAG: &[u8; 4] = b"GSGE";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 3 * 4;

pub fn encode_snapshot(field: &SpacetimeField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(TAG);
    out.extend_from_slice(format!("{SNAPSHOT_VERSION:04}").as_bytes());
    for v in [g.n, g.nx, g.nt] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Whether `bytes` start with the snapshot tag (any version).
pub fn is_snapshot(bytes: &[u8]) -> bool {
    bytes.starts_with(TAG)
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SpacetimeField> {
    if bytes.len() < 8 || !is_snapshot(bytes) {
        return Err(Error::Snapshot("bad magic: not a field snapshot".into()));
    }
    let version = std::str::from_utf8(&bytes[4..8])
        .ok()
        .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|s| s.parse::<u32>().ok())
        .ok_or_else(|| Error::Snapshot("bad magic: malformed version field".into()))?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!(
            "unsupported snapshot version {version} (this build reads version {SNAPSHOT_VERSION})"
        )));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Snapshot(format!("truncated header ({} bytes)", bytes.len())));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().expect("4 bytes")) as usize;
    let grid = GridSpec::new(word(0), word(1), word(2))
        .map_err(|e| Error::Snapshot(format!("invalid grid in header: {e}")))?;
    let body = &bytes[HEADER_LEN..];
    let want = 8 * grid.len();
    if body.len() != want {
        return Err(Error::Snapshot(format!(
            "{} payload: {} bytes, expected {want}",
            if body.len() < want { "truncated" } else { "oversized" },
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    SpacetimeField::new(grid, values)
}

pub fn write_snapshot(field: &SpacetimeField, path: &Path) -> Result<()> {
    std::fs::write(path, encode_snapshot(field))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<SpacetimeField> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Snapshot(format!("cannot read {}: {e}", path.display())))?;
    decode_snapshot(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpacetimeField {
        let g = GridSpec::new(2, 4, 2).unwrap();
        SpacetimeField::from_fn(g, |x, t| (x[0] - 0.3 * x[1]).sin() + t / 3.0)
    }

    #[test]
    fn header_layout() {
        let bytes = encode_snapshot(&sample());
        assert_eq!(&bytes[..8], b"GSGE0001");
        assert_eq!(&bytes[8..20], &[2, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(bytes.len(), 20 + 8 * 16 * 4);
    }

    #[test]
    fn errors() {
        let mut bytes = encode_snapshot(&sample());
        let err = |b: &[u8]| decode_snapshot(b).unwrap_err().to_string();
        assert!(err(&bytes[..bytes.len() - 1]).contains("truncated"));
        bytes[7] = b'2';
        assert!(err(&bytes).contains("unsupported snapshot version 2"));
        bytes[0] = b'X';
        assert!(err(&bytes).contains("bad magic"));
    }
}
