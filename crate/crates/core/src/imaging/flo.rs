//! Middlebury `.flo` reader and writer.
//!
//! Layout: f32 magic `202021.25` ("PIEH"), i32 width, i32 height, then
//! `width * height` interleaved `(u, v)` f32 pairs in row-major order. Every
//! field is little-endian.

use std::path::Path;

use super::FlowField;
use crate::error::{Error, Result};

pub const FLO_MAGIC: f32 = 202021.25;

const HEADER_LEN: usize = 12;

pub fn read_flo(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if bytes[0..4] != FLO_MAGIC.to_le_bytes() {
        let found = f32::from_le_bytes(bytes[0..4].try_into().unwrap());
        return Err(Error::Format(format!("bad .flo magic {found}")));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 {
        return Err(Error::Dimension {
            width: width.into(),
            height: height.into(),
        });
    }
    let (w, h) = (width as usize, height as usize);
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or(Error::Dimension {
            width: width.into(),
            height: height.into(),
        })?;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after .flo payload",
            bytes.len() - expected
        )));
    }

    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for px in bytes[HEADER_LEN..].chunks_exact(8) {
        u.push(f32::from_le_bytes(px[0..4].try_into().unwrap()));
        v.push(f32::from_le_bytes(px[4..8].try_into().unwrap()));
    }
    FlowField::new(w, h, u, v)
}

pub fn write_flo(field: &FlowField) -> Vec<u8> {
    let n = field.width() * field.height();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(field.width() as i32).to_le_bytes());
    out.extend_from_slice(&(field.height() as i32).to_le_bytes());
    for (u, v) in field.u().iter().zip(field.v()) {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_flo_file(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_flo(&bytes)
}

pub fn write_flo_file(path: impl AsRef<Path>, field: &FlowField) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_flo(field)).map_err(|e| Error::io(path, e))
}
