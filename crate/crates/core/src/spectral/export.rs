//! Flat binary dump of a real grid: a 16-byte header of two little-endian
//! `u64` (height, width) followed by `height * width` little-endian `f64` in
//! row-major order.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// A decoded flat binary array.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatArray {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

pub fn write_flat_f64<W: Write>(mut out: W, height: usize, width: usize, values: &[f64]) -> std::io::Result<()> {
    assert_eq!(values.len(), height * width, "flat array length does not match its header");
    let mut buf = Vec::with_capacity(16 + 8 * values.len());
    buf.extend_from_slice(&(height as u64).to_le_bytes());
    buf.extend_from_slice(&(width as u64).to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)
}

pub fn read_flat_f64<R: Read>(mut input: R) -> Result<FlatArray> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io("<flat array>", e))?;
    if bytes.len() < 16 {
        return Err(Error::invalid("flat array", "missing 16-byte header"));
    }
    let height = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let width = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    let expected = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::invalid("flat array", "header dimensions overflow"))?;
    if body.len() != expected {
        return Err(Error::invalid(
            "flat array",
            format!("header says {height}x{width} but body has {} bytes", body.len()),
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FlatArray { height, width, values })
}
