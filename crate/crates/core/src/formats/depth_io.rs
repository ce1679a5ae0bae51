//! Depth rasters on disk, meters as `f32`.
//!
//! Two layouts are read and written:
//!
//! - PFM grayscale: ASCII header `Pf\n<w> <h>\n<scale>\n`, then `w·h` floats
//!   stored bottom row first. A negative scale means little-endian (written as
//!   `-1.0`); positive scales are read as big-endian.
//! - Raw: `u32` width, `u32` height, then `w·h` row-major floats, all little-endian.
//!
//! Invalid pixels are written as NaN. On reading, non-finite and nonpositive
//! values become invalid pixels.

use std::fs;
use std::path::Path;

use crate::depth::DepthMap;
use crate::error::{Error, FormatCategory, FormatError, Location, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthFormat {
    Pfm,
    Raw,
}

impl DepthFormat {
    /// Picks the layout from a file extension: `.pfm` is PFM, anything else raw.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("pfm") => DepthFormat::Pfm,
            _ => DepthFormat::Raw,
        }
    }
}

fn parse_err(origin: &str, offset: usize, message: impl Into<String>) -> Error {
    FormatError {
        path: origin.to_string(),
        location: Location::Byte(offset as u64),
        category: FormatCategory::Parse,
        message: message.into(),
    }
    .into()
}

fn file_value(map: &DepthMap, i: usize) -> f32 {
    if map.validity()[i] {
        map.values()[i] as f32
    } else {
        f32::NAN
    }
}

pub fn encode_pfm(map: &DepthMap) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(4 * w * h);
    for row in (0..h).rev() {
        for col in 0..w {
            out.extend_from_slice(&file_value(map, row * w + col).to_le_bytes());
        }
    }
    out
}

pub fn encode_raw(map: &DepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 4 * map.values().len());
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    for i in 0..map.values().len() {
        out.extend_from_slice(&file_value(map, i).to_le_bytes());
    }
    out
}

fn check_dims(origin: &str, offset: usize, w: u64, h: u64, payload: usize) -> Result<(usize, usize)> {
    if w == 0 || h == 0 {
        return Err(parse_err(origin, offset, format!("zero dimension {w}×{h}")));
    }
    let count = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| parse_err(origin, offset, format!("dimensions {w}×{h} overflow")))?;
    if payload as u64 != count {
        return Err(parse_err(
            origin,
            offset + payload.min(count as usize),
            format!(
                "raster for {w}×{h} needs {count} bytes, found {payload}{}",
                if (payload as u64) < count { " (truncated)" } else { "" }
            ),
        ));
    }
    Ok((w as usize, h as usize))
}

/// Reads one whitespace-delimited ASCII token; returns it and the offset after
/// the single whitespace byte that ends it.
fn header_token<'a>(bytes: &'a [u8], start: usize, origin: &str) -> Result<(&'a str, usize)> {
    let mut i = start;
    while i < bytes.len() && bytes[i].is_ascii_whitespace() {
        i += 1;
    }
    let begin = i;
    while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
        i += 1;
    }
    if begin == i || i >= bytes.len() {
        return Err(parse_err(origin, begin, "truncated PFM header"));
    }
    let token = std::str::from_utf8(&bytes[begin..i])
        .map_err(|_| parse_err(origin, begin, "non-ASCII PFM header"))?;
    Ok((token, i + 1))
}

pub fn decode_pfm(bytes: &[u8], origin: &str) -> Result<DepthMap> {
    let (magic, pos) = header_token(bytes, 0, origin)?;
    match magic {
        "Pf" => {}
        "PF" => return Err(parse_err(origin, 0, "color PFM (PF) is not a depth map; expected Pf")),
        _ => return Err(parse_err(origin, 0, format!("bad PFM magic {magic:?}"))),
    }
    let (w_tok, pos_w) = header_token(bytes, pos, origin)?;
    let w: u64 = w_tok
        .parse()
        .map_err(|_| parse_err(origin, pos, format!("bad PFM width {w_tok:?}")))?;
    let (h_tok, pos_h) = header_token(bytes, pos_w, origin)?;
    let h: u64 = h_tok
        .parse()
        .map_err(|_| parse_err(origin, pos_w, format!("bad PFM height {h_tok:?}")))?;
    let (s_tok, data_start) = header_token(bytes, pos_h, origin)?;
    let scale: f64 = s_tok
        .parse()
        .map_err(|_| parse_err(origin, pos_h, format!("bad PFM scale {s_tok:?}")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(parse_err(origin, pos_h, format!("PFM scale must be nonzero, got {s_tok}")));
    }
    let little = scale < 0.0;
    let payload = &bytes[data_start..];
    let (w, h) = check_dims(origin, data_start, w, h, payload.len())?;
    let mut values = vec![0.0f64; w * h];
    for (k, chunk) in payload.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (file_row, col) = (k / w, k % w);
        values[(h - 1 - file_row) * w + col] = v as f64;
    }
    DepthMap::new(w, h, values)
}

pub fn decode_raw(bytes: &[u8], origin: &str) -> Result<DepthMap> {
    if bytes.len() < 8 {
        return Err(parse_err(origin, bytes.len(), "truncated raw depth header (need 8 bytes)"));
    }
    let w = u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as u64;
    let h = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]) as u64;
    let (w, h) = check_dims(origin, 8, w, h, bytes.len() - 8)?;
    let values = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    DepthMap::new(w, h, values)
}

/// Decodes either layout; PFM is recognized by its `Pf`/`PF` magic.
pub fn decode_depth(bytes: &[u8], origin: &str) -> Result<DepthMap> {
    let pfm = bytes.len() >= 3
        && bytes[0] == b'P'
        && (bytes[1] == b'f' || bytes[1] == b'F')
        && bytes[2].is_ascii_whitespace();
    if pfm {
        decode_pfm(bytes, origin)
    } else {
        decode_raw(bytes, origin)
    }
}

pub fn parse_depth(path: &Path) -> Result<DepthMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_depth(&bytes, &path.display().to_string())
}

pub fn write_depth(map: &DepthMap, path: &Path, format: DepthFormat) -> Result<()> {
    let bytes = match format {
        DepthFormat::Pfm => encode_pfm(map),
        DepthFormat::Raw => encode_raw(map),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DepthMap {
        DepthMap::new(2, 2, vec![1.25, f64::NAN, 2.5, 0.75]).unwrap()
    }

    fn located(r: Result<DepthMap>) -> FormatError {
        match r {
            Err(Error::Format(e)) => e,
            other => panic!("expected a format error, got {other:?}"),
        }
    }

    #[test]
    fn round_trips_both_layouts() {
        let m = small();
        assert_eq!(decode_depth(&encode_pfm(&m), "m").unwrap(), m);
        assert_eq!(decode_depth(&encode_raw(&m), "m").unwrap(), m);
    }

    #[test]
    fn pfm_rows_are_stored_bottom_up() {
        let m = DepthMap::new(1, 2, vec![1.0, 2.0]).unwrap();
        let bytes = encode_pfm(&m);
        let header = b"Pf\n1 2\n-1.0\n".len();
        assert_eq!(&bytes[header..header + 4], &2.0f32.to_le_bytes());
    }

    #[test]
    fn nan_pixel_is_invalid() {
        let mut bytes = b"Pf\n2 1\n-1\n".to_vec();
        bytes.extend_from_slice(&f32::NAN.to_le_bytes());
        bytes.extend_from_slice(&1.5f32.to_le_bytes());
        let m = decode_depth(&bytes, "m").unwrap();
        assert_eq!(m.validity(), &[false, true]);
    }

    #[test]
    fn big_endian_pfm() {
        let mut bytes = b"Pf\n1 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&3.0f32.to_be_bytes());
        assert_eq!(decode_depth(&bytes, "m").unwrap().get(0, 0), Some(3.0));
    }

    #[test]
    fn truncation_is_a_located_parse_error() {
        let bytes = encode_pfm(&small());
        let e = located(decode_depth(&bytes[..bytes.len() - 3], "m"));
        assert_eq!(e.category, FormatCategory::Parse);
        assert!(matches!(e.location, Location::Byte(_)));
        let raw = encode_raw(&small());
        assert!(located(decode_depth(&raw[..raw.len() - 1], "m")).message.contains("truncated"));
        located(decode_depth(&raw[..5], "m"));
    }

    #[test]
    fn bad_headers() {
        assert!(located(decode_depth(b"PF\n1 1\n-1\n\0\0\0\0", "m")).message.contains("color"));
        located(decode_depth(b"Pf\n1 x\n-1\n\0\0\0\0", "m"));
        located(decode_depth(b"Pf\n1 1\n0\n\0\0\0\0", "m"));
        located(decode_depth(b"Pf\n0 1\n-1\n", "m"));
        let mut extra = encode_raw(&small());
        extra.push(0);
        located(decode_depth(&extra, "m"));
    }
}
