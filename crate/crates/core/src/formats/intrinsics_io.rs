//! Camera intrinsics as `key = value` text.
//!
//! ```text
//! # left camera, 640x480
//! fx = 500
//! fy = 500
//! cx = 320
//! cy = 240
//! width = 640
//! height = 480
//! ```
//!
//! All six keys are required, each exactly once. `#` starts a comment.

use std::fs;
use std::path::Path;

use crate::camera::CameraIntrinsics;
use crate::error::{Error, FormatCategory, FormatError, Location, Result};

const KEYS: [&str; 6] = ["fx", "fy", "cx", "cy", "width", "height"];

pub fn parse_intrinsics_str(text: &str, origin: &str) -> Result<CameraIntrinsics> {
    let err = |location, category, message: String| -> Error {
        FormatError {
            path: origin.to_string(),
            location,
            category,
            message,
        }
        .into()
    };
    // (value, line) per key in KEYS order
    let mut found: [Option<(&str, usize)>; 6] = [None; 6];
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(
                Location::Line(line_no),
                FormatCategory::Parse,
                format!("expected `key = value`, got {line:?}"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(slot) = KEYS.iter().position(|k| *k == key) else {
            return Err(err(
                Location::Line(line_no),
                FormatCategory::Parse,
                format!("unknown key {key:?}"),
            ));
        };
        if let Some((_, first)) = found[slot] {
            return Err(err(
                Location::Line(line_no),
                FormatCategory::Parse,
                format!("duplicate key {key:?} (first on line {first})"),
            ));
        }
        found[slot] = Some((value, line_no));
    }

    let mut floats = [0.0f64; 4];
    let mut sizes = [0usize; 2];
    let mut lines = [0usize; 6];
    for (slot, key) in KEYS.iter().enumerate() {
        let Some((value, line_no)) = found[slot] else {
            return Err(err(
                Location::EndOfFile,
                FormatCategory::Parse,
                format!("missing key {key:?}"),
            ));
        };
        lines[slot] = line_no;
        let bad = |what: &str| {
            err(
                Location::Line(line_no),
                FormatCategory::Parse,
                format!("{key} = {value:?} is not {what}"),
            )
        };
        if slot < 4 {
            floats[slot] = value.parse().map_err(|_| bad("a number"))?;
        } else {
            sizes[slot - 4] = value.parse().map_err(|_| bad("a nonnegative integer"))?;
        }
    }

    let k = CameraIntrinsics {
        fx: floats[0],
        fy: floats[1],
        cx: floats[2],
        cy: floats[3],
        width: sizes[0],
        height: sizes[1],
    };
    let invalid = |slot: usize, message: String| {
        err(Location::Line(lines[slot]), FormatCategory::Validation, message)
    };
    for slot in 0..2 {
        if !(floats[slot] > 0.0 && floats[slot].is_finite()) {
            return Err(invalid(slot, format!("{} must be positive, got {}", KEYS[slot], floats[slot])));
        }
    }
    for slot in 4..6 {
        if sizes[slot - 4] == 0 {
            return Err(invalid(slot, format!("{} must be nonzero", KEYS[slot])));
        }
    }
    if !(k.cx >= 0.0 && k.cx < k.width as f64) {
        return Err(invalid(2, format!("cx = {} outside [0, {})", k.cx, k.width)));
    }
    if !(k.cy >= 0.0 && k.cy < k.height as f64) {
        return Err(invalid(3, format!("cy = {} outside [0, {})", k.cy, k.height)));
    }
    Ok(k)
}

pub fn format_intrinsics(k: &CameraIntrinsics) -> String {
    format!(
        "fx = {}\nfy = {}\ncx = {}\ncy = {}\nwidth = {}\nheight = {}\n",
        k.fx, k.fy, k.cx, k.cy, k.width, k.height
    )
}

pub fn parse_intrinsics(path: &Path) -> Result<CameraIntrinsics> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_intrinsics_str(&text, &path.display().to_string())
}

pub fn write_intrinsics(k: &CameraIntrinsics, path: &Path) -> Result<()> {
    k.validate()?;
    fs::write(path, format_intrinsics(k)).map_err(|e| Error::io(path, e))
}
