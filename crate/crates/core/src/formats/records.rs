//! JSON Lines record files: one object per line, blank lines ignored.
//!
//! ```text
//! {"image_id":"img_001","bbox":[102.0,80.5,388.0,240.0],"keypoints":[[110.0,200.0],[180.5,150.0],[250.0,130.0],[320.0,150.0],[380.0,210.0]]}
//! ```
//!
//! Bounding boxes are corner pairs `[x1, y1, x2, y2]` in pixels.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bezier::BezierCurve;
use crate::error::{Error, FormatCategory, FormatError, Location, Result};
use crate::fit::{AnnotationPolyline, FitResult, Parameterization};

/// Control points carried by a prediction: the quartic head.
pub const PREDICTION_CONTROL_POINTS: usize = 5;

pub trait Record: Serialize + DeserializeOwned {
    /// Checks the domain invariants of a decoded record.
    fn validate(&self) -> std::result::Result<(), String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub image_id: String,
    pub bbox: [f64; 4],
    /// Head to tail.
    pub keypoints: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub image_id: String,
    pub confidence: f64,
    pub bbox: [f64; 4],
    pub control_points: Vec<[f64; 2]>,
}

/// Output of `fit-gt`: a least-squares ground-truth curve for one annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedRecord {
    pub image_id: String,
    pub bbox: [f64; 4],
    pub control_points: Vec<[f64; 2]>,
    pub residual_rms: f64,
    pub parameterization: Parameterization,
}

fn check_bbox(b: &[f64; 4]) -> std::result::Result<(), String> {
    if b.iter().any(|v| !v.is_finite()) {
        return Err("bbox has a non-finite coordinate".into());
    }
    if !(b[0] < b[2]) {
        return Err(format!("bbox x1 = {} is not less than x2 = {}", b[0], b[2]));
    }
    if !(b[1] < b[3]) {
        return Err(format!("bbox y1 = {} is not less than y2 = {}", b[1], b[3]));
    }
    Ok(())
}

fn check_points(name: &str, pts: &[[f64; 2]]) -> std::result::Result<(), String> {
    match pts.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        Some(i) => Err(format!("{name}[{i}] is not finite")),
        None => Ok(()),
    }
}

fn check_image_id(id: &str) -> std::result::Result<(), String> {
    if id.is_empty() {
        Err("image_id is empty".into())
    } else {
        Ok(())
    }
}

impl Record for AnnotationRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        check_image_id(&self.image_id)?;
        check_bbox(&self.bbox)?;
        if self.keypoints.len() < 2 {
            return Err(format!("need at least 2 keypoints, got {}", self.keypoints.len()));
        }
        check_points("keypoints", &self.keypoints)
    }
}

impl Record for PredictionRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        check_image_id(&self.image_id)?;
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(format!("confidence {} outside [0, 1]", self.confidence));
        }
        check_bbox(&self.bbox)?;
        if self.control_points.len() != PREDICTION_CONTROL_POINTS {
            return Err(format!(
                "expected {PREDICTION_CONTROL_POINTS} control points, got {}",
                self.control_points.len()
            ));
        }
        check_points("control_points", &self.control_points)
    }
}

impl Record for FittedRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        check_image_id(&self.image_id)?;
        check_bbox(&self.bbox)?;
        if self.control_points.is_empty() {
            return Err("no control points".into());
        }
        check_points("control_points", &self.control_points)?;
        if !(self.residual_rms >= 0.0 && self.residual_rms.is_finite()) {
            return Err(format!("residual_rms {} is not a finite nonnegative value", self.residual_rms));
        }
        Ok(())
    }
}

impl AnnotationRecord {
    pub fn polyline(&self) -> Result<AnnotationPolyline> {
        AnnotationPolyline::from_xy(&self.keypoints)
    }
}

impl PredictionRecord {
    pub fn curve(&self) -> Result<BezierCurve> {
        BezierCurve::from_xy(&self.control_points)
    }
}

impl FittedRecord {
    pub fn from_fit(annotation: &AnnotationRecord, fit: &FitResult) -> Self {
        Self {
            image_id: annotation.image_id.clone(),
            bbox: annotation.bbox,
            control_points: fit.curve.to_xy(),
            residual_rms: fit.residual_rms,
            parameterization: fit.parameterization,
        }
    }

    pub fn curve(&self) -> Result<BezierCurve> {
        BezierCurve::from_xy(&self.control_points)
    }
}

pub fn bbox_diagonal(b: &[f64; 4]) -> f64 {
    (b[2] - b[0]).hypot(b[3] - b[1])
}

pub fn bbox_area(b: &[f64; 4]) -> f64 {
    (b[2] - b[0]) * (b[3] - b[1])
}

/// `[x1, y1, x2, y2]` to `[cx, cy, w, h]`.
pub fn corners_to_center_size(b: &[f64; 4]) -> [f64; 4] {
    [
        0.5 * (b[0] + b[2]),
        0.5 * (b[1] + b[3]),
        b[2] - b[0],
        b[3] - b[1],
    ]
}

/// `[cx, cy, w, h]` to `[x1, y1, x2, y2]`.
pub fn center_size_to_corners(c: &[f64; 4]) -> [f64; 4] {
    [
        c[0] - 0.5 * c[2],
        c[1] - 0.5 * c[3],
        c[0] + 0.5 * c[2],
        c[1] + 0.5 * c[3],
    ]
}

/// Parses JSON Lines text. `origin` names the source in errors.
pub fn parse_jsonl<T: Record>(text: &str, origin: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let located = |category, message| FormatError {
            path: origin.to_string(),
            location: Location::Line(i + 1),
            category,
            message,
        };
        let rec: T = serde_json::from_str(line)
            .map_err(|e| located(FormatCategory::Parse, e.to_string()))?;
        rec.validate()
            .map_err(|m| located(FormatCategory::Validation, m))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_jsonl<T: Record>(path: &Path) -> Result<Vec<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| FormatError {
        path: path.display().to_string(),
        location: Location::Byte(e.utf8_error().valid_up_to() as u64),
        category: FormatCategory::Parse,
        message: "file is not valid UTF-8".into(),
    })?;
    parse_jsonl(&text, &path.display().to_string())
}

/// One compact JSON object per line. Records are validated first.
pub fn to_jsonl<T: Record>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for (i, r) in records.iter().enumerate() {
        r.validate()
            .map_err(|m| Error::domain(format!("record {i}: {m}")))?;
        let line = serde_json::to_string(r)
            .map_err(|e| Error::domain(format!("record {i}: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl<T: Record>(records: &[T], path: &Path) -> Result<()> {
    let text = to_jsonl(records)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn parse_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    read_jsonl(path)
}

pub fn write_annotations(records: &[AnnotationRecord], path: &Path) -> Result<()> {
    write_jsonl(records, path)
}

pub fn parse_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    read_jsonl(path)
}

pub fn write_predictions(records: &[PredictionRecord], path: &Path) -> Result<()> {
    write_jsonl(records, path)
}

pub fn parse_fitted(path: &Path) -> Result<Vec<FittedRecord>> {
    read_jsonl(path)
}

pub fn write_fitted(records: &[FittedRecord], path: &Path) -> Result<()> {
    write_jsonl(records, path)
}
