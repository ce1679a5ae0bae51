//! Curve alignment metrics and length-error statistics.
//!
//! Curves are compared through `sample_count` uniformly sampled point pairs.
//! PCK counts pairs closer than `pck_threshold · diagonal`. OKS averages
//! `exp(−d² / (2 · area · σ²))` over the pairs. Both take the better of the two
//! orientations of the prediction unless `orientation_invariant` is off.

use crate::bezier::{BezierCurve, ParamSet};
use crate::error::{Error, Result};

use nalgebra::Point2;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveEvalConfig {
    pub sample_count: usize,
    /// Fraction of the box diagonal.
    pub pck_threshold: f64,
    pub oks_sigma: f64,
    pub oks_thresholds: Vec<f64>,
    pub orientation_invariant: bool,
}

impl Default for CurveEvalConfig {
    fn default() -> Self {
        Self {
            sample_count: 50,
            pck_threshold: 0.2,
            oks_sigma: 0.05,
            oks_thresholds: (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect(),
            orientation_invariant: true,
        }
    }
}

impl CurveEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 2 {
            return Err(Error::domain(format!(
                "sample_count must be at least 2, got {}",
                self.sample_count
            )));
        }
        for (name, v) in [("pck_threshold", self.pck_threshold), ("oks_sigma", self.oks_sigma)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::domain(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        if self.oks_thresholds.is_empty() {
            return Err(Error::domain("no OKS thresholds"));
        }
        if let Some(t) = self.oks_thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(Error::domain(format!("OKS threshold {t} outside (0, 1]")));
        }
        Ok(())
    }

    fn params(&self) -> Result<ParamSet> {
        ParamSet::uniform(self.sample_count)
    }
}

/// Squared pair distances for each orientation considered.
fn orientation_d2(
    pred: &BezierCurve,
    gt: &BezierCurve,
    config: &CurveEvalConfig,
) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let params = config.params()?;
    let p = pred.sample(&params);
    let g = gt.sample(&params);
    let d2 = |pts: &mut dyn Iterator<Item = &Point2<f64>>| -> Vec<f64> {
        pts.zip(&g).map(|(a, b)| (a - b).norm_squared()).collect()
    };
    let mut out = vec![d2(&mut p.iter())];
    if config.orientation_invariant {
        out.push(d2(&mut p.iter().rev()));
    }
    Ok(out)
}

pub fn pck(pred: &BezierCurve, gt: &BezierCurve, bbox_diag: f64, config: &CurveEvalConfig) -> Result<f64> {
    if !(bbox_diag > 0.0 && bbox_diag.is_finite()) {
        return Err(Error::domain(format!("bbox diagonal must be positive, got {bbox_diag}")));
    }
    let limit = config.pck_threshold * bbox_diag;
    let limit2 = limit * limit;
    let best = orientation_d2(pred, gt, config)?
        .iter()
        .map(|d2| d2.iter().filter(|&&d| d < limit2).count())
        .max()
        .unwrap_or(0);
    Ok(best as f64 / config.sample_count as f64)
}

/// Mean keypoint similarity of precomputed squared distances.
pub fn oks_from_distances(d2: &[f64], bbox_area: f64, sigma: f64) -> Result<f64> {
    if !(bbox_area > 0.0 && bbox_area.is_finite()) {
        return Err(Error::domain(format!("bbox area must be positive, got {bbox_area}")));
    }
    if d2.is_empty() {
        return Err(Error::domain("no distances"));
    }
    let denom = 2.0 * bbox_area * sigma * sigma;
    Ok(d2.iter().map(|d| (-d / denom).exp()).sum::<f64>() / d2.len() as f64)
}

pub fn oks(pred: &BezierCurve, gt: &BezierCurve, bbox_area: f64, config: &CurveEvalConfig) -> Result<f64> {
    if !(bbox_area > 0.0 && bbox_area.is_finite()) {
        return Err(Error::domain(format!("bbox area must be positive, got {bbox_area}")));
    }
    let mut best = 0.0f64;
    for d2 in orientation_d2(pred, gt, config)? {
        best = best.max(oks_from_distances(&d2, bbox_area, config.oks_sigma)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCurve {
    pub image_id: String,
    pub confidence: f64,
    pub curve: BezierCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtCurve {
    pub image_id: String,
    /// `[x1, y1, x2, y2]`; its area scales OKS.
    pub bbox: [f64; 4],
    pub curve: BezierCurve,
}

impl GtCurve {
    pub fn area(&self) -> f64 {
        (self.bbox[2] - self.bbox[0]) * (self.bbox[3] - self.bbox[1])
    }

    pub fn diagonal(&self) -> f64 {
        (self.bbox[2] - self.bbox[0]).hypot(self.bbox[3] - self.bbox[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapResult {
    pub map50: f64,
    pub map50_95: f64,
    /// `(threshold, AP)` for each OKS threshold.
    pub per_threshold: Vec<(f64, f64)>,
}

/// Area under the precision envelope (all-point interpolation).
///
/// `hits` lists the detections in confidence order, true for a match.
pub fn average_precision(hits: &[bool], gt_count: usize) -> f64 {
    if gt_count == 0 {
        return 0.0;
    }
    let mut tp = 0usize;
    let mut recall = Vec::with_capacity(hits.len());
    let mut precision = Vec::with_capacity(hits.len());
    for (k, &hit) in hits.iter().enumerate() {
        if hit {
            tp += 1;
        }
        recall.push(tp as f64 / gt_count as f64);
        precision.push(tp as f64 / (k + 1) as f64);
    }
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (r, p) in recall.iter().zip(&precision) {
        ap += (r - prev_recall) * p;
        prev_recall = *r;
    }
    ap
}

/// OKS of every prediction against every ground truth of the same image.
fn oks_table(preds: &[ScoredCurve], gts: &[GtCurve], config: &CurveEvalConfig) -> Result<Vec<Vec<Option<f64>>>> {
    preds
        .iter()
        .map(|p| {
            gts.iter()
                .map(|g| {
                    if g.image_id == p.image_id {
                        oks(&p.curve, &g.curve, g.area(), config).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect()
        })
        .collect()
}

/// Confidence-ordered indices; equal confidences keep input order.
fn confidence_order(preds: &[ScoredCurve]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].confidence.total_cmp(&preds[a].confidence));
    order
}

/// Greedy matching: each prediction, best first, takes the unmatched ground
/// truth with the highest OKS at or above `threshold` (lowest index on ties).
fn greedy_hits(order: &[usize], table: &[Vec<Option<f64>>], gt_count: usize, threshold: f64) -> Vec<bool> {
    let mut taken = vec![false; gt_count];
    order
        .iter()
        .map(|&p| {
            let mut best: Option<(usize, f64)> = None;
            for (g, s) in table[p].iter().enumerate() {
                if let Some(s) = *s {
                    if !taken[g] && s >= threshold && best.is_none_or(|(_, b)| s > b) {
                        best = Some((g, s));
                    }
                }
            }
            match best {
                Some((g, _)) => {
                    taken[g] = true;
                    true
                }
                None => false,
            }
        })
        .collect()
}

pub fn curve_map(preds: &[ScoredCurve], gts: &[GtCurve], config: &CurveEvalConfig) -> Result<MapResult> {
    config.validate()?;
    if gts.is_empty() {
        return Err(Error::UndefinedMetric("mAP needs at least one ground-truth curve".into()));
    }
    if let Some(g) = gts.iter().find(|g| !(g.area() > 0.0)) {
        return Err(Error::domain(format!("ground truth in {} has an empty bbox", g.image_id)));
    }
    if let Some(p) = preds.iter().find(|p| !(0.0..=1.0).contains(&p.confidence)) {
        return Err(Error::domain(format!("confidence {} outside [0, 1]", p.confidence)));
    }
    let table = oks_table(preds, gts, config)?;
    let order = confidence_order(preds);
    let per_threshold: Vec<(f64, f64)> = config
        .oks_thresholds
        .iter()
        .map(|&thr| (thr, average_precision(&greedy_hits(&order, &table, gts.len(), thr), gts.len())))
        .collect();
    let map50 = per_threshold
        .iter()
        .find(|(t, _)| (*t - 0.5).abs() < 1e-12)
        .map(|(_, ap)| *ap)
        .unwrap_or_else(|| per_threshold[0].1);
    let map50_95 = per_threshold.iter().map(|(_, ap)| ap).sum::<f64>() / per_threshold.len() as f64;
    Ok(MapResult {
        map50,
        map50_95,
        per_threshold,
    })
}

/// Signed and absolute relative error of a measured length.
pub fn rel_errors(measured: f64, gt: f64) -> Result<(f64, f64)> {
    if !(gt > 0.0 && gt.is_finite()) {
        return Err(Error::domain(format!("ground-truth length must be positive, got {gt}")));
    }
    let e = (measured - gt) / gt;
    Ok((e, e.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single value.
    pub std: f64,
    /// `(mu, sigma)` of the moment-matched Gaussian.
    pub gaussian_fit: (f64, f64),
    /// `(threshold, fraction of |e| <= threshold)`.
    pub cumulative: Vec<(f64, f64)>,
    pub histogram: Histogram,
}

/// Absolute-error thresholds of the cumulative curve: 0.05, 0.10, ..., 0.50.
pub fn cumulative_thresholds() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 20.0).collect()
}

const MAX_BINS: usize = 30;

fn histogram(errors: &[f64]) -> Histogram {
    let lo = errors.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = errors.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Histogram {
            edges: vec![lo - 0.005, hi + 0.005],
            counts: vec![errors.len()],
        };
    }
    let bins = ((errors.len() as f64).sqrt().ceil() as usize).clamp(1, MAX_BINS);
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0; bins];
    for e in errors {
        let b = (((e - lo) / width).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    Histogram { edges, counts }
}

pub fn error_stats(errors: &[f64]) -> Result<ErrorStats> {
    if errors.is_empty() {
        return Err(Error::domain("no errors to summarize"));
    }
    if let Some(e) = errors.iter().find(|e| !e.is_finite()) {
        return Err(Error::domain(format!("non-finite error value {e}")));
    }
    let n = errors.len();
    let mean = errors.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    let fraction = |thr: f64| abs.iter().filter(|&&a| a <= thr).count() as f64 / n as f64;
    let mut cumulative: Vec<(f64, f64)> = cumulative_thresholds()
        .into_iter()
        .map(|t| (t, fraction(t)))
        .collect();
    let max_abs = abs.iter().cloned().fold(0.0, f64::max);
    if max_abs > cumulative.last().map(|c| c.0).unwrap_or(0.0) {
        cumulative.push((max_abs, 1.0));
    }
    Ok(ErrorStats {
        count: n,
        mean,
        std,
        gaussian_fit: (mean, std),
        cumulative,
        histogram: histogram(errors),
    })
}
