//! 3D trunk length from an image-plane curve and a depth map.
//!
//! The curve is sampled at `M + 1` uniform parameters, each sample reads its
//! depth, and the samples are lifted through the pinhole model. The length is
//! the sum of the `M` consecutive 3D segment lengths.
//!
//! Stereo depth along a trunk has holes and sudden jumps. Before lifting, the
//! depth profile along the curve parameter is repaired:
//!
//! 1. samples outside the image or on a hole count as missing;
//! 2. a sample whose depth departs from the running median of its neighbors by
//!    more than `jump_threshold` (relative) is dropped as a jump;
//! 3. missing and dropped samples are filled by linear interpolation over the
//!    parameter (held constant past the first and last good sample);
//! 4. optionally the whole profile is replaced by a least-squares polynomial in
//!    the parameter fitted to the good samples, which removes per-pixel noise.
//!
//! A measurement is rejected when too few samples had valid depth or when one
//! contiguous gap covers too much of the curve.

use nalgebra::{DMatrix, Point3};

use crate::bezier::{BezierCurve, ParamSet};
use crate::camera::CameraIntrinsics;
use crate::depth::{DepthMap, SampleMode};
use crate::error::{Error, Result};
use crate::fit::{design_matrix, solve_least_squares};

pub const DEFAULT_MEASURE_SEGMENTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairConfig {
    pub enabled: bool,
    /// Reject when fewer than this fraction of samples read a valid depth.
    pub min_valid_fraction: f64,
    /// Reject when one contiguous run of missing samples is longer than this fraction.
    pub max_gap_fraction: f64,
    /// Odd window (in samples) of the running median used for jump detection.
    pub median_window: usize,
    /// Relative deviation from the running median that marks a depth jump.
    pub jump_threshold: f64,
    /// Degree of the polynomial depth profile, `None` keeps the raw profile.
    pub profile_degree: Option<usize>,
}

impl Default for RepairConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            min_valid_fraction: 0.7,
            max_gap_fraction: 0.2,
            median_window: 5,
            jump_threshold: 0.2,
            profile_degree: Some(4),
        }
    }
}

impl RepairConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("min_valid_fraction", self.min_valid_fraction),
            ("max_gap_fraction", self.max_gap_fraction),
            ("jump_threshold", self.jump_threshold),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::domain(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        if self.median_window < 3 || self.median_window.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "median window must be odd and >= 3, got {}",
                self.median_window
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureConfig {
    /// Number of segments `M`; the curve is sampled at `M + 1` parameters.
    pub segments: usize,
    pub mode: SampleMode,
    pub repair: RepairConfig,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            segments: DEFAULT_MEASURE_SEGMENTS,
            mode: SampleMode::BilinearValid,
            repair: RepairConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceCurveSamples {
    /// Lifted samples in camera coordinates (meters), ordered by parameter.
    pub points: Vec<Point3<f64>>,
    /// Parameter of each entry of `points`.
    pub source_params: ParamSet,
    /// Fraction of the `M + 1` samples that read a valid depth, before repair.
    pub valid_fraction: f64,
    /// Samples whose depth was filled in (holes, out-of-image, jumps).
    pub repaired_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quality {
    Clean,
    Repaired,
    Rejected,
}

impl Quality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quality::Clean => "clean",
            Quality::Repaired => "repaired",
            Quality::Rejected => "rejected",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult {
    /// Meters.
    pub length: f64,
    pub samples: SpaceCurveSamples,
    pub quality: Quality,
}

fn reject(reason: impl Into<String>, valid_fraction: f64) -> Error {
    Error::MeasurementRejected {
        reason: reason.into(),
        valid_fraction,
    }
}

/// Samples `curve` at `segments + 1` uniform parameters and lifts them into 3D.
pub fn curve_to_space(
    curve: &BezierCurve,
    map: &DepthMap,
    k: &CameraIntrinsics,
    segments: usize,
    mode: SampleMode,
    repair: &RepairConfig,
) -> Result<SpaceCurveSamples> {
    if segments < 1 {
        return Err(Error::domain("need at least one segment"));
    }
    repair.validate()?;
    let params = ParamSet::uniform(segments + 1)?;
    let pixels = curve.sample(&params);

    let mut depths: Vec<Option<f64>> = Vec::with_capacity(pixels.len());
    for px in &pixels {
        let inside = px.x >= 0.0
            && px.y >= 0.0
            && px.x <= (map.width() - 1) as f64
            && px.y <= (map.height() - 1) as f64;
        depths.push(if inside { map.sample(*px, mode)? } else { None });
    }
    let total = depths.len();
    let valid = depths.iter().filter(|d| d.is_some()).count();
    let valid_fraction = valid as f64 / total as f64;
    if valid_fraction < repair.min_valid_fraction {
        return Err(reject(
            format!(
                "only {valid} of {total} samples have valid depth (minimum fraction {})",
                repair.min_valid_fraction
            ),
            valid_fraction,
        ));
    }

    if !repair.enabled {
        let (ts, points): (Vec<f64>, Vec<Point3<f64>>) = params
            .values()
            .iter()
            .zip(pixels.iter().zip(&depths))
            .filter_map(|(&t, (px, z))| z.map(|z| (t, k.backproject_unchecked(*px, z))))
            .unzip();
        return Ok(SpaceCurveSamples {
            points,
            source_params: ParamSet::new(ts)?,
            valid_fraction,
            repaired_count: 0,
        });
    }

    let good = reject_jumps(&depths, repair.median_window, repair.jump_threshold);
    let good_count = good.iter().filter(|g| g.is_some()).count();
    if good_count < 2 {
        return Err(reject("fewer than two usable depth samples", valid_fraction));
    }
    let gap = longest_gap(&good);
    if gap as f64 > repair.max_gap_fraction * total as f64 {
        return Err(reject(
            format!("depth gap of {gap} samples exceeds {} of the curve", repair.max_gap_fraction),
            valid_fraction,
        ));
    }
    let repaired_count = total - good_count;

    let profile = match repair.profile_degree {
        Some(degree) if good_count > degree => fit_profile(&params, &good, degree)?,
        _ => fill_gaps(params.values(), &good),
    };

    let mut points = Vec::with_capacity(total);
    for (px, z) in pixels.iter().zip(&profile) {
        if !(*z > 0.0 && z.is_finite()) {
            return Err(reject(
                format!("repaired depth profile is not positive ({z})"),
                valid_fraction,
            ));
        }
        points.push(k.backproject_unchecked(*px, *z));
    }
    Ok(SpaceCurveSamples {
        points,
        source_params: params,
        valid_fraction,
        repaired_count,
    })
}

/// Drops samples that jump away from the median of their valid neighbors.
fn reject_jumps(depths: &[Option<f64>], window: usize, threshold: f64) -> Vec<Option<f64>> {
    let half = window / 2;
    let mut scratch = Vec::with_capacity(window);
    (0..depths.len())
        .map(|i| {
            let z = depths[i]?;
            scratch.clear();
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(depths.len() - 1);
            scratch.extend(depths[lo..=hi].iter().flatten().copied());
            scratch.sort_by(|a, b| a.total_cmp(b));
            let n = scratch.len();
            let median = if n % 2 == 1 {
                scratch[n / 2]
            } else {
                0.5 * (scratch[n / 2 - 1] + scratch[n / 2])
            };
            ((z - median).abs() <= threshold * median).then_some(z)
        })
        .collect()
}

fn longest_gap(depths: &[Option<f64>]) -> usize {
    let mut longest = 0;
    let mut run = 0;
    for d in depths {
        if d.is_none() {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    longest
}

/// Linear interpolation over the parameter between good samples.
fn fill_gaps(ts: &[f64], depths: &[Option<f64>]) -> Vec<f64> {
    let known: Vec<(f64, f64)> = ts
        .iter()
        .zip(depths)
        .filter_map(|(&t, z)| z.map(|z| (t, z)))
        .collect();
    let mut next = 0;
    ts.iter()
        .zip(depths)
        .map(|(&t, z)| {
            if let Some(z) = z {
                return *z;
            }
            while next < known.len() && known[next].0 < t {
                next += 1;
            }
            match (next.checked_sub(1).map(|i| known[i]), known.get(next)) {
                (Some((t0, z0)), Some(&(t1, z1))) => z0 + (z1 - z0) * (t - t0) / (t1 - t0),
                (Some((_, z0)), None) => z0,
                (None, Some(&(_, z1))) => z1,
                (None, None) => f64::NAN,
            }
        })
        .collect()
}

/// Least-squares polynomial depth profile in Bernstein form, evaluated at every parameter.
fn fit_profile(params: &ParamSet, depths: &[Option<f64>], degree: usize) -> Result<Vec<f64>> {
    let (ts, zs): (Vec<f64>, Vec<f64>) = params
        .values()
        .iter()
        .zip(depths)
        .filter_map(|(&t, z)| z.map(|z| (t, z)))
        .unzip();
    // fit offsets from a reference depth so a constant profile stays bit-exact
    let z_ref = zs[0];
    let offsets: Vec<f64> = zs.iter().map(|z| z - z_ref).collect();
    let fit_params = ParamSet::new(ts)?;
    let a = design_matrix(&fit_params, degree)?;
    let b = DMatrix::from_column_slice(offsets.len(), 1, &offsets);
    let coeffs = solve_least_squares(a, &b)?;
    let full = design_matrix(params, degree)?;
    Ok((full * coeffs).iter().map(|dz| z_ref + dz).collect())
}

/// Sum of consecutive Euclidean segment lengths.
pub fn polyline_length(points: &[Point3<f64>]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

pub fn integrate_length(samples: &SpaceCurveSamples) -> Result<f64> {
    if samples.points.len() < 2 {
        return Err(Error::domain(format!(
            "need at least 2 points to integrate a length, got {}",
            samples.points.len()
        )));
    }
    Ok(polyline_length(&samples.points))
}

pub fn measure(
    curve: &BezierCurve,
    map: &DepthMap,
    k: &CameraIntrinsics,
    config: &MeasureConfig,
) -> Result<MeasurementResult> {
    let samples = curve_to_space(curve, map, k, config.segments, config.mode, &config.repair)?;
    let length = integrate_length(&samples)?;
    let quality = if samples.repaired_count == 0 {
        Quality::Clean
    } else {
        Quality::Repaired
    };
    Ok(MeasurementResult {
        length,
        samples,
        quality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point2;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
    }

    fn horizontal(x0: f64, x1: f64, y: f64) -> BezierCurve {
        crate::optim::straight_init(Point2::new(x0, y), Point2::new(x1, y), 4).unwrap()
    }

    #[test]
    fn flat_plane_straight_trunk() {
        let map = DepthMap::constant(640, 480, 1.5).unwrap();
        let r = measure(&horizontal(270.0, 370.0, 240.0), &map, &k(), &MeasureConfig::default()).unwrap();
        assert!((r.length - 0.30).abs() < 1e-12);
        assert_eq!(r.quality, Quality::Clean);
        assert_eq!(r.samples.points.len(), 201);
        assert_eq!(r.samples.valid_fraction, 1.0);
    }

    #[test]
    fn constant_plane_gives_collinear_points() {
        let map = DepthMap::constant(640, 480, 2.0).unwrap();
        let s = curve_to_space(
            &horizontal(100.0, 500.0, 300.0),
            &map,
            &k(),
            40,
            SampleMode::BilinearValid,
            &RepairConfig::default(),
        )
        .unwrap();
        assert_eq!(s.points.len(), 41);
        let dir = (s.points[40] - s.points[0]).normalize();
        for p in &s.points {
            let off = p - s.points[0];
            assert!((off - dir * off.dot(&dir)).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_curve_has_zero_length() {
        let map = DepthMap::constant(640, 480, 1.0).unwrap();
        let c = BezierCurve::from_xy(&[[200.0, 200.0]; 5]).unwrap();
        let r = measure(&c, &map, &k(), &MeasureConfig::default()).unwrap();
        assert_eq!(r.length, 0.0);
        assert_eq!(r.quality, Quality::Clean);
    }

    #[test]
    fn stripe_hole_is_filled_by_parameter_interpolation() {
        // depth ramps linearly in x, columns 300..=339 are a hole
        let mut map = DepthMap::from_fn(640, 480, |c, _| 1.0 + c as f64 / 1000.0).unwrap();
        for row in 0..480 {
            for col in 300..340 {
                map.invalidate(col, row);
            }
        }
        let curve = horizontal(120.0, 520.0, 200.0);
        let mut repair = RepairConfig::default();
        repair.profile_degree = None;
        let s = curve_to_space(&curve, &map, &k(), 200, SampleMode::BilinearValid, &repair).unwrap();
        // samples at x = 120 + 2k; bilinear reads need a valid corner, so x in (299, 340) are holes
        let expected_holes = (0..=200)
            .map(|i| 120.0 + 2.0 * i as f64)
            .filter(|x| *x > 299.0 && *x < 340.0)
            .count();
        assert_eq!(s.repaired_count, expected_holes);
        for p in &s.points {
            let px = k().project(*p).unwrap();
            let truth = 1.0 + px.x / 1000.0;
            assert!((p.z - truth).abs() < 1e-6, "{} vs {}", p.z, truth);
        }
    }

    #[test]
    fn jumps_are_removed() {
        let mut map = DepthMap::constant(640, 480, 1.5).unwrap();
        for row in 195..=205 {
            map.set(400, row, 3.0);
        }
        let curve = horizontal(270.0, 470.0, 200.0);
        let r = measure(&curve, &map, &k(), &MeasureConfig::default()).unwrap();
        assert_eq!(r.quality, Quality::Repaired);
        assert!((r.length - 200.0 * 1.5 / 500.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_valid_samples_is_rejected() {
        let mut map = DepthMap::constant(640, 480, 1.5).unwrap();
        for row in 0..480 {
            for col in 0..400 {
                map.invalidate(col, row);
            }
        }
        let err = measure(&horizontal(100.0, 500.0, 200.0), &map, &k(), &MeasureConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::MeasurementRejected { .. }));
    }

    #[test]
    fn long_gap_is_rejected() {
        let mut map = DepthMap::constant(640, 480, 1.5).unwrap();
        for row in 0..480 {
            for col in 200..300 {
                map.invalidate(col, row);
            }
        }
        // 25% of the curve sits in the gap while 75% stays valid
        let err = measure(&horizontal(100.0, 500.0, 200.0), &map, &k(), &MeasureConfig::default())
            .unwrap_err();
        match err {
            Error::MeasurementRejected { reason, .. } => assert!(reason.contains("gap")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_image_samples_count_as_missing() {
        let map = DepthMap::constant(640, 480, 1.0).unwrap();
        let curve = horizontal(-20.0, 600.0, 100.0);
        let r = measure(&curve, &map, &k(), &MeasureConfig::default()).unwrap();
        assert_eq!(r.quality, Quality::Repaired);
        assert!(r.samples.valid_fraction < 1.0);
        assert!((r.length - 620.0 / 500.0).abs() < 1e-9);
    }

    #[test]
    fn disabled_repair_skips_holes() {
        let mut map = DepthMap::constant(640, 480, 1.0).unwrap();
        for row in 0..480 {
            map.invalidate(320, row);
            map.invalidate(321, row);
        }
        let curve = horizontal(300.0, 340.0, 100.0);
        let s = curve_to_space(&curve, &map, &k(), 40, SampleMode::Nearest, &RepairConfig::disabled())
            .unwrap();
        assert_eq!(s.repaired_count, 0);
        assert!(s.points.len() < 41);
        assert_eq!(s.points.len(), s.source_params.count());
    }

    #[test]
    fn integrate_examples() {
        let s = SpaceCurveSamples {
            points: vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.03, 0.04, 0.0)],
            source_params: ParamSet::uniform(2).unwrap(),
            valid_fraction: 1.0,
            repaired_count: 0,
        };
        assert!((integrate_length(&s).unwrap() - 0.05).abs() < 1e-15);

        let collinear = vec![
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.1, 0.2, 1.1),
            Point3::new(0.3, 0.6, 1.3),
        ];
        let l = polyline_length(&collinear);
        assert!((l - (collinear[2] - collinear[0]).norm()).abs() < 1e-15);

        let short = SpaceCurveSamples {
            points: vec![Point3::origin()],
            source_params: ParamSet::new(vec![0.0]).unwrap(),
            valid_fraction: 1.0,
            repaired_count: 0,
        };
        assert!(integrate_length(&short).is_err());
    }

    #[test]
    fn repair_config_validation() {
        let mut r = RepairConfig::default();
        r.median_window = 4;
        assert!(r.validate().is_err());
        let mut r = RepairConfig::default();
        r.min_valid_fraction = 0.0;
        assert!(r.validate().is_err());
    }
}
