//! Seeded synthetic trunk scenes with analytically known 3D lengths.
//!
//! A scene is an image-plane quartic lying on a tilted depth plane
//! `Z(u, v) = z0 + gu·(u − cx) + gv·(v − cy)`. Every pixel of the raster holds
//! the plane's depth, so the trunk lies on the surface and the depth read at any
//! on-curve pixel is the trunk's own depth. The space curve is the lift of the
//! 2D curve through the plane and the pinhole model.

use std::path::{Path, PathBuf};

use nalgebra::{Point2, Point3, Vector2};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::bezier::{BezierCurve, ParamSet, DEFAULT_DEGREE};
use crate::camera::CameraIntrinsics;
use crate::depth::DepthMap;
use crate::error::{Error, Result};
use crate::formats::{
    write_depth, write_intrinsics, write_predictions, AnnotationRecord, DepthFormat,
    PredictionRecord,
};
use crate::measure::polyline_length;

/// Minimum number of dense samples behind an oracle length.
pub const ORACLE_MIN_SAMPLES: usize = 100_000;
const ORACLE_SEGMENTS: usize = 100_000;
const MAX_ATTEMPTS: usize = 100;

/// Affine depth surface over the image plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPlane {
    pub z0: f64,
    /// Meters per pixel along u and v, measured from the principal point.
    pub gu: f64,
    pub gv: f64,
}

impl DepthPlane {
    pub fn flat(z: f64) -> Self {
        Self {
            z0: z,
            gu: 0.0,
            gv: 0.0,
        }
    }

    pub fn depth_at(&self, k: &CameraIntrinsics, pixel: Point2<f64>) -> f64 {
        self.z0 + self.gu * (pixel.x - k.cx) + self.gv * (pixel.y - k.cy)
    }

    fn corner_range(&self, k: &CameraIntrinsics) -> (f64, f64) {
        let (w, h) = ((k.width - 1) as f64, (k.height - 1) as f64);
        [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)]
            .iter()
            .map(|&(u, v)| self.depth_at(k, Point2::new(u, v)))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z), hi.max(z)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    pub intrinsics: CameraIntrinsics,
    /// Allowed depth slab in meters; the whole raster stays inside it.
    pub z_range: (f64, f64),
    /// Allowed head-to-tail chord in pixels.
    pub span_px: (f64, f64),
    /// Largest sideways offset of an inner control point, as a fraction of the chord.
    pub max_bend: f64,
    /// Largest depth gradient in meters per pixel; 0 gives fronto-parallel scenes.
    pub max_tilt: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            intrinsics: CameraIntrinsics {
                fx: 500.0,
                fy: 500.0,
                cx: 320.0,
                cy: 240.0,
                width: 640,
                height: 480,
            },
            z_range: (0.8, 2.5),
            span_px: (50.0, 400.0),
            max_bend: 0.3,
            max_tilt: 1e-3,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        self.intrinsics.validate()?;
        let (z_lo, z_hi) = self.z_range;
        if !(z_lo > 0.0 && z_hi > z_lo && z_hi.is_finite()) {
            return Err(Error::domain(format!("bad depth slab [{z_lo}, {z_hi}]")));
        }
        let (s_lo, s_hi) = self.span_px;
        if !(s_lo > 0.0 && s_hi >= s_lo && s_hi.is_finite()) {
            return Err(Error::domain(format!("bad span range [{s_lo}, {s_hi}]")));
        }
        if !(self.max_bend >= 0.0 && self.max_bend.is_finite()) {
            return Err(Error::domain(format!("bad max_bend {}", self.max_bend)));
        }
        if !(self.max_tilt >= 0.0 && self.max_tilt.is_finite()) {
            return Err(Error::domain(format!("bad max_tilt {}", self.max_tilt)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub curve2d: BezierCurve,
    pub plane: DepthPlane,
    /// Dense 3D polyline of the trunk, `ORACLE_SEGMENTS + 1` points.
    pub space_curve: Vec<Point3<f64>>,
    pub depth: DepthMap,
    pub intrinsics: CameraIntrinsics,
    pub oracle_length: f64,
    pub seed: u64,
}

impl SyntheticScene {
    /// Builds a scene from a known curve and depth plane.
    pub fn from_parts(
        curve2d: BezierCurve,
        plane: DepthPlane,
        intrinsics: CameraIntrinsics,
        seed: u64,
    ) -> Result<Self> {
        intrinsics.validate()?;
        let depth = DepthMap::from_fn(intrinsics.width, intrinsics.height, |c, r| {
            plane.depth_at(&intrinsics, Point2::new(c as f64, r as f64))
        })?;
        if depth.valid_count() != intrinsics.width * intrinsics.height {
            return Err(Error::domain("depth plane is not positive over the whole image"));
        }
        let space_curve = (0..=ORACLE_SEGMENTS)
            .map(|i| lift(&curve2d, &plane, &intrinsics, i as f64 / ORACLE_SEGMENTS as f64))
            .collect::<Vec<_>>();
        let oracle_length = oracle_length(&space_curve)?;
        Ok(Self {
            curve2d,
            plane,
            space_curve,
            depth,
            intrinsics,
            oracle_length,
            seed,
        })
    }

    /// Trunk point at parameter `t` in camera coordinates.
    pub fn space_point(&self, t: f64) -> Result<Point3<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("parameter {t} outside [0, 1]")));
        }
        Ok(lift(&self.curve2d, &self.plane, &self.intrinsics, t))
    }
}

fn lift(curve: &BezierCurve, plane: &DepthPlane, k: &CameraIntrinsics, t: f64) -> Point3<f64> {
    let px = curve.eval_unchecked(t);
    k.backproject_unchecked(px, plane.depth_at(k, px))
}

/// Draws a random quartic whose control polygon fits inside the image.
pub fn random_canvas_quartic<R: Rng>(
    rng: &mut R,
    width: f64,
    height: f64,
    span_px: (f64, f64),
    max_bend: f64,
) -> Result<BezierCurve> {
    for _ in 0..MAX_ATTEMPTS {
        let span = if span_px.1 > span_px.0 {
            rng.random_range(span_px.0..=span_px.1)
        } else {
            span_px.0
        };
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let dir = Vector2::new(angle.cos(), angle.sin());
        let normal = Vector2::new(-dir.y, dir.x);
        let center = Point2::new(rng.random_range(0.0..width), rng.random_range(0.0..height));
        let start = center - dir * (0.5 * span);
        let points: Vec<Point2<f64>> = (0..=DEFAULT_DEGREE)
            .map(|i| {
                let s = i as f64 / DEFAULT_DEGREE as f64;
                let inner = i != 0 && i != DEFAULT_DEGREE;
                let bend = if inner && max_bend > 0.0 {
                    rng.random_range(-max_bend..=max_bend) * span
                } else {
                    0.0
                };
                start + dir * (s * span) + normal * bend
            })
            .collect();
        // convex hull property: control points inside means the curve is inside
        if points
            .iter()
            .all(|p| p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height)
        {
            return BezierCurve::new(points);
        }
    }
    Err(Error::domain(format!(
        "no curve fitting a {width}×{height} canvas after {MAX_ATTEMPTS} attempts"
    )))
}

/// Deterministic random scene for `seed`.
pub fn gen_scene(seed: u64, config: &SceneConfig) -> Result<SyntheticScene> {
    config.validate()?;
    let k = config.intrinsics;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curve = random_canvas_quartic(
        &mut rng,
        (k.width - 1) as f64,
        (k.height - 1) as f64,
        config.span_px,
        config.max_bend,
    )?;
    let (z_lo, z_hi) = config.z_range;
    for _ in 0..MAX_ATTEMPTS {
        let tilt = |rng: &mut ChaCha8Rng| {
            if config.max_tilt > 0.0 {
                rng.random_range(-config.max_tilt..=config.max_tilt)
            } else {
                0.0
            }
        };
        let plane = DepthPlane {
            z0: rng.random_range(z_lo..=z_hi),
            gu: tilt(&mut rng),
            gv: tilt(&mut rng),
        };
        let (lo, hi) = plane.corner_range(&k);
        if lo >= z_lo && hi <= z_hi {
            return SyntheticScene::from_parts(curve, plane, k, seed);
        }
    }
    Err(Error::domain(format!(
        "no depth plane inside [{z_lo}, {z_hi}] m after {MAX_ATTEMPTS} attempts"
    )))
}

/// Length of a dense 3D polyline used as ground truth.
pub fn oracle_length(points: &[Point3<f64>]) -> Result<f64> {
    if points.len() < ORACLE_MIN_SAMPLES {
        return Err(Error::domain(format!(
            "oracle needs at least {ORACLE_MIN_SAMPLES} samples, got {}",
            points.len()
        )));
    }
    Ok(polyline_length(points))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Standard deviation of the multiplicative depth noise.
    pub gaussian_sigma_rel: f64,
    /// Fraction of all pixels to invalidate.
    pub dropout_fraction: f64,
    /// Drop pixels in round blobs instead of independently.
    pub blob_dropout: bool,
    pub blob_radius: usize,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            gaussian_sigma_rel: 0.02,
            dropout_fraction: 0.05,
            blob_dropout: false,
            blob_radius: 4,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn clean() -> Self {
        Self {
            gaussian_sigma_rel: 0.0,
            dropout_fraction: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gaussian_sigma_rel", self.gaussian_sigma_rel),
            ("dropout_fraction", self.dropout_fraction),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::domain(format!("{name} must be in [0, 1), got {v}")));
            }
        }
        if self.blob_dropout && self.blob_radius == 0 {
            return Err(Error::domain("blob radius must be positive"));
        }
        Ok(())
    }
}

/// Multiplicative Gaussian noise on valid depths, then dropout of an exact pixel quota.
pub fn perturb_depth(map: &DepthMap, noise: &NoiseConfig) -> Result<DepthMap> {
    noise.validate()?;
    let mut out = map.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    if noise.gaussian_sigma_rel > 0.0 {
        let normal = Normal::new(0.0, noise.gaussian_sigma_rel)
            .map_err(|e| Error::domain(e.to_string()))?;
        for (z, &valid) in out.depths_mut().iter_mut().zip(map.validity()) {
            if valid {
                *z *= 1.0 + normal.sample(&mut rng);
            }
        }
        // a draw below -1 would flip the sign; such pixels become holes
        for i in 0..map.validity().len() {
            if map.validity()[i] && !(out.values()[i] > 0.0) {
                out.invalidate_index(i);
            }
        }
    }

    let total = map.width() * map.height();
    let quota = ((noise.dropout_fraction * total as f64).round() as usize).min(out.valid_count());
    if quota == 0 {
        return Ok(out);
    }
    if noise.blob_dropout {
        blob_dropout(&mut out, quota, noise.blob_radius, &mut rng);
    } else {
        let candidates: Vec<usize> = (0..total).filter(|&i| out.validity()[i]).collect();
        for pick in index::sample(&mut rng, candidates.len(), quota) {
            out.invalidate_index(candidates[pick]);
        }
    }
    Ok(out)
}

fn blob_dropout(map: &mut DepthMap, quota: usize, radius: usize, rng: &mut ChaCha8Rng) {
    let (w, h) = (map.width(), map.height());
    let r = radius as isize;
    let mut removed = 0;
    while removed < quota {
        let cx = rng.random_range(0..w) as isize;
        let cy = rng.random_range(0..h) as isize;
        for dy in -r..=r {
            for dx in -r..=r {
                if removed == quota || dx * dx + dy * dy > r * r {
                    continue;
                }
                let (x, y) = (cx + dx, cy + dy);
                if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
                    continue;
                }
                let i = y as usize * w + x as usize;
                if map.validity()[i] {
                    map.invalidate_index(i);
                    removed += 1;
                }
            }
        }
    }
}

/// Padding in pixels around the curve's extent when deriving a bounding box.
const BBOX_PAD: f64 = 5.0;

impl SyntheticScene {
    /// Axis-aligned box around the image-plane curve, padded by a few pixels.
    pub fn bbox(&self) -> [f64; 4] {
        let samples = self.curve2d.sample(&ParamSet::uniform(1001).expect("valid count"));
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for p in samples {
            b = [b[0].min(p.x), b[1].min(p.y), b[2].max(p.x), b[3].max(p.y)];
        }
        [b[0] - BBOX_PAD, b[1] - BBOX_PAD, b[2] + BBOX_PAD, b[3] + BBOX_PAD]
    }

    /// Five on-curve keypoints at uniform parameters, head to tail.
    pub fn annotation(&self, image_id: &str) -> AnnotationRecord {
        let params = ParamSet::uniform(5).expect("valid count");
        AnnotationRecord {
            image_id: image_id.to_string(),
            bbox: self.bbox(),
            keypoints: self.curve2d.sample(&params).iter().map(|p| [p.x, p.y]).collect(),
        }
    }

    /// The true curve as a full-confidence prediction.
    pub fn prediction(&self, image_id: &str) -> PredictionRecord {
        PredictionRecord {
            image_id: image_id.to_string(),
            confidence: 1.0,
            bbox: self.bbox(),
            control_points: self.curve2d.to_xy(),
        }
    }
}

/// Paths written by [`write_scene`].
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFiles {
    pub depth: PathBuf,
    pub intrinsics: PathBuf,
    pub prediction: PathBuf,
}

/// Writes `<stem>.depth.pfm`, `<stem>.intrinsics.txt` and `<stem>.pred.jsonl` into `dir`.
///
/// `depth` is usually the scene's own raster or a perturbed copy of it.
pub fn write_scene(
    scene: &SyntheticScene,
    depth: &DepthMap,
    dir: &Path,
    stem: &str,
) -> Result<SceneFiles> {
    let files = SceneFiles {
        depth: dir.join(format!("{stem}.depth.pfm")),
        intrinsics: dir.join(format!("{stem}.intrinsics.txt")),
        prediction: dir.join(format!("{stem}.pred.jsonl")),
    };
    write_depth(depth, &files.depth, DepthFormat::Pfm)?;
    write_intrinsics(&scene.intrinsics, &files.intrinsics)?;
    write_predictions(&[scene.prediction(stem)], &files.prediction)?;
    Ok(files)
}
