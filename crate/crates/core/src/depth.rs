//! Dense metric depth rasters with a validity mask.
//!
//! Invalid pixels (holes from stereo matching, dropouts) always store `NaN`, so
//! two maps with the same validity mask compare equal value-for-value.

use nalgebra::Point2;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depths: Vec<f64>,
    valid: Vec<bool>,
}

impl PartialEq for DepthMap {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.valid == other.valid
            && self
                .depths
                .iter()
                .zip(&other.depths)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn usable(z: f64) -> bool {
    z.is_finite() && z > 0.0
}

impl DepthMap {
    /// Row-major raster; non-finite and nonpositive values become invalid pixels.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::domain("depth map dimensions must be nonzero"));
        }
        if values.len() != width * height {
            return Err(Error::domain(format!(
                "raster has {} values, expected {width}×{height}",
                values.len()
            )));
        }
        let valid: Vec<bool> = values.iter().map(|&z| usable(z)).collect();
        let depths = values
            .into_iter()
            .map(|z| if usable(z) { z } else { f64::NAN })
            .collect();
        Ok(Self {
            width,
            height,
            depths,
            valid,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..height)
            .flat_map(|row| (0..width).map(move |col| (col, row)))
            .map(|(col, row)| f(col, row))
            .collect();
        Self::new(width, height, values)
    }

    pub fn constant(width: usize, height: usize, z: f64) -> Result<Self> {
        Self::new(width, height, vec![z; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Raw raster, `NaN` at invalid pixels.
    pub fn values(&self) -> &[f64] {
        &self.depths
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    /// Depth at a pixel, `None` for holes or out-of-range indices.
    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        if col >= self.width || row >= self.height {
            return None;
        }
        let i = self.index(col, row);
        self.valid[i].then(|| self.depths[i])
    }

    pub fn set(&mut self, col: usize, row: usize, z: f64) {
        let i = self.index(col, row);
        if usable(z) {
            self.depths[i] = z;
            self.valid[i] = true;
        } else {
            self.depths[i] = f64::NAN;
            self.valid[i] = false;
        }
    }

    pub fn invalidate(&mut self, col: usize, row: usize) {
        self.invalidate_index(self.index(col, row));
    }

    pub(crate) fn invalidate_index(&mut self, i: usize) {
        self.depths[i] = f64::NAN;
        self.valid[i] = false;
    }

    pub(crate) fn depths_mut(&mut self) -> &mut [f64] {
        &mut self.depths
    }

    /// Every valid depth multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::domain(format!("depth scale must be positive, got {s}")));
        }
        let mut out = self.clone();
        for (z, &v) in out.depths.iter_mut().zip(&self.valid) {
            if v {
                *z *= s;
            }
        }
        Ok(out)
    }

    pub fn sample(&self, pixel: Point2<f64>, mode: SampleMode) -> Result<Option<f64>> {
        sample_depth(self, pixel, mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleMode {
    /// Value of the pixel whose center is closest.
    Nearest,
    /// Bilinear blend over the valid pixels of the surrounding 2×2 cell,
    /// renormalized over whichever of them are valid.
    #[default]
    BilinearValid,
}

/// Reads the depth at a sub-pixel position on the grid `[0, w-1] × [0, h-1]`.
pub fn sample_depth(map: &DepthMap, pixel: Point2<f64>, mode: SampleMode) -> Result<Option<f64>> {
    let (u, v) = (pixel.x, pixel.y);
    let max_u = (map.width - 1) as f64;
    let max_v = (map.height - 1) as f64;
    if !(u >= 0.0 && v >= 0.0 && u <= max_u && v <= max_v) {
        return Err(Error::domain(format!(
            "pixel ({u}, {v}) outside the {}×{} depth map",
            map.width, map.height
        )));
    }
    match mode {
        SampleMode::Nearest => Ok(map.get(u.round() as usize, v.round() as usize)),
        SampleMode::BilinearValid => {
            let c0 = (u.floor() as usize).min(map.width.saturating_sub(2));
            let r0 = (v.floor() as usize).min(map.height.saturating_sub(2));
            let c1 = (c0 + 1).min(map.width - 1);
            let r1 = (r0 + 1).min(map.height - 1);
            let fu = u - c0 as f64;
            let fv = v - r0 as f64;
            let corners = [
                (c0, r0, (1.0 - fu) * (1.0 - fv)),
                (c1, r0, fu * (1.0 - fv)),
                (c0, r1, (1.0 - fu) * fv),
                (c1, r1, fu * fv),
            ];
            let mut weighted = 0.0;
            let mut weight = 0.0;
            let mut plain = 0.0;
            let mut count = 0usize;
            for (c, r, w) in corners {
                if let Some(z) = map.get(c, r) {
                    weighted += w * z;
                    weight += w;
                    plain += z;
                    count += 1;
                }
            }
            Ok(if count == 0 {
                None
            } else if weight > 1e-12 {
                Some(weighted / weight)
            } else {
                // every valid corner has zero weight: fall back to their mean
                Some(plain / count as f64)
            })
        }
    }
}
