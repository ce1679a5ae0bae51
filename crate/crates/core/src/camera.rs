use nalgebra::{Point2, Point3};

use crate::error::{Error, Result};

/// Pinhole intrinsics. Pixel centers sit at integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fx.is_finite()) || !(self.fy > 0.0 && self.fy.is_finite()) {
            return Err(Error::domain(format!(
                "focal lengths must be positive (fx = {}, fy = {})",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::domain("image size must be nonzero"));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) {
            return Err(Error::domain(format!(
                "cx = {} outside [0, {})",
                self.cx, self.width
            )));
        }
        if !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(Error::domain(format!(
                "cy = {} outside [0, {})",
                self.cy, self.height
            )));
        }
        Ok(())
    }

    /// Lifts a pixel with metric depth `z` into camera coordinates.
    pub fn backproject(&self, pixel: Point2<f64>, z: f64) -> Result<Point3<f64>> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::domain(format!("depth must be positive, got {z}")));
        }
        Ok(self.backproject_unchecked(pixel, z))
    }

    pub(crate) fn backproject_unchecked(&self, pixel: Point2<f64>, z: f64) -> Point3<f64> {
        Point3::new(
            (pixel.x - self.cx) * z / self.fx,
            (pixel.y - self.cy) * z / self.fy,
            z,
        )
    }

    /// Pinhole projection of a point in front of the camera.
    pub fn project(&self, p: Point3<f64>) -> Result<Point2<f64>> {
        if !(p.z > 0.0) {
            return Err(Error::domain(format!("point is not in front of the camera (z = {})", p.z)));
        }
        Ok(Point2::new(
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        ))
    }

    /// Whether `pixel` lies on the sampled pixel grid `[0, w-1] × [0, h-1]`.
    pub fn contains(&self, pixel: Point2<f64>) -> bool {
        pixel.x >= 0.0
            && pixel.y >= 0.0
            && pixel.x <= (self.width - 1) as f64
            && pixel.y <= (self.height - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
    }

    #[test]
    fn principal_point_is_on_axis() {
        let p = k().backproject(Point2::new(320.0, 240.0), 2.0).unwrap();
        assert_eq!(p, Point3::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn similar_triangles() {
        let p = k().backproject(Point2::new(420.0, 240.0), 2.0).unwrap();
        assert!((p - Point3::new(0.4, 0.0, 2.0)).norm() < 1e-15);
        let back = k().project(p).unwrap();
        assert!((back - Point2::new(420.0, 240.0)).norm() < 1e-9);
    }

    #[test]
    fn rejects_bad_depth_and_intrinsics() {
        assert!(k().backproject(Point2::new(1.0, 1.0), 0.0).is_err());
        assert!(k().backproject(Point2::new(1.0, 1.0), -1.0).is_err());
        assert!(CameraIntrinsics::new(0.0, 500.0, 320.0, 240.0, 640, 480).is_err());
        assert!(CameraIntrinsics::new(500.0, 500.0, 640.0, 240.0, 640, 480).is_err());
        assert!(CameraIntrinsics::new(500.0, 500.0, 320.0, -1.0, 640, 480).is_err());
    }
}
