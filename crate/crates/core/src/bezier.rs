//! Bernstein-basis Bézier curves in the image plane.
//!
//! A degree-`n` curve is defined by `n + 1` control points `P_i`:
//!
//! ```text
//! B(t) = Σ_i P_i · b_i^n(t),   b_i^n(t) = C(n, i) · t^i · (1 - t)^(n - i),   t ∈ [0, 1]
//! ```
//!
//! Evaluation goes through de Casteljau's recursion; the direct Bernstein sum is
//! kept as [`BezierCurve::evaluate_bernstein`] so the two can be checked against
//! each other. Parameters outside `[0, 1]` are rejected, never extrapolated.

use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};

/// Highest supported degree. Binomial coefficients up to this row are exact `u64`s.
pub const MAX_DEGREE: usize = 20;

/// Degree used for trunk curves unless configured otherwise.
pub const DEFAULT_DEGREE: usize = 4;

/// Sample count used by the sampling loss and curve evaluation.
pub const DEFAULT_SAMPLE_COUNT: usize = 50;

const BINOMIAL: [[u64; MAX_DEGREE + 1]; MAX_DEGREE + 1] = pascal_triangle();

const fn pascal_triangle() -> [[u64; MAX_DEGREE + 1]; MAX_DEGREE + 1] {
    let mut table = [[0u64; MAX_DEGREE + 1]; MAX_DEGREE + 1];
    let mut n = 0;
    while n <= MAX_DEGREE {
        table[n][0] = 1;
        let mut k = 1;
        while k <= n {
            table[n][k] = table[n - 1][k - 1] + table[n - 1][k];
            k += 1;
        }
        n += 1;
    }
    table
}

/// Exact binomial coefficient `C(n, k)` for `n <= MAX_DEGREE`.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if n > MAX_DEGREE {
        return Err(Error::domain(format!(
            "degree {n} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    if k > n {
        return Err(Error::domain(format!("index {k} out of range for degree {n}")));
    }
    Ok(BINOMIAL[n][k])
}

fn check_param(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::domain(format!("parameter {t} outside [0, 1]")))
    }
}

/// Bernstein basis polynomial `b_i^n(t)`.
pub fn bernstein(i: usize, n: usize, t: f64) -> Result<f64> {
    let c = binomial(n, i)?;
    check_param(t)?;
    Ok(bernstein_unchecked(c, i, n, t))
}

#[inline]
fn bernstein_unchecked(c: u64, i: usize, n: usize, t: f64) -> f64 {
    c as f64 * t.powi(i as i32) * (1.0 - t).powi((n - i) as i32)
}

/// All `n + 1` basis values at `t`, caller guarantees `n <= MAX_DEGREE` and `t ∈ [0, 1]`.
pub(crate) fn basis_row(n: usize, t: f64) -> Vec<f64> {
    (0..=n)
        .map(|i| bernstein_unchecked(BINOMIAL[n][i], i, n, t))
        .collect()
}

/// Ordered curve parameters in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    values: Vec<f64>,
}

impl ParamSet {
    /// `count` equally spaced parameters `k / (count - 1)`.
    pub fn uniform(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::domain(format!(
                "uniform parameters need at least 2 samples, got {count}"
            )));
        }
        let last = (count - 1) as f64;
        let values = (0..count).map(|k| k as f64 / last).collect();
        Ok(Self { values })
    }

    /// Arbitrary parameters; must be strictly increasing inside `[0, 1]`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("parameter set is empty"));
        }
        for &t in &values {
            check_param(t)?;
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("parameters must be strictly increasing"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }
}

/// Shorthand for [`ParamSet::uniform`].
pub fn uniform_params(count: usize) -> Result<ParamSet> {
    ParamSet::uniform(count)
}

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point2<f64>,
    pub max: Point2<f64>,
}

impl Rect {
    pub fn contains(&self, p: &Point2<f64>, tol: f64) -> bool {
        p.x >= self.min.x - tol
            && p.x <= self.max.x + tol
            && p.y >= self.min.y - tol
            && p.y <= self.max.y + tol
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// A planar Bézier curve of degree `control_points.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierCurve {
    control_points: Vec<Point2<f64>>,
}

impl BezierCurve {
    pub fn new(control_points: Vec<Point2<f64>>) -> Result<Self> {
        if control_points.is_empty() {
            return Err(Error::domain("a curve needs at least one control point"));
        }
        let degree = control_points.len() - 1;
        if degree > MAX_DEGREE {
            return Err(Error::domain(format!(
                "degree {degree} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        if control_points
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::domain("control points must be finite"));
        }
        Ok(Self { control_points })
    }

    pub fn from_xy(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Point2::new(p[0], p[1])).collect())
    }

    pub fn degree(&self) -> usize {
        self.control_points.len() - 1
    }

    pub fn control_points(&self) -> &[Point2<f64>] {
        &self.control_points
    }

    pub fn to_xy(&self) -> Vec<[f64; 2]> {
        self.control_points.iter().map(|p| [p.x, p.y]).collect()
    }

    pub fn start(&self) -> Point2<f64> {
        self.control_points[0]
    }

    pub fn end(&self) -> Point2<f64> {
        self.control_points[self.degree()]
    }

    pub fn evaluate(&self, t: f64) -> Result<Point2<f64>> {
        check_param(t)?;
        Ok(self.eval_unchecked(t))
    }

    /// De Casteljau evaluation without the parameter range check.
    pub(crate) fn eval_unchecked(&self, t: f64) -> Point2<f64> {
        let mut pts: Vec<Vector2<f64>> = self.control_points.iter().map(|p| p.coords).collect();
        let s = 1.0 - t;
        for level in (1..pts.len()).rev() {
            for i in 0..level {
                // equal neighbors stay exact, so a collapsed curve samples to one point
                if pts[i] != pts[i + 1] {
                    pts[i] = pts[i] * s + pts[i + 1] * t;
                }
            }
        }
        Point2::from(pts[0])
    }

    /// Direct Bernstein summation; equivalent to [`evaluate`](Self::evaluate).
    pub fn evaluate_bernstein(&self, t: f64) -> Result<Point2<f64>> {
        check_param(t)?;
        let n = self.degree();
        let sum = self
            .control_points
            .iter()
            .zip(basis_row(n, t))
            .fold(Vector2::zeros(), |acc, (p, b)| acc + p.coords * b);
        Ok(Point2::from(sum))
    }

    pub fn sample(&self, params: &ParamSet) -> Vec<Point2<f64>> {
        params
            .values()
            .iter()
            .map(|&t| self.eval_unchecked(t))
            .collect()
    }

    /// Bounding box of the control polygon. Contains the whole curve.
    pub fn control_bbox(&self) -> Rect {
        let first = self.control_points[0];
        let (min, max) = self
            .control_points
            .iter()
            .fold((first, first), |(lo, hi), p| {
                (
                    Point2::new(lo.x.min(p.x), lo.y.min(p.y)),
                    Point2::new(hi.x.max(p.x), hi.y.max(p.y)),
                )
            });
        Rect { min, max }
    }

    /// Same curve traversed from the other end.
    pub fn reversed(&self) -> Self {
        let mut control_points = self.control_points.clone();
        control_points.reverse();
        Self { control_points }
    }

    /// Applies `f` to every control point. Bézier curves are affine invariant, so
    /// for affine `f` this is the same as mapping every point of the curve.
    pub fn map_points(&self, f: impl Fn(&Point2<f64>) -> Point2<f64>) -> Result<Self> {
        Self::new(self.control_points.iter().map(f).collect())
    }

    pub fn translated(&self, offset: Vector2<f64>) -> Self {
        Self {
            control_points: self.control_points.iter().map(|p| p + offset).collect(),
        }
    }
}
