//! Curve regression losses and their gradients with respect to the predicted
//! control points.
//!
//! * sampling loss: mean over sampled parameters of the L1 distance `|Δx| + |Δy|`
//!   between corresponding points of the two curves;
//! * wing loss on the Euclidean distance between matching endpoints;
//! * the weighted sum `λ_det · L_det + λ_tsl · L_tsl + λ_epl · L_epl`, where the
//!   detection term is supplied by the caller.
//!
//! At the non-differentiable points the gradients pick the zero subgradient:
//! `sign(0) = 0` for the L1 term and a zero vector for an endpoint with `D = 0`.

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::bezier::{basis_row, BezierCurve, ParamSet};
use crate::error::{Error, Result};

/// Gradient with one 2D entry per control point.
pub type ControlGradient = Vec<Vector2<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WingParams {
    w: f64,
    epsilon: f64,
    c: f64,
}

impl WingParams {
    pub fn new(w: f64, epsilon: f64) -> Result<Self> {
        if !(w > 0.0 && w.is_finite()) || !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!(
                "wing parameters must be positive and finite (w = {w}, epsilon = {epsilon})"
            )));
        }
        let c = w - w * (1.0 + w / epsilon).ln();
        if !c.is_finite() {
            return Err(Error::domain("wing offset constant is not finite"));
        }
        Ok(Self { w, epsilon, c })
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Offset joining the logarithmic and linear pieces.
    pub fn offset(&self) -> f64 {
        self.c
    }
}

impl Default for WingParams {
    fn default() -> Self {
        Self::new(10.0, 2.0).expect("default wing parameters are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_det: f64,
    pub lambda_tsl: f64,
    pub lambda_epl: f64,
}

impl LossWeights {
    pub fn new(lambda_det: f64, lambda_tsl: f64, lambda_epl: f64) -> Result<Self> {
        let weights = Self {
            lambda_det,
            lambda_tsl,
            lambda_epl,
        };
        weights.validate()?;
        Ok(weights)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_det", self.lambda_det),
            ("lambda_tsl", self.lambda_tsl),
            ("lambda_epl", self.lambda_epl),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_det: 1.0,
            lambda_tsl: 1.0,
            lambda_epl: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub det: f64,
    pub tsl: f64,
    pub epl: f64,
    pub total: f64,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn l1(d: Vector2<f64>) -> f64 {
    d.x.abs() + d.y.abs()
}

pub fn sampling_loss(pred: &BezierCurve, gt: &BezierCurve, params: &ParamSet) -> f64 {
    let total: f64 = params
        .values()
        .iter()
        .map(|&t| l1(gt.eval_unchecked(t) - pred.eval_unchecked(t)))
        .sum();
    total / params.count() as f64
}

pub fn sampling_loss_grad(pred: &BezierCurve, gt: &BezierCurve, params: &ParamSet) -> ControlGradient {
    let basis: Vec<Vec<f64>> = params
        .values()
        .iter()
        .map(|&t| basis_row(pred.degree(), t))
        .collect();
    // same evaluation path on both sides, so identical curves give exact zeros
    let targets: Vec<Point2<f64>> = params
        .values()
        .iter()
        .map(|&t| eval_with_basis(gt, &basis_row(gt.degree(), t)))
        .collect();
    point_l1_grad(pred, &basis, &targets)
}

/// Mean L1 distance between `pred` evaluated through `basis` rows and `targets`.
pub(crate) fn point_l1_loss(pred: &BezierCurve, basis: &[Vec<f64>], targets: &[Point2<f64>]) -> f64 {
    let sum: f64 = basis
        .iter()
        .zip(targets)
        .map(|(row, q)| l1(eval_with_basis(pred, row) - q))
        .sum();
    sum / targets.len() as f64
}

pub(crate) fn point_l1_grad(
    pred: &BezierCurve,
    basis: &[Vec<f64>],
    targets: &[Point2<f64>],
) -> ControlGradient {
    let mut grad = vec![Vector2::zeros(); pred.degree() + 1];
    let scale = 1.0 / targets.len() as f64;
    for (row, q) in basis.iter().zip(targets) {
        let d = eval_with_basis(pred, row) - q;
        let s = Vector2::new(sign(d.x), sign(d.y)) * scale;
        for (g, b) in grad.iter_mut().zip(row) {
            *g += s * *b;
        }
    }
    grad
}

pub(crate) fn eval_with_basis(curve: &BezierCurve, row: &[f64]) -> Point2<f64> {
    let v = curve
        .control_points()
        .iter()
        .zip(row)
        .fold(Vector2::zeros(), |acc, (p, b)| acc + p.coords * *b);
    Point2::from(v)
}

pub fn wing(x: f64, params: &WingParams) -> f64 {
    let a = x.abs();
    if a < params.w {
        params.w * (1.0 + a / params.epsilon).ln()
    } else {
        a - params.c
    }
}

/// Derivative of [`wing`]; zero at `x = 0`.
pub fn wing_derivative(x: f64, params: &WingParams) -> f64 {
    let a = x.abs();
    let magnitude = if a < params.w {
        params.w / (params.epsilon + a)
    } else {
        1.0
    };
    sign(x) * magnitude
}

pub fn endpoint_loss(pred: &BezierCurve, gt: &BezierCurve, params: &WingParams) -> f64 {
    endpoint_loss_to(pred, gt.start(), gt.end(), params)
}

pub(crate) fn endpoint_loss_to(
    pred: &BezierCurve,
    start: Point2<f64>,
    end: Point2<f64>,
    params: &WingParams,
) -> f64 {
    wing((pred.start() - start).norm(), params) + wing((pred.end() - end).norm(), params)
}

pub fn endpoint_loss_grad(pred: &BezierCurve, gt: &BezierCurve, params: &WingParams) -> ControlGradient {
    endpoint_grad_to(pred, gt.start(), gt.end(), params)
}

pub(crate) fn endpoint_grad_to(
    pred: &BezierCurve,
    start: Point2<f64>,
    end: Point2<f64>,
    params: &WingParams,
) -> ControlGradient {
    let n = pred.degree();
    let mut grad = vec![Vector2::zeros(); n + 1];
    for (idx, target) in [(0, start), (n, end)] {
        let diff = pred.control_points()[idx] - target;
        let d = diff.norm();
        if d > 0.0 {
            grad[idx] += diff * (wing_derivative(d, params) / d);
        }
    }
    grad
}

pub fn combined_loss(det: f64, tsl: f64, epl: f64, weights: &LossWeights) -> Result<LossBreakdown> {
    weights.validate()?;
    if !det.is_finite() || !tsl.is_finite() || !epl.is_finite() {
        return Err(Error::domain("loss terms must be finite"));
    }
    if tsl < 0.0 || epl < 0.0 {
        return Err(Error::domain(format!(
            "curve loss terms must be nonnegative (tsl = {tsl}, epl = {epl})"
        )));
    }
    Ok(LossBreakdown {
        det,
        tsl,
        epl,
        total: weights.lambda_det * det + weights.lambda_tsl * tsl + weights.lambda_epl * epl,
    })
}
