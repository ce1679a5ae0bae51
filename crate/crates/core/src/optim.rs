//! Momentum gradient descent on predicted control points under the curve losses.
//!
//! This drives `λ_tsl · L_tsl + λ_epl · L_epl` down directly in control-point
//! space, with no network in between. The objective is an L1 sum plus wing
//! terms, so only subgradients exist at the kinks; plain heavy-ball momentum
//! with a fixed step is used and the zero subgradient is taken at ties.

use nalgebra::{Point2, Vector2};

use crate::bezier::{basis_row, BezierCurve, ParamSet, DEFAULT_SAMPLE_COUNT};
use crate::error::{Error, Result};
use crate::fit::{fit_curve, AnnotationPolyline, FitResult, Parameterization};
use crate::loss::{
    combined_loss, endpoint_grad_to, endpoint_loss_to, eval_with_basis, point_l1_grad, point_l1_loss,
    sampling_loss, LossBreakdown, LossWeights, WingParams,
};

/// Loss above which a run is declared divergent.
const DIVERGENCE_LIMIT: f64 = 1e9;
/// Consecutive small loss changes required to call a run converged.
const STALL_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimConfig {
    pub max_iters: usize,
    /// Step size in pixels per unit gradient.
    pub step_size: f64,
    pub momentum: f64,
    pub tol_loss_delta: f64,
    /// `lambda_det` must be zero; there is no detection term here.
    pub weights: LossWeights,
    pub wing: WingParams,
    pub sampling: ParamSet,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            step_size: 0.5,
            momentum: 0.9,
            tol_loss_delta: 1e-8,
            weights: LossWeights {
                lambda_det: 0.0,
                ..LossWeights::default()
            },
            wing: WingParams::default(),
            sampling: ParamSet::uniform(DEFAULT_SAMPLE_COUNT).expect("50 samples"),
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be positive"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::domain(format!("step size must be positive, got {}", self.step_size)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::domain(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        if !(self.tol_loss_delta > 0.0) {
            return Err(Error::domain("loss-change tolerance must be positive"));
        }
        self.weights.validate()?;
        if self.weights.lambda_det != 0.0 {
            return Err(Error::domain("the optimizer has no detection term; lambda_det must be 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimTrace {
    /// Number of parameter updates applied.
    pub iterations: usize,
    /// Total loss before each update. When the returned (best) curve is not the
    /// last iterate, its loss is appended so the history ends at `final_loss`.
    pub loss_history: Vec<f64>,
    pub final_loss: LossBreakdown,
    pub converged: bool,
}

/// What the descent is pulling the curve toward: points at fixed parameters
/// for the L1 term, and two endpoint targets for the wing term.
struct Objective {
    basis: Vec<Vec<f64>>,
    targets: Vec<Point2<f64>>,
    start: Point2<f64>,
    end: Point2<f64>,
}

impl Objective {
    fn new(degree: usize, params: &ParamSet, targets: Vec<Point2<f64>>) -> Self {
        let start = targets[0];
        let end = *targets.last().unwrap();
        Self::with_endpoints(degree, params, targets, start, end)
    }

    fn with_endpoints(
        degree: usize,
        params: &ParamSet,
        targets: Vec<Point2<f64>>,
        start: Point2<f64>,
        end: Point2<f64>,
    ) -> Self {
        let basis = params.values().iter().map(|&t| basis_row(degree, t)).collect();
        Self {
            basis,
            targets,
            start,
            end,
        }
    }

    fn loss(&self, curve: &BezierCurve, config: &OptimConfig) -> Result<LossBreakdown> {
        let tsl = point_l1_loss(curve, &self.basis, &self.targets);
        let epl = endpoint_loss_to(curve, self.start, self.end, &config.wing);
        combined_loss(0.0, tsl, epl, &config.weights)
    }

    fn gradient(&self, curve: &BezierCurve, config: &OptimConfig) -> Vec<Vector2<f64>> {
        let mut grad = point_l1_grad(curve, &self.basis, &self.targets);
        if config.weights.lambda_epl > 0.0 {
            let epl = endpoint_grad_to(curve, self.start, self.end, &config.wing);
            for (g, e) in grad.iter_mut().zip(epl) {
                *g = *g * config.weights.lambda_tsl + e * config.weights.lambda_epl;
            }
        } else {
            for g in grad.iter_mut() {
                *g *= config.weights.lambda_tsl;
            }
        }
        grad
    }
}

fn descend(
    objective: &Objective,
    init: BezierCurve,
    config: &OptimConfig,
) -> Result<(BezierCurve, OptimTrace)> {
    config.validate()?;
    let mut points: Vec<Point2<f64>> = init.control_points().to_vec();
    let mut velocity = vec![Vector2::<f64>::zeros(); points.len()];
    let mut curve = init;
    let mut history = Vec::new();
    let mut stalled = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    let mut breakdown = objective.loss(&curve, config)?;
    let mut best = (curve.clone(), breakdown);
    loop {
        let total = breakdown.total;
        if !total.is_finite() || total > DIVERGENCE_LIMIT {
            history.push(total);
            let trace = OptimTrace {
                iterations,
                loss_history: history,
                final_loss: breakdown,
                converged: false,
            };
            return Err(Error::OptimizationFailed {
                reason: format!("loss diverged to {total}"),
                trace: Box::new(trace),
            });
        }
        if let Some(prev) = history.last() {
            if (total - prev).abs() < config.tol_loss_delta {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        history.push(total);
        if total < best.1.total {
            best = (curve.clone(), breakdown);
        }
        // a loss below the tolerance cannot move by more than the tolerance
        if total <= config.tol_loss_delta || stalled >= STALL_WINDOW {
            converged = true;
            break;
        }
        if iterations == config.max_iters {
            break;
        }

        let grad = objective.gradient(&curve, config);
        for ((p, v), g) in points.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
            *v = *v * config.momentum - g * config.step_size;
            *p += *v;
        }
        curve = BezierCurve::new(points.clone()).map_err(|_| Error::OptimizationFailed {
            reason: "control points became non-finite".into(),
            trace: Box::new(OptimTrace {
                iterations,
                loss_history: history.clone(),
                final_loss: breakdown,
                converged: false,
            }),
        })?;
        iterations += 1;
        breakdown = objective.loss(&curve, config)?;
    }

    // Subgradient steps do not decrease the loss monotonically, so the best
    // iterate is returned; its loss closes the history.
    let (curve, final_loss) = best;
    if final_loss.total != breakdown.total {
        history.push(final_loss.total);
    }
    let trace = OptimTrace {
        iterations,
        loss_history: history,
        final_loss,
        converged,
    };
    Ok((curve, trace))
}

/// Control points spread evenly along the segment between two endpoints.
pub fn straight_init(start: Point2<f64>, end: Point2<f64>, degree: usize) -> Result<BezierCurve> {
    let n = degree.max(1) as f64;
    BezierCurve::new(
        (0..=degree)
            .map(|i| start + (end - start) * (i as f64 / n))
            .collect(),
    )
}

/// Fits a predicted curve to `target` by minimizing the curve losses against it.
///
/// Without `init`, starts from the straight segment joining the target endpoints.
pub fn fit_to_target(
    target: &BezierCurve,
    init: Option<&BezierCurve>,
    config: &OptimConfig,
) -> Result<(BezierCurve, OptimTrace)> {
    if let Some(c) = init {
        if c.degree() != target.degree() {
            return Err(Error::domain(format!(
                "initial curve has degree {}, target has degree {}",
                c.degree(),
                target.degree()
            )));
        }
    }
    // Work relative to the target's first point so that translated problems
    // are the same floating-point problem.
    let origin = target.start().coords;
    let target = target.translated(-origin);
    let init = match init {
        Some(c) => c.translated(-origin),
        None => straight_init(target.start(), target.end(), target.degree())?,
    };
    let mut objective = Objective::with_endpoints(
        target.degree(),
        &config.sampling,
        Vec::new(),
        target.start(),
        target.end(),
    );
    objective.targets = objective
        .basis
        .iter()
        .map(|row| eval_with_basis(&target, row))
        .collect();
    let (curve, trace) = descend(&objective, init, config)?;
    Ok((curve.translated(origin), trace))
}

#[derive(Debug, Clone)]
pub struct PolylineFit {
    pub curve: BezierCurve,
    pub trace: OptimTrace,
    /// The least-squares fit the refinement started from.
    pub least_squares: FitResult,
    /// Sampling loss between the refined curve and the least-squares curve.
    pub loss_vs_least_squares: f64,
}

/// Least-squares fit of the polyline followed by refinement under the curve losses,
/// with the L1 term taken at the annotation points and the wing term at its ends.
pub fn fit_to_polyline(
    target_points: &AnnotationPolyline,
    degree: usize,
    config: &OptimConfig,
) -> Result<PolylineFit> {
    let least_squares = fit_curve(target_points, degree, Parameterization::Uniform)?;
    let params = target_points.parameters(Parameterization::Uniform)?;
    let objective = Objective::new(degree, &params, target_points.points().to_vec());
    let (curve, trace) = descend(&objective, least_squares.curve.clone(), config)?;
    let loss_vs_least_squares = sampling_loss(&curve, &least_squares.curve, &config.sampling);
    Ok(PolylineFit {
        curve,
        trace,
        least_squares,
        loss_vs_least_squares,
    })
}
