//! Ground-truth control points from ordered trunk keypoints.
//!
//! Each annotation point `p_k` gets a parameter `t_k`, and the control points
//! solve the linear least-squares problem `A · P ≈ p` where `A[k][j] = b_j^n(t_k)`.
//! When there are exactly `n + 1` points the fit interpolates them.
//!
//! The system is solved through an SVD of the design matrix rather than the normal
//! equations; Bernstein design matrices get badly conditioned as the degree grows.

use nalgebra::{DMatrix, Point2};
use serde::{Deserialize, Serialize};

use crate::bezier::{basis_row, BezierCurve, ParamSet, MAX_DEGREE};
use crate::error::{Error, Result};

/// Singular values below this fraction of the largest one count as rank loss.
const RANK_TOLERANCE: f64 = 1e-12;

/// Ordered head-to-tail keypoints of one trunk.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationPolyline {
    points: Vec<Point2<f64>>,
}

impl AnnotationPolyline {
    pub fn new(points: Vec<Point2<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain(format!(
                "an annotation needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::domain("annotation points must be finite"));
        }
        Ok(Self { points })
    }

    pub fn from_xy(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Point2::new(p[0], p[1])).collect())
    }

    pub fn points(&self) -> &[Point2<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Parameters assigned to the annotation points under `scheme`.
    pub fn parameters(&self, scheme: Parameterization) -> Result<ParamSet> {
        match scheme {
            Parameterization::Uniform => ParamSet::uniform(self.points.len()),
            Parameterization::ChordLength => {
                let mut cumulative = Vec::with_capacity(self.points.len());
                let mut total = 0.0;
                cumulative.push(0.0);
                for (k, w) in self.points.windows(2).enumerate() {
                    let seg = (w[1] - w[0]).norm();
                    if seg == 0.0 {
                        return Err(Error::Degenerate(format!(
                            "annotation points {k} and {} coincide; chord-length parameters would repeat",
                            k + 1
                        )));
                    }
                    total += seg;
                    cumulative.push(total);
                }
                let mut values: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
                // pin the last value exactly despite rounding
                *values.last_mut().unwrap() = 1.0;
                ParamSet::new(values).map_err(|_| {
                    Error::Degenerate("chord-length parameters are not strictly increasing".into())
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    /// `t_k = k / m`.
    #[default]
    Uniform,
    /// Normalized cumulative polyline length.
    ChordLength,
}

impl std::str::FromStr for Parameterization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "chord" | "chord-length" => Ok(Self::ChordLength),
            other => Err(Error::domain(format!("unknown parameterization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub curve: BezierCurve,
    /// Root mean square distance between annotation points and the curve at their parameters.
    pub residual_rms: f64,
    pub parameterization: Parameterization,
}

/// Bernstein design matrix with entry `(k, j) = b_j^n(t_k)`.
pub fn design_matrix(params: &ParamSet, degree: usize) -> Result<DMatrix<f64>> {
    if degree > MAX_DEGREE {
        return Err(Error::domain(format!(
            "degree {degree} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    if params.count() < degree + 1 {
        return Err(Error::Underdetermined {
            points: params.count(),
            degree,
        });
    }
    let rows: Vec<Vec<f64>> = params
        .values()
        .iter()
        .map(|&t| basis_row(degree, t))
        .collect();
    Ok(DMatrix::from_fn(params.count(), degree + 1, |k, j| rows[k][j]))
}

/// Least-squares solution of `A · X = B` for a full-column-rank `A`.
pub(crate) fn solve_least_squares(a: DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    if !(max_sv > 0.0) || min_sv <= RANK_TOLERANCE * max_sv {
        return Err(Error::Degenerate(format!(
            "design matrix is rank deficient (singular values {min_sv:e} .. {max_sv:e})"
        )));
    }
    svd.solve(b, RANK_TOLERANCE * max_sv)
        .map_err(|e| Error::Degenerate(e.to_string()))
}

/// Fits a degree-`degree` curve through the annotation.
pub fn fit_curve(
    annotation: &AnnotationPolyline,
    degree: usize,
    parameterization: Parameterization,
) -> Result<FitResult> {
    if annotation.len() < degree + 1 {
        return Err(Error::Underdetermined {
            points: annotation.len(),
            degree,
        });
    }
    let params = annotation.parameters(parameterization)?;
    let a = design_matrix(&params, degree)?;
    let targets = DMatrix::from_fn(annotation.len(), 2, |k, c| annotation.points[k][c]);
    let solution = solve_least_squares(a.clone(), &targets)?;

    let residual = &a * &solution - &targets;
    let residual_rms = (residual.norm_squared() / annotation.len() as f64).sqrt();

    let control_points = (0..=degree)
        .map(|j| Point2::new(solution[(j, 0)], solution[(j, 1)]))
        .collect();
    Ok(FitResult {
        curve: BezierCurve::new(control_points)?,
        residual_rms,
        parameterization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bezier::bernstein;

    #[test]
    fn endpoint_design_matrix_is_identity() {
        let m = design_matrix(&ParamSet::uniform(2).unwrap(), 1).unwrap();
        assert_eq!(m, DMatrix::identity(2, 2));
    }

    #[test]
    fn design_matrix_entries() {
        let m = design_matrix(&ParamSet::uniform(5).unwrap(), 4).unwrap();
        assert_eq!(m[(2, 2)], bernstein(2, 4, 0.5).unwrap());
        assert_eq!(m[(2, 2)], 0.375);
        for row in m.row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn design_matrix_needs_enough_rows() {
        let err = design_matrix(&ParamSet::uniform(4).unwrap(), 4).unwrap_err();
        assert!(matches!(err, Error::Underdetermined { points: 4, degree: 4 }));
    }

    #[test]
    fn collinear_points_give_collinear_controls() {
        let ann = AnnotationPolyline::from_xy(&[
            [0.0, 0.0],
            [10.0, 5.0],
            [20.0, 10.0],
            [30.0, 15.0],
            [40.0, 20.0],
        ])
        .unwrap();
        let fit = fit_curve(&ann, 4, Parameterization::Uniform).unwrap();
        assert!(fit.residual_rms < 1e-9);
        let cps = fit.curve.control_points();
        assert!((cps[0] - ann.points()[0]).norm() < 1e-9);
        assert!((cps[4] - ann.points()[4]).norm() < 1e-9);
        for p in cps {
            // on the line y = x / 2
            assert!((p.y - p.x / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn square_system_recovers_quartic() {
        let original = BezierCurve::from_xy(&[
            [12.0, 80.0],
            [60.0, 10.0],
            [130.0, 150.0],
            [170.0, 40.0],
            [240.0, 95.0],
        ])
        .unwrap();
        let pts = original.sample(&ParamSet::uniform(5).unwrap());
        let fit = fit_curve(&AnnotationPolyline::new(pts).unwrap(), 4, Parameterization::Uniform)
            .unwrap();
        for (a, b) in fit.curve.control_points().iter().zip(original.control_points()) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn overdetermined_round_trip() {
        let original = BezierCurve::from_xy(&[
            [300.0, 20.0],
            [250.0, 90.0],
            [120.0, 60.0],
            [90.0, 200.0],
            [10.0, 180.0],
        ])
        .unwrap();
        let pts = original.sample(&ParamSet::uniform(9).unwrap());
        let fit = fit_curve(&AnnotationPolyline::new(pts).unwrap(), 4, Parameterization::Uniform)
            .unwrap();
        assert!(fit.residual_rms < 1e-9);
    }

    #[test]
    fn too_few_points_is_underdetermined() {
        let ann = AnnotationPolyline::from_xy(&[[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]]).unwrap();
        assert!(matches!(
            fit_curve(&ann, 4, Parameterization::Uniform),
            Err(Error::Underdetermined { points: 3, degree: 4 })
        ));
    }

    #[test]
    fn coincident_points_depend_on_parameterization() {
        let ann = AnnotationPolyline::from_xy(&[
            [0.0, 0.0],
            [5.0, 5.0],
            [5.0, 5.0],
            [10.0, 3.0],
            [15.0, 0.0],
        ])
        .unwrap();
        assert!(fit_curve(&ann, 4, Parameterization::Uniform).is_ok());
        assert!(matches!(
            fit_curve(&ann, 4, Parameterization::ChordLength),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn chord_length_parameters() {
        let ann = AnnotationPolyline::from_xy(&[[0.0, 0.0], [1.0, 0.0], [4.0, 0.0]]).unwrap();
        let p = ann.parameters(Parameterization::ChordLength).unwrap();
        assert_eq!(p.values(), &[0.0, 0.25, 1.0]);
    }

    #[test]
    fn annotation_needs_two_points() {
        assert!(AnnotationPolyline::from_xy(&[[1.0, 1.0]]).is_err());
        assert!(AnnotationPolyline::from_xy(&[[1.0, f64::NAN], [0.0, 0.0]]).is_err());
    }
}
