//! Least-squares ground-truth curves from keypoint annotations.

use bezier_trunk::bezier::{BezierCurve, ParamSet};
use bezier_trunk::fit::{fit_curve, AnnotationPolyline, Parameterization};
use nalgebra::Point2;

fn main() -> bezier_trunk::error::Result<()> {
    let hidden = BezierCurve::from_xy(&[[50.0, 450.0], [90.0, 330.0], [60.0, 230.0], [110.0, 120.0], [95.0, 30.0]])?;

    // Exact samples: the fit recovers the hidden curve.
    let exact = AnnotationPolyline::new(hidden.sample(&ParamSet::uniform(9)?))?;
    let fit = fit_curve(&exact, 4, Parameterization::Uniform)?;
    println!("exact samples: residual {:.2e} px", fit.residual_rms);

    // A hand-clicked annotation: five unevenly spaced keypoints.
    let clicked = AnnotationPolyline::from_xy(&[[52.0, 449.0], [78.0, 380.0], [70.0, 240.0], [100.0, 110.0], [96.0, 31.0]])?;
    for scheme in [Parameterization::Uniform, Parameterization::ChordLength] {
        let fit = fit_curve(&clicked, 4, scheme)?;
        println!("{scheme:?}: residual {:.3} px, control points {:?}", fit.residual_rms, fit.curve.to_xy());
    }

    // Lower degrees trade residual for smoothness.
    for degree in 1..=4 {
        let fit = fit_curve(&clicked, degree, Parameterization::ChordLength)?;
        let mid: Point2<f64> = fit.curve.evaluate(0.5)?;
        println!("degree {degree}: residual {:6.3} px, midpoint ({:.1}, {:.1})", fit.residual_rms, mid.x, mid.y);
    }
    Ok(())
}
