//! Evaluating, sampling and transforming a quartic Bezier curve.

use bezier_trunk::bezier::{bernstein, BezierCurve, ParamSet};
use nalgebra::Vector2;

fn main() -> bezier_trunk::error::Result<()> {
    let curve = BezierCurve::from_xy(&[[100.0, 400.0], [140.0, 300.0], [120.0, 200.0], [160.0, 120.0], [150.0, 40.0]])?;
    println!("degree {}, from {} to {}", curve.degree(), curve.start(), curve.end());

    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let p = curve.evaluate(t)?;
        let q = curve.evaluate_bernstein(t)?;
        let weights: Vec<String> = (0..=4).map(|i| format!("{:.4}", bernstein(i, 4, t).unwrap())).collect();
        println!("t={t:.2}  ({:8.3}, {:8.3})  bernstein gap {:.1e}  weights [{}]", p.x, p.y, (p - q).norm(), weights.join(", "));
    }

    let samples = curve.sample(&ParamSet::uniform(5)?);
    println!("5 uniform samples: {:?}", samples.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>());

    let bbox = curve.control_bbox();
    println!("control box {:.0}x{:.0} px", bbox.width(), bbox.height());

    let moved = curve.translated(Vector2::new(10.0, -5.0));
    let flipped = curve.reversed();
    println!("translated midpoint {}", moved.evaluate(0.5)?);
    println!("reversed start {} (original end)", flipped.start());
    Ok(())
}
