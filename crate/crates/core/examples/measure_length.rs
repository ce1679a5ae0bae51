//! Trunk length from a curve, a depth map and camera intrinsics.

use bezier_trunk::bezier::BezierCurve;
use bezier_trunk::camera::CameraIntrinsics;
use bezier_trunk::depth::SampleMode;
use bezier_trunk::measure::{curve_to_space, measure, polyline_length, MeasureConfig, RepairConfig};
use bezier_trunk::synth::{DepthPlane, SyntheticScene};

fn main() -> bezier_trunk::error::Result<()> {
    let k = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480)?;
    let curve = BezierCurve::from_xy(&[[300.0, 420.0], [330.0, 330.0], [310.0, 240.0], [345.0, 150.0], [330.0, 60.0]])?;
    let scene = SyntheticScene::from_parts(curve, DepthPlane { z0: 1.4, gu: 4e-4, gv: -2e-4 }, k, 0)?;
    println!("true length {:.2} cm", 100.0 * scene.oracle_length);

    for segments in [10, 50, 200, 1000] {
        let samples = curve_to_space(&scene.curve2d, &scene.depth, &k, segments, SampleMode::BilinearValid, &RepairConfig::default())?;
        println!("M = {segments:>4}: {:.4} cm", 100.0 * polyline_length(&samples.points));
    }

    // Punch a hole across the trunk and let repair bridge it.
    let mut depth = scene.depth.clone();
    for row in 200..230 {
        for col in 0..640 {
            depth.invalidate(col, row);
        }
    }
    let m = measure(&scene.curve2d, &depth, &k, &MeasureConfig::default())?;
    println!(
        "with a 30-row hole: {:.2} cm, quality {}, {} samples repaired, valid fraction {:.3}",
        100.0 * m.length,
        m.quality.as_str(),
        m.samples.repaired_count,
        m.samples.valid_fraction
    );
    Ok(())
}
