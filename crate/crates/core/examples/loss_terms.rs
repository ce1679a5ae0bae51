//! The sampling and endpoint losses, and their gradients.

use bezier_trunk::bezier::{BezierCurve, ParamSet};
use bezier_trunk::loss::{
    combined_loss, endpoint_loss, endpoint_loss_grad, sampling_loss, sampling_loss_grad, wing, LossWeights, WingParams,
};
use nalgebra::Vector2;

fn main() -> bezier_trunk::error::Result<()> {
    let gt = BezierCurve::from_xy(&[[100.0, 400.0], [140.0, 300.0], [120.0, 200.0], [160.0, 120.0], [150.0, 40.0]])?;
    let params = ParamSet::uniform(50)?;
    let wing_params = WingParams::default();

    // A pure translation by (dx, dy) costs |dx| + |dy| per sample.
    let shifted = gt.translated(Vector2::new(3.0, -4.0));
    println!("shift (3, -4): sampling loss {:.6}", sampling_loss(&shifted, &gt, &params));

    let mut pts = gt.control_points().to_vec();
    pts[2].x += 25.0;
    pts[4].y -= 6.0;
    let bent = BezierCurve::new(pts)?;
    let tsl = sampling_loss(&bent, &gt, &params);
    let epl = endpoint_loss(&bent, &gt, &wing_params);
    let total = combined_loss(0.0, tsl, epl, &LossWeights::default())?;
    println!("bent: sampling {tsl:.4}, endpoint {epl:.4}, weighted total {:.4}", total.total);

    for (i, (g_s, g_e)) in sampling_loss_grad(&bent, &gt, &params)
        .iter()
        .zip(endpoint_loss_grad(&bent, &gt, &wing_params))
        .enumerate()
    {
        println!("  P{i}: d sampling = ({:+.4}, {:+.4})   d endpoint = ({:+.4}, {:+.4})", g_s.x, g_s.y, g_e.x, g_e.y);
    }

    println!("wing curve (w = {}, eps = {}):", wing_params.w(), wing_params.epsilon());
    for x in [0.0, 1.0, 2.0, 5.0, 10.0, 15.0, 30.0] {
        println!("  wing({x:>4}) = {:.4}", wing(x, &wing_params));
    }
    Ok(())
}
