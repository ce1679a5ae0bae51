//! PCK, OKS and curve mAP on a handful of predictions.

use bezier_trunk::bezier::BezierCurve;
use bezier_trunk::metrics::{curve_map, oks, pck, CurveEvalConfig, GtCurve, ScoredCurve};
use nalgebra::Vector2;

fn main() -> bezier_trunk::error::Result<()> {
    let cfg = CurveEvalConfig::default();
    let trunk = BezierCurve::from_xy(&[[100.0, 400.0], [140.0, 300.0], [120.0, 200.0], [160.0, 120.0], [150.0, 40.0]])?;
    let gt = GtCurve { image_id: "orchard_01".into(), bbox: [90.0, 30.0, 170.0, 410.0], curve: trunk.clone() };

    for shift in [0.0, 5.0, 20.0, 60.0, 120.0] {
        let pred = trunk.translated(Vector2::new(shift, 0.0));
        println!(
            "shift {shift:>4} px: PCK {:.3}  OKS {:.3}",
            pck(&pred, &gt.curve, gt.diagonal(), &cfg)?,
            oks(&pred, &gt.curve, gt.area(), &cfg)?
        );
    }
    println!("reversed curve: PCK {:.3}", pck(&trunk.reversed(), &gt.curve, gt.diagonal(), &cfg)?);

    let other = trunk.translated(Vector2::new(250.0, 10.0));
    let gts = vec![
        gt,
        GtCurve { image_id: "orchard_01".into(), bbox: [340.0, 40.0, 420.0, 420.0], curve: other.clone() },
    ];
    let preds = vec![
        ScoredCurve { image_id: "orchard_01".into(), confidence: 0.95, curve: trunk.translated(Vector2::new(1.0, 1.0)) },
        ScoredCurve { image_id: "orchard_01".into(), confidence: 0.80, curve: trunk.translated(Vector2::new(80.0, 0.0)) },
        ScoredCurve { image_id: "orchard_01".into(), confidence: 0.60, curve: other.translated(Vector2::new(0.0, 6.0)) },
    ];
    let map = curve_map(&preds, &gts, &cfg)?;
    println!("mAP50 {:.3}, mAP50-95 {:.3}", map.map50, map.map50_95);
    for (thr, ap) in &map.per_threshold {
        println!("  AP@{thr:.2} = {ap:.3}");
    }
    Ok(())
}
