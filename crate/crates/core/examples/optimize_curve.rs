//! Recovering a hidden curve by gradient descent on the curve losses.

use bezier_trunk::bezier::BezierCurve;
use bezier_trunk::fit::AnnotationPolyline;
use bezier_trunk::loss::sampling_loss;
use bezier_trunk::optim::{fit_to_polyline, fit_to_target, OptimConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> bezier_trunk::error::Result<()> {
    let config = OptimConfig::default();
    let hidden = BezierCurve::from_xy(&[[40.0, 470.0], [300.0, 380.0], [80.0, 250.0], [420.0, 160.0], [260.0, 30.0]])?;

    let (curve, trace) = fit_to_target(&hidden, None, &config)?;
    let end_err = (curve.start() - hidden.start()).norm().max((curve.end() - hidden.end()).norm());
    println!(
        "from a straight start: {} iterations, converged {}, sampling loss {:.4} px, endpoint error {:.4} px",
        trace.iterations,
        trace.converged,
        sampling_loss(&curve, &hidden, &config.sampling),
        end_err
    );
    let every = trace.loss_history.len() / 8;
    for (i, l) in trace.loss_history.iter().enumerate().step_by(every.max(1)) {
        println!("  iter {i:>5}: loss {l:.4}");
    }

    // Noisy annotation: least squares first, then refinement under the losses.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let points = (0..50)
        .map(|i| {
            let p = hidden.evaluate(i as f64 / 49.0).unwrap();
            p + nalgebra::Vector2::new(noise.sample(&mut rng), noise.sample(&mut rng))
        })
        .collect();
    let fit = fit_to_polyline(&AnnotationPolyline::new(points)?, 4, &config)?;
    println!(
        "noisy polyline: least-squares residual {:.3} px, refined vs least squares {:.3} px, endpoint error {:.3} px",
        fit.least_squares.residual_rms,
        fit.loss_vs_least_squares,
        (fit.curve.start() - hidden.start()).norm().max((fit.curve.end() - hidden.end()).norm())
    );
    Ok(())
}
