//! Length error statistics over seeded synthetic scenes with noisy depth.
//!
//! Writes the error report to a temporary directory and prints its location.

use bezier_trunk::measure::{measure, MeasureConfig, Quality};
use bezier_trunk::metrics::error_stats;
use bezier_trunk::report::render_report;
use bezier_trunk::synth::{gen_scene, perturb_depth, NoiseConfig, SceneConfig};

fn main() -> bezier_trunk::error::Result<()> {
    let scenes = SceneConfig::default();
    let mut errors = Vec::new();
    let mut rejected = 0;
    for seed in 0..60u64 {
        let scene = gen_scene(seed, &scenes)?;
        let noise = NoiseConfig { seed, ..NoiseConfig::default() };
        let depth = perturb_depth(&scene.depth, &noise)?;
        match measure(&scene.curve2d, &depth, &scene.intrinsics, &MeasureConfig::default()) {
            Ok(m) if m.quality != Quality::Rejected => errors.push((m.length - scene.oracle_length) / scene.oracle_length),
            _ => rejected += 1,
        }
    }
    let stats = error_stats(&errors)?;
    println!("{} scenes measured, {rejected} rejected", stats.count);
    println!("mean error {:+.4}, std {:.4}", stats.mean, stats.std);
    for (threshold, share) in stats.cumulative.iter().take(6) {
        println!("  |e| <= {threshold:.2}: {:5.1}%", 100.0 * share);
    }
    let dir = std::env::temp_dir().join("bezier_trunk_noisy_depth_study");
    let files = render_report(&stats, &dir)?;
    println!("report written to {}", files.plot.display());
    Ok(())
}
