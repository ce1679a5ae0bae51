//! Quartic Bezier trunk curves: least-squares ground truth, curve losses and
//! descent, depth-based 3D length, curve metrics and the dataset file formats.
//!
//! Each capability has a runnable example:
//!
//! - `bezier_basics`: evaluation, sampling, reversal and translation
//! - `fit_ground_truth`: least-squares curves from keypoints
//! - `loss_terms`: sampling and endpoint losses with their gradients
//! - `optimize_curve`: recovering a hidden curve by gradient descent
//! - `measure_length`: 3D length from depth, with hole repair
//! - `noisy_depth_study`: error statistics over synthetic scenes
//! - `curve_metrics`: PCK, OKS and curve mAP
//! - `file_formats`: JSON Lines, intrinsics and depth files
//!
//! Run one with `cargo run --release --example measure_length`.

pub mod bezier;
pub mod camera;
pub mod cli;
pub mod depth;
pub mod error;
pub mod fit;
pub mod formats;
pub mod loss;
pub mod measure;
pub mod metrics;
pub mod optim;
pub mod report;
pub mod synth;
