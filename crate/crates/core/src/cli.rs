//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on parse or validation errors (including bad
//! arguments), 2 when at least one measurement was rejected.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bezier::{BezierCurve, ParamSet};
use crate::depth::SampleMode;
use crate::error::{Error, FormatCategory, FormatError, Location, Result};
use crate::fit::{fit_curve, Parameterization};
use crate::formats::{
    parse_annotations, parse_depth, parse_fitted, parse_intrinsics, parse_predictions,
    write_annotations, write_fitted, write_predictions, FittedRecord, PredictionRecord,
};
use crate::loss::{combined_loss, endpoint_loss, sampling_loss, LossWeights, WingParams};
use crate::measure::{measure, MeasureConfig, RepairConfig};
use crate::metrics::{
    curve_map, error_stats, pck, rel_errors, CurveEvalConfig, GtCurve, ScoredCurve,
};
use crate::optim::{fit_to_polyline, fit_to_target, OptimConfig, OptimTrace};
use crate::report::render_report;
use crate::synth::{gen_scene, perturb_depth, write_scene, NoiseConfig, SceneConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_REJECTED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "bezier-trunk", version, about = "Bezier trunk fitting, curve losses and depth-based length measurement")]
pub struct Cli {
    /// Output style for result tables.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Uniform,
    #[value(alias = "chord-length")]
    Chord,
}

impl From<ParamArg> for Parameterization {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::Uniform => Parameterization::Uniform,
            ParamArg::Chord => Parameterization::ChordLength,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Bilinear,
    Nearest,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Least-squares ground-truth curves from keypoint annotations.
    ///
    /// Reads annotation JSON Lines and writes one fitted record per annotation.
    FitGt {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = ParamArg::Uniform)]
        param: ParamArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sampling, endpoint and combined losses of predictions against fitted ground truth.
    ///
    /// Predictions and ground-truth records are paired by image id, in file order
    /// within an image.
    Loss {
        #[arg(long)]
        pred: PathBuf,
        /// Fitted records, as written by `fit-gt`.
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 10.0)]
        w: f64,
        #[arg(long, default_value_t = 2.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda_tsl: f64,
        #[arg(long, default_value_t = 0.1)]
        lambda_epl: f64,
    },
    /// Fits curves to targets by momentum gradient descent on the curve losses.
    ///
    /// Targets are fitted records; with `--from-annotations` they are keypoint
    /// annotations, fitted by least squares first and then refined.
    Optimize {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        /// Step size in pixels per unit gradient.
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long, default_value_t = 0.9)]
        momentum: f64,
        #[arg(long, default_value_t = 0.1)]
        lambda_epl: f64,
        #[arg(long)]
        from_annotations: bool,
        /// Degree used with `--from-annotations`.
        #[arg(long, default_value_t = 4)]
        degree: usize,
        /// Write the fitted curves as prediction records.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write `image_id,iteration,loss` rows of every loss history.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// 3D trunk length of each predicted curve over one depth map, in centimeters.
    ///
    /// Exits with 2 if any measurement is rejected.
    Measure {
        #[arg(long)]
        pred: PathBuf,
        /// PFM or raw float32 depth in meters.
        #[arg(long)]
        depth: PathBuf,
        #[arg(long)]
        intrinsics: PathBuf,
        /// Number of segments M along the curve.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        no_repair: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::Bilinear)]
        mode: ModeArg,
        /// True length in meters; adds relative-error columns.
        #[arg(long)]
        truth: Option<f64>,
    },
    /// Generates seeded synthetic scenes with known trunk lengths.
    ///
    /// Writes per scene `scene_NNNN.depth.pfm`, `.intrinsics.txt` and `.pred.jsonl`,
    /// plus `annotations.jsonl` and `oracle.csv` for the batch.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0.02)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 0.05)]
        dropout: f64,
        /// Drop pixels in contiguous blobs.
        #[arg(long)]
        blob: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// PCK and OKS-based mAP of predicted curves against fitted ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        /// Fitted records, as written by `fit-gt`.
        #[arg(long)]
        gt: PathBuf,
        /// Fraction of the ground-truth box diagonal.
        #[arg(long, default_value_t = 0.2)]
        pck_threshold: f64,
        #[arg(long, default_value_t = 0.05)]
        oks_sigma: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Error statistics, cumulative curve and plots from a list of relative errors.
    ///
    /// The errors file is CSV: either a header with a `rel_error` column, or
    /// one number per line. `#` starts a comment line.
    Report {
        #[arg(long)]
        errors: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Rows of text cells with a header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, out: &mut dyn Write, format: OutputFormat) -> Result<()> {
        let io = |e| Error::io("<stdout>", e);
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let enc = |e: csv::Error| Error::domain(format!("csv encoding: {e}"));
                w.write_record(&self.header).map_err(enc)?;
                for r in &self.rows {
                    w.write_record(r).map_err(enc)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::domain(e.to_string()))?;
                out.write_all(&bytes).map_err(io)
            }
            OutputFormat::Table => {
                let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
                for r in &self.rows {
                    for (w, c) in widths.iter_mut().zip(r) {
                        *w = (*w).max(c.chars().count());
                    }
                }
                let line = |cells: &[String]| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                        .trim_end()
                        .to_string()
                };
                writeln!(out, "{}", line(&self.header)).map_err(io)?;
                for r in &self.rows {
                    writeln!(out, "{}", line(r)).map_err(io)?;
                }
                Ok(())
            }
        }
    }
}

/// What a command produced: tables to print and whether anything was rejected.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Free-text lines printed before the tables in table mode (settings, totals).
    pub notes: Vec<String>,
    pub rejected: bool,
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

fn validation(path: &Path, message: String) -> Error {
    FormatError {
        path: path.display().to_string(),
        location: Location::EndOfFile,
        category: FormatCategory::Validation,
        message,
    }
    .into()
}

/// Pairs records by image id, k-th with k-th inside each image.
fn pair_by_image<'a, A, B>(
    a: &'a [A],
    b: &'a [B],
    id_a: impl Fn(&A) -> &str,
    id_b: impl Fn(&B) -> &str,
) -> std::result::Result<Vec<(&'a A, &'a B)>, String> {
    let mut pool: HashMap<&str, std::collections::VecDeque<&B>> = HashMap::new();
    for x in b {
        pool.entry(id_b(x)).or_default().push_back(x);
    }
    let mut pairs = Vec::new();
    for x in a {
        match pool.get_mut(id_a(x)).and_then(|q| q.pop_front()) {
            Some(y) => pairs.push((x, y)),
            None => return Err(format!("no ground truth left for image {:?}", id_a(x))),
        }
    }
    if let Some((id, _)) = pool.iter().find(|(_, q)| !q.is_empty()) {
        return Err(format!("ground truth for image {id:?} has no prediction"));
    }
    Ok(pairs)
}

fn fit_gt(annotations: &Path, degree: usize, param: ParamArg, out: &Path) -> Result<Outcome> {
    let records = parse_annotations(annotations)?;
    let mut fitted = Vec::with_capacity(records.len());
    let mut table = Table::new(&["image_id", "points", "degree", "residual_rms"]);
    for r in &records {
        let fit = fit_curve(&r.polyline()?, degree, param.into())?;
        table.push(vec![
            r.image_id.clone(),
            r.keypoints.len().to_string(),
            degree.to_string(),
            format!("{:.3e}", fit.residual_rms),
        ]);
        fitted.push(FittedRecord::from_fit(r, &fit));
    }
    write_fitted(&fitted, out)?;
    Ok(Outcome {
        notes: vec![format!("wrote {} fitted records to {}", fitted.len(), out.display())],
        tables: vec![table],
        rejected: false,
    })
}

#[allow(clippy::too_many_arguments)]
fn loss(
    pred: &Path,
    gt: &Path,
    samples: usize,
    w: f64,
    eps: f64,
    lambda_tsl: f64,
    lambda_epl: f64,
) -> Result<Outcome> {
    let params = ParamSet::uniform(samples)?;
    let wing = WingParams::new(w, eps)?;
    let weights = LossWeights::new(0.0, lambda_tsl, lambda_epl)?;
    let preds = parse_predictions(pred)?;
    let gts = parse_fitted(gt)?;
    let pairs = pair_by_image(&preds, &gts, |p| &p.image_id, |g| &g.image_id)
        .map_err(|m| validation(gt, m))?;
    let mut table = Table::new(&["image_id", "det", "tsl", "epl", "total"]);
    let mut sums = [0.0; 4];
    for (p, g) in &pairs {
        let (pc, gc) = (p.curve()?, g.curve()?);
        let tsl = sampling_loss(&pc, &gc, &params);
        let epl = endpoint_loss(&pc, &gc, &wing);
        let b = combined_loss(0.0, tsl, epl, &weights)?;
        for (s, v) in sums.iter_mut().zip([b.det, b.tsl, b.epl, b.total]) {
            *s += v;
        }
        table.push(vec![p.image_id.clone(), fmt(b.det), fmt(b.tsl), fmt(b.epl), fmt(b.total)]);
    }
    if !pairs.is_empty() {
        let n = pairs.len() as f64;
        table.push(
            std::iter::once("mean".to_string())
                .chain(sums.iter().map(|s| fmt(s / n)))
                .collect(),
        );
    }
    Ok(Outcome {
        notes: vec![format!(
            "samples = {samples}, w = {w}, eps = {eps}, lambda_tsl = {lambda_tsl}, lambda_epl = {lambda_epl}; det is 0 (no detector)"
        )],
        tables: vec![table],
        rejected: false,
    })
}

fn trace_rows(id: &str, trace: &OptimTrace, rows: &mut Vec<Vec<String>>) {
    for (i, l) in trace.loss_history.iter().enumerate() {
        rows.push(vec![id.to_string(), i.to_string(), l.to_string()]);
    }
}

#[allow(clippy::too_many_arguments)]
fn optimize(
    target: &Path,
    config: OptimConfig,
    from_annotations: bool,
    degree: usize,
    out: Option<&Path>,
    trace_path: Option<&Path>,
) -> Result<Outcome> {
    config.validate()?;
    let mut table = Table::new(&[
        "image_id", "iterations", "converged", "tsl", "epl", "total", "control_points",
    ]);
    let mut fitted: Vec<PredictionRecord> = Vec::new();
    let mut trace_table = Table::new(&["image_id", "iteration", "loss"]);
    let mut emit = |id: &str, bbox: [f64; 4], curve: &BezierCurve, trace: &OptimTrace| {
        let points = curve
            .to_xy()
            .iter()
            .map(|p| format!("({:.3} {:.3})", p[0], p[1]))
            .collect::<Vec<_>>()
            .join(" ");
        table.push(vec![
            id.to_string(),
            trace.iterations.to_string(),
            trace.converged.to_string(),
            fmt(trace.final_loss.tsl),
            fmt(trace.final_loss.epl),
            fmt(trace.final_loss.total),
            points,
        ]);
        trace_rows(id, trace, &mut trace_table.rows);
        fitted.push(PredictionRecord {
            image_id: id.to_string(),
            confidence: 1.0,
            bbox,
            control_points: curve.to_xy(),
        });
    };
    if from_annotations {
        for r in parse_annotations(target)? {
            let fit = fit_to_polyline(&r.polyline()?, degree, &config)?;
            emit(&r.image_id, r.bbox, &fit.curve, &fit.trace);
        }
    } else {
        for r in parse_fitted(target)? {
            let (curve, trace) = fit_to_target(&r.curve()?, None, &config)?;
            emit(&r.image_id, r.bbox, &curve, &trace);
        }
    }
    let mut notes = Vec::new();
    if let Some(path) = out {
        // predictions carry exactly five control points
        if fitted.iter().any(|p| p.control_points.len() != 5) {
            return Err(Error::domain("--out writes prediction records, which need degree-4 curves"));
        }
        write_predictions(&fitted, path)?;
        notes.push(format!("wrote {} curves to {}", fitted.len(), path.display()));
    }
    if let Some(path) = trace_path {
        let mut buf = Vec::new();
        trace_table.write(&mut buf, OutputFormat::Csv)?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))?;
        notes.push(format!("wrote loss histories to {}", path.display()));
    }
    Ok(Outcome {
        notes,
        tables: vec![table],
        rejected: false,
    })
}

#[allow(clippy::too_many_arguments)]
fn measure_cmd(
    pred: &Path,
    depth: &Path,
    intrinsics: &Path,
    samples: usize,
    no_repair: bool,
    mode: ModeArg,
    truth: Option<f64>,
) -> Result<Outcome> {
    let preds = parse_predictions(pred)?;
    let map = parse_depth(depth)?;
    let k = parse_intrinsics(intrinsics)?;
    if (map.width(), map.height()) != (k.width, k.height) {
        return Err(validation(
            depth,
            format!(
                "depth map is {}×{} but intrinsics describe {}×{}",
                map.width(),
                map.height(),
                k.width,
                k.height
            ),
        ));
    }
    if let Some(t) = truth {
        rel_errors(t, t)?;
    }
    let config = MeasureConfig {
        segments: samples,
        mode: match mode {
            ModeArg::Bilinear => SampleMode::BilinearValid,
            ModeArg::Nearest => SampleMode::Nearest,
        },
        repair: if no_repair {
            RepairConfig::disabled()
        } else {
            RepairConfig::default()
        },
    };
    let mut header = vec!["image_id", "length_cm", "quality", "valid_fraction", "repaired", "note"];
    if truth.is_some() {
        header.extend(["rel_error", "abs_rel_error"]);
    }
    let mut table = Table::new(&header);
    let mut rejected = false;
    for p in &preds {
        let row = match measure(&p.curve()?, &map, &k, &config) {
            Ok(r) => {
                let mut row = vec![
                    p.image_id.clone(),
                    format!("{:.2}", r.length * 100.0),
                    r.quality.as_str().to_string(),
                    format!("{:.3}", r.samples.valid_fraction),
                    r.samples.repaired_count.to_string(),
                    String::new(),
                ];
                if let Some(t) = truth {
                    let (e, a) = rel_errors(r.length, t)?;
                    row.extend([e.to_string(), a.to_string()]);
                }
                row
            }
            Err(Error::MeasurementRejected { reason, valid_fraction }) => {
                rejected = true;
                let mut row = vec![
                    p.image_id.clone(),
                    String::new(),
                    "rejected".to_string(),
                    format!("{valid_fraction:.3}"),
                    String::new(),
                    reason,
                ];
                if truth.is_some() {
                    row.extend([String::new(), String::new()]);
                }
                row
            }
            Err(e) => return Err(e),
        };
        table.push(row);
    }
    Ok(Outcome {
        notes: vec![format!(
            "M = {samples}, repair {}",
            if no_repair { "off" } else { "on" }
        )],
        tables: vec![table],
        rejected,
    })
}

fn synth(seed: u64, count: usize, sigma: f64, dropout: f64, blob: bool, out_dir: &Path) -> Result<Outcome> {
    let noise = NoiseConfig {
        gaussian_sigma_rel: sigma,
        dropout_fraction: dropout,
        blob_dropout: blob,
        ..NoiseConfig::default()
    };
    noise.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let config = SceneConfig::default();
    let mut annotations = Vec::with_capacity(count);
    let mut table = Table::new(&["image_id", "seed", "oracle_length_m"]);
    for i in 0..count {
        let scene_seed = seed.wrapping_add(i as u64);
        let scene = gen_scene(scene_seed, &config)?;
        let depth = perturb_depth(
            &scene.depth,
            &NoiseConfig {
                // keep noise draws independent of the scene draws
                seed: scene_seed ^ 0x9e37_79b9_7f4a_7c15,
                ..noise
            },
        )?;
        let stem = format!("scene_{i:04}");
        write_scene(&scene, &depth, out_dir, &stem)?;
        annotations.push(scene.annotation(&stem));
        table.push(vec![stem, scene_seed.to_string(), scene.oracle_length.to_string()]);
    }
    write_annotations(&annotations, &out_dir.join("annotations.jsonl"))?;
    let mut buf = Vec::new();
    table.write(&mut buf, OutputFormat::Csv)?;
    let oracle = out_dir.join("oracle.csv");
    fs::write(&oracle, buf).map_err(|e| Error::io(&oracle, e))?;
    Ok(Outcome {
        notes: vec![format!("wrote {count} scenes to {}", out_dir.display())],
        tables: vec![table],
        rejected: false,
    })
}

fn eval(pred: &Path, gt: &Path, config: CurveEvalConfig) -> Result<Outcome> {
    config.validate()?;
    let preds = parse_predictions(pred)?;
    let gts = parse_fitted(gt)?;
    let scored: Vec<ScoredCurve> = preds
        .iter()
        .map(|p| {
            Ok(ScoredCurve {
                image_id: p.image_id.clone(),
                confidence: p.confidence,
                curve: p.curve()?,
            })
        })
        .collect::<Result<_>>()?;
    let gt_curves: Vec<GtCurve> = gts
        .iter()
        .map(|g| {
            Ok(GtCurve {
                image_id: g.image_id.clone(),
                bbox: g.bbox,
                curve: g.curve()?,
            })
        })
        .collect::<Result<_>>()?;
    let map = curve_map(&scored, &gt_curves, &config)?;

    // PCK per ground truth, against its best-OKS prediction in the same image
    let mut pck_table = Table::new(&["image_id", "pck", "oks"]);
    let mut pck_sum = 0.0;
    for g in &gt_curves {
        let mut best: Option<(f64, &ScoredCurve)> = None;
        for p in scored.iter().filter(|p| p.image_id == g.image_id) {
            let s = crate::metrics::oks(&p.curve, &g.curve, g.area(), &config)?;
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, p));
            }
        }
        let (o, v) = match best {
            Some((o, p)) => (o, pck(&p.curve, &g.curve, g.diagonal(), &config)?),
            None => (0.0, 0.0),
        };
        pck_sum += v;
        pck_table.push(vec![g.image_id.clone(), fmt(v), fmt(o)]);
    }
    let mut summary = Table::new(&["metric", "value"]);
    summary.push(vec!["mAP50".into(), fmt(map.map50)]);
    summary.push(vec!["mAP50-95".into(), fmt(map.map50_95)]);
    summary.push(vec!["mean_PCK".into(), fmt(pck_sum / gt_curves.len() as f64)]);
    Ok(Outcome {
        notes: vec![format!(
            "samples = {}, PCK threshold = {} x bbox diagonal, OKS sigma = {}, orientation-invariant",
            config.sample_count, config.pck_threshold, config.oks_sigma
        )],
        tables: vec![summary, pck_table],
        rejected: false,
    })
}

/// Reads relative errors: a `rel_error` column under a header, or bare numbers.
pub fn read_errors(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let located = |line: usize, message: String| -> Error {
        FormatError {
            path: path.display().to_string(),
            location: Location::Line(line),
            category: FormatCategory::Parse,
            message,
        }
        .into()
    };
    let mut column: Option<usize> = None;
    let mut header_seen = false;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if !header_seen && cells.iter().any(|c| c.parse::<f64>().is_err()) {
            header_seen = true;
            column = Some(
                cells
                    .iter()
                    .position(|c| *c == "rel_error")
                    .ok_or_else(|| located(line_no, "header has no rel_error column".into()))?,
            );
            continue;
        }
        header_seen = true;
        let cell = match column {
            Some(c) => cells
                .get(c)
                .copied()
                .ok_or_else(|| located(line_no, format!("row has no column {}", c + 1)))?,
            None if cells.len() == 1 => cells[0],
            None => return Err(located(line_no, "expected one number per line".into())),
        };
        if cell.is_empty() {
            // rejected measurements have no error
            continue;
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| located(line_no, format!("{cell:?} is not a number")))?;
        if !v.is_finite() {
            return Err(located(line_no, format!("{cell:?} is not finite")));
        }
        out.push(v);
    }
    Ok(out)
}

fn report(errors: &Path, out: &Path) -> Result<Outcome> {
    let values = read_errors(errors)?;
    if values.is_empty() {
        return Err(validation(errors, "no error values".into()));
    }
    let stats = error_stats(&values)?;
    let files = render_report(&stats, out)?;
    let mut summary = Table::new(&["count", "mean", "std", "gaussian_mu", "gaussian_sigma"]);
    summary.push(vec![
        stats.count.to_string(),
        fmt(stats.mean),
        fmt(stats.std),
        fmt(stats.gaussian_fit.0),
        fmt(stats.gaussian_fit.1),
    ]);
    let mut cumulative = Table::new(&["abs_threshold", "fraction"]);
    for (t, f) in &stats.cumulative {
        cumulative.push(vec![format!("{t:.3}"), format!("{f:.4}")]);
    }
    Ok(Outcome {
        notes: vec![format!(
            "wrote {}, {}, {} and {}",
            files.stats.display(),
            files.cumulative.display(),
            files.histogram.display(),
            files.plot.display()
        )],
        tables: vec![summary, cumulative],
        rejected: false,
    })
}

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::FitGt {
            annotations,
            degree,
            param,
            out,
        } => fit_gt(annotations, *degree, *param, out),
        Command::Loss {
            pred,
            gt,
            samples,
            w,
            eps,
            lambda_tsl,
            lambda_epl,
        } => loss(pred, gt, *samples, *w, *eps, *lambda_tsl, *lambda_epl),
        Command::Optimize {
            target,
            max_iters,
            step,
            momentum,
            lambda_epl,
            from_annotations,
            degree,
            out,
            trace,
        } => {
            let defaults = OptimConfig::default();
            let config = OptimConfig {
                max_iters: *max_iters,
                step_size: *step,
                momentum: *momentum,
                weights: LossWeights {
                    lambda_epl: *lambda_epl,
                    ..defaults.weights
                },
                ..defaults
            };
            optimize(target, config, *from_annotations, *degree, out.as_deref(), trace.as_deref())
        }
        Command::Measure {
            pred,
            depth,
            intrinsics,
            samples,
            no_repair,
            mode,
            truth,
        } => measure_cmd(pred, depth, intrinsics, *samples, *no_repair, *mode, *truth),
        Command::Synth {
            seed,
            count,
            noise_sigma,
            dropout,
            blob,
            out_dir,
        } => synth(*seed, *count, *noise_sigma, *dropout, *blob, out_dir),
        Command::Eval {
            pred,
            gt,
            pck_threshold,
            oks_sigma,
            samples,
        } => eval(
            pred,
            gt,
            CurveEvalConfig {
                sample_count: *samples,
                pck_threshold: *pck_threshold,
                oks_sigma: *oks_sigma,
                ..CurveEvalConfig::default()
            },
        ),
        Command::Report { errors, out } => report(errors, out),
    }
}

/// Runs a parsed command line, printing to `out` and errors to `err`. Returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match execute(&cli.command) {
        Ok(outcome) => {
            let printed = (|| -> Result<()> {
                if cli.format == OutputFormat::Table {
                    for n in &outcome.notes {
                        writeln!(out, "# {n}").map_err(|e| Error::io("<stdout>", e))?;
                    }
                }
                for (i, t) in outcome.tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(out).map_err(|e| Error::io("<stdout>", e))?;
                    }
                    t.write(out, cli.format)?;
                }
                Ok(())
            })();
            if let Err(e) = printed {
                let _ = writeln!(err, "error: {e}");
                return EXIT_INVALID;
            }
            if outcome.rejected {
                let _ = writeln!(err, "error: at least one measurement was rejected");
                EXIT_REJECTED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::MeasurementRejected { .. } => EXIT_REJECTED,
                _ => EXIT_INVALID,
            }
        }
    }
}

/// Entry point for the binary: parses `std::env::args` and runs.
pub fn main() -> std::process::ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            return std::process::ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run(&cli, &mut stdout.lock(), &mut stderr.lock());
    std::process::ExitCode::from(code)
}
