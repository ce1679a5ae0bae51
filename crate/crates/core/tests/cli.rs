use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_bezier-trunk");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn synth(dir: &Path, seed: &str, count: &str, extra: &[&str]) {
    let mut args = vec!["synth", "--seed", seed, "--count", count, "--out-dir"];
    let out = dir.display().to_string();
    args.push(&out);
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "synth failed: {}", String::from_utf8_lossy(&o.stderr));
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn synth_fit_eval_loss_pipeline() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "3", "3", &[]);
    let o = run(&["fit-gt", "--annotations", &p(d, "annotations.jsonl"), "--out", &p(d, "gt.jsonl")]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(d.join("gt.jsonl")).unwrap().lines().count(), 3);

    // every scene's prediction is its own curve, so it matches its own gt exactly
    let preds: String = (0..3)
        .map(|i| fs::read_to_string(d.join(format!("scene_{i:04}.pred.jsonl"))).unwrap())
        .collect();
    fs::write(d.join("all.pred.jsonl"), preds).unwrap();

    let o = run(&["--format", "csv", "eval", "--pred", &p(d, "all.pred.jsonl"), "--gt", &p(d, "gt.jsonl")]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["metric", "value"]);
    for row in &rows[1..4] {
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0, "{row:?}");
    }

    let o = run(&["--format", "csv", "loss", "--pred", &p(d, "all.pred.jsonl"), "--gt", &p(d, "gt.jsonl")]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let total = rows[0].iter().position(|h| h == "total").expect("total column");
    for row in &rows[1..] {
        assert!(row[total].parse::<f64>().unwrap() < 1e-6, "{row:?}");
    }
}

#[test]
fn measure_and_report_against_oracle() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "11", "4", &["--noise-sigma", "0", "--dropout", "0"]);
    let oracle = fs::read_to_string(d.join("oracle.csv")).unwrap();
    let mut errors = String::from("image_id,rel_error\n");
    for row in csv_rows(&oracle).into_iter().skip(1) {
        let truth = &row[2];
        let o = run(&[
            "--format",
            "csv",
            "measure",
            "--pred",
            &p(d, &format!("{}.pred.jsonl", row[0])),
            "--depth",
            &p(d, &format!("{}.depth.pfm", row[0])),
            "--intrinsics",
            &p(d, &format!("{}.intrinsics.txt", row[0])),
            "--truth",
            truth,
        ]);
        assert_eq!(o.status.code(), Some(0));
        let rows = csv_rows(&stdout(&o));
        let col = rows[0].iter().position(|h| h == "rel_error").expect("rel_error column");
        let e: f64 = rows[1][col].parse().unwrap();
        assert!(e.abs() < 0.01, "{}: relative error {e}", row[0]);
        errors.push_str(&format!("{},{}\n", row[0], e));
    }
    fs::write(d.join("errors.csv"), errors).unwrap();
    let o = run(&["report", "--errors", &p(d, "errors.csv"), "--out", &p(d, "report")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["error_stats.csv", "error_report.svg"] {
        assert!(d.join("report").join(f).is_file(), "{f} missing");
    }
}

#[test]
fn mostly_invalid_depth_is_rejected_with_exit_2() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "5", "1", &["--noise-sigma", "0", "--dropout", "0.95"]);
    let o = run(&[
        "measure",
        "--pred",
        &p(d, "scene_0000.pred.jsonl"),
        "--depth",
        &p(d, "scene_0000.depth.pfm"),
        "--intrinsics",
        &p(d, "scene_0000.intrinsics.txt"),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("rejected"));
}

#[test]
fn malformed_input_exits_1_with_location() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/malformed");
    let dir = TempDir::new().unwrap();
    let ann = fixtures.join("annotations_bbox_x1_gt_x2_line3.jsonl");
    let o = run(&["fit-gt", "--annotations", &ann.display().to_string(), "--out", &p(dir.path(), "gt.jsonl")]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert!(!dir.path().join("gt.jsonl").exists());

    let o = run(&["fit-gt", "--annotations", "/nonexistent/a.jsonl", "--out", &p(dir.path(), "gt.jsonl")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(&["measure", "--samples", "many"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn synth_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    synth(a.path(), "42", "2", &["--blob"]);
    synth(b.path(), "42", "2", &["--blob"]);
    for name in ["scene_0001.depth.pfm", "scene_0001.pred.jsonl", "annotations.jsonl", "oracle.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn optimize_writes_predictions_and_trace() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "9", "2", &[]);
    let o = run(&[
        "optimize",
        "--target",
        &p(d, "annotations.jsonl"),
        "--from-annotations",
        "--max-iters",
        "300",
        "--out",
        &p(d, "opt.jsonl"),
        "--trace",
        &p(d, "trace.csv"),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fitted = fs::read_to_string(d.join("opt.jsonl")).unwrap();
    assert_eq!(fitted.lines().count(), 2);
    let trace = fs::read_to_string(d.join("trace.csv")).unwrap();
    assert!(trace.starts_with("image_id,iteration,loss"));
    assert!(trace.lines().count() > 2);
}
