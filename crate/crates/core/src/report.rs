//! Error-distribution reports: CSV tables and an SVG figure.
//!
//! [`render_report`] writes into a directory:
//!
//! - `error_stats.csv`: header plus one row `count,mean,std,gaussian_mu,gaussian_sigma`;
//! - `error_cumulative.csv`: `threshold,fraction` rows of the cumulative curve;
//! - `error_histogram.csv`: `bin_low,bin_high,count` rows;
//! - `error_report.svg`: histogram with the fitted Gaussian, next to the cumulative curve.
//!
//! Numbers in the CSV files use Rust's shortest round-trip formatting, so
//! reading them back gives the same `f64` values. Output bytes depend only on
//! the stats.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::ErrorStats;

pub const STATS_FILE: &str = "error_stats.csv";
pub const CUMULATIVE_FILE: &str = "error_cumulative.csv";
pub const HISTOGRAM_FILE: &str = "error_histogram.csv";
pub const PLOT_FILE: &str = "error_report.svg";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub stats: PathBuf,
    pub cumulative: PathBuf,
    pub histogram: PathBuf,
    pub plot: PathBuf,
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::domain(format!("csv encoding: {e}"));
    w.write_record(header).map_err(to_err)?;
    for r in rows {
        w.write_record(r).map_err(to_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::domain(format!("csv encoding: {e}")))
}

pub fn stats_csv(stats: &ErrorStats) -> Result<Vec<u8>> {
    csv_bytes(
        &["count", "mean", "std", "gaussian_mu", "gaussian_sigma"],
        &[vec![
            stats.count.to_string(),
            stats.mean.to_string(),
            stats.std.to_string(),
            stats.gaussian_fit.0.to_string(),
            stats.gaussian_fit.1.to_string(),
        ]],
    )
}

pub fn cumulative_csv(stats: &ErrorStats) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = stats
        .cumulative
        .iter()
        .map(|(t, f)| vec![t.to_string(), f.to_string()])
        .collect();
    csv_bytes(&["threshold", "fraction"], &rows)
}

pub fn histogram_csv(stats: &ErrorStats) -> Result<Vec<u8>> {
    let h = &stats.histogram;
    let rows: Vec<Vec<String>> = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, c)| vec![h.edges[i].to_string(), h.edges[i + 1].to_string(), c.to_string()])
        .collect();
    csv_bytes(&["bin_low", "bin_high", "count"], &rows)
}

const W: f64 = 880.0;
const H: f64 = 360.0;
const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 240.0;
const TOP: f64 = 60.0;

/// Linear map of `v` in `[lo, hi]` to `[a, b]`.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi == lo {
        0.5 * (a + b)
    } else {
        a + (v - lo) / (hi - lo) * (b - a)
    }
}

fn axes(svg: &mut String, x0: f64, title: &str, x_label: &str, y_label: &str) {
    let (y0, y1) = (TOP + PANEL_H, TOP);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{title}</text>"#,
        x0 + PANEL_W / 2.0,
        TOP - 14.0
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{:.1},{y0:.1}" fill="none" stroke="black"/>"#,
        x0 + PANEL_W
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{x_label}</text>"#,
        x0 + PANEL_W / 2.0,
        y0 + 36.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.1} {:.1})">{y_label}</text>"#,
        x0 - 40.0,
        TOP + PANEL_H / 2.0,
        x0 - 40.0,
        TOP + PANEL_H / 2.0
    );
}

fn tick(svg: &mut String, x: f64, y: f64, label: &str, vertical_axis: bool) {
    if vertical_axis {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{label}</text>"#,
            x - 4.0,
            y + 3.0
        );
    } else {
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="10">{label}</text>"#,
            y + 14.0
        );
    }
}

pub fn render_svg(stats: &ErrorStats) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0}" height="{H:.0}" viewBox="0 0 {W:.0} {H:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W:.0}" height="{H:.0}" fill="white"/>"#);

    // histogram panel
    let x0 = 70.0;
    let h = &stats.histogram;
    let lo = h.edges[0];
    let hi = *h.edges.last().unwrap();
    let bin_w = (hi - lo) / h.counts.len() as f64;
    let (mu, sigma) = stats.gaussian_fit;
    let gauss = |x: f64| {
        stats.count as f64 * bin_w * (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp()
            / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let peak_fit = if sigma > 0.0 { gauss(mu) } else { 0.0 };
    let y_max = (*h.counts.iter().max().unwrap_or(&1) as f64).max(peak_fit).max(1.0);
    axes(&mut svg, x0, "Relative error distribution", "relative error", "count");
    for (i, &c) in h.counts.iter().enumerate() {
        let xa = scale(h.edges[i], lo, hi, x0, x0 + PANEL_W);
        let xb = scale(h.edges[i + 1], lo, hi, x0, x0 + PANEL_W);
        let top = scale(c as f64, 0.0, y_max, TOP + PANEL_H, TOP);
        let _ = writeln!(
            svg,
            r##"<rect x="{xa:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#7aa6d6" stroke="#2d5f94"/>"##,
            (xb - xa).max(1.0),
            TOP + PANEL_H - top
        );
    }
    if sigma > 0.0 {
        let mut d = String::new();
        for k in 0..=100 {
            let x = lo + (hi - lo) * k as f64 / 100.0;
            let px = scale(x, lo, hi, x0, x0 + PANEL_W);
            let py = scale(gauss(x), 0.0, y_max, TOP + PANEL_H, TOP);
            let _ = write!(d, "{}{px:.2},{py:.2}", if k == 0 { "M" } else { " L" });
        }
        let _ = writeln!(svg, r##"<path d="{d}" fill="none" stroke="#c0392b" stroke-width="2"/>"##);
    }
    tick(&mut svg, x0, TOP + PANEL_H, &format!("{lo:.3}"), false);
    tick(&mut svg, x0 + PANEL_W, TOP + PANEL_H, &format!("{hi:.3}"), false);
    tick(&mut svg, x0, TOP + PANEL_H, "0", true);
    tick(&mut svg, x0, TOP, &format!("{y_max:.0}"), true);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">n = {}  mean = {:.4}  std = {:.4}</text>"#,
        x0 + PANEL_W - 4.0,
        TOP + 14.0,
        stats.count,
        stats.mean,
        stats.std
    );

    // cumulative panel
    let x0 = 500.0;
    let t_max = stats.cumulative.last().map(|c| c.0).unwrap_or(0.5).max(0.5);
    axes(&mut svg, x0, "Cumulative absolute error", "absolute relative error", "fraction");
    let mut d = format!("M{x0:.2},{:.2}", TOP + PANEL_H);
    for &(t, f) in &stats.cumulative {
        let px = scale(t, 0.0, t_max, x0, x0 + PANEL_W);
        let py = scale(f, 0.0, 1.0, TOP + PANEL_H, TOP);
        let _ = write!(d, " L{px:.2},{py:.2}");
    }
    let _ = writeln!(svg, r##"<path d="{d}" fill="none" stroke="#2d5f94" stroke-width="2"/>"##);
    for &(t, f) in &stats.cumulative {
        let px = scale(t, 0.0, t_max, x0, x0 + PANEL_W);
        let py = scale(f, 0.0, 1.0, TOP + PANEL_H, TOP);
        let _ = writeln!(svg, r##"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="#2d5f94"/>"##);
    }
    tick(&mut svg, x0, TOP + PANEL_H, "0", false);
    tick(&mut svg, x0 + PANEL_W, TOP + PANEL_H, &format!("{t_max:.2}"), false);
    tick(&mut svg, x0, TOP + PANEL_H, "0", true);
    tick(&mut svg, x0, TOP, "1", true);
    svg.push_str("</svg>\n");
    svg
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes the four report files into `dir`, creating it if needed.
pub fn render_report(stats: &ErrorStats, dir: &Path) -> Result<ReportFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = ReportFiles {
        stats: dir.join(STATS_FILE),
        cumulative: dir.join(CUMULATIVE_FILE),
        histogram: dir.join(HISTOGRAM_FILE),
        plot: dir.join(PLOT_FILE),
    };
    write(&files.stats, &stats_csv(stats)?)?;
    write(&files.cumulative, &cumulative_csv(stats)?)?;
    write(&files.histogram, &histogram_csv(stats)?)?;
    write(&files.plot, render_svg(stats).as_bytes())?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::error_stats;

    fn records(path: &Path) -> Vec<Vec<String>> {
        csv::Reader::from_path(path)
            .unwrap()
            .records()
            .map(|r| r.unwrap().iter().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn all_equal_errors_give_one_bin_and_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let stats = error_stats(&[0.12; 4]).unwrap();
        let files = render_report(&stats, dir.path()).unwrap();
        assert_eq!(records(&files.stats).len(), 1);
        assert_eq!(records(&files.histogram).len(), 1);
        let svg = fs::read_to_string(&files.plot).unwrap();
        assert_eq!(svg.matches("<rect x=").count(), 1);
    }

    #[test]
    fn output_is_deterministic() {
        let stats = error_stats(&[-0.2, 0.05, 0.1, 0.31, -0.04, 0.6]).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let fa = render_report(&stats, a.path()).unwrap();
        let fb = render_report(&stats, b.path()).unwrap();
        for (x, y) in [(fa.stats, fb.stats), (fa.cumulative, fb.cumulative), (fa.histogram, fb.histogram), (fa.plot, fb.plot)] {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
    }

    #[test]
    fn table_reads_back_verbatim() {
        let stats = error_stats(&[-0.137, 0.021, 0.29, 0.0833, -0.41]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = render_report(&stats, dir.path()).unwrap();
        let row = &records(&files.stats)[0];
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(v, vec![stats.count as f64, stats.mean, stats.std, stats.gaussian_fit.0, stats.gaussian_fit.1]);
        let cum: Vec<(f64, f64)> = records(&files.cumulative)
            .iter()
            .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
            .collect();
        assert_eq!(cum, stats.cumulative);
    }

    #[test]
    fn unwritable_destination_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let stats = error_stats(&[0.1]).unwrap();
        match render_report(&stats, &blocker.join("sub")) {
            Err(Error::Io { path, .. }) => assert!(path.starts_with(&blocker)),
            other => panic!("expected an I/O error, got {other:?}"),
        }
    }
}
