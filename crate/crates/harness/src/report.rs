//! results.csv, study.json and log-log SVG plots.

use crate::checks::CheckSummary;
use crate::config::StudyConfig;
use crate::fit::{fit_rate, RateFit};
use crate::study::{Status, StudyRecord};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFit {
    pub mode: usize,
    pub fit: RateFit,
}

/// Everything a study produces; `report` re-renders from this alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOutput {
    pub config: StudyConfig,
    pub records: Vec<StudyRecord>,
    pub fits: Vec<ModeFit>,
    pub checks: Vec<CheckSummary>,
}

impl StudyOutput {
    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|e| ReportError::Parse {
            path: path.into(),
            msg: e.to_string(),
        })
    }
}

pub const CSV_HEADER: &str =
    "N,eps,eta,mu,A,sigma,mode,lambda_eps,base,prediction,raw_err,norm_remainder,residual,status";

fn e(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn results_csv(records: &[StudyRecord], modes: usize) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        if r.status == Status::Failed {
            for k in 1..=modes {
                let _ = writeln!(s, "{},,,,,,{k},,,,,,,failed", r.n);
            }
            continue;
        }
        for m in &r.modes {
            let status = if m.flagged { Status::Flagged } else { Status::Ok };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                e(r.epsilon),
                e(r.eta),
                e(r.mu),
                e(r.robin_a),
                e(r.sigma),
                m.mode,
                e(m.lambda_eps),
                e(m.base),
                e(m.prediction),
                e(m.raw_err),
                e(m.norm_remainder),
                e(m.residual),
                status.as_str()
            );
        }
    }
    s
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

/// Log-log scatter with connecting lines; one series per mode.
fn loglog_svg(title: &str, ylabel: &str, series: &[Series]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 80.0;
    const R: f64 = 200.0;
    const T: f64 = 40.0;
    const B: f64 = 60.0;
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0 > 0.0 && p.1 > 0.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{title}</text>"#, (L + W - R) / 2.0);
    if !x0.is_finite() {
        let _ = writeln!(svg, r#"<text x="{L}" y="{}">no positive data</text>"#, H / 2.0);
        svg.push_str("</svg>\n");
        return svg;
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| L + (x.log10() - x0) / (x1 - x0) * (W - L - R);
    let py = |y: f64| H - B - (y.log10() - y0) / (y1 - y0) * (H - T - B);
    let _ = writeln!(
        svg,
        r#"<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - L - R,
        H - T - B
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = px(10f64.powi(d));
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, H - B, H - B + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{d}</text>"#, H - B + 18.0);
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = py(10f64.powi(d));
        let _ = writeln!(svg, r#"<line x1="{}" y1="{y:.2}" x2="{L}" y2="{y:.2}" stroke="black"/>"#, L - 5.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, L - 8.0, y + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">eps</text>"#, (L + W - R) / 2.0, H - 15.0);
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{ylabel}</text>"#,
        (T + H - B) / 2.0
    );
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    for (i, s) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let good: Vec<(f64, f64)> = s.points.iter().copied().filter(|p| p.0 > 0.0 && p.1 > 0.0).collect();
        let path: Vec<String> = good.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{c}"/>"#, path.join(" "));
        for &(x, y) in &good {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, px(x), py(y));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{c}">{}</text>"#,
            W - R + 10.0,
            T + 16.0 + 18.0 * i as f64,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn series_by_mode(records: &[StudyRecord], modes: usize, value: impl Fn(&crate::study::ModeRecord) -> f64) -> Vec<Series> {
    (0..modes)
        .map(|k| {
            let points: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.status != Status::Failed)
                .filter_map(|r| r.modes.get(k).map(|m| (r.epsilon, value(m).abs())))
                .collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
            let label = match fit_rate(&xs, &ys) {
                Ok(f) => format!("mode {}: slope {:.3}", k + 1, f.slope),
                Err(_) => format!("mode {}", k + 1),
            };
            Series { label, points }
        })
        .collect()
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf, ReportError> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|source| ReportError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Writes results.csv, study.json and the two plots into `out_dir`.
pub fn emit_report(out: &StudyOutput, out_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError::Io { path: out_dir.into(), source })?;
    let modes = out.config.modes;
    let json = serde_json::to_string_pretty(out).expect("study output serializes") + "\n";
    let remainder = loglog_svg(
        &format!("{}: normalized remainder", out.config.name),
        "|norm_remainder|",
        &series_by_mode(&out.records, modes, |m| m.norm_remainder),
    );
    let raw = loglog_svg(
        &format!("{}: lambda_eps - base", out.config.name),
        "|raw_err|",
        &series_by_mode(&out.records, modes, |m| m.raw_err),
    );
    Ok(vec![
        write(out_dir, "results.csv", &results_csv(&out.records, modes))?,
        write(out_dir, "study.json", &json)?,
        write(out_dir, "remainder.svg", &remainder)?,
        write(out_dir, "raw_error.svg", &raw)?,
    ])
}
