//! CSV tables and SVG line plots for sweep results.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::SweepResult;
use crate::error::{invalid, Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "m",
    "variant",
    "param_name",
    "param_value",
    "mean_mse",
    "sem_mse",
    "mean_consistency",
    "mean_support_recall",
    "mean_iters",
    "degenerate_count",
];

const TRIALS_HEADER: [&str; 10] = [
    "m",
    "variant",
    "param_value",
    "trial",
    "mse",
    "consistency",
    "support_recall",
    "iterations",
    "degenerate",
    "master_seed",
];

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

/// Serialized CSV table for `result`.
pub fn csv_bytes(result: &SweepResult) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writing into a Vec cannot fail.
    w.write_record(CSV_HEADER).expect("in-memory csv");
    for r in &result.rows {
        w.write_record([
            r.m.to_string(),
            r.variant.clone(),
            r.param_name.clone(),
            num(r.param_value),
            num(r.mean_mse),
            num(r.sem_mse),
            num(r.mean_consistency),
            num(r.mean_support_recall),
            num(r.mean_iters),
            r.degenerate_count.to_string(),
        ])
        .expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, &csv_bytes(result))
}

/// Per-trial metrics, one line per trial.
pub fn emit_trials_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(TRIALS_HEADER).map_err(csv_err(path))?;
    for t in &result.trials {
        w.write_record([
            t.m.to_string(),
            t.variant.clone(),
            num(t.param_value),
            t.trial.to_string(),
            num(t.metrics.mse),
            num(t.metrics.consistency),
            num(t.metrics.support_recall),
            t.metrics.iterations.to_string(),
            t.metrics.degenerate.to_string(),
            result.provenance.master_seed.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Series {
    label: String,
    points: Vec<(usize, f64)>,
}

fn series_of(result: &SweepResult) -> Vec<Series> {
    let mut series: Vec<(String, f64, Series)> = Vec::new();
    for r in &result.rows {
        let pos = series.iter().position(|(v, p, _)| *v == r.variant && *p == r.param_value);
        let idx = pos.unwrap_or_else(|| {
            let label = if r.param_name == "none" {
                r.variant.clone()
            } else {
                format!("{} {}={}", r.variant, r.param_name, r.param_value)
            };
            series.push((r.variant.clone(), r.param_value, Series { label, points: Vec::new() }));
            series.len() - 1
        });
        series[idx].2.points.push((r.m, r.mean_mse));
    }
    series
        .into_iter()
        .map(|(_, _, mut s)| {
            s.points.sort_by_key(|p| p.0);
            s
        })
        .collect()
}

/// Standalone SVG 1.1 plot of mean MSE against m, one line per
/// `(variant, parameter value)`.
pub fn render_svg(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return invalid("cannot plot an empty sweep result");
    }
    let series = series_of(result);

    let mut ms: Vec<usize> = result.rows.iter().map(|r| r.m).collect();
    ms.sort_unstable();
    ms.dedup();
    let (m_lo, m_hi) = (ms[0] as f64, ms[ms.len() - 1] as f64);
    let (m_lo, m_hi) = if m_lo == m_hi { (m_lo - 1.0, m_hi + 1.0) } else { (m_lo, m_hi) };
    let y_max = result.rows.iter().map(|r| r.mean_mse).fold(0.0, f64::max);
    let y_hi = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |m: f64| LEFT + (m - m_lo) / (m_hi - m_lo) * plot_w;
    let py = |v: f64| TOP + plot_h - v / y_hi * plot_h;

    let cfg = &result.provenance.config;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">mean MSE vs m (n={}, k={}, trials={})</text>"#,
        LEFT + plot_w / 2.0,
        cfg.n,
        cfg.k,
        cfg.trials
    );

    // axes
    let _ = writeln!(
        s,
        r#"<path d="M {LEFT:.2} {TOP:.2} L {LEFT:.2} {:.2} L {:.2} {:.2}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    let stride = ms.len().div_ceil(12).max(1);
    for &m in ms.iter().step_by(stride) {
        let x = px(m as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{m}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0
        );
    }
    for i in 0..=5 {
        let v = y_hi * i as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">m (measurements)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">mean MSE</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(m, v)| format!("{:.2},{:.2}", px(m as f64), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        for &(m, v) in &ser.points {
            let _ = writeln!(
                s,
                r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(m as f64),
                py(v)
            );
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(result: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, render_svg(result)?.as_bytes())
}
