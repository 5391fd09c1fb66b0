//! Human-readable summaries and SVG plots rendered from result JSON.
//!
//! Nothing here touches a solver: every function takes parsed JSON and
//! returns text, so plots can be regenerated from a results directory alone.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

/// Result files recognized by [`summarize_dir`], in rendering order.
pub const RESULT_FILES: [&str; 6] = [
    "conditions.json",
    "trajectory.json",
    "singleton.json",
    "pullback.json",
    "fit.json",
    "ou_diagnostics.json",
];

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Format(format!("result JSON lacks the key {key:?}")))
}

fn num(v: &Value, key: &str) -> Result<f64> {
    field(v, key)?
        .as_f64()
        .ok_or_else(|| Error::Format(format!("{key:?} is not a number")))
}

fn num_array(v: &Value, key: &str) -> Result<Vec<f64>> {
    field(v, key)?
        .as_array()
        .ok_or_else(|| Error::Format(format!("{key:?} is not an array")))?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| Error::Format(format!("{key:?} holds a non-number")))
        })
        .collect()
}

fn show(v: Option<&Value>) -> String {
    match v {
        Some(Value::Null) | None => "n/a".into(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

/// Text summary of one result file, keyed by its file name.
pub fn summarize(name: &str, v: &Value) -> Result<String> {
    let mut s = String::new();
    let g = |k: &str| show(v.get(k));
    match name {
        "conditions.json" => {
            writeln!(s, "Grashof condition ({})", g("regime")).ok();
            writeln!(
                s,
                "  G = {}, threshold = {}, Re = {}",
                g("grashof"),
                g("threshold"),
                g("reynolds")
            )
            .ok();
            writeln!(s, "  holds: {}, varrho = {}", g("holds"), g("varrho")).ok();
        }
        "trajectory.json" => {
            let recs = field(v, "records")?
                .as_array()
                .ok_or_else(|| Error::Format("\"records\" is not an array".into()))?;
            writeln!(s, "Trajectory ({} records)", recs.len()).ok();
            if let Some(last) = recs.last() {
                writeln!(
                    s,
                    "  final t = {}, |u|_H = {}",
                    show(last.get("t")),
                    show(last.get("h_norm"))
                )
                .ok();
            }
            let worst = recs
                .iter()
                .filter_map(|e| e.get("energy_residual")?.as_f64())
                .fold(0.0, |m: f64, r| m.max(r.abs()));
            writeln!(s, "  max |energy residual| = {worst:e}").ok();
        }
        "singleton.json" => {
            writeln!(s, "Singleton search").ok();
            writeln!(s, "  converged: {} at t = {}", g("converged"), g("t_final")).ok();
            writeln!(
                s,
                "  tail slope: {} (bound -varrho/2 = {})",
                g("tail_slope"),
                g("slope_bound")
            )
            .ok();
            writeln!(s, "  steady residual: {}", g("steady_residual")).ok();
        }
        "pullback.json" => {
            writeln!(
                s,
                "Pullback samples ({} noise, epsilon = {})",
                g("mode"),
                g("epsilon")
            )
            .ok();
            for sample in field(v, "samples")?.as_array().into_iter().flatten() {
                writeln!(
                    s,
                    "  seed {}: |v|_H = {}, doubling change = {}, converged: {}",
                    show(sample.get("seed")),
                    show(sample.get("v_h")),
                    show(sample.get("doubling_change")),
                    show(sample.get("converged"))
                )
                .ok();
            }
        }
        "fit.json" => {
            writeln!(s, "Rate fit ({} noise, r = {})", g("mode"), g("r")).ok();
            writeln!(s, "  slope: {} (theory {})", g("slope"), g("delta_theory")).ok();
            writeln!(s, "  inversions: {}", g("inversions")).ok();
            let eps = num_array(v, "eps_grid")?;
            let means = num_array(v, "mean_log_dist")?;
            for (e, m) in eps.iter().zip(&means) {
                writeln!(s, "  epsilon {e}: geometric mean distance {}", m.exp()).ok();
            }
        }
        "ou_diagnostics.json" => {
            writeln!(s, "Ornstein-Uhlenbeck diagnostics").ok();
            for key in ["first_moment", "second_moment"] {
                let m = field(v, key)?;
                writeln!(
                    s,
                    "  {key}: {} +- {} (expected {})",
                    show(m.get("mean")),
                    show(m.get("stderr")),
                    show(m.get("expected"))
                )
                .ok();
            }
            writeln!(
                s,
                "  time average: {} (bound {})",
                g("time_average"),
                g("time_average_bound")
            )
            .ok();
        }
        other => return Err(Error::Format(format!("no summary for {other}"))),
    }
    Ok(s)
}

/// Summaries of all recognized result files present in `dir`.
pub fn summarize_dir(dir: &Path) -> Result<String> {
    let mut out = String::new();
    for name in RESULT_FILES {
        let path = dir.join(name);
        if path.exists() {
            let v: Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
            out.push_str(&summarize(name, &v)?);
            out.push('\n');
        }
    }
    if out.is_empty() {
        return Err(Error::Format(format!(
            "no result files in {}",
            dir.display()
        )));
    }
    Ok(out)
}

/// The SVG plots derivable from one result file: `(file name, svg)`.
pub fn plots(name: &str, v: &Value) -> Result<Vec<(String, String)>> {
    Ok(match name {
        "fit.json" => {
            let eps = num_array(v, "eps_grid")?;
            let means = num_array(v, "mean_log_dist")?;
            let slope = num(v, "slope")?;
            let intercept = num(v, "intercept")?;
            let pts: Vec<(f64, f64)> = eps.iter().zip(&means).map(|(e, m)| (e.ln(), *m)).collect();
            let line: Vec<(f64, f64)> = eps
                .iter()
                .map(|e| (e.ln(), intercept + slope * e.ln()))
                .collect();
            vec![(
                "rate.svg".into(),
                line_plot(
                    &format!("rate fit, slope {slope:.3}"),
                    "ln epsilon",
                    "ln dist",
                    &[&pts, &line],
                ),
            )]
        }
        "singleton.json" => {
            let log = field(v, "log")?
                .as_array()
                .ok_or_else(|| Error::Format("\"log\" is not an array".into()))?;
            let pts: Vec<(f64, f64)> = log
                .iter()
                .filter_map(|e| Some((e.get("t")?.as_f64()?, e.get("max_distance")?.as_f64()?)))
                .filter(|p| p.1 > 0.0)
                .map(|(t, d)| (t, d.ln()))
                .collect();
            vec![(
                "singleton.svg".into(),
                line_plot("probe contraction", "t", "ln max distance", &[&pts]),
            )]
        }
        "trajectory.json" => {
            let recs = field(v, "records")?
                .as_array()
                .ok_or_else(|| Error::Format("\"records\" is not an array".into()))?;
            let pts: Vec<(f64, f64)> = recs
                .iter()
                .filter_map(|e| Some((e.get("t")?.as_f64()?, e.get("h_norm")?.as_f64()?)))
                .collect();
            vec![(
                "trajectory.svg".into(),
                line_plot("kinetic energy", "t", "|u|_H", &[&pts]),
            )]
        }
        _ => Vec::new(),
    })
}

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

/// Minimal SVG line chart; the first series is also drawn with markers.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[&[(f64, f64)]]) -> String {
    let all: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.iter().copied())
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .ok();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).ok();
    writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    )
    .ok();
    writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    )
    .ok();
    for (x, anchor, val) in [(PAD, "start", x0), (W - PAD, "end", x1)] {
        writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="{anchor}" font-size="10">{val:.3}</text>"#,
            H - PAD + 14.0
        )
        .ok();
    }
    for (y, val) in [(H - PAD, y0), (PAD, y1)] {
        writeln!(
            s,
            r#"<text x="{}" y="{y}" text-anchor="end" font-size="10">{val:.3}</text>"#,
            PAD - 4.0
        )
        .ok();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        W / 2.0,
        H - 10.0,
        escape(xlabel)
    )
    .ok();
    writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    )
    .ok();
    for (i, pts) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if coords.len() > 1 {
            writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}"/>"#,
                coords.join(" ")
            )
            .ok();
        }
        if i == 0 && pts.len() <= 64 {
            for c in &coords {
                let (x, y) = c.split_once(',').unwrap_or((c, c));
                writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#).ok();
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
