use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::Method;
use super::experiment::{file_stem, gap};
use super::rolling_average;
use super::summary::load_runs;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// One seed's per-iteration values.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub seed: u64,
    pub values: Vec<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Scatter of every per-iteration value plus one rolling-average polyline
/// per seed.
pub fn render_svg(title: &str, y_label: &str, series: &[PlotSeries], window: usize) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN_TOP}"/></g>"#,
        x0 + plot_w
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">iteration</text>"#,
        x0 + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    );

    let points = series.iter().map(|s| s.values.len()).sum::<usize>();
    if points == 0 {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">no data</text>"#,
            x0 + plot_w / 2.0,
            MARGIN_TOP + plot_h / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }

    let max_len = series.iter().map(|s| s.values.len()).max().unwrap_or(1);
    let finite = series.iter().flat_map(|s| s.values.iter().copied()).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        // flat data sits mid-height
        lo -= 0.5;
        hi += 0.5;
    }
    let sx = |i: usize| x0 + if max_len > 1 { plot_w * i as f64 / (max_len - 1) as f64 } else { plot_w / 2.0 };
    let sy = |v: f64| y0 - plot_h * (v.clamp(lo, hi) - lo) / (hi - lo);

    for (frac, value) in [(0.0, lo), (0.5, 0.5 * (lo + hi)), (1.0, hi)] {
        let y = y0 - plot_h * frac;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            format_tick(value)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{x0}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">0</text>"#,
        y0 + 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
        x0 + plot_w,
        y0 + 16.0,
        max_len - 1
    );

    let _ = writeln!(svg, r#"<g class="points" fill="red" fill-opacity="0.5">"#);
    for s in series {
        for (i, v) in s.values.iter().enumerate() {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6"/>"#, sx(i), sy(*v));
        }
    }
    svg.push_str("</g>\n");

    let _ = writeln!(svg, r#"<g class="rolling" fill="none" stroke="blue" stroke-width="1.5">"#);
    for s in series {
        let avg = rolling_average(&s.values, window);
        let pts: Vec<String> = avg.iter().enumerate().map(|(i, v)| format!("{:.2},{:.2}", sx(i), sy(*v))).collect();
        let _ = writeln!(svg, r#"<polyline data-seed="{}" points="{}"/>"#, s.seed, pts.join(" "));
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Write one SVG per (function, method) found under `dir` into `out`.
/// Plots the per-iteration gap `|optimum - f_value|` when the optimum is
/// known, otherwise the per-iteration reward.
pub fn plot(dir: &Path, out: &Path, window: usize) -> Result<Vec<PathBuf>> {
    let runs = load_runs(dir)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut groups: BTreeMap<(String, Method), Vec<_>> = BTreeMap::new();
    for run in &runs {
        groups.entry((run.function.clone(), run.method)).or_default().push(run);
    }
    let mut written = Vec::new();
    for ((function, method), group) in groups {
        let optimum = group.iter().map(|r| r.optimum).next().flatten();
        let series: Vec<PlotSeries> = group
            .iter()
            .map(|r| PlotSeries {
                seed: r.seed,
                values: r
                    .rows
                    .iter()
                    .map(|row| match optimum {
                        Some(opt) => gap(opt, row.f_value),
                        None => row.reward,
                    })
                    .collect(),
            })
            .collect();
        let label = if optimum.is_some() { "gap" } else { "reward" };
        let svg = render_svg(&format!("{function} / {method}"), label, &series, window);
        let path = out.join(format!("{}__{method}.svg", file_stem(&function)));
        fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
