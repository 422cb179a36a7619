//! Line charts as standalone SVG text.

use std::fmt::Write;

use crate::aggregate::{Metric, Summary};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub fn file_name(metric: Metric) -> String {
    format!("{}.svg", metric.column())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Short, stable tick labels.
fn label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.2}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.into() }
    }
}

/// Renders one chart with a series per summary that has any value for
/// `metric`. Returns `None` when no series has data.
pub fn render(metric: Metric, summaries: &[Summary]) -> Option<String> {
    let series: Vec<(&str, &[f64])> = summaries
        .iter()
        .map(|s| (s.algorithm.as_str(), s.curves[&metric].as_slice()))
        .filter(|(_, c)| c.iter().any(|x| x.is_finite()))
        .collect();
    if series.is_empty() {
        return None;
    }
    let n = series.iter().map(|(_, c)| c.len()).max().unwrap_or(1).max(2);
    let finite = series.iter().flat_map(|(_, c)| c.iter().copied()).filter(|x| x.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |i: usize| LEFT + pw * i as f64 / (n - 1) as f64;
    let sy = |v: f64| TOP + ph * (hi - v) / (hi - lo);

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(w, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, escape(metric.title()));
    let _ = writeln!(w, r##"<g stroke="#ccc" stroke-width="1">"##);
    for k in 0..=TICKS {
        let y = TOP + ph * k as f64 / TICKS as f64;
        let _ = writeln!(w, r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, LEFT + pw);
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=TICKS {
        let v = hi - (hi - lo) * k as f64 / TICKS as f64;
        let y = TOP + ph * k as f64 / TICKS as f64;
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, label(v));
        let i = ((n - 1) as f64 * k as f64 / TICKS as f64).round() as usize;
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(i), TOP + ph + 18.0, i + 1);
    }
    let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">episode</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0);
    let _ = writeln!(w, r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#, TOP + ph / 2.0, metric.column());

    for (k, (name, curve)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let _ = writeln!(w, r#"<g class="series" data-label="{}">"#, escape(name));
        // Missing values split the line into segments.
        let mut segment: Vec<String> = Vec::new();
        for (i, &v) in curve.iter().chain([f64::NAN].iter()).enumerate() {
            if v.is_finite() {
                segment.push(format!("{:.2},{:.2}", sx(i), sy(v)));
            } else if !segment.is_empty() {
                let _ = writeln!(w, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, segment.join(" "));
                segment.clear();
            }
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(w, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="3"/>"#, lx + 20.0);
        let _ = writeln!(w, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(name));
        let _ = writeln!(w, "</g>");
    }
    let _ = writeln!(w, "</svg>");
    Some(svg)
}
