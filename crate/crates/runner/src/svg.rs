//! Minimal SVG charts.

use std::fmt::Write;

use crate::compare::quantile;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn frame(title: &str, lo: f64, hi: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{hi:.3}</text>"#, MARGIN - 4.0, MARGIN + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{lo:.3}</text>"#, MARGIN - 4.0, HEIGHT - MARGIN);
    s
}

fn y_of(v: f64, lo: f64, hi: f64) -> f64 {
    HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN)
}

/// One polyline per series against the sample index.
pub fn line_chart(title: &str, x_label: &str, series: &[Series]) -> String {
    let (lo, hi) = bounds(series.iter().flat_map(|s| s.values.iter().copied()));
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0).max(2);
    let mut svg = frame(title, lo, hi);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 15.0, escape(x_label));
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| {
                let x = MARGIN + i as f64 / (n - 1) as f64 * (WIDTH - 2.0 * MARGIN);
                format!("{x:.2},{:.2}", y_of(v, lo, hi))
            })
            .collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{colour}" points="{}"/>"#, points.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0 * (k + 1) as f64,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Box (quartiles) and whiskers (extremes) per series.
pub fn box_chart(title: &str, series: &[Series]) -> String {
    let (lo, hi) = bounds(series.iter().flat_map(|s| s.values.iter().copied()));
    let mut svg = frame(title, lo, hi);
    let slot = (WIDTH - 2.0 * MARGIN) / series.len().max(1) as f64;
    for (k, s) in series.iter().enumerate() {
        if s.values.is_empty() {
            continue;
        }
        let colour = PALETTE[k % PALETTE.len()];
        let cx = MARGIN + slot * (k as f64 + 0.5);
        let half = slot * 0.25;
        let [min, q1, med, q3, max] = [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| y_of(quantile(&s.values, q), lo, hi));
        let _ = writeln!(svg, r#"<line x1="{cx:.2}" y1="{min:.2}" x2="{cx:.2}" y2="{max:.2}" stroke="{colour}"/>"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{q3:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="{colour}"/>"#,
            cx - half,
            2.0 * half,
            (q1 - q3).max(0.5)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{med:.2}" x2="{:.2}" y2="{med:.2}" stroke="{colour}" stroke-width="2"/>"#,
            cx - half,
            cx + half
        );
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN + 16.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
