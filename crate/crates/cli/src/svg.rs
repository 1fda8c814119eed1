//! Minimal SVG line plots: axes, one polyline, optional scatter points.
//! CSV remains the artifact of record; these are quick-look figures only.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 50.0;

fn bounds(series: &[(f64, f64)], points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for &(x, y) in series.iter().chain(points) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    (x0, x1, y0 - pad, y1 + pad)
}

pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    line: &[(f64, f64)],
    points: &[(f64, f64)],
) -> String {
    let (x0, x1, y0, y1) = bounds(line, points);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>"#,
        W / 2.0
    )
    .unwrap();
    // Axes.
    writeln!(
        out,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        b = H - MARGIN
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{x_label}</text>"#,
        W / 2.0,
        H - 12.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11" transform="rotate(-90 14 {})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    )
    .unwrap();
    for (v, label) in [(x0, format!("{x0:.3}")), (x1, format!("{x1:.3}"))] {
        writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{label}</text>"#,
            sx(v),
            H - MARGIN + 16.0
        )
        .unwrap();
    }
    for (v, label) in [(y0, format!("{y0:.3}")), (y1, format!("{y1:.3}"))] {
        writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{label}</text>"#,
            MARGIN - 6.0,
            sy(v) + 4.0
        )
        .unwrap();
    }
    if !line.is_empty() {
        let pts: Vec<String> = line
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }
    for &(x, y) in points {
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="firebrick"/>"#,
            sx(x),
            sy(y)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
