//! Minimal static SVG charts. Output carries no timestamps or ids so it is
//! byte-stable for identical inputs.

use std::fmt::Write as _;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn extent(series: &[Series], f: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in series.iter().flat_map(|s| s.points.iter()).map(f) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// Line chart (`lines = true`) or scatter of one or more series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], lines: bool) -> String {
    let (x0, x1) = extent(series, |p| p.0);
    let (y0, y1) = extent(series, |p| p.1);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        out,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{x_label}</text>"#, W / 2.0, H - 20.0);
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 18 {})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="{anchor}" font-size="10">{v:.3}</text>"#, sx(v), H - PAD + 14.0);
    }
    for v in [y0, y1] {
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="10">{v:.3}</text>"#, PAD - 4.0, sy(v));
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if lines && s.points.len() > 1 {
            let pts: Vec<String> = s.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        }
        for p in &s.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(p.0), sy(p.1));
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            W - PAD - 100.0,
            PAD + 14.0 * i as f64,
            s.label
        );
    }
    out.push_str("</svg>\n");
    out
}
