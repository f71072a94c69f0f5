//! CSV tables and standalone SVG figures.

use std::fmt::Write;

use crate::geometry::Shape;
use crate::polyspace::Mesh;

/// Comma-separated table with a header row.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

/// Planar mesh drawn with equal axis scales: the boundary of `shape` as one
/// path, then one circle per point, classed and colored by layer. Only the
/// first two coordinates are drawn.
pub fn svg_mesh(mesh: &Mesh, shape: Option<&Shape>) -> String {
    let mut boundary: Vec<[f64; 2]> = Vec::new();
    if let Some(s) = shape.filter(|s| s.dim() == 2) {
        boundary = (0..=512).filter_map(|k| s.curve_point((k % 512) as f64 / 512.0)).collect();
    }
    let xy = mesh.points.iter().map(|p| [p[0], p.get(1).copied().unwrap_or(0.0)]);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in xy.clone().chain(boundary.iter().copied()) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if !lo[0].is_finite() {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let pad = 0.05 * span;
    let r = span / 300.0;
    let mut s = String::new();
    // y grows upwards, so the figure is flipped inside a group
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        lo[0] - pad,
        -hi[1] - pad,
        hi[0] - lo[0] + 2.0 * pad,
        hi[1] - lo[1] + 2.0 * pad,
        (800.0 * (hi[1] - lo[1] + 2.0 * pad) / (hi[0] - lo[0] + 2.0 * pad)).round()
    );
    let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
    if !boundary.is_empty() {
        let mut d = String::new();
        for (i, p) in boundary.iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, p[0], p[1]);
        }
        let _ = writeln!(s, r#"<path class="boundary" d="{}Z" fill="none" stroke="black" stroke-width="{}"/>"#, d, r / 2.0);
    }
    for (i, p) in xy.enumerate() {
        let layer = mesh.layers.as_ref().map_or(0, |l| l[i]);
        let _ = writeln!(
            s,
            r#"<circle class="layer-{layer}" cx="{}" cy="{}" r="{r}" fill="{}"/>"#,
            p[0],
            p[1],
            PALETTE[layer % PALETTE.len()]
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Line chart of named series on a log10 vertical axis; non-positive values
/// are dropped.
pub fn svg_curve(series: &[(String, Vec<(f64, f64)>)]) -> String {
    let pts = series.iter().flat_map(|s| s.1.iter()).filter(|p| p.1 > 0.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (w, h, m) = (640.0, 400.0, 50.0);
    let sx = |x: f64| m + (w - 2.0 * m) * (x - x0) / (x1 - x0).max(1e-12);
    let sy = |y: f64| h - m - (h - 2.0 * m) * (y.log10() - y0) / (y1 - y0).max(1e-12);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">"#);
    let _ = writeln!(
        s,
        r#"<path class="axes" d="M{m} {m} L{m} {} L{} {}" fill="none" stroke="black"/>"#,
        h - m,
        w - m,
        h - m
    );
    let _ = writeln!(s, r#"<text x="{m}" y="{}" font-size="12">10^{:.1}</text>"#, m - 8.0, y1);
    let _ = writeln!(s, r#"<text x="{m}" y="{}" font-size="12">10^{:.1}</text>"#, h - m + 16.0, y0);
    for (k, (name, data)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for (i, &(x, y)) in data.iter().filter(|p| p.1 > 0.0).enumerate() {
            let _ = write!(d, "{}{:.2} {:.2} ", if i == 0 { "M" } else { "L" }, sx(x), sy(y));
        }
        let _ = writeln!(s, r#"<path class="series" d="{d}" fill="none" stroke="{color}" stroke-width="2"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{name}</text>"#,
            w - m - 80.0,
            m + 16.0 * k as f64
        );
    }
    s.push_str("</svg>\n");
    s
}
