//! SVG drawings of construction levels and magnification sequences.
//!
//! Coordinates are exact until the final formatting, which rounds to four
//! decimals so that output is byte-stable.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geoset::GeoSet;
use crate::ifs::MoranConstruction;
use crate::rational::to_f64;

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;
const ROW: f64 = 14.0;
const ROW_GAP: f64 = 8.0;

/// A labelled row of intervals in `[0, 1]` scaled to the drawing width.
pub struct Strip {
    pub label: String,
    pub intervals: Vec<(f64, f64)>,
    pub fill: &'static str,
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Rows of intervals, one per strip, mapped from `[lo, hi]`.
pub fn strips_svg(strips: &[Strip], lo: f64, hi: f64) -> String {
    let height = 2.0 * MARGIN + strips.len() as f64 * (ROW + ROW_GAP);
    let label_w = 90.0;
    let scale = (WIDTH - 2.0 * MARGIN - label_w) / (hi - lo);
    let mut out = String::new();
    header(&mut out, WIDTH, height);
    for (k, strip) in strips.iter().enumerate() {
        let y = MARGIN + k as f64 * (ROW + ROW_GAP);
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN:.0}" y="{:.4}" font-family="monospace" font-size="11">{}</text>"#,
            y + ROW - 3.0,
            escape(&strip.label)
        );
        for &(a, b) in &strip.intervals {
            let x = MARGIN + label_w + (a - lo) * scale;
            // keep degenerate intervals visible
            let w = ((b - a) * scale).max(0.5);
            let _ = writeln!(
                out,
                r#"<rect x="{x:.4}" y="{y:.4}" width="{w:.4}" height="{ROW:.0}" fill="{}"/>"#,
                strip.fill
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// 1D construction: one row per level `0..=depth`, the merged final level,
/// and optional highlighted gaps.
pub fn render_1d(mc: &MoranConstruction, depth: usize, gaps: &[(f64, f64)]) -> Result<String> {
    if mc.dimension() != 1 {
        return Err(Error::Argument("render_1d needs a construction on the line".into()));
    }
    let seed = mc.seed();
    let (lo, hi) = (to_f64(&seed.lo[0]), to_f64(&seed.hi[0]));
    let mut strips = Vec::with_capacity(depth + 3);
    let mut last = Vec::new();
    for n in 0..=depth {
        let cells = mc.level(n)?;
        last = cells.iter().map(|(_, c)| (to_f64(&c.lo[0]), to_f64(&c.hi[0]))).collect();
        strips.push(Strip { label: format!("level {n}"), intervals: last.clone(), fill: "#1f4e79" });
    }
    last.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut union: Vec<(f64, f64)> = Vec::new();
    for (a, b) in last {
        match union.last_mut() {
            Some(u) if a <= u.1 => u.1 = u.1.max(b),
            _ => union.push((a, b)),
        }
    }
    strips.push(Strip { label: "union".into(), intervals: union, fill: "#333333" });
    if !gaps.is_empty() {
        strips.push(Strip { label: "gaps".into(), intervals: gaps.to_vec(), fill: "#c0392b" });
    }
    Ok(strips_svg(&strips, lo, hi))
}

/// 2D construction: the cells of every level `1..=depth` as outlined
/// rectangles, deeper levels drawn on top.
pub fn render_2d(mc: &MoranConstruction, depth: usize) -> Result<String> {
    if mc.dimension() != 2 {
        return Err(Error::Argument("render_2d needs a planar construction".into()));
    }
    let seed = mc.seed();
    let (x0, x1) = (to_f64(&seed.lo[0]), to_f64(&seed.hi[0]));
    let (y0, y1) = (to_f64(&seed.lo[1]), to_f64(&seed.hi[1]));
    let side = WIDTH - 2.0 * MARGIN;
    let scale = side / (x1 - x0).max(y1 - y0);
    let height = 2.0 * MARGIN + (y1 - y0) * scale;
    let mut out = String::new();
    header(&mut out, WIDTH, height);
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN:.4}" y="{MARGIN:.4}" width="{:.4}" height="{:.4}" fill="none" stroke="#999999"/>"##,
        (x1 - x0) * scale,
        (y1 - y0) * scale
    );
    let palette = ["#1f4e79", "#2e75b6", "#c55a11", "#548235", "#7030a0", "#bf9000"];
    for n in 1..=depth {
        let colour = palette[(n - 1) % palette.len()];
        let opacity = if n == depth { 0.6 } else { 0.08 };
        for (_, cell) in mc.level(n)? {
            let (a, b) = (to_f64(&cell.lo[0]), to_f64(&cell.hi[0]));
            let (c, d) = (to_f64(&cell.lo[1]), to_f64(&cell.hi[1]));
            // y grows downwards in SVG
            let _ = writeln!(
                out,
                r#"<rect x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}" fill="{colour}" fill-opacity="{opacity}" stroke="{colour}" stroke-width="0.5"/>"#,
                MARGIN + (a - x0) * scale,
                MARGIN + (y1 - d) * scale,
                ((b - a) * scale).max(0.5),
                ((d - c) * scale).max(0.5)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Magnified sets `A_j` above the target `K`, all in `[0, 1]`.
pub fn render_magnifications(sets: &[(String, &GeoSet)], target: &GeoSet) -> String {
    let mut strips: Vec<Strip> = sets
        .iter()
        .map(|(label, set)| Strip { label: label.clone(), intervals: set.to_f64(), fill: "#1f4e79" })
        .collect();
    strips.push(Strip { label: "K".into(), intervals: target.to_f64(), fill: "#c0392b" });
    strips_svg(&strips, 0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{AxisBox, ContractionMap, IfsSystem};
    use crate::rational::q;

    #[test]
    fn dyadic_rows() {
        let h = |a| ContractionMap::homothety(q(1, 2), q(a, 2)).unwrap();
        let mc = MoranConstruction::full_shift(IfsSystem::new(vec![h(0), h(1)]).unwrap()).unwrap();
        let svg = render_1d(&mc, 4, &[]).unwrap();
        // 1 + 2 + 4 + 8 + 16 level cells and the merged union [0, 1]
        assert_eq!(svg.matches("<rect x=").count(), 31 + 1);
        assert_eq!(svg, render_1d(&mc, 4, &[]).unwrap());
    }

    #[test]
    fn planar_rectangles() {
        let d = |a, b| ContractionMap::diagonal(q(1, 2), q(1, 3), q(a, 2), q(b, 3)).unwrap();
        let sys = IfsSystem::new(vec![d(0, 0), d(1, 2)]).unwrap();
        let mc = MoranConstruction::new(sys, crate::Subshift::full(2).unwrap(), AxisBox::unit(2)).unwrap();
        let svg = render_2d(&mc, 3).unwrap();
        assert_eq!(svg.matches("fill-opacity").count(), 2 + 4 + 8);
    }
}
