//! SVG renderings and line-oriented path exports of layer plans.

use std::fmt::Write as _;

use crate::bezier::{bounding_box, Point2};
use crate::error::{Error, Result};
use crate::graph::FiberGraph;
use crate::plan::LayerPathPlan;

pub const PATH_EXPORT_HEADER: &str = "# fiberloom paths v1";
const FILL_COLOR: &str = "#c8c8c8";
const BUNDLE_COLOR: &str = "#1f4e79";
const MARGIN: f64 = 10.0;

pub fn svg_file_name(layer: usize) -> String {
    format!("layer_{layer:03}.svg")
}

fn pts(points: &[Point2]) -> String {
    points
        .iter()
        .map(|p| format!("{:.6},{:.6}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One SVG per layer, y axis up, one user unit per millimetre. Bundles
/// are stroked at fiber width; fill polygons are gray.
pub fn render_svg(plan: &LayerPathPlan, graph: &FiberGraph, fiber_width: f64, mark_rims: bool) -> String {
    let mut all: Vec<Point2> = graph.vertices.iter().map(|v| v.position).collect();
    for p in &plan.paths {
        all.extend(p.points.iter().copied());
    }
    let (lo, hi) = bounding_box(&all);
    let (x0, y0) = (lo.x - MARGIN, lo.y - MARGIN);
    let (w, h) = (hi.x - lo.x + 2.0 * MARGIN, hi.y - lo.y + 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.6}mm" height="{h:.6}mm" viewBox="{x0:.6} {:.6} {w:.6} {h:.6}">"#,
        -(y0 + h)
    );
    let _ = writeln!(s, "<title>layer {} sheet {}</title>", plan.layer, plan.sheet);
    let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
    for f in &plan.fills {
        let _ = writeln!(
            s,
            r#"<polygon class="fill" fill="{FILL_COLOR}" stroke="none" points="{}"/>"#,
            pts(&f.points)
        );
    }
    for p in &plan.paths {
        let tag = if p.closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            s,
            r#"<{tag} class="bundle" fill="none" stroke="{BUNDLE_COLOR}" stroke-width="{fiber_width:.6}" stroke-linejoin="round" points="{}"/>"#,
            pts(&p.points)
        );
    }
    if mark_rims {
        let r = fiber_width / 4.0;
        for j in plan.junctions.iter().flatten() {
            for side in &j.sides {
                for q in &side.rim {
                    let _ = writeln!(
                        s,
                        r#"<circle class="rim" cx="{:.6}" cy="{:.6}" r="{r:.6}" fill="red"/>"#,
                        q.x, q.y
                    );
                }
            }
        }
        for v in &graph.vertices {
            let _ = writeln!(
                s,
                r#"<circle class="vertex" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="black"/>"#,
                v.position.x,
                v.position.y,
                fiber_width / 2.0
            );
        }
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

/// Records `layer loop_instance closed x1 y1 x2 y2 ...`, one per bundle
/// path, coordinates in mm to six decimals. `loop_instance` is the index
/// of the path's first loop instance within its layer.
pub fn path_export(plans: &[LayerPathPlan]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{PATH_EXPORT_HEADER}");
    let _ = writeln!(s, "# layer loop_instance closed x1 y1 x2 y2 ...");
    for plan in plans {
        for p in &plan.paths {
            let _ = write!(s, "{} {} {}", plan.layer, p.instances[0], u8::from(p.closed));
            for q in &p.points {
                let _ = write!(s, " {:.6} {:.6}", q.x, q.y);
            }
            s.push('\n');
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportedPath {
    pub layer: usize,
    pub instance: usize,
    pub closed: bool,
    pub points: Vec<Point2>,
}

pub fn parse_path_export(text: &str) -> Result<Vec<ExportedPath>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::Input(format!("path export line {}: malformed record", n + 1));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 3 || (f.len() - 3) % 2 != 0 {
            return Err(bad());
        }
        let layer = f[0].parse().map_err(|_| bad())?;
        let instance = f[1].parse().map_err(|_| bad())?;
        let closed = match f[2] {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        let nums = f[3..]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        out.push(ExportedPath {
            layer,
            instance,
            closed,
            points: nums.chunks(2).map(|c| Point2::new(c[0], c[1])).collect(),
        });
    }
    Ok(out)
}
