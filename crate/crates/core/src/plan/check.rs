use serde::{Deserialize, Serialize};

use crate::bezier::{bounding_box, point_polyline_distance, polyline_curvature, Point2};

use super::LayerPathPlan;

const CURVATURE_SLACK: f64 = 1e-3;
const OVERLAP_SLACK: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Junction vertex, when the offending geometry sits in one.
    pub junction: Option<usize>,
    pub detail: String,
    /// Curvature in 1/mm, or distance in mm.
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub curvature: Vec<Violation>,
    pub overlap: Vec<Violation>,
}

impl CheckReport {
    pub fn is_clean(&self) -> bool {
        self.curvature.is_empty() && self.overlap.is_empty()
    }

    /// Junctions named by any violation, ascending.
    pub fn junctions(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .curvature
            .iter()
            .chain(&self.overlap)
            .filter_map(|x| x.junction)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn max_curvature(points: &[Point2]) -> f64 {
    match polyline_curvature(points) {
        Ok(k) => k.into_iter().map(f64::abs).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

fn boxes_near(a: &[Point2], b: &[Point2], d: f64) -> bool {
    let (alo, ahi) = bounding_box(a);
    let (blo, bhi) = bounding_box(b);
    alo.x - d <= bhi.x && blo.x - d <= ahi.x && alo.y - d <= bhi.y && blo.y - d <= ahi.y
}

/// Smallest distance from a sample of either polyline to the other.
pub fn polyline_gap(a: &[Point2], b: &[Point2]) -> f64 {
    let ab = a
        .iter()
        .map(|&p| point_polyline_distance(p, b))
        .fold(f64::INFINITY, f64::min);
    let ba = b
        .iter()
        .map(|&p| point_polyline_distance(p, a))
        .fold(f64::INFINITY, f64::min);
    ab.min(ba)
}

/// Flags sampled curvature above `1/r_min` and bundles in one junction
/// that come closer than a fiber width.
pub fn check_plan(plan: &LayerPathPlan, r_min: f64, fiber_width: f64) -> CheckReport {
    let mut report = CheckReport::default();
    let limit = (1.0 / r_min) * (1.0 + CURVATURE_SLACK);
    for bow in &plan.bows {
        let k = max_curvature(&bow.path.points);
        if k > limit {
            report.curvature.push(Violation {
                junction: Some(bow.junction),
                detail: format!(
                    "{:?} bow of instance {} (edges {} -> {}) has radius {:.4} mm",
                    bow.kind,
                    bow.instance,
                    bow.from_edge,
                    bow.to_edge,
                    1.0 / k
                ),
                value: k,
            });
        }
    }
    for c in &plan.connectors {
        let k = max_curvature(&c.points);
        if k > limit {
            report.curvature.push(Violation {
                junction: None,
                detail: format!(
                    "connector {} of loop {} on edge {} has radius {:.4} mm",
                    c.index,
                    c.loop_id,
                    c.edge,
                    1.0 / k
                ),
                value: k,
            });
        }
    }

    let min_gap = fiber_width * (1.0 - OVERLAP_SLACK);
    let bows = &plan.bows;
    for i in 0..bows.len() {
        for j in i + 1..bows.len() {
            let (a, b) = (&bows[i], &bows[j]);
            if a.junction != b.junction || !boxes_near(&a.path.points, &b.path.points, min_gap) {
                continue;
            }
            let gap = polyline_gap(&a.path.points, &b.path.points);
            if gap < min_gap {
                report.overlap.push(Violation {
                    junction: Some(a.junction),
                    detail: format!(
                        "bows of instances {} and {} come within {gap:.4} mm",
                        a.instance, b.instance
                    ),
                    value: gap,
                });
            }
        }
    }
    report
}
