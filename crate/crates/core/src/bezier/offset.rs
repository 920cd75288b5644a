use serde::{Deserialize, Serialize};

use super::curve::{Bezier, Curve};
use super::point::Point2;
use crate::error::{Error, Result};

/// Default number of points per offset polyline.
pub const OFFSET_SAMPLES: usize = 128;

/// A discretized curve at constant normal distance from a reference curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetPolyline {
    pub points: Vec<Point2>,
    /// Signed distance along the left normal of the reference.
    pub offset_distance: f64,
    pub source: usize,
}

/// Offsets `curve` by `distance` along its unit left normal at `samples`
/// arclength-uniform parameters. Fails when an inward offset reaches a
/// centre of curvature.
pub fn offset_curve(curve: &Curve, distance: f64, samples: usize, source: usize) -> Result<OffsetPolyline> {
    let samples = samples.max(2);
    if distance != 0.0 {
        // signed curvature positive means the centre lies on the left
        let scan = 512;
        for i in 0..=scan {
            let t = i as f64 / scan as f64;
            let k = curve.curvature(t)?;
            if distance * k >= 1.0 {
                return Err(Error::SelfIntersection {
                    distance: distance.abs(),
                    radius: 1.0 / k.abs(),
                });
            }
        }
    }
    let mut points = Vec::with_capacity(samples);
    for t in curve.arclength_params(samples) {
        let d1 = curve.d1_at(t);
        let speed = d1.norm();
        if speed < 1e-12 {
            return Err(Error::Singular { t });
        }
        points.push(curve.point_at(t) + d1.perp() * (distance / speed));
    }
    Ok(OffsetPolyline {
        points,
        offset_distance: distance,
        source,
    })
}

/// Signed curvature of the circle through each consecutive triple, one value
/// per interior point. Collinear triples give zero.
pub fn polyline_curvature(points: &[Point2]) -> Result<Vec<f64>> {
    for (i, w) in points.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(Error::DuplicatePoints(i));
        }
    }
    Ok(points
        .windows(3)
        .map(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            let cross = (b - a).cross(c - b);
            let denom = a.distance(b) * b.distance(c) * a.distance(c);
            if denom == 0.0 {
                0.0
            } else {
                2.0 * cross / denom
            }
        })
        .collect())
}

/// Distance from `p` to the segment `ab`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.distance(a + d * t)
}

/// Distance from `p` to a polyline.
pub fn point_polyline_distance(p: Point2, line: &[Point2]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [a] => p.distance(*a),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Axis-aligned bounding box `(min, max)`.
pub fn bounding_box(points: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}
