//! Joining concentric copies of a closed loop into a single path.

use serde::{Deserialize, Serialize};

use crate::bezier::{offset_curve, Bezier, CubicBezier, Curve, Point2};
use crate::error::{Error, Result};

use super::bows::BOW_SAMPLES;

const B_TOL: f64 = 1e-6;

/// Reference connector in a local frame: starts at the origin heading
/// along +x and ends one fiber width to the left, `2b` further on.
pub fn connector_curve(b: f64, fiber_width: f64) -> CubicBezier {
    CubicBezier::new(
        Point2::ZERO,
        Point2::new(b, 0.0),
        Point2::new(b, fiber_width),
        Point2::new(2.0 * b, fiber_width),
    )
}

/// Smallest `b` for which the reference connector offset by up to
/// `offsets` fiber widths to either side keeps `r_min`.
pub fn connector_length(fiber_width: f64, r_min: f64, offsets: usize) -> Result<f64> {
    if !(fiber_width > 0.0 && r_min > 0.0) {
        return Err(Error::Validation(
            "fiber width and minimum radius must be positive".into(),
        ));
    }
    // the S is point-symmetric, so one inward offset on either bend is
    // the worst case
    let need = r_min + offsets as f64 * fiber_width;
    let ok = |b: f64| Curve::from(connector_curve(b, fiber_width)).min_radius() >= need;
    let mut hi = fiber_width.max(r_min);
    while !ok(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > B_TOL {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Connector from ring `index` to ring `index + 1`, placed in world
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    pub loop_id: usize,
    pub edge: usize,
    pub index: usize,
    pub b: f64,
    pub points: Vec<Point2>,
}

/// Polylines of the `count` connectors between adjacent rings. `origin`
/// is ring 0 at the connector start, `along` the travel direction and
/// `lateral` the unit step from one ring's lane to the next.
pub fn place_connectors(
    origin: Point2,
    along: Point2,
    lateral: Point2,
    b: f64,
    fiber_width: f64,
    count: usize,
) -> Result<Vec<Vec<Point2>>> {
    let local: Curve = connector_curve(b, fiber_width).into();
    // an isometry (possibly mirrored) maps local y onto `lateral`, so the
    // local offsets land on the ring lanes either way
    let to_world = |p: Point2| origin + along * p.x + lateral * p.y;
    (0..count)
        .map(|j| {
            let line = offset_curve(&local, j as f64 * fiber_width, BOW_SAMPLES, j)?;
            Ok(line.points.into_iter().map(to_world).collect())
        })
        .collect()
}
