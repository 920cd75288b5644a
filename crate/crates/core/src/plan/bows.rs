//! Edge, solitary and s-shaped bows through a junction.

use serde::{Deserialize, Serialize};

use crate::bezier::{
    line_intersection, offset_curve, select_kind, Bezier, CubicBezier, Curve, CurveKind,
    OffsetPolyline, Point2, QuadBezier, QUADRATIC_PREFERENCE,
};
use crate::bezier::construct_cubic;
use crate::error::{Error, Result};

use super::junction::Junction;

pub const BOW_SAMPLES: usize = 128;
const LEG_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BowKind {
    Edge,
    Solitary,
    SShape,
}

/// One bundle's turn through a junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bow {
    pub kind: BowKind,
    pub junction: usize,
    pub connection: usize,
    pub instance: usize,
    /// Traversal of the instance the bow leaves from.
    pub traversal: usize,
    pub from_edge: usize,
    pub from_lane: usize,
    pub to_edge: usize,
    pub to_lane: usize,
    /// Family reference curve, oriented from the family's first side.
    pub reference: Curve,
    /// This bow's polyline, oriented along the bundle's travel direction.
    pub path: OffsetPolyline,
}

/// Bow between rim points `v` and `w` whose tangents run along the side
/// axes `dv`, `dw` (pointing away from the junction centre). `None` when
/// the tangent lines are parallel or meet behind a rim point.
pub fn edge_bow_curve(v: Point2, dv: Point2, w: Point2, dw: Point2) -> Option<Curve> {
    let (s, t) = line_intersection(v, dv, w, dw)?;
    if s > -LEG_EPS || t > -LEG_EPS {
        return None;
    }
    let u = v + dv * s;
    let inner = {
        let a = v - u;
        let b = w - u;
        a.cross(b).abs().atan2(a.dot(b))
    };
    let quad: Curve = QuadBezier::new(v, u, w).into();
    let cubic = || -> Option<Curve> { construct_cubic(v, u, w).ok().map(|c| c.0.into()) };
    match select_kind(inner) {
        CurveKind::Cubic => cubic(),
        CurveKind::Quadratic => {
            // lopsided legs can make the quadratic much tighter than the
            // isosceles rule assumed
            let (sv, sw) = (-s, -t);
            if (sv / sw).max(sw / sv) < 1.0 + 1e-9 {
                return Some(quad);
            }
            let rq = quad.min_radius();
            match cubic() {
                Some(c) if c.min_radius() > rq * QUADRATIC_PREFERENCE => Some(c),
                _ => Some(quad),
            }
        }
    }
}

/// Cubic with inner points `R - (1/3)/|R1 R2| * (O - P)` on each side.
pub fn solitary_curve(r1: Point2, po1: Point2, r2: Point2, po2: Point2) -> Result<CubicBezier> {
    let chord = r1.distance(r2);
    if chord < LEG_EPS {
        return Err(Error::Geometry {
            vertex: usize::MAX,
            detail: "solitary bow between coincident rim points".into(),
        });
    }
    let k = (1.0 / 3.0) / chord;
    Ok(CubicBezier::new(r1, r1 - po1 * k, r2 - po2 * k, r2))
}

/// Cubic `(r1, i1, i2, r2)` with `i1`, `i2` where line `h1 h2` meets the
/// rim tangents. `None` unless the four points progress monotonically
/// from `r1` to `r2` and the inner points are distinct.
pub fn s_bow_curve(
    r1: Point2,
    d1: Point2,
    r2: Point2,
    d2: Point2,
    h1: Point2,
    h2: Point2,
) -> Option<CubicBezier> {
    let dh = h2 - h1;
    if dh.norm() < LEG_EPS {
        return None;
    }
    let (s1, _) = line_intersection(r1, d1, h1, dh)?;
    let (s2, _) = line_intersection(r2, d2, h1, dh)?;
    if s1 > -LEG_EPS || s2 > -LEG_EPS {
        return None;
    }
    let i1 = r1 + d1 * s1;
    let i2 = r2 + d2 * s2;
    let axis = (r2 - r1).normalized();
    let p = [r1, i1, i2, r2].map(|q| (q - r1).dot(axis));
    let chord = r1.distance(r2);
    if i1.distance(i2) < 1e-6 * chord.max(1.0) || !(p[0] < p[1] && p[1] < p[2] && p[2] < p[3]) {
        return None;
    }
    Some(CubicBezier::new(r1, i1, i2, r2))
}

/// Side and lane of one end of a bow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RimRef {
    pub side: usize,
    pub lane: usize,
}

/// Edge bow between two lanes of adjacent sides, or `None` when the edge
/// construction degenerates.
pub fn build_edge_bow(j: &Junction, a: RimRef, b: RimRef) -> Option<Curve> {
    let v = j.rim_point(a.side, a.lane);
    let w = j.rim_point(b.side, b.lane);
    let dv = j.sides[a.side].direction;
    let dw = j.sides[b.side].direction;
    let (s, _) = line_intersection(v, dv, w, dw)?;
    if !j.in_hull(v + dv * s) {
        return None;
    }
    edge_bow_curve(v, dv, w, dw)
}

pub fn build_solitary_bow(j: &Junction, far: [Point2; 2], a: RimRef, b: RimRef) -> Result<Curve> {
    let r1 = j.rim_point(a.side, a.lane);
    let r2 = j.rim_point(b.side, b.lane);
    solitary_curve(r1, far[0] - j.center, r2, far[1] - j.center)
        .map(Curve::from)
        .map_err(|_| Error::Geometry {
            vertex: j.vertex,
            detail: format!(
                "solitary bow between coincident rim points on edges {} and {}",
                j.sides[a.side].edge, j.sides[b.side].edge
            ),
        })
}

/// S-shaped crossing bow defined by the chord midpoints `h` of two
/// diagonally opposite edge bows; `None` if it degenerates.
pub fn build_s_bow(j: &Junction, a: RimRef, b: RimRef, h: [Point2; 2]) -> Option<Curve> {
    let r1 = j.rim_point(a.side, a.lane);
    let r2 = j.rim_point(b.side, b.lane);
    let c = s_bow_curve(
        r1,
        j.sides[a.side].direction,
        r2,
        j.sides[b.side].direction,
        h[0],
        h[1],
    )?;
    if j.in_hull(c.s) && j.in_hull(c.t) {
        Some(c.into())
    } else {
        None
    }
}

/// Polyline of `reference` offset so that it starts at `start`; `None` if
/// the offset would not land on `end`.
pub fn offset_to(reference: &Curve, start: Point2, end: Point2, source: usize) -> Option<OffsetPolyline> {
    let d0 = reference.d1_at(0.0).normalized();
    let d1 = reference.d1_at(1.0).normalized();
    let dist = (start - reference.point_at(0.0)).dot(d0.perp());
    let s = reference.point_at(0.0) + d0.perp() * dist;
    let e = reference.point_at(1.0) + d1.perp() * dist;
    let tol = 1e-6;
    if s.distance(start) > tol || e.distance(end) > tol {
        return None;
    }
    offset_curve(reference, dist, BOW_SAMPLES, source).ok()
}

pub fn sample(curve: &Curve, source: usize) -> OffsetPolyline {
    offset_curve(curve, 0.0, BOW_SAMPLES, source).expect("zero offset never fails")
}
