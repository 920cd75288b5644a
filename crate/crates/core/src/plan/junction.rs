//! Junction geometry: sides, wedges and the rim-line distances `a` that
//! make every outer edge bow meet the minimum turning radius.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bezier::{
    bounding_box, line_intersection, scale_isosceles_for_radius, select_kind, Bezier, Curve,
    CurveKind, Point2,
};
use crate::error::{Error, Result};
use crate::graph::FiberGraph;

use super::bows::edge_bow_curve;

const STRAIGHT_EPS: f64 = 1e-9;
const LEG_TOL: f64 = 1e-4;
/// Relative slack so the symmetric solution never lands a hair below the
/// target radius.
const RADIUS_SLACK: f64 = 1e-7;
const REPAIR_ROUNDS: usize = 32;
/// Share of an edge a reflex-wedge lane pair may claim for its rim line.
const REFLEX_BUDGET: f64 = 0.45;

/// One incident edge of a junction, seen from the junction centre `P`
/// towards the far vertex `O`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Side {
    pub vertex: usize,
    pub far: usize,
    pub edge: usize,
    pub direction: Point2,
    /// Lanes on the rim line; the edge's bundle target.
    pub n_bundles: usize,
    /// Distance requested by the wedge on the side's left.
    pub a_left: f64,
    /// Distance requested by the wedge on the side's right.
    pub a_right: f64,
    /// Final rim-line distance from `P`.
    pub a: f64,
    /// Rim points, lane 0 (leftmost looking from `P` to `O`) first.
    pub rim: Vec<Point2>,
}

/// Region between side `right` and the next side counter-clockwise,
/// `left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub right: usize,
    pub left: usize,
    /// Counter-clockwise angle from the right side to the left side.
    pub beta: f64,
    /// Unsigned angle between the two side directions; the turn the edge
    /// bows make.
    pub inner: f64,
    /// Tangent-line intersection of the two wedge-adjacent lanes.
    pub u_point: Option<Point2>,
    pub u_right: f64,
    pub u_left: f64,
    /// Symmetric leg from the first parameterization step.
    pub v: f64,
    pub gamma: f64,
    /// True when edge bows may run through this wedge.
    pub active: bool,
}

impl Wedge {
    pub fn is_straight(&self) -> bool {
        self.inner >= PI - STRAIGHT_EPS
    }

    /// Bows through a reflex wedge turn away from it, so their tight side
    /// faces the far lanes.
    pub fn is_reflex(&self) -> bool {
        self.beta > PI
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub vertex: usize,
    pub center: Point2,
    pub fiber_width: f64,
    /// Sides in counter-clockwise order.
    pub sides: Vec<Side>,
    /// `wedges[i]` runs from side `i` to side `i + 1`.
    pub wedges: Vec<Wedge>,
    pub fixed_wedge: Option<usize>,
}

impl Junction {
    pub fn degree(&self) -> usize {
        self.sides.len()
    }

    pub fn side_of_edge(&self, edge: usize) -> Option<usize> {
        self.sides.iter().position(|s| s.edge == edge)
    }

    /// Lateral offset of lane `j` along the left normal.
    pub fn lane_offset(&self, side: usize, lane: usize) -> f64 {
        let n = self.sides[side].n_bundles as f64;
        ((n - 1.0) / 2.0 - lane as f64) * self.fiber_width
    }

    pub fn rim_point_at(&self, side: usize, lane: usize, a: f64) -> Point2 {
        let s = &self.sides[side];
        self.center + s.direction * a + s.direction.perp() * self.lane_offset(side, lane)
    }

    pub fn rim_point(&self, side: usize, lane: usize) -> Point2 {
        self.rim_point_at(side, lane, self.sides[side].a)
    }

    /// Axis-aligned box of all rim points and the centre.
    pub fn hull(&self) -> (Point2, Point2) {
        let mut pts = vec![self.center];
        for s in &self.sides {
            pts.extend(s.rim.iter().copied());
        }
        bounding_box(&pts)
    }

    pub fn in_hull(&self, p: Point2) -> bool {
        let (lo, hi) = self.hull();
        let eps = 1e-9 * (1.0 + hi.x.abs().max(hi.y.abs()));
        p.x >= lo.x - eps && p.x <= hi.x + eps && p.y >= lo.y - eps && p.y <= hi.y + eps
    }

    /// Index of the wedge between two adjacent sides through which an
    /// edge bow between them runs.
    pub fn wedge_between(&self, a: usize, b: usize) -> Option<usize> {
        let d = self.degree();
        if d == 2 {
            return self.wedges.iter().position(|w| w.active);
        }
        if (a + 1) % d == b {
            Some(a)
        } else if (b + 1) % d == a {
            Some(b)
        } else {
            None
        }
    }

    /// Lane of `side` on the inside of the turn through wedge `w`: next to
    /// the wedge, or farthest from it when the wedge is reflex.
    pub fn wedge_lane(&self, w: usize, side: usize) -> usize {
        let wedge = &self.wedges[w];
        let last = self.sides[side].n_bundles - 1;
        let near_right = side == wedge.right;
        debug_assert!(near_right || side == wedge.left);
        if near_right != wedge.is_reflex() {
            0
        } else {
            last
        }
    }

    /// Distance in lanes from the inside of the turn through wedge `w`.
    pub fn turn_depth(&self, w: usize, side: usize, lane: usize) -> usize {
        lane.abs_diff(self.wedge_lane(w, side))
    }

    /// Lane at `depth` lanes from the inside of the turn, if the side has it.
    pub fn lane_at_depth(&self, w: usize, side: usize, depth: usize) -> Option<usize> {
        let n = self.sides[side].n_bundles;
        if depth >= n {
            None
        } else if self.wedge_lane(w, side) == 0 {
            Some(depth)
        } else {
            Some(n - 1 - depth)
        }
    }

    /// Edge bow of wedge `w` between the lanes next to it, with explicit
    /// rim distances.
    pub fn reference_curve(&self, w: usize, a_right: f64, a_left: f64) -> Option<Curve> {
        let wedge = &self.wedges[w];
        let v = self.rim_point_at(wedge.right, self.wedge_lane(w, wedge.right), a_right);
        let wp = self.rim_point_at(wedge.left, self.wedge_lane(w, wedge.left), a_left);
        edge_bow_curve(
            v,
            self.sides[wedge.right].direction,
            wp,
            self.sides[wedge.left].direction,
        )
    }

    fn set_rims(&mut self) {
        for i in 0..self.sides.len() {
            let rim = (0..self.sides[i].n_bundles)
                .map(|j| self.rim_point(i, j))
                .collect();
            self.sides[i].rim = rim;
        }
    }

    /// Multiplies every rim distance by `factor`.
    pub fn scaled(&self, factor: f64) -> Junction {
        let mut j = self.clone();
        for s in &mut j.sides {
            s.a *= factor;
            s.a_left *= factor;
            s.a_right *= factor;
        }
        j.set_rims();
        j
    }

    /// Minimum radius of the outer edge bow of every active, curved wedge.
    pub fn wedge_radii(&self) -> Vec<Option<f64>> {
        self.wedges
            .iter()
            .enumerate()
            .map(|(w, wedge)| {
                if !wedge.active || wedge.is_straight() {
                    return None;
                }
                let ar = self.sides[wedge.right].a;
                let al = self.sides[wedge.left].a;
                Some(
                    self.reference_curve(w, ar, al)
                        .map_or(0.0, |c| c.min_radius()),
                )
            })
            .collect()
    }
}

fn ccw_angle(from: Point2, to: Point2) -> f64 {
    let a = to.angle() - from.angle();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Sides and wedges of a junction before any distances are chosen.
pub fn compute_sides(graph: &FiberGraph, vertex: usize, fiber_width: f64) -> Result<Junction> {
    let order = graph.angular_sides(vertex);
    let degree = order.len();
    if degree > 4 {
        return Err(Error::UnsupportedDegree { vertex, degree });
    }
    let center = graph.vertices[vertex].position;
    let sides: Vec<Side> = order
        .iter()
        .map(|&e| {
            let far = graph.edges[e].other(vertex).expect("incident");
            Side {
                vertex,
                far,
                edge: e,
                direction: graph.direction(e, vertex),
                n_bundles: graph.edges[e].target as usize,
                a_left: 0.0,
                a_right: 0.0,
                a: 0.0,
                rim: Vec::new(),
            }
        })
        .collect();
    let mut junction = Junction {
        vertex,
        center,
        fiber_width,
        sides,
        wedges: Vec::new(),
        fixed_wedge: None,
    };
    if degree < 2 {
        junction.set_rims();
        return Ok(junction);
    }
    let n_wedges = if degree == 2 { 2 } else { degree };
    for i in 0..n_wedges {
        let (r, l) = (i % degree, (i + 1) % degree);
        let dr = junction.sides[r].direction;
        let dl = junction.sides[l].direction;
        let beta = ccw_angle(dr, dl);
        let inner = dr.cross(dl).abs().atan2(dr.dot(dl));
        if inner < 1e-6 {
            return Err(Error::Geometry {
                vertex,
                detail: format!(
                    "edges {} and {} leave in the same direction",
                    junction.sides[r].edge, junction.sides[l].edge
                ),
            });
        }
        // at a two-edge junction bows run through the smaller wedge only
        let active = degree > 2 || beta < PI;
        let mut wedge = Wedge {
            right: r,
            left: l,
            beta,
            inner,
            u_point: None,
            u_right: 0.0,
            u_left: 0.0,
            v: 0.0,
            gamma: 1.0,
            active,
        };
        if !wedge.is_straight() {
            let (nr, nl) = (junction.sides[r].n_bundles - 1, junction.sides[l].n_bundles - 1);
            let (lr, ll) = if wedge.is_reflex() { (nr, 0) } else { (0, nl) };
            let or = junction.lane_offset(r, lr);
            let ol = junction.lane_offset(l, ll);
            let pr = center + dr.perp() * or;
            let pl = center + dl.perp() * ol;
            if let Some((s, t)) = line_intersection(pr, dr, pl, dl) {
                wedge.u_point = Some(pr + dr * s);
                wedge.u_right = s;
                wedge.u_left = t;
            }
        }
        junction.wedges.push(wedge);
    }
    Ok(junction)
}

fn radius_ok(j: &Junction, w: usize, a_right: f64, a_left: f64, r_min: f64) -> bool {
    j.reference_curve(w, a_right, a_left)
        .is_some_and(|c| c.min_radius() >= r_min)
}

/// Smallest leg on the free side of wedge `w` meeting `r_min`, with the
/// other side's distance fixed.
const SCAN_STEP: f64 = 1.05;
const SCAN_PATIENCE: usize = 8;

fn solve_free_leg(
    j: &Junction,
    w: usize,
    free_is_left: bool,
    fixed_a: f64,
    r_min: f64,
    limit: f64,
) -> Result<f64> {
    let wedge = &j.wedges[w];
    let u_free = if free_is_left { wedge.u_left } else { wedge.u_right };
    let ok = |leg: f64| {
        let a = leg + u_free;
        if free_is_left {
            radius_ok(j, w, fixed_a, a, r_min)
        } else {
            radius_ok(j, w, a, fixed_a, r_min)
        }
    };
    let radius = |leg: f64| {
        let a = leg + u_free;
        let (r, l) = if free_is_left { (fixed_a, a) } else { (a, fixed_a) };
        j.reference_curve(w, r, l).map(|c| c.min_radius())
    };
    // with one leg held the radius peaks and falls again, so the feasible
    // window is bounded; scan in small geometric steps rather than doubling
    let too_tight = || Error::JunctionTooTight {
        vertex: j.vertex,
        detail: format!("no free leg reaches the radius in wedge {w}"),
    };
    let mut lo = 0.0;
    let mut hi = wedge.v.max(LEG_TOL);
    let mut best = f64::NEG_INFINITY;
    let mut falling = 0;
    while !ok(hi) {
        let r = radius(hi).unwrap_or(f64::NEG_INFINITY);
        if r < best {
            falling += 1;
            if falling >= SCAN_PATIENCE {
                return Err(too_tight());
            }
        } else {
            best = r;
            falling = 0;
        }
        lo = hi;
        hi *= SCAN_STEP;
        if hi > limit {
            return Err(too_tight());
        }
    }
    while hi - lo > LEG_TOL {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi + u_free)
}

/// Chooses the rim distances of a junction: symmetric legs per wedge, fix
/// the wedge with the largest distance, solve the neighbours' free legs,
/// scale the opposite wedge of a four-edge junction, then reconcile sides
/// that received two different values.
pub fn parameterize_junction(
    graph: &FiberGraph,
    vertex: usize,
    fiber_width: f64,
    r_min: f64,
) -> Result<Junction> {
    let mut j = compute_sides(graph, vertex, fiber_width)?;
    let degree = j.degree();
    if degree < 2 {
        return Ok(j);
    }
    let limit = 100.0
        * j.sides
            .iter()
            .map(|s| graph.edge_length(s.edge))
            .fold(0.0, f64::max);

    let curved: Vec<usize> = (0..j.wedges.len())
        .filter(|&w| j.wedges[w].active && !j.wedges[w].is_straight())
        .collect();
    for &w in &curved {
        let wedge = &j.wedges[w];
        if wedge.u_point.is_none() {
            return Err(Error::Geometry {
                vertex,
                detail: format!("wedge {w} has parallel tangent lines"),
            });
        }
        let kind = select_kind(wedge.inner);
        let v = scale_isosceles_for_radius(wedge.inner, r_min, kind) * (1.0 + RADIUS_SLACK);
        // the scaling law holds for the quadratic shape exactly; cubic legs
        // come from the optimized fractions
        let v = if kind == CurveKind::Quadratic || v > 0.0 { v } else { LEG_TOL };
        j.wedges[w].v = v;
    }

    let n = degree;
    let mut proposals: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut left_of: Vec<f64> = vec![0.0; n];
    let mut right_of: Vec<f64> = vec![0.0; n];
    let mut record = |props: &mut Vec<Vec<f64>>, w: &Wedge, ar: f64, al: f64| {
        props[w.right].push(ar);
        props[w.left].push(al);
        left_of[w.right] = left_of[w.right].max(ar);
        right_of[w.left] = right_of[w.left].max(al);
    };

    if !curved.is_empty() {
        let sym = |w: usize| -> (f64, f64) {
            let wedge = &j.wedges[w];
            (wedge.v + wedge.u_right, wedge.v + wedge.u_left)
        };
        let fixed = *curved
            .iter()
            .max_by(|&&a, &&b| {
                let (ar, al) = sym(a);
                let (br, bl) = sym(b);
                ar.max(al).total_cmp(&br.max(bl)).then(b.cmp(&a))
            })
            .expect("non-empty");
        j.fixed_wedge = Some(fixed);
        let (fr, fl) = sym(fixed);
        let fw = j.wedges[fixed].clone();
        record(&mut proposals, &fw, fr, fl);

        if n >= 3 {
            let next = (fixed + 1) % n;
            let prev = (fixed + n - 1) % n;
            // the next wedge shares the fixed wedge's left side as its right side
            if curved.contains(&next) {
                // an unreachable window is left to the repair loop
                let al = solve_free_leg(&j, next, true, fl, r_min, limit).unwrap_or(sym(next).1);
                let w = j.wedges[next].clone();
                record(&mut proposals, &w, fl, al);
            }
            if prev != next && curved.contains(&prev) {
                let ar = solve_free_leg(&j, prev, false, fr, r_min, limit).unwrap_or(sym(prev).0);
                let w = j.wedges[prev].clone();
                record(&mut proposals, &w, ar, fr);
            }
            if n == 4 {
                let opposite = (fixed + 2) % 4;
                if curved.contains(&opposite) {
                    let wedge = j.wedges[opposite].clone();
                    let ar0 = proposals[wedge.right].iter().copied().fold(0.0, f64::max);
                    let al0 = proposals[wedge.left].iter().copied().fold(0.0, f64::max);
                    let vr = (ar0 - wedge.u_right).max(wedge.v.min(LEG_TOL));
                    let vl = (al0 - wedge.u_left).max(wedge.v.min(LEG_TOL));
                    let at = |g: f64| (g * vr + wedge.u_right, g * vl + wedge.u_left);
                    let mut gamma = 1.0;
                    let (r0, l0) = at(gamma);
                    if !radius_ok(&j, opposite, r0, l0, r_min) {
                        let mut hi = 2.0;
                        while !{
                            let (r, l) = at(hi);
                            radius_ok(&j, opposite, r, l, r_min)
                        } {
                            hi *= 2.0;
                            if hi * vr.max(vl) > limit {
                                return Err(Error::JunctionTooTight {
                                    vertex,
                                    detail: "opposite wedge cannot reach the radius".into(),
                                });
                            }
                        }
                        let mut lo = 1.0;
                        while (hi - lo) * vr.max(vl) > LEG_TOL {
                            let mid = 0.5 * (lo + hi);
                            let (r, l) = at(mid);
                            if radius_ok(&j, opposite, r, l, r_min) {
                                hi = mid;
                            } else {
                                lo = mid;
                            }
                        }
                        gamma = hi;
                    }
                    j.wedges[opposite].gamma = gamma;
                    let (r, l) = at(gamma);
                    record(&mut proposals, &wedge, r, l);
                }
            }
        }
    }

    // sides without any curved wedge keep their rim line clear of the
    // neighbouring bands
    let half_width = j
        .sides
        .iter()
        .map(|s| s.n_bundles as f64 * fiber_width / 2.0)
        .fold(0.0, f64::max);
    for i in 0..n {
        let a = proposals[i].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let a = if a.is_finite() { a } else { half_width };
        j.sides[i].a = a.max(0.0);
        j.sides[i].a_left = left_of[i];
        j.sides[i].a_right = right_of[i];
    }

    // bundles turning through a reflex wedge often cannot sit at the same
    // depth on both sides; keep every lane pair's tangent intersection in
    // front of both rim lines so such bows can still be built directly
    for &w in &curved {
        let wedge = j.wedges[w].clone();
        if !wedge.is_reflex() {
            continue;
        }
        let (dr, dl) = (j.sides[wedge.right].direction, j.sides[wedge.left].direction);
        for lr in 0..j.sides[wedge.right].n_bundles {
            for ll in 0..j.sides[wedge.left].n_bundles {
                let pr = j.rim_point_at(wedge.right, lr, 0.0);
                let pl = j.rim_point_at(wedge.left, ll, 0.0);
                let Some((s, t)) = line_intersection(pr, dr, pl, dl) else {
                    continue;
                };
                for (side, need) in [(wedge.right, s), (wedge.left, t)] {
                    let need = need + wedge.v;
                    let budget = REFLEX_BUDGET * graph.edge_length(j.sides[side].edge);
                    if need > 0.0 && need <= budget {
                        j.sides[side].a = j.sides[side].a.max(need);
                    }
                }
            }
        }
    }

    // raising a side lengthens one leg of its other wedge; re-check and
    // lengthen the short leg where that broke the radius
    for _ in 0..REPAIR_ROUNDS {
        let mut changed = false;
        for &w in &curved {
            let wedge = j.wedges[w].clone();
            let ar = j.sides[wedge.right].a;
            let al = j.sides[wedge.left].a;
            if radius_ok(&j, w, ar, al, r_min) {
                continue;
            }
            let leg_r = ar - wedge.u_right;
            let leg_l = al - wedge.u_left;
            let mut moved = false;
            if leg_l <= leg_r {
                if let Ok(a) = solve_free_leg(&j, w, true, ar, r_min, limit) {
                    if a > al {
                        j.sides[wedge.left].a = a;
                        moved = true;
                    }
                }
            } else if let Ok(a) = solve_free_leg(&j, w, false, al, r_min, limit) {
                if a > ar {
                    j.sides[wedge.right].a = a;
                    moved = true;
                }
            }
            changed |= moved;
            if !moved {
                // the short leg cannot fix it alone; grow both
                j.sides[wedge.left].a += LEG_TOL.max(0.05 * leg_l.abs());
                j.sides[wedge.right].a += LEG_TOL.max(0.05 * leg_r.abs());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for &w in &curved {
        let wedge = &j.wedges[w];
        if !radius_ok(&j, w, j.sides[wedge.right].a, j.sides[wedge.left].a, r_min) {
            return Err(Error::JunctionTooTight {
                vertex,
                detail: format!("wedge {w} still violates the radius after repair"),
            });
        }
    }
    j.set_rims();
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Vertex};
    use std::collections::BTreeMap;

    fn star(angles_deg: &[f64], targets: &[u32]) -> FiberGraph {
        let mut vertices = vec![Vertex { id: 0, position: Point2::ZERO }];
        let mut edges = Vec::new();
        for (i, (&a, &t)) in angles_deg.iter().zip(targets).enumerate() {
            vertices.push(Vertex {
                id: i + 1,
                position: Point2::from_angle(a.to_radians()) * 200.0,
            });
            edges.push(Edge { id: i, v1: 0, v2: i + 1, target: t });
        }
        FiberGraph::new(vertices, edges, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn rim_points_are_spaced_by_fiber_width() {
        let g = star(&[0.0, 120.0, 240.0], &[3, 2, 4]);
        let j = parameterize_junction(&g, 0, 2.0, 10.0).unwrap();
        for s in &j.sides {
            assert_eq!(s.rim.len(), s.n_bundles);
            for w in s.rim.windows(2) {
                assert!((w[0].distance(w[1]) - 2.0).abs() < 1e-12);
                // perpendicular to the side direction
                assert!((w[1] - w[0]).dot(s.direction).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_cross() {
        let g = star(&[0.0, 90.0, 180.0, 270.0], &[2, 2, 2, 2]);
        let j = parameterize_junction(&g, 0, 2.0, 10.0).unwrap();
        let a0 = j.sides[0].a;
        assert!(j.sides.iter().all(|s| (s.a - a0).abs() < 1e-3));
        assert!(j.wedges.iter().all(|w| (w.gamma - 1.0).abs() < 1e-12));
    }

    #[test]
    fn acute_wedge_is_fixed() {
        let g = star(&[0.0, 40.0, 200.0], &[2, 2, 2]);
        let j = parameterize_junction(&g, 0, 2.0, 10.0).unwrap();
        assert_eq!(j.fixed_wedge, Some(0));
    }

    #[test]
    fn five_edges_are_rejected() {
        let g = star(&[0.0, 70.0, 140.0, 210.0, 280.0], &[1; 5]);
        assert!(matches!(
            parameterize_junction(&g, 0, 2.0, 10.0),
            Err(Error::UnsupportedDegree { degree: 5, .. })
        ));
    }
}
