//! Which lane of each edge every loop instance occupies.
//!
//! Bundles sharing an edge are ordered by where their loops part ways:
//! walking both loops along the edge's direction, the one leaving the
//! first common junction further counter-clockwise lies on the left. Ties
//! are broken by walking backwards, then by loop and copy index.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FiberGraph, Sheet};

use super::junction::Junction;

/// One copy of a loop selected in a layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopInstance {
    pub loop_index: usize,
    pub loop_id: usize,
    pub copy: usize,
    pub closed: bool,
    /// `(edge, from, to)` per traversal.
    pub traversals: Vec<(usize, usize, usize)>,
}

impl LoopInstance {
    fn next(&self, k: usize, forward: bool) -> Option<usize> {
        let m = self.traversals.len();
        if forward {
            if k + 1 < m {
                Some(k + 1)
            } else if self.closed {
                Some(0)
            } else {
                None
            }
        } else if k > 0 {
            Some(k - 1)
        } else if self.closed {
            Some(m - 1)
        } else {
            None
        }
    }

    fn head(&self, k: usize, forward: bool) -> usize {
        let (_, from, to) = self.traversals[k];
        if forward {
            to
        } else {
            from
        }
    }
}

/// Copies `0..x[l]` of every loop of the sheet, loop by loop.
pub fn loop_instances(graph: &FiberGraph, sheet: &Sheet, x: &[u64]) -> Vec<LoopInstance> {
    let mut out = Vec::new();
    for (li, lp) in sheet.loops.iter().enumerate() {
        let traversals: Vec<_> = (0..lp.len())
            .map(|k| {
                let (f, t) = lp.traversal(graph, k);
                (lp.edges[k], f, t)
            })
            .collect();
        for copy in 0..x.get(li).copied().unwrap_or(0) as usize {
            out.push(LoopInstance {
                loop_index: li,
                loop_id: lp.id,
                copy,
                closed: lp.closed,
                traversals: traversals.clone(),
            });
        }
    }
    out
}

/// Where a bundle goes at one end of an edge, seen along the edge's
/// canonical direction `v1 -> v2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndClass {
    /// Edge bow into the wedge on the left.
    Left,
    Right,
    /// Straight pass or crossing.
    Center,
    /// Open loop end.
    Terminal,
}

impl EndClass {
    fn flipped(self) -> Self {
        match self {
            EndClass::Left => EndClass::Right,
            EndClass::Right => EndClass::Left,
            c => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pass {
    instance: usize,
    k: usize,
    /// Travels `v1 -> v2`.
    forward: bool,
}

/// Lane of every traversal plus per-edge occupancy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneAssignment {
    pub instances: Vec<LoopInstance>,
    /// Canonical lane (leftmost looking `v1 -> v2` is 0) per instance and
    /// traversal.
    pub lanes: Vec<Vec<usize>>,
    /// Per edge and canonical lane, the `(instance, traversal)` using it.
    pub occupancy: Vec<Vec<Option<(usize, usize)>>>,
}

fn ccw(from: f64, to: f64) -> f64 {
    let a = to - from;
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

struct Ctx<'a> {
    graph: &'a FiberGraph,
    junctions: &'a [Option<Junction>],
    instances: &'a [LoopInstance],
}

impl Ctx<'_> {
    /// Order of `p` and `q` relative to travel along the edge in direction
    /// `forward`, or `None` if their loops never part that way.
    fn walk(&self, edge: usize, p: Pass, q: Pass, forward: bool) -> Option<Ordering> {
        let (ip, iq) = (&self.instances[p.instance], &self.instances[q.instance]);
        let (dp, dq) = (p.forward == forward, q.forward == forward);
        let (mut kp, mut kq, mut ec) = (p.k, q.k, edge);
        let steps = ip.traversals.len() + iq.traversals.len() + 2;
        for _ in 0..steps {
            let junction = ip.head(kp, dp);
            if iq.head(kq, dq) != junction {
                return None;
            }
            let np = ip.next(kp, dp)?;
            let nq = iq.next(kq, dq)?;
            let (ep, eq) = (ip.traversals[np].0, iq.traversals[nq].0);
            if ep != eq {
                let r = self.graph.direction(ec, junction).angle();
                let tp = ccw(r, self.graph.direction(ep, junction).angle());
                let tq = ccw(r, self.graph.direction(eq, junction).angle());
                // larger angle from the way back means further left
                return Some(tq.total_cmp(&tp).then(ep.cmp(&eq)));
            }
            kp = np;
            kq = nq;
            ec = ep;
        }
        None
    }

    fn compare(&self, edge: usize, p: Pass, q: Pass) -> Ordering {
        if let Some(o) = self.walk(edge, p, q, true) {
            return o;
        }
        if let Some(o) = self.walk(edge, p, q, false) {
            return o.reverse();
        }
        let key = |x: Pass| {
            let i = &self.instances[x.instance];
            (i.loop_id, i.copy, x.k)
        };
        let o = key(p).cmp(&key(q));
        if p.forward {
            o
        } else {
            o.reverse()
        }
    }

    fn side_class(&self, vertex: usize, edge: usize, next: Option<usize>) -> EndClass {
        let Some(f) = next else {
            return EndClass::Terminal;
        };
        let Some(j) = self.junctions[vertex].as_ref() else {
            return EndClass::Center;
        };
        let (Some(a), Some(b)) = (j.side_of_edge(edge), j.side_of_edge(f)) else {
            return EndClass::Center;
        };
        match j.wedge_between(a, b) {
            Some(w) if !j.wedges[w].is_straight() => {
                if j.wedge_lane(w, a) == 0 {
                    EndClass::Left
                } else {
                    EndClass::Right
                }
            }
            _ => EndClass::Center,
        }
    }

    /// Canonical classes at the `v1` and `v2` ends.
    fn classes(&self, edge: usize, p: Pass) -> (EndClass, EndClass) {
        let inst = &self.instances[p.instance];
        let e = &self.graph.edges[edge];
        let at = |forward: bool| {
            let next = inst.next(p.k, forward).map(|k| inst.traversals[k].0);
            let vertex = inst.head(p.k, forward);
            self.side_class(vertex, edge, next)
        };
        // walking the loop forward reaches `to`
        let (end_to, end_from) = (at(true), at(false));
        let (_, from, _) = inst.traversals[p.k];
        let (c1, c2) = if from == e.v1 {
            (end_from, end_to)
        } else {
            (end_to, end_from)
        };
        (c1, c2.flipped())
    }
}

fn place(classes: &[(EndClass, EndClass)], n: usize) -> Vec<usize> {
    let m = classes.len();
    let is = |c: &(EndClass, EndClass), k: EndClass| c.0 == k || c.1 == k;
    let left = classes.iter().take_while(|c| is(c, EndClass::Left)).count();
    let right = classes[left..]
        .iter()
        .rev()
        .take_while(|c| is(c, EndClass::Right))
        .count();
    let mid = m - left - right;
    let start = ((n - mid) / 2).clamp(left, n - right - mid);
    (0..m)
        .map(|i| {
            if i < left {
                i
            } else if i < left + mid {
                start + (i - left)
            } else {
                n - (m - i)
            }
        })
        .collect()
}

/// Orders the bundles on every edge and assigns lanes so that bundles
/// turning into a wedge hug it and straight passes stay central.
pub fn assign_lanes(
    graph: &FiberGraph,
    junctions: &[Option<Junction>],
    instances: Vec<LoopInstance>,
) -> Result<LaneAssignment> {
    let ctx = Ctx {
        graph,
        junctions,
        instances: &instances,
    };
    let n_edges = graph.n_edges();
    let mut per_edge: Vec<Vec<Pass>> = vec![Vec::new(); n_edges];
    for (i, inst) in instances.iter().enumerate() {
        for (k, &(e, from, _)) in inst.traversals.iter().enumerate() {
            per_edge[e].push(Pass {
                instance: i,
                k,
                forward: from == graph.edges[e].v1,
            });
        }
    }
    let mut lanes: Vec<Vec<usize>> = instances
        .iter()
        .map(|i| vec![0; i.traversals.len()])
        .collect();
    let mut occupancy: Vec<Vec<Option<(usize, usize)>>> = graph
        .edges
        .iter()
        .map(|e| vec![None; e.target as usize])
        .collect();

    let is_stub = |e: usize| {
        let edge = &graph.edges[e];
        graph.degree(edge.v1) == 1 || graph.degree(edge.v2) == 1
    };
    let mut order: Vec<usize> = (0..n_edges).collect();
    order.sort_by_key(|&e| (is_stub(e), e));

    for e in order {
        let mut passes = std::mem::take(&mut per_edge[e]);
        let n = graph.edges[e].target as usize;
        if passes.len() > n {
            return Err(Error::Layout {
                vertex: graph.edges[e].v1,
                detail: format!(
                    "edge {e} carries {} bundles but has {n} lanes",
                    passes.len()
                ),
            });
        }
        // insertion sort keeps the comparator's tie rules deterministic
        for i in 1..passes.len() {
            let mut j = i;
            while j > 0 && ctx.compare(e, passes[j], passes[j - 1]) == Ordering::Less {
                passes.swap(j, j - 1);
                j -= 1;
            }
        }
        let classes: Vec<_> = passes.iter().map(|&p| ctx.classes(e, p)).collect();
        let mut placed = place(&classes, n);
        if is_stub(e) {
            align_stub(&ctx, e, &passes, &classes, &lanes, &mut placed);
        }
        for (p, &lane) in passes.iter().zip(&placed) {
            lanes[p.instance][p.k] = lane;
            occupancy[e][lane] = Some((p.instance, p.k));
        }
    }
    harmonize_turns(graph, junctions, &instances, &mut lanes, &mut occupancy);
    Ok(LaneAssignment {
        instances,
        lanes,
        occupancy,
    })
}

const HARMONIZE_ROUNDS: usize = 64;

/// Lane of `edge` counted from the rim side at `vertex`.
fn junction_lane(graph: &FiberGraph, edge: usize, vertex: usize, canonical: usize) -> usize {
    let e = &graph.edges[edge];
    if vertex == e.v1 {
        canonical
    } else {
        e.target as usize - 1 - canonical
    }
}

/// Moves the bundle at `(instance, k)` to canonical lane `to` if that lane
/// is free and no other bundle sits in between.
fn try_move(
    graph: &FiberGraph,
    lanes: &mut [Vec<usize>],
    occupancy: &mut [Vec<Option<(usize, usize)>>],
    instance: usize,
    k: usize,
    edge: usize,
    to: usize,
) -> bool {
    let from = lanes[instance][k];
    if to >= graph.edges[edge].target as usize || from == to {
        return false;
    }
    let (lo, hi) = (from.min(to), from.max(to));
    if (lo..=hi).any(|l| l != from && occupancy[edge][l].is_some()) {
        return false;
    }
    occupancy[edge][from] = None;
    occupancy[edge][to] = Some((instance, k));
    lanes[instance][k] = to;
    true
}

/// Edge bows only stay parallel to their family reference when a bundle
/// keeps the same distance from the wedge on both sides. Where the first
/// placement disagrees, pull the deeper end towards the wedge; whatever
/// is still off afterwards gets its shallower end pushed out. Each phase
/// moves lanes one way only, so both terminate.
fn harmonize_turns(
    graph: &FiberGraph,
    junctions: &[Option<Junction>],
    instances: &[LoopInstance],
    lanes: &mut [Vec<usize>],
    occupancy: &mut [Vec<Option<(usize, usize)>>],
) {
    for inward in [true, false] {
        for _ in 0..HARMONIZE_ROUNDS {
            let mut moved = false;
            for (i, inst) in instances.iter().enumerate() {
                for k in 0..inst.traversals.len() {
                    moved |= harmonize_one(graph, junctions, inst, i, k, inward, lanes, occupancy);
                }
            }
            if !moved {
                break;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn harmonize_one(
    graph: &FiberGraph,
    junctions: &[Option<Junction>],
    inst: &LoopInstance,
    i: usize,
    k: usize,
    inward: bool,
    lanes: &mut [Vec<usize>],
    occupancy: &mut [Vec<Option<(usize, usize)>>],
) -> bool {
    let Some(nk) = inst.next(k, true) else {
        return false;
    };
    let (e1, _, v) = inst.traversals[k];
    let e2 = inst.traversals[nk].0;
    let Some(j) = junctions[v].as_ref() else {
        return false;
    };
    let (Some(s1), Some(s2)) = (j.side_of_edge(e1), j.side_of_edge(e2)) else {
        return false;
    };
    let Some(w) = j.wedge_between(s1, s2) else {
        return false;
    };
    if j.wedges[w].is_straight() {
        return false;
    }
    let depth = |side: usize, edge: usize, canonical: usize| {
        j.turn_depth(w, side, junction_lane(graph, edge, v, canonical))
    };
    // canonical lane on `edge` at depth `d` from the inside of the turn
    let lane_at = |side: usize, edge: usize, d: usize| {
        j.lane_at_depth(w, side, d).map(|l| junction_lane(graph, edge, v, l))
    };
    let d1 = depth(s1, e1, lanes[i][k]);
    let d2 = depth(s2, e2, lanes[i][nk]);
    if d1 == d2 {
        return false;
    }
    let ends = [(k, s1, e1, d1), (nk, s2, e2, d2)];
    let (shallow, deep) = if d1 < d2 { (ends[0], ends[1]) } else { (ends[1], ends[0]) };
    let (mover, target) = if inward { (deep, shallow.3) } else { (shallow, deep.3) };
    lane_at(mover.1, mover.2, target)
        .is_some_and(|to| try_move(graph, lanes, occupancy, i, mover.0, mover.2, to))
}

/// Shifts the central group of a stub edge so that a straight pass lines
/// up with its lane on the continuing edge.
fn align_stub(
    ctx: &Ctx,
    e: usize,
    passes: &[Pass],
    classes: &[(EndClass, EndClass)],
    lanes: &[Vec<usize>],
    placed: &mut [usize],
) {
    let graph = ctx.graph;
    let edge = &graph.edges[e];
    let n = edge.target as usize;
    let junction_end = if graph.degree(edge.v1) == 1 { edge.v2 } else { edge.v1 };
    let Some(j) = ctx.junctions[junction_end].as_ref() else {
        return;
    };
    let fw = j.fiber_width;
    for (idx, p) in passes.iter().enumerate() {
        if classes[idx].0 != EndClass::Center && classes[idx].1 != EndClass::Center {
            continue;
        }
        let inst = &ctx.instances[p.instance];
        let toward = inst.head(p.k, true) == junction_end;
        let Some(nk) = inst.next(p.k, toward) else {
            continue;
        };
        let f = inst.traversals[nk].0;
        if is_stub_edge(graph, f) {
            continue;
        }
        let (Some(sf), Some(se)) = (j.side_of_edge(f), j.side_of_edge(e)) else {
            continue;
        };
        let fe = &graph.edges[f];
        let canon = lanes[p.instance][nk];
        let jf = if junction_end == fe.v1 { canon } else { fe.target as usize - 1 - canon };
        // lateral position of the continuing lane, expressed on this side
        let rim = j.rim_point_at(sf, jf, 0.0) - j.center;
        let off = rim.dot(j.sides[se].direction.perp());
        let je = (n as f64 - 1.0) / 2.0 - off / fw;
        if (je - je.round()).abs() > 1e-9 || je < -0.5 || je > n as f64 - 0.5 {
            return;
        }
        let je = je.round() as usize;
        let want = if junction_end == edge.v1 { je } else { n - 1 - je };
        let shift = want as i64 - placed[idx] as i64;
        // shift the whole central run, if it stays clear of the others
        let left = classes
            .iter()
            .take_while(|c| c.0 == EndClass::Left || c.1 == EndClass::Left)
            .count();
        let mid_end = placed.len()
            - classes[left..]
                .iter()
                .rev()
                .take_while(|c| c.0 == EndClass::Right || c.1 == EndClass::Right)
                .count();
        let lo = if left > 0 { placed[left - 1] as i64 + 1 } else { 0 };
        let hi = if mid_end < placed.len() { placed[mid_end] as i64 - 1 } else { n as i64 - 1 };
        let first = placed[left] as i64 + shift;
        let last = placed[mid_end - 1] as i64 + shift;
        if first >= lo && last <= hi {
            for l in &mut placed[left..mid_end] {
                *l = (*l as i64 + shift) as usize;
            }
        }
        return;
    }
}

fn is_stub_edge(graph: &FiberGraph, e: usize) -> bool {
    let edge = &graph.edges[e];
    graph.degree(edge.v1) == 1 || graph.degree(edge.v2) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_hug_the_extremes() {
        use EndClass::*;
        let c = [(Left, Center), (Center, Center), (Right, Terminal)];
        assert_eq!(place(&c, 6), vec![0, 2, 5]);
        assert_eq!(place(&c, 3), vec![0, 1, 2]);
        let mid = [(Center, Center)];
        assert_eq!(place(&mid, 5), vec![2]);
    }
}
