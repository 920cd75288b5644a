//! Concrete bundle paths for one layer: straight segments between rim
//! lines, bows through junctions, interlooping connectors and fill.

pub mod bows;
pub mod check;
pub mod interloop;
pub mod junction;
pub mod lanes;

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::bezier::{Bezier, Curve, Point2};
use crate::error::{Error, Result};
use crate::graph::FiberGraph;
use crate::pattern::LayerSolution;

pub use bows::{Bow, BowKind};
pub use check::{check_plan, CheckReport, Violation};
pub use interloop::{connector_length, Connector};
pub use junction::{compute_sides, parameterize_junction, Junction, Side, Wedge};
pub use lanes::{assign_lanes, loop_instances, LaneAssignment, LoopInstance};

use bows::RimRef;

/// Enlargement applied to a junction's rim distances when its bows fail
/// the check.
pub const RETRY_SCALE: f64 = 1.25;
pub const MAX_RETRIES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub fiber_width: f64,
    pub min_radius: f64,
}

impl PlanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fiber_width > 0.0 && self.fiber_width.is_finite()) {
            return Err(Error::Validation("fiber_width must be positive".into()));
        }
        if !(self.min_radius > 0.0 && self.min_radius.is_finite()) {
            return Err(Error::Validation("min_radius must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StraightSegment {
    pub edge: usize,
    pub lane: usize,
    pub instance: usize,
    pub start: Point2,
    pub end: Point2,
}

/// One continuous bundle: a loop instance, or several interlooped ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundlePath {
    pub loop_id: usize,
    pub instances: Vec<usize>,
    pub closed: bool,
    pub points: Vec<Point2>,
}

impl BundlePath {
    /// First and last point of an open path.
    pub fn endpoints(&self) -> Option<(Point2, Point2)> {
        if self.closed {
            None
        } else {
            Some((*self.points.first()?, *self.points.last()?))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillKind {
    /// Unused lanes along an edge.
    Lanes,
    /// Space inside a junction between the rim lines.
    Junction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillPolygon {
    pub kind: FillKind,
    /// Edge or vertex id, by kind.
    pub owner: usize,
    pub points: Vec<Point2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPathPlan {
    pub layer: usize,
    pub sheet: usize,
    pub x: Vec<u64>,
    /// Junction geometry as used, indexed by vertex.
    pub junctions: Vec<Option<Junction>>,
    pub instances: Vec<LoopInstance>,
    pub segments: Vec<StraightSegment>,
    pub bows: Vec<Bow>,
    pub connectors: Vec<Connector>,
    pub paths: Vec<BundlePath>,
    pub fills: Vec<FillPolygon>,
    pub warnings: Vec<String>,
}

/// Parameterized geometry of every vertex. Stubs get a rim line through
/// the vertex itself; isolated vertices none.
pub fn junction_set(graph: &FiberGraph, config: &PlanConfig) -> Result<Vec<Option<Junction>>> {
    config.validate()?;
    (0..graph.n_vertices())
        .map(|v| match graph.degree(v) {
            0 => Ok(None),
            1 => compute_sides(graph, v, config.fiber_width).map(Some),
            _ => parameterize_junction(graph, v, config.fiber_width, config.min_radius).map(Some),
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Member {
    instance: usize,
    k: usize,
    connection: usize,
    from: RimRef,
    to: RimRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum FamilyKind {
    Edge,
    Straight,
    Crossing,
}

fn canonical_to_side_lane(graph: &FiberGraph, vertex: usize, edge: usize, lane: usize) -> usize {
    let e = &graph.edges[edge];
    if vertex == e.v1 {
        lane
    } else {
        e.target as usize - 1 - lane
    }
}

struct Assembler<'a> {
    graph: &'a FiberGraph,
    junctions: &'a [Option<Junction>],
    config: PlanConfig,
}

impl Assembler<'_> {
    fn junction(&self, v: usize) -> &Junction {
        self.junctions[v].as_ref().expect("vertex on a loop has a junction")
    }

    fn rim(&self, vertex: usize, edge: usize, lane: usize) -> Point2 {
        let j = self.junction(vertex);
        let side = j.side_of_edge(edge).expect("incident edge");
        j.rim_point(side, canonical_to_side_lane(self.graph, vertex, edge, lane))
    }

    fn check_edge_lengths(&self) -> Result<()> {
        for e in &self.graph.edges {
            let a = |v: usize| {
                self.junctions[v]
                    .as_ref()
                    .and_then(|j| j.side_of_edge(e.id).map(|s| j.sides[s].a))
                    .unwrap_or(0.0)
            };
            let len = self.graph.edge_length(e.id);
            if a(e.v1) + a(e.v2) >= len - 1e-9 {
                return Err(Error::Geometry {
                    vertex: e.v1,
                    detail: format!(
                        "edge {} ({len:.3} mm) is shorter than its rim distances {:.3} + {:.3}",
                        e.id,
                        a(e.v1),
                        a(e.v2)
                    ),
                });
            }
        }
        Ok(())
    }

    fn family_kind(&self, j: &Junction, a: usize, b: usize) -> (FamilyKind, Option<usize>) {
        match j.wedge_between(a, b) {
            Some(w) if !j.wedges[w].is_straight() => (FamilyKind::Edge, Some(w)),
            Some(_) => (FamilyKind::Straight, None),
            None if j.degree() == 2 => (FamilyKind::Straight, None),
            None => (FamilyKind::Crossing, None),
        }
    }

    fn far_points(&self, j: &Junction, a: usize, b: usize) -> [Point2; 2] {
        let p = |s: usize| self.graph.vertices[j.sides[s].far].position;
        [p(a), p(b)]
    }

    fn solitary(&self, j: &Junction, a: RimRef, b: RimRef) -> Result<Curve> {
        bows::build_solitary_bow(j, self.far_points(j, a.side, b.side), a, b)
    }

    /// Builds all bows of a junction: edge families first, then straight
    /// passes, then crossings, which lean on the realized edge bows.
    fn junction_bows(&self, vertex: usize, members: Vec<Member>, out: &mut Vec<Bow>) -> Result<()> {
        let j = self.junction(vertex);
        let mut families: BTreeMap<(FamilyKind, usize, usize), Vec<Member>> = BTreeMap::new();
        for m in members {
            let (a, b) = (m.from.side.min(m.to.side), m.from.side.max(m.to.side));
            let (kind, _) = self.family_kind(j, a, b);
            families.entry((kind, a, b)).or_default().push(m);
        }
        // chord midpoint of the bow next to the crossing, per wedge
        let mut innermost: BTreeMap<usize, (usize, Point2)> = BTreeMap::new();

        for ((kind, a, b), mut list) in families {
            let oriented = |m: &Member| -> (RimRef, RimRef) {
                if m.from.side == a {
                    (m.from, m.to)
                } else {
                    (m.to, m.from)
                }
            };
            let wedge = self.family_kind(j, a, b).1;
            let gap = |m: &Member| -> usize {
                let (ra, rb) = oriented(m);
                match wedge {
                    Some(w) => {
                        ra.lane.abs_diff(j.wedge_lane(w, a)) + rb.lane.abs_diff(j.wedge_lane(w, b))
                    }
                    None => ra.lane,
                }
            };
            list.sort_by_key(|m| (gap(m), oriented(m).0.lane, m.instance, m.k));

            let build = |ra: RimRef, rb: RimRef, innermost: &BTreeMap<usize, (usize, Point2)>| -> Result<(BowKind, Curve)> {
                match kind {
                    FamilyKind::Edge => Ok(match bows::build_edge_bow(j, ra, rb) {
                        Some(c) => (BowKind::Edge, c),
                        None => (BowKind::Solitary, self.solitary(j, ra, rb)?),
                    }),
                    FamilyKind::Straight => Ok((BowKind::Solitary, self.solitary(j, ra, rb)?)),
                    FamilyKind::Crossing => {
                        let d = j.degree();
                        let pairs = [[a, b], [(a + d - 1) % d, (b + d - 1) % d]];
                        for pair in pairs {
                            let h = pair.map(|w| match innermost.get(&w) {
                                Some(&(_, p)) => p,
                                None => {
                                    let r = j.rim_point(j.wedges[w].right, j.wedge_lane(w, j.wedges[w].right));
                                    let l = j.rim_point(j.wedges[w].left, j.wedge_lane(w, j.wedges[w].left));
                                    r.midpoint(l)
                                }
                            });
                            if let Some(c) = bows::build_s_bow(j, ra, rb, h) {
                                return Ok((BowKind::SShape, c));
                            }
                        }
                        Ok((BowKind::Solitary, self.solitary(j, ra, rb)?))
                    }
                }
            };

            // edge families offset from the wedge-adjacent lanes' bow even
            // when no bundle runs there
            let mut reference: Option<(BowKind, Curve)> = match (kind, wedge) {
                (FamilyKind::Edge, Some(w)) => {
                    let wd = &j.wedges[w];
                    j.reference_curve(w, j.sides[wd.right].a, j.sides[wd.left].a)
                        .map(|c| {
                            let c = if wd.right == a { c } else { c.reversed() };
                            (BowKind::Edge, c)
                        })
                }
                _ => None,
            };
            for m in &list {
                let (ra, rb) = oriented(m);
                let start = j.rim_point(ra.side, ra.lane);
                let end = j.rim_point(rb.side, rb.lane);
                let source = out.len();
                let offset = reference.as_ref().and_then(|(k, c)| {
                    bows::offset_to(c, start, end, source).map(|p| (*k, c.clone(), p))
                });
                let (bow_kind, curve, mut path) = match offset {
                    Some(x) => x,
                    None => {
                        let (k, c) = build(ra, rb, &innermost)?;
                        let p = bows::sample(&c, source);
                        reference = Some((k, c.clone()));
                        (k, c, p)
                    }
                };
                if m.from.side != a {
                    path.points.reverse();
                }
                if let (FamilyKind::Edge, Some(w)) = (kind, wedge) {
                    let g = gap(m);
                    let e = innermost.entry(w).or_insert((g, start.midpoint(end)));
                    if g >= e.0 {
                        *e = (g, start.midpoint(end));
                    }
                }
                out.push(Bow {
                    kind: bow_kind,
                    junction: vertex,
                    connection: m.connection,
                    instance: m.instance,
                    traversal: m.k,
                    from_edge: j.sides[m.from.side].edge,
                    from_lane: m.from.lane,
                    to_edge: j.sides[m.to.side].edge,
                    to_lane: m.to.lane,
                    reference: curve,
                    path,
                });
            }
        }
        Ok(())
    }

    fn assemble(&self, layer: usize, sheet: usize, x: &[u64]) -> Result<LayerPathPlan> {
        let graph = self.graph;
        let fw = self.config.fiber_width;
        let sheet_ref = graph
            .sheets
            .get(sheet)
            .ok_or_else(|| Error::Validation(format!("sheet {sheet} does not exist")))?;
        if x.len() != sheet_ref.loops.len() {
            return Err(Error::Validation(format!(
                "configuration has {} entries, sheet {sheet} has {} loops",
                x.len(),
                sheet_ref.loops.len()
            )));
        }
        self.check_edge_lengths()?;
        let instances = loop_instances(graph, sheet_ref, x);
        let assignment = assign_lanes(graph, self.junctions, instances)?;
        let instances = &assignment.instances;
        let lane = |i: usize, k: usize| assignment.lanes[i][k];

        // bows, grouped per junction
        let mut members: BTreeMap<usize, Vec<Member>> = BTreeMap::new();
        for (i, inst) in instances.iter().enumerate() {
            let lp = &sheet_ref.loops[inst.loop_index];
            for (k, &c) in lp.connections.iter().enumerate() {
                let k2 = (k + 1) % inst.traversals.len();
                let (e_in, _, vertex) = inst.traversals[k];
                let (e_out, _, _) = inst.traversals[k2];
                let j = self.junction(vertex);
                members.entry(vertex).or_default().push(Member {
                    instance: i,
                    k,
                    connection: c,
                    from: RimRef {
                        side: j.side_of_edge(e_in).expect("incident"),
                        lane: canonical_to_side_lane(graph, vertex, e_in, lane(i, k)),
                    },
                    to: RimRef {
                        side: j.side_of_edge(e_out).expect("incident"),
                        lane: canonical_to_side_lane(graph, vertex, e_out, lane(i, k2)),
                    },
                });
            }
        }
        let mut bow_list = Vec::new();
        for (vertex, list) in members {
            self.junction_bows(vertex, list, &mut bow_list)?;
        }
        let bow_of: BTreeMap<(usize, usize), usize> = bow_list
            .iter()
            .enumerate()
            .map(|(idx, b)| ((b.instance, b.traversal), idx))
            .collect();

        let mut segments = Vec::new();
        for (i, inst) in instances.iter().enumerate() {
            for (k, &(e, from, to)) in inst.traversals.iter().enumerate() {
                segments.push(StraightSegment {
                    edge: e,
                    lane: lane(i, k),
                    instance: i,
                    start: self.rim(from, e, lane(i, k)),
                    end: self.rim(to, e, lane(i, k)),
                });
            }
        }
        let seg_index = |i: usize, k: usize| -> &StraightSegment {
            let base: usize = instances[..i].iter().map(|x| x.traversals.len()).sum();
            &segments[base + k]
        };

        // one ring or open path per instance, starting at traversal `start`
        let instance_points = |i: usize, start: usize| -> Vec<Point2> {
            let inst = &instances[i];
            let m = inst.traversals.len();
            let mut pts = vec![seg_index(i, start).start];
            let n_bows = if inst.closed { m } else { m - 1 };
            for step in 0..n_bows {
                let k = (start + step) % m;
                let bow = &bow_list[bow_of[&(i, k)]];
                push_dedup(&mut pts, &bow.path.points);
            }
            if !inst.closed {
                push_dedup(&mut pts, &[seg_index(i, m - 1).end]);
            } else if pts.len() > 1 && pts.last().unwrap().distance(pts[0]) < 1e-9 {
                pts.pop();
            }
            pts
        };

        let mut paths = Vec::new();
        let mut connectors = Vec::new();
        let mut warnings = Vec::new();
        let mut by_loop: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, inst) in instances.iter().enumerate() {
            by_loop.entry(inst.loop_index).or_default().push(i);
        }
        for (loop_index, rings) in by_loop {
            let lp = &sheet_ref.loops[loop_index];
            if !lp.closed || rings.len() < 2 {
                for &i in &rings {
                    paths.push(BundlePath {
                        loop_id: lp.id,
                        instances: vec![i],
                        closed: lp.closed,
                        points: instance_points(i, 0),
                    });
                }
                continue;
            }
            let count = rings.len();
            let b = connector_length(fw, self.config.min_radius, count - 2)?;
            // longest straight segment of the loop
            let m = lp.len();
            let kstar = (0..m)
                .max_by(|&p, &q| {
                    let lp_ = seg_index(rings[0], p);
                    let lq = seg_index(rings[0], q);
                    lp_.start
                        .distance(lp_.end)
                        .total_cmp(&lq.start.distance(lq.end))
                        .then(q.cmp(&p))
                })
                .expect("loops are non-empty");
            let s0 = seg_index(rings[0], kstar);
            let length = s0.start.distance(s0.end);
            if length < 2.0 * b {
                warnings.push(format!(
                    "loop {}: longest straight segment ({length:.3} mm) is shorter than the \
                     connector ({:.3} mm); {count} rings left separate",
                    lp.id,
                    2.0 * b
                ));
                for &i in &rings {
                    paths.push(BundlePath {
                        loop_id: lp.id,
                        instances: vec![i],
                        closed: true,
                        points: instance_points(i, 0),
                    });
                }
                continue;
            }
            let mut rings = rings.clone();
            rings.sort_by_key(|&i| lane(i, kstar));
            let along = (s0.end - s0.start).normalized();
            let lateral = (seg_index(rings[1], kstar).start - seg_index(rings[0], kstar).start)
                .normalized();
            let cut = 0.5 * length - b;
            let origin = seg_index(rings[0], kstar).start + along * cut;
            let lines = interloop::place_connectors(origin, along, lateral, b, fw, count - 1)?;
            let mut merged: Vec<Point2> = Vec::new();
            for (r, &i) in rings.iter().enumerate() {
                let seg = seg_index(i, kstar);
                let mut pts = instance_points(i, kstar);
                pts[0] = seg.start + along * (cut + 2.0 * b);
                pts.push(seg.start);
                pts.push(seg.start + along * cut);
                push_dedup(&mut merged, &pts);
                if r + 1 < count {
                    push_dedup(&mut merged, &lines[r]);
                }
            }
            for (r, line) in lines.into_iter().enumerate() {
                connectors.push(Connector {
                    loop_id: lp.id,
                    edge: s0.edge,
                    index: r,
                    b,
                    points: line,
                });
            }
            paths.push(BundlePath {
                loop_id: lp.id,
                instances: rings,
                closed: false,
                points: merged,
            });
        }

        let fills = self.fills(&assignment);
        Ok(LayerPathPlan {
            layer,
            sheet,
            x: x.to_vec(),
            junctions: self.junctions.to_vec(),
            instances: assignment.instances.clone(),
            segments,
            bows: bow_list,
            connectors,
            paths,
            fills,
            warnings,
        })
    }

    fn fills(&self, assignment: &LaneAssignment) -> Vec<FillPolygon> {
        let graph = self.graph;
        let fw = self.config.fiber_width;
        let mut out = Vec::new();
        for e in &graph.edges {
            let occ = &assignment.occupancy[e.id];
            let n = occ.len();
            let p1 = graph.vertices[e.v1].position;
            let p2 = graph.vertices[e.v2].position;
            let d = (p2 - p1).normalized();
            let nrm = d.perp();
            let a = |v: usize| {
                self.junctions[v]
                    .as_ref()
                    .and_then(|j| j.side_of_edge(e.id).map(|s| j.sides[s].a))
                    .unwrap_or(0.0)
            };
            let (a1, a2) = (a(e.v1), a(e.v2));
            let offset = |l: usize| ((n as f64 - 1.0) / 2.0 - l as f64) * fw;
            let mut l = 0;
            while l < n {
                if occ[l].is_some() {
                    l += 1;
                    continue;
                }
                let first = l;
                while l < n && occ[l].is_none() {
                    l += 1;
                }
                let top = offset(first) + fw / 2.0;
                let bottom = offset(l - 1) - fw / 2.0;
                let s = p1 + d * a1;
                let t = p2 - d * a2;
                out.push(FillPolygon {
                    kind: FillKind::Lanes,
                    owner: e.id,
                    points: vec![s + nrm * top, t + nrm * top, t + nrm * bottom, s + nrm * bottom],
                });
            }
        }
        for j in self.junctions.iter().flatten() {
            if j.degree() < 3 {
                continue;
            }
            let mut pts = Vec::new();
            for s in &j.sides {
                let half = s.n_bundles as f64 * fw / 2.0;
                let base = j.center + s.direction * s.a;
                pts.push(base - s.direction.perp() * half);
                pts.push(base + s.direction.perp() * half);
            }
            out.push(FillPolygon {
                kind: FillKind::Junction,
                owner: j.vertex,
                points: pts,
            });
        }
        out
    }
}

fn push_dedup(out: &mut Vec<Point2>, pts: &[Point2]) {
    for &p in pts {
        match out.last() {
            Some(&q) if q.distance(p) < 1e-9 => {}
            _ => out.push(p),
        }
    }
}

/// Assembles one layer with the given junction geometry, without retries.
pub fn assemble_layer(
    graph: &FiberGraph,
    junctions: &[Option<Junction>],
    layer: usize,
    sheet: usize,
    x: &[u64],
    config: &PlanConfig,
) -> Result<LayerPathPlan> {
    config.validate()?;
    Assembler {
        graph,
        junctions,
        config: *config,
    }
    .assemble(layer, sheet, x)
}

/// Plans layers of one graph, reusing junction geometry and plans of
/// repeated patterns.
#[derive(Debug)]
pub struct Planner {
    graph: FiberGraph,
    config: PlanConfig,
    junctions: Vec<Option<Junction>>,
    cache: Mutex<BTreeMap<(usize, Vec<u64>), (LayerPathPlan, CheckReport)>>,
}

impl Planner {
    pub fn new(graph: &FiberGraph, config: PlanConfig) -> Result<Self> {
        let junctions = junction_set(graph, &config)?;
        Ok(Planner {
            graph: graph.clone(),
            config,
            junctions,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn config(&self) -> &PlanConfig {
        &self.config
    }

    pub fn graph(&self) -> &FiberGraph {
        &self.graph
    }

    pub fn junctions(&self) -> &[Option<Junction>] {
        &self.junctions
    }

    /// Plan and check report for a layer. Junctions whose bows fail the
    /// check get their rim distances enlarged and the layer is rebuilt, a
    /// few times at most; remaining violations are reported, not raised.
    pub fn plan(&self, layer: usize, sheet: usize, x: &[u64]) -> Result<(LayerPathPlan, CheckReport)> {
        let key = (sheet, x.to_vec());
        if let Some((plan, report)) = self.cache.lock().expect("cache poisoned").get(&key) {
            let mut plan = plan.clone();
            plan.layer = layer;
            return Ok((plan, report.clone()));
        }
        let mut junctions = self.junctions.clone();
        let mut plan = assemble_layer(&self.graph, &junctions, layer, sheet, x, &self.config)?;
        let mut report = check_plan(&plan, self.config.min_radius, self.config.fiber_width);
        for _ in 0..MAX_RETRIES {
            let bad = report.junctions();
            if bad.is_empty() {
                break;
            }
            let mut trial = junctions.clone();
            for v in bad {
                if let Some(j) = trial[v].as_mut() {
                    *j = j.scaled(RETRY_SCALE);
                }
            }
            let Ok(p) = assemble_layer(&self.graph, &trial, layer, sheet, x, &self.config) else {
                break;
            };
            let r = check_plan(&p, self.config.min_radius, self.config.fiber_width);
            junctions = trial;
            plan = p;
            report = r;
        }
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(key, (plan.clone(), report.clone()));
        Ok((plan, report))
    }

    pub fn plan_solution(&self, solution: &LayerSolution) -> Result<(LayerPathPlan, CheckReport)> {
        self.plan(solution.layer, solution.sheet, &solution.x)
    }
}

impl LayerPathPlan {
    /// Bows realizing each connection.
    pub fn bows_per_connection(&self, n_connections: usize) -> Vec<usize> {
        let mut out = vec![0; n_connections];
        for b in &self.bows {
            out[b.connection] += 1;
        }
        out
    }

    /// Largest curvature over all bows (1/mm).
    pub fn max_bow_curvature(&self) -> f64 {
        self.bows
            .iter()
            .map(|b| b.reference.max_curvature().1)
            .fold(0.0, f64::max)
    }
}
