//! Structural graph: vertices, edges with bundle targets, the connections
//! derived from them, user supplied loops grouped into sheets, and the
//! incidence matrices the layer optimizer works on.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bezier::Point2;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub position: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub v1: usize,
    pub v2: usize,
    /// Number of parallel fiber bundles the edge is designed for.
    pub target: u32,
}

impl Edge {
    pub fn touches(&self, v: usize) -> bool {
        self.v1 == v || self.v2 == v
    }

    pub fn other(&self, v: usize) -> Option<usize> {
        if self.v1 == v {
            Some(self.v2)
        } else if self.v2 == v {
            Some(self.v1)
        } else {
            None
        }
    }

    pub fn shared_vertex(&self, o: &Edge) -> Option<usize> {
        if o.touches(self.v1) {
            Some(self.v1)
        } else if o.touches(self.v2) {
            Some(self.v2)
        } else {
            None
        }
    }
}

/// A fiber bond between two edges meeting at `mid_vertex`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub id: usize,
    pub edge1: usize,
    pub edge2: usize,
    pub mid_vertex: usize,
    pub target: f64,
}

impl Connection {
    pub fn has_edge(&self, e: usize) -> bool {
        self.edge1 == e || self.edge2 == e
    }

    pub fn other_edge(&self, e: usize) -> Option<usize> {
        if self.edge1 == e {
            Some(self.edge2)
        } else if self.edge2 == e {
            Some(self.edge1)
        } else {
            None
        }
    }

    fn shared_edge(&self, o: &Connection) -> Option<usize> {
        if o.has_edge(self.edge1) {
            Some(self.edge1)
        } else if o.has_edge(self.edge2) {
            Some(self.edge2)
        } else {
            None
        }
    }
}

/// A chain of connections. `edges[k]` and `edges[k + 1]` (cyclically when
/// closed) are joined by `connections[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub id: usize,
    pub connections: Vec<usize>,
    pub edges: Vec<usize>,
    pub closed: bool,
}

impl Loop {
    /// Vertices `(from, to)` of the traversal of `edges[k]`.
    pub fn traversal(&self, graph: &FiberGraph, k: usize) -> (usize, usize) {
        let m = self.edges.len();
        let edge = &graph.edges[self.edges[k]];
        let exit = if k < self.connections.len() {
            Some(graph.connections[self.connections[k]].mid_vertex)
        } else {
            None
        };
        let entry = if k > 0 {
            Some(graph.connections[self.connections[k - 1]].mid_vertex)
        } else if self.closed {
            Some(graph.connections[self.connections[m - 1]].mid_vertex)
        } else {
            None
        };
        match (entry, exit) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, edge.other(a).expect("loop edge touches junction")),
            (None, Some(b)) => (edge.other(b).expect("loop edge touches junction"), b),
            (None, None) => unreachable!("loops have at least one connection"),
        }
    }

    /// Number of edge traversals.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// How a loop is written down in a project: as the edges it runs along
/// (a repeated first edge closes it) or as a connection chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LoopSpec {
    Edges(Vec<usize>),
    Connections { ids: Vec<usize>, closed: bool },
}

/// A set of mutually compatible loops with its incidence matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sheet {
    pub id: usize,
    pub loops: Vec<Loop>,
    /// Connection-by-loop usage counts.
    pub c: Matrix,
    /// Edge-by-loop traversal counts.
    pub e: Matrix,
    /// Vertex-by-loop pass-through counts.
    pub v: Matrix,
}

/// Two crossing connections of different direction used in one sheet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetViolation {
    pub vertex: usize,
    pub connections: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub connections: Vec<Connection>,
    pub sheets: Vec<Sheet>,
    pub connection_targets: Vec<f64>,
    pub edge_targets: Vec<f64>,
    index: BTreeMap<(usize, usize), usize>,
}

/// One connection per unordered pair of distinct edges sharing a vertex,
/// sorted by `(edge1, edge2)` with `edge1 < edge2`. The target is the larger
/// of the two edge targets unless `overrides` names the pair.
pub fn derive_connections(
    edges: &[Edge],
    overrides: &BTreeMap<(usize, usize), f64>,
) -> Vec<Connection> {
    let mut out = Vec::new();
    for (i, a) in edges.iter().enumerate() {
        for b in &edges[i + 1..] {
            let Some(mid) = a.shared_vertex(b) else {
                continue;
            };
            let (e1, e2) = if a.id < b.id { (a.id, b.id) } else { (b.id, a.id) };
            let target = overrides
                .get(&(e1, e2))
                .copied()
                .unwrap_or_else(|| f64::from(a.target.max(b.target)));
            out.push(Connection {
                id: 0,
                edge1: e1,
                edge2: e2,
                mid_vertex: mid,
                target,
            });
        }
    }
    out.sort_by_key(|c| (c.edge1, c.edge2));
    for (id, c) in out.iter_mut().enumerate() {
        c.id = id;
    }
    out
}

impl FiberGraph {
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        overrides: &BTreeMap<(usize, usize), f64>,
    ) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::Validation(format!(
                    "vertex ids must be contiguous from 0; found {} at position {i}",
                    v.id
                )));
            }
            if !v.position.is_finite() {
                return Err(Error::Validation(format!("vertex {i} has a non-finite position")));
            }
        }
        let mut pairs = BTreeSet::new();
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return Err(Error::Validation(format!(
                    "edge ids must be contiguous from 0; found {} at position {i}",
                    e.id
                )));
            }
            if e.v1 >= vertices.len() || e.v2 >= vertices.len() {
                return Err(Error::Validation(format!("edge {i} references an unknown vertex")));
            }
            if e.v1 == e.v2 {
                return Err(Error::Validation(format!("edge {i} is a self loop")));
            }
            if e.target < 1 {
                return Err(Error::Validation(format!("edge {i} needs a target of at least 1")));
            }
            if !pairs.insert((e.v1.min(e.v2), e.v1.max(e.v2))) {
                return Err(Error::Validation(format!(
                    "edge {i} duplicates the vertex pair ({}, {})",
                    e.v1, e.v2
                )));
            }
        }
        let connections = derive_connections(&edges, overrides);
        for (&(a, b), t) in overrides {
            if !connections.iter().any(|c| c.edge1 == a.min(b) && c.edge2 == a.max(b)) {
                return Err(Error::Validation(format!(
                    "target override for edges ({a}, {b}) names no connection"
                )));
            }
            if !(t.is_finite() && *t > 0.0) {
                return Err(Error::Validation(format!(
                    "target override for edges ({a}, {b}) must be positive"
                )));
            }
        }
        let index = connections
            .iter()
            .map(|c| ((c.edge1, c.edge2), c.id))
            .collect();
        Ok(FiberGraph {
            connection_targets: connections.iter().map(|c| c.target).collect(),
            edge_targets: edges.iter().map(|e| f64::from(e.target)).collect(),
            vertices,
            edges,
            connections,
            sheets: Vec::new(),
            index,
        })
    }

    pub fn n_connections(&self) -> usize {
        self.connections.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_sheets(&self) -> usize {
        self.sheets.len()
    }

    pub fn connection_between(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.touches(v))
            .map(|e| e.id)
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.touches(v)).count()
    }

    /// Unit direction of `edge` pointing away from `from`.
    pub fn direction(&self, edge: usize, from: usize) -> Point2 {
        let e = &self.edges[edge];
        let to = e.other(from).expect("edge touches vertex");
        (self.vertices[to].position - self.vertices[from].position).normalized()
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let e = &self.edges[edge];
        self.vertices[e.v1]
            .position
            .distance(self.vertices[e.v2].position)
    }

    /// Incident edges of `v` in counter-clockwise order of their direction
    /// angle; collinear ties are broken by edge id.
    pub fn angular_sides(&self, v: usize) -> Vec<usize> {
        let mut sides: Vec<(f64, usize)> = self
            .incident_edges(v)
            .into_iter()
            .map(|e| (self.direction(e, v).angle(), e))
            .collect();
        sides.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        sides.into_iter().map(|(_, e)| e).collect()
    }

    /// True when the connection joins two edges that are not angular
    /// neighbours at a four-edge junction.
    pub fn is_crossing(&self, connection: usize) -> bool {
        let c = &self.connections[connection];
        let sides = self.angular_sides(c.mid_vertex);
        if sides.len() < 4 {
            return false;
        }
        let i = sides.iter().position(|&e| e == c.edge1).expect("incident");
        let j = sides.iter().position(|&e| e == c.edge2).expect("incident");
        let d = (i + sides.len() - j) % sides.len();
        d != 1 && d != sides.len() - 1
    }

    /// Turns an edge path into a loop. A repeated first edge at the end
    /// marks the loop closed.
    pub fn loop_from_edges(&self, id: usize, edge_ids: &[usize]) -> Result<Loop> {
        for &e in edge_ids {
            if e >= self.edges.len() {
                return Err(Error::Validation(format!("loop {id} references unknown edge {e}")));
            }
        }
        let (edges, closed) = match edge_ids {
            [first, .., last] if edge_ids.len() >= 3 && first == last => {
                (edge_ids[..edge_ids.len() - 1].to_vec(), true)
            }
            _ => (edge_ids.to_vec(), false),
        };
        if edges.len() < 2 {
            return Err(Error::Validation(format!("loop {id} needs at least two edges")));
        }
        let n_links = if closed { edges.len() } else { edges.len() - 1 };
        let mut connections = Vec::with_capacity(n_links);
        for k in 0..n_links {
            let (a, b) = (edges[k], edges[(k + 1) % edges.len()]);
            let c = self
                .connection_between(a, b)
                .ok_or(Error::NotChaining(a, b))?;
            connections.push(c);
        }
        let lp = Loop {
            id,
            connections,
            edges,
            closed,
        };
        self.check_traversal(&lp)?;
        Ok(lp)
    }

    /// Builds a loop from a connection chain.
    pub fn loop_from_connections(&self, id: usize, ids: &[usize], closed: bool) -> Result<Loop> {
        let conns = ids
            .iter()
            .map(|&c| {
                self.connections.get(c).ok_or_else(|| {
                    Error::Validation(format!("loop {id} references unknown connection {c}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = conns.len();
        if n == 0 || (closed && n < 3) {
            return Err(Error::Validation(format!("loop {id} has too few connections")));
        }
        let shared = |a: &Connection, b: &Connection| {
            a.shared_edge(b).ok_or_else(|| {
                Error::Validation(format!(
                    "loop {id}: connections {} and {} do not share an edge",
                    a.id, b.id
                ))
            })
        };
        let mut edges = Vec::with_capacity(n + 1);
        if closed {
            edges.push(shared(conns[n - 1], conns[0])?);
            for k in 0..n - 1 {
                edges.push(shared(conns[k], conns[k + 1])?);
            }
        } else if n == 1 {
            edges.push(conns[0].edge1);
            edges.push(conns[0].edge2);
        } else {
            let first_shared = shared(conns[0], conns[1])?;
            edges.push(conns[0].other_edge(first_shared).expect("shared edge"));
            edges.push(first_shared);
            for k in 1..n - 1 {
                edges.push(shared(conns[k], conns[k + 1])?);
            }
            let last_shared = edges[edges.len() - 1];
            edges.push(conns[n - 1].other_edge(last_shared).expect("shared edge"));
        }
        let lp = Loop {
            id,
            connections: ids.to_vec(),
            edges,
            closed,
        };
        // the connection chain must be exactly the consecutive edge pairs
        let n_links = if closed { lp.edges.len() } else { lp.edges.len() - 1 };
        for k in 0..n_links {
            let (a, b) = (lp.edges[k], lp.edges[(k + 1) % lp.edges.len()]);
            if self.connection_between(a, b) != Some(lp.connections[k]) {
                return Err(Error::Validation(format!(
                    "loop {id}: connection {} does not join edges {a} and {b}",
                    lp.connections[k]
                )));
            }
        }
        self.check_traversal(&lp)?;
        Ok(lp)
    }

    /// Every edge of a loop must be run end to end, never entered and left
    /// through the same junction.
    fn check_traversal(&self, lp: &Loop) -> Result<()> {
        let m = lp.connections.len();
        let links = if lp.closed { m } else { m.saturating_sub(1) };
        for k in 0..links {
            let a = &self.connections[lp.connections[k]];
            let b = &self.connections[lp.connections[(k + 1) % m]];
            if a.mid_vertex == b.mid_vertex {
                return Err(Error::Validation(format!(
                    "loop {}: connections {} and {} turn back at vertex {}",
                    lp.id, a.id, b.id, a.mid_vertex
                )));
            }
        }
        Ok(())
    }

    pub fn build_loop(&self, id: usize, spec: &LoopSpec) -> Result<Loop> {
        match spec {
            LoopSpec::Edges(e) => self.loop_from_edges(id, e),
            LoopSpec::Connections { ids, closed } => self.loop_from_connections(id, ids, *closed),
        }
    }

    /// Validates the loops and appends a sheet; returns its index.
    pub fn add_sheet(&mut self, specs: &[LoopSpec]) -> Result<usize> {
        let loops = specs
            .iter()
            .enumerate()
            .map(|(i, s)| self.build_loop(i, s))
            .collect::<Result<Vec<_>>>()?;
        let (c, e, v) = self.build_sheet_matrices(&loops);
        let id = self.sheets.len();
        self.sheets.push(Sheet { id, loops, c, e, v });
        Ok(id)
    }

    /// `(C, E, V)` usage matrices for a set of loops.
    pub fn build_sheet_matrices(&self, loops: &[Loop]) -> (Matrix, Matrix, Matrix) {
        let nl = loops.len();
        let mut c = Matrix::zeros(self.n_connections(), nl);
        let mut e = Matrix::zeros(self.n_edges(), nl);
        let mut v = Matrix::zeros(self.n_vertices(), nl);
        for (l, lp) in loops.iter().enumerate() {
            for &cid in &lp.connections {
                c.add(cid, l, 1.0);
                v.add(self.connections[cid].mid_vertex, l, 1.0);
            }
            for &eid in &lp.edges {
                e.add(eid, l, 1.0);
            }
        }
        (c, e, v)
    }

    /// Lists crossing conflicts at four-edge junctions within one sheet.
    pub fn validate_sheet_compatibility(&self, sheet: &Sheet) -> Result<Vec<SheetViolation>> {
        let used: BTreeSet<usize> = sheet
            .loops
            .iter()
            .flat_map(|l| l.connections.iter().copied())
            .collect();
        let mut out = Vec::new();
        for v in 0..self.n_vertices() {
            let sides = self.angular_sides(v);
            match sides.len() {
                0..=3 => {}
                4 => {
                    let first = self.connection_between(sides[0], sides[2]);
                    let second = self.connection_between(sides[1], sides[3]);
                    if let (Some(a), Some(b)) = (first, second) {
                        if used.contains(&a) && used.contains(&b) {
                            out.push(SheetViolation {
                                vertex: v,
                                connections: [a.min(b), a.max(b)],
                            });
                        }
                    }
                }
                degree => return Err(Error::UnsupportedDegree { vertex: v, degree }),
            }
        }
        Ok(out)
    }

    /// Sheets containing each connection, per loop: `(sheet, loop)` pairs.
    pub fn loops_using_connection(&self, connection: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in &self.sheets {
            for l in &s.loops {
                if l.connections.contains(&connection) {
                    out.push((s.id, l.id));
                }
            }
        }
        out
    }

    pub fn loops_using_edge(&self, edge: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in &self.sheets {
            for l in &s.loops {
                if l.edges.contains(&edge) {
                    out.push((s.id, l.id));
                }
            }
        }
        out
    }
}
