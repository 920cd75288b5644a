//! Project files: a TOML description of the graph, its sheets and the
//! optimization and planning parameters.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bezier::Point2;
use crate::error::{Error, Result};
use crate::graph::{Edge, FiberGraph, LoopSpec, Vertex};
use crate::pattern::OptimizationParams;
use crate::plan::PlanConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: usize,
    pub v1: usize,
    pub v2: usize,
    pub target: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetOverride {
    pub edge1: usize,
    pub edge2: usize,
    pub target: f64,
}

/// A loop as an edge path (repeat the first edge to close it) or as a
/// chain of connection ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connections: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
}

impl LoopEntry {
    fn spec(&self, sheet: usize, index: usize) -> Result<LoopSpec> {
        match (&self.edges, &self.connections) {
            (Some(e), None) => {
                if self.closed.is_some() {
                    return Err(Error::Input(format!(
                        "sheets[{sheet}].loops[{index}]: `closed` only applies to connection lists"
                    )));
                }
                Ok(LoopSpec::Edges(e.clone()))
            }
            (None, Some(c)) => Ok(LoopSpec::Connections {
                ids: c.clone(),
                closed: self.closed.unwrap_or(false),
            }),
            _ => Err(Error::Input(format!(
                "sheets[{sheet}].loops[{index}]: give exactly one of `edges` or `connections`"
            ))),
        }
    }

    fn from_spec(spec: &LoopSpec) -> Self {
        match spec {
            LoopSpec::Edges(e) => LoopEntry {
                edges: Some(e.clone()),
                connections: None,
                closed: None,
            },
            LoopSpec::Connections { ids, closed } => LoopEntry {
                edges: None,
                connections: Some(ids.clone()),
                closed: Some(*closed),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheetEntry {
    pub loops: Vec<LoopEntry>,
}

fn default_fw() -> f64 {
    2.0
}
fn default_radius() -> f64 {
    10.0
}
fn default_layers() -> usize {
    1
}
fn default_p() -> f64 {
    2.0
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_fw")]
    pub fiber_width: f64,
    #[serde(default = "default_radius")]
    pub min_radius: f64,
    #[serde(default = "default_layers")]
    pub n_layers: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub require_edge_bows: bool,
    #[serde(default = "yes")]
    pub clamp_residuals: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_connections: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_lower: Option<Vec<f64>>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            fiber_width: default_fw(),
            min_radius: default_radius(),
            n_layers: default_layers(),
            p: default_p(),
            require_edge_bows: false,
            clamp_residuals: true,
            min_connections: None,
            vertex_upper: None,
            vertex_lower: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default)]
    pub params: Params,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub connection_targets: Vec<TargetOverride>,
    #[serde(default)]
    pub sheets: Vec<SheetEntry>,
}

/// A parsed project: the graph with its sheets plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    pub name: String,
    pub graph: FiberGraph,
    pub params: OptimizationParams,
    pub plan: PlanConfig,
    pub loop_specs: Vec<Vec<LoopSpec>>,
}

impl ProjectFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn build(&self) -> Result<Project> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                id: v.id,
                position: Point2::new(v.x, v.y),
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                id: e.id,
                v1: e.v1,
                v2: e.v2,
                target: e.target,
            })
            .collect();
        let mut overrides = BTreeMap::new();
        for o in &self.connection_targets {
            let key = (o.edge1.min(o.edge2), o.edge1.max(o.edge2));
            if overrides.insert(key, o.target).is_some() {
                return Err(Error::Input(format!(
                    "connection_targets: edges ({}, {}) listed twice",
                    key.0, key.1
                )));
            }
        }
        let mut graph = FiberGraph::new(vertices, edges, &overrides)?;
        let mut loop_specs = Vec::new();
        for (si, sheet) in self.sheets.iter().enumerate() {
            let specs = sheet
                .loops
                .iter()
                .enumerate()
                .map(|(li, l)| l.spec(si, li))
                .collect::<Result<Vec<_>>>()?;
            let id = graph
                .add_sheet(&specs)
                .map_err(|e| Error::Input(format!("sheets[{si}]: {e}")))?;
            if let Some(v) = graph
                .validate_sheet_compatibility(&graph.sheets[id])?
                .first()
            {
                return Err(Error::Input(format!(
                    "sheets[{si}]: connections {} and {} cross in different directions at vertex {}",
                    v.connections[0], v.connections[1], v.vertex
                )));
            }
            loop_specs.push(specs);
        }
        let p = &self.params;
        let params = OptimizationParams {
            n_layers: p.n_layers,
            p: p.p,
            min_connections: p.min_connections.clone(),
            vertex_upper: p.vertex_upper.clone(),
            vertex_lower: p.vertex_lower.clone(),
            clamp_residuals: p.clamp_residuals,
            require_edge_bows: p.require_edge_bows,
        };
        params.validate(&graph)?;
        let plan = PlanConfig {
            fiber_width: p.fiber_width,
            min_radius: p.min_radius,
        };
        plan.validate()?;
        Ok(Project {
            name: self.name.clone(),
            graph,
            params,
            plan,
            loop_specs,
        })
    }
}

impl Project {
    pub fn from_toml(text: &str) -> Result<Self> {
        ProjectFile::parse(text)?.build()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The file this project would be written as.
    pub fn to_file(&self) -> ProjectFile {
        let g = &self.graph;
        let mut connection_targets = Vec::new();
        for c in &g.connections {
            let derived = f64::from(g.edges[c.edge1].target.max(g.edges[c.edge2].target));
            if c.target != derived {
                connection_targets.push(TargetOverride {
                    edge1: c.edge1,
                    edge2: c.edge2,
                    target: c.target,
                });
            }
        }
        ProjectFile {
            schema_version: SCHEMA_VERSION,
            name: self.name.clone(),
            params: Params {
                fiber_width: self.plan.fiber_width,
                min_radius: self.plan.min_radius,
                n_layers: self.params.n_layers,
                p: self.params.p,
                require_edge_bows: self.params.require_edge_bows,
                clamp_residuals: self.params.clamp_residuals,
                min_connections: self.params.min_connections.clone(),
                vertex_upper: self.params.vertex_upper.clone(),
                vertex_lower: self.params.vertex_lower.clone(),
            },
            vertices: g
                .vertices
                .iter()
                .map(|v| VertexEntry {
                    id: v.id,
                    x: v.position.x,
                    y: v.position.y,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeEntry {
                    id: e.id,
                    v1: e.v1,
                    v2: e.v2,
                    target: e.target,
                })
                .collect(),
            connection_targets,
            sheets: self
                .loop_specs
                .iter()
                .map(|s| SheetEntry {
                    loops: s.iter().map(LoopEntry::from_spec).collect(),
                })
                .collect(),
        }
    }
}
