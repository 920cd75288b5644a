//! Layer-by-layer pattern optimization.
//!
//! Each layer solves, for every sheet, an integer program whose weights are
//! the powered shortfall of each connection against its target so far; the
//! best sheet wins the layer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FiberGraph;
use crate::ilp::{self, IntegerProgram, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationParams {
    pub n_layers: usize,
    pub p: f64,
    pub min_connections: Option<Vec<f64>>,
    pub vertex_upper: Option<Vec<f64>>,
    pub vertex_lower: Option<Vec<f64>>,
    pub clamp_residuals: bool,
    /// Require at least one bundle on every non-crossing connection a sheet
    /// can realize.
    pub require_edge_bows: bool,
}

impl Default for OptimizationParams {
    fn default() -> Self {
        OptimizationParams {
            n_layers: 1,
            p: 2.0,
            min_connections: None,
            vertex_upper: None,
            vertex_lower: None,
            clamp_residuals: true,
            require_edge_bows: false,
        }
    }
}

impl OptimizationParams {
    pub fn validate(&self, graph: &FiberGraph) -> Result<()> {
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::Validation(format!("p must be positive, got {}", self.p)));
        }
        let check = |name: &str, v: &Option<Vec<f64>>, len: usize| -> Result<()> {
            match v {
                Some(v) if v.len() != len => Err(Error::Validation(format!(
                    "{name} has {} entries, expected {len}",
                    v.len()
                ))),
                Some(v) if v.iter().any(|x| !x.is_finite()) => {
                    Err(Error::Validation(format!("{name} has non-finite entries")))
                }
                _ => Ok(()),
            }
        };
        check("min_connections", &self.min_connections, graph.n_connections())?;
        check("vertex_upper", &self.vertex_upper, graph.n_vertices())?;
        check("vertex_lower", &self.vertex_lower, graph.n_vertices())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSolution {
    /// 1-based layer index.
    pub layer: usize,
    pub sheet: usize,
    pub x: Vec<u64>,
    /// Objective weights `c(s, n)` of the winning sheet.
    pub weights: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternHistory {
    pub layers: Vec<LayerSolution>,
    /// Realized bundles per connection summed over all layers.
    pub cumulative: Vec<f64>,
}

impl PatternHistory {
    pub fn new(graph: &FiberGraph) -> Self {
        PatternHistory {
            layers: Vec::new(),
            cumulative: vec![0.0; graph.n_connections()],
        }
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Appends a layer and updates the running sums.
    pub fn push(&mut self, graph: &FiberGraph, solution: LayerSolution) {
        let used = connection_usage(graph, solution.sheet, &solution.x);
        for (acc, u) in self.cumulative.iter_mut().zip(used) {
            *acc += u;
        }
        self.layers.push(solution);
    }
}

/// `C^s x` for one layer.
pub fn connection_usage(graph: &FiberGraph, sheet: usize, x: &[u64]) -> Vec<f64> {
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    graph.sheets[sheet].c.mul_vec(&xf)
}

/// Weights `c(s, n) = C^sT r^p` with `r = n c~ - sum of realized bundles`.
pub fn objective_vector(
    graph: &FiberGraph,
    params: &OptimizationParams,
    sheet: usize,
    layer: usize,
    history: &PatternHistory,
) -> Result<Vec<f64>> {
    let n = layer as f64;
    let integer_p = params.p.fract() == 0.0;
    let mut powered = Vec::with_capacity(graph.n_connections());
    for (c, (&target, &sum)) in graph
        .connection_targets
        .iter()
        .zip(&history.cumulative)
        .enumerate()
    {
        let mut r = n * target - sum;
        if params.clamp_residuals {
            r = r.max(0.0);
        }
        let w = if integer_p {
            r.powi(params.p as i32)
        } else if r < 0.0 {
            return Err(Error::UndefinedPower {
                connection: c,
                residual: r,
                p: params.p,
            });
        } else {
            r.powf(params.p)
        };
        powered.push(w);
    }
    Ok(graph.sheets[sheet].c.transpose_mul_vec(&powered))
}

/// Lower bounds on connection usage for one sheet, combining the explicit
/// vector with the edge-bow requirement.
fn connection_lower_bounds(
    graph: &FiberGraph,
    params: &OptimizationParams,
    sheet: usize,
) -> Option<Vec<f64>> {
    let mut lower = params.min_connections.clone();
    if params.require_edge_bows {
        let s = &graph.sheets[sheet];
        let lower = lower.get_or_insert_with(|| vec![0.0; graph.n_connections()]);
        for c in 0..graph.n_connections() {
            let realizable = s.c.row(c).iter().any(|&v| v > 0.0);
            if realizable && !graph.is_crossing(c) {
                lower[c] = lower[c].max(1.0);
            }
        }
    }
    lower
}

/// The integer program of one sheet for one layer.
pub fn layer_program(
    graph: &FiberGraph,
    params: &OptimizationParams,
    sheet: usize,
    layer: usize,
    history: &PatternHistory,
) -> Result<IntegerProgram> {
    let s = &graph.sheets[sheet];
    let mut prog = IntegerProgram::new(objective_vector(graph, params, sheet, layer, history)?);
    for e in 0..graph.n_edges() {
        prog = prog.leq(s.e.row(e).to_vec(), graph.edge_targets[e]);
    }
    if let Some(lower) = connection_lower_bounds(graph, params, sheet) {
        for (c, &b) in lower.iter().enumerate() {
            if b > 0.0 {
                prog = prog.geq(s.c.row(c).to_vec(), b);
            }
        }
    }
    if let Some(upper) = &params.vertex_upper {
        for (v, &b) in upper.iter().enumerate() {
            prog = prog.leq(s.v.row(v).to_vec(), b);
        }
    }
    if let Some(lower) = &params.vertex_lower {
        for (v, &b) in lower.iter().enumerate() {
            if b > 0.0 {
                prog = prog.geq(s.v.row(v).to_vec(), b);
            }
        }
    }
    Ok(prog)
}

/// Best layer over all sheets; ties go to the lowest sheet index.
pub fn solve_layer(
    graph: &FiberGraph,
    params: &OptimizationParams,
    history: &PatternHistory,
    layer: usize,
) -> Result<LayerSolution> {
    if graph.sheets.is_empty() {
        return Err(Error::InfeasibleLayer {
            layer,
            detail: "the project defines no sheets".into(),
        });
    }
    let programs = (0..graph.n_sheets())
        .map(|s| layer_program(graph, params, s, layer, history))
        .collect::<Result<Vec<_>>>()?;
    let solutions = programs
        .par_iter()
        .map(ilp::solve)
        .collect::<Result<Vec<_>>>()?;

    let integral = programs
        .iter()
        .all(|p| p.objective.iter().all(|c| c.fract() == 0.0));
    let mut best: Option<usize> = None;
    for (s, sol) in solutions.iter().enumerate() {
        if sol.status != Status::Optimal {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) if integral => sol.objective_value > solutions[b].objective_value,
            Some(b) => sol.objective_value > solutions[b].objective_value + 1e-9,
        };
        if better {
            best = Some(s);
        }
    }
    match best {
        Some(s) => Ok(LayerSolution {
            layer,
            sheet: s,
            x: solutions[s].x.clone(),
            weights: programs[s].objective.clone(),
            objective: solutions[s].objective_value,
        }),
        None => Err(Error::InfeasibleLayer {
            layer,
            detail: diagnose(graph, &programs),
        }),
    }
}

/// Names the lower-bound rows that cannot be met even on their own.
fn diagnose(graph: &FiberGraph, programs: &[IntegerProgram]) -> String {
    let mut parts = Vec::new();
    for (s, prog) in programs.iter().enumerate() {
        let ub = match prog.upper_bounds() {
            Ok(ub) => ub,
            Err(e) => {
                parts.push(format!("sheet {s}: {e}"));
                continue;
            }
        };
        let mut binding = Vec::new();
        for (row, b) in &prog.geq_rows {
            let reach: f64 = row
                .iter()
                .zip(&ub)
                .map(|(a, &u)| (a * u as f64).max(0.0))
                .sum();
            if reach < *b {
                binding.push(describe_row(graph, s, row, *b));
            }
        }
        if binding.is_empty() {
            parts.push(format!(
                "sheet {s}: lower bounds conflict with the edge targets jointly"
            ));
        } else {
            parts.push(format!("sheet {s}: {}", binding.join(", ")));
        }
    }
    parts.join("; ")
}

fn describe_row(graph: &FiberGraph, sheet: usize, row: &[f64], b: f64) -> String {
    let s = &graph.sheets[sheet];
    for c in 0..graph.n_connections() {
        if s.c.row(c) == row {
            return format!("connection {c} needs >= {b}");
        }
    }
    for v in 0..graph.n_vertices() {
        if s.v.row(v) == row {
            return format!("vertex {v} needs >= {b}");
        }
    }
    format!("row needs >= {b}")
}

/// Runs all layers in sequence.
pub fn solve_all_layers(graph: &FiberGraph, params: &OptimizationParams) -> Result<PatternHistory> {
    params.validate(graph)?;
    let mut history = PatternHistory::new(graph);
    for n in 1..=params.n_layers {
        let sol = solve_layer(graph, params, &history, n)?;
        history.push(graph, sol);
    }
    Ok(history)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionRow {
    pub connection: usize,
    pub edge1: usize,
    pub edge2: usize,
    /// Realized bundles per layer.
    pub usage: Vec<f64>,
    pub total: f64,
    /// `n c~` after the last layer.
    pub target_total: f64,
}

pub fn connection_report(history: &PatternHistory, graph: &FiberGraph) -> Vec<ConnectionRow> {
    let per_layer: Vec<Vec<f64>> = history
        .layers
        .iter()
        .map(|l| connection_usage(graph, l.sheet, &l.x))
        .collect();
    let n = history.layers.len() as f64;
    graph
        .connections
        .iter()
        .map(|c| {
            let usage: Vec<f64> = per_layer.iter().map(|u| u[c.id]).collect();
            ConnectionRow {
                connection: c.id,
                edge1: c.edge1,
                edge2: c.edge2,
                total: history.cumulative[c.id],
                usage,
                target_total: n * c.target,
            }
        })
        .collect()
}
