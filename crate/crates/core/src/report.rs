//! Human-readable tables and schema-versioned JSON records.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{Connection, FiberGraph, Loop};
use crate::matrix::Matrix;
use crate::pattern::{connection_report, ConnectionRow, LayerSolution, PatternHistory};
use crate::plan::CheckReport;

pub const RECORD_VERSION: u32 = 1;

/// Integers print without a fraction; everything else as the shortest
/// round-tripping decimal.
pub fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.0}")
    } else {
        format!("{x}")
    }
}

fn join(v: impl IntoIterator<Item = String>, sep: &str) -> String {
    v.into_iter().collect::<Vec<_>>().join(sep)
}

impl ConnectionRow {
    /// Per-layer usage, e.g. `"0 0 1 0 0 1"`.
    pub fn usage_string(&self) -> String {
        join(self.usage.iter().map(|&u| fmt_num(u)), " ")
    }

    /// Realized total against the target total, e.g. `"2 vs. 12"`.
    pub fn sum_string(&self) -> String {
        format!("{} vs. {}", fmt_num(self.total), fmt_num(self.target_total))
    }
}

fn matrix_text(out: &mut String, name: &str, row_label: &str, m: &Matrix) {
    let _ = writeln!(out, "{name} ({} x {})", m.rows(), m.cols());
    for r in 0..m.rows() {
        let cells = join((0..m.cols()).map(|c| fmt_num(m.get(r, c))), " ");
        let _ = writeln!(out, "  {row_label}{r:<3} {cells}");
    }
}

/// Edges, derived connections with their loops, loops and the usage
/// matrices of every sheet.
pub fn derive_report(graph: &FiberGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "edges");
    let _ = writeln!(out, "  id  v1  v2  target  length");
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  {:<3} {:<3} {:<3} {:<7} {:.3}",
            e.id,
            e.v1,
            e.v2,
            e.target,
            graph.edge_length(e.id)
        );
    }
    let _ = writeln!(out, "\nconnections");
    let _ = writeln!(out, "  id  edges   vertex  target  loops");
    for c in &graph.connections {
        let loops = graph.loops_using_connection(c.id);
        let loops = if loops.is_empty() {
            "-".to_string()
        } else {
            join(loops.iter().map(|(s, l)| format!("{s}.{l}")), " ")
        };
        let _ = writeln!(
            out,
            "  {:<3} {:<7} {:<7} {:<7} {loops}",
            c.id,
            format!("{}-{}", c.edge1, c.edge2),
            c.mid_vertex,
            fmt_num(c.target)
        );
    }
    for s in &graph.sheets {
        let _ = writeln!(out, "\nsheet {}", s.id);
        for l in &s.loops {
            let _ = writeln!(
                out,
                "  loop {}: edges ({}) connections ({}){}",
                l.id,
                join(l.edges.iter().map(|e| e.to_string()), ","),
                join(l.connections.iter().map(|c| c.to_string()), ","),
                if l.closed { " closed" } else { " open" }
            );
        }
        matrix_text(&mut out, "C", "c", &s.c);
        matrix_text(&mut out, "E", "e", &s.e);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetRecord {
    pub id: usize,
    pub loops: Vec<Loop>,
    pub c: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
}

/// Machine-readable counterpart of [`derive_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub schema_version: u32,
    pub project: String,
    pub connections: Vec<Connection>,
    pub sheets: Vec<SheetRecord>,
}

impl GraphRecord {
    pub fn new(project: &str, graph: &FiberGraph) -> Self {
        GraphRecord {
            schema_version: RECORD_VERSION,
            project: project.to_string(),
            connections: graph.connections.clone(),
            sheets: graph
                .sheets
                .iter()
                .map(|s| SheetRecord {
                    id: s.id,
                    loops: s.loops.clone(),
                    c: s.c.to_rows(),
                    e: s.e.to_rows(),
                })
                .collect(),
        }
    }
}

/// Per-layer optimum and the connection summary.
pub fn pattern_table(history: &PatternHistory, graph: &FiberGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "layer  sheet  x*  c  objective");
    for l in &history.layers {
        let _ = writeln!(
            out,
            "{:<6} {:<6} ({}) ({}) {}",
            l.layer,
            l.sheet,
            join(l.x.iter().map(|v| v.to_string()), ","),
            join(l.weights.iter().map(|&w| fmt_num(w)), ","),
            fmt_num(l.objective)
        );
    }
    let _ = writeln!(out, "\nconnection  edges  sum  usage");
    for r in connection_report(history, graph) {
        let _ = writeln!(
            out,
            "{:<11} {:<6} {:<10} {}",
            r.connection,
            format!("{}-{}", r.edge1, r.edge2),
            r.sum_string(),
            r.usage_string()
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub schema_version: u32,
    pub project: String,
    pub p: f64,
    pub layers: Vec<LayerSolution>,
    pub connections: Vec<ConnectionRow>,
}

impl PatternRecord {
    pub fn new(project: &str, p: f64, history: &PatternHistory, graph: &FiberGraph) -> Self {
        PatternRecord {
            schema_version: RECORD_VERSION,
            project: project.to_string(),
            p,
            layers: history.layers.clone(),
            connections: connection_report(history, graph),
        }
    }
}

/// One row of a feasible-set listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleRow {
    pub sheet: usize,
    pub x: Vec<u64>,
    pub objective: f64,
    /// Some other feasible point of the sheet is at least as large in every
    /// entry.
    pub dominated: bool,
}

/// Marks points with a componentwise-larger feasible sibling.
pub fn mark_dominated(sheet: usize, points: Vec<(Vec<u64>, f64)>) -> Vec<FeasibleRow> {
    let xs: Vec<Vec<u64>> = points.iter().map(|p| p.0.clone()).collect();
    points
        .into_iter()
        .map(|(x, objective)| {
            let dominated = xs
                .iter()
                .any(|y| y != &x && y.iter().zip(&x).all(|(a, b)| a >= b));
            FeasibleRow {
                sheet,
                x,
                objective,
                dominated,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleRecord {
    pub schema_version: u32,
    pub layer: usize,
    pub rows: Vec<FeasibleRow>,
}

pub fn feasible_table(layer: usize, rows: &[FeasibleRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "layer {layer}: {} feasible configurations", rows.len());
    let _ = writeln!(out, "sheet  x  objective");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<6} ({}) {}{}",
            r.sheet,
            join(r.x.iter().map(|v| v.to_string()), ","),
            fmt_num(r.objective),
            if r.dominated { "  dominated" } else { "" }
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCheck {
    pub layer: usize,
    pub report: CheckReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub schema_version: u32,
    pub layers: Vec<LayerCheck>,
}

pub fn check_text(checks: &[LayerCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        let status = if c.report.is_clean() { "clean" } else { "issues" };
        let _ = writeln!(
            out,
            "layer {}: {status} ({} curvature, {} overlap)",
            c.layer,
            c.report.curvature.len(),
            c.report.overlap.len()
        );
        for v in c.report.curvature.iter().chain(&c.report.overlap) {
            let _ = writeln!(out, "  {}", v.detail);
        }
        for w in &c.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
    }
    out
}
