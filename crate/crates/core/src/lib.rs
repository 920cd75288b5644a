//! Multi-layer continuous-fiber pattern optimization and parallel Bézier
//! path planning.
//!
//! The pipeline: a [`FiberGraph`] with loops grouped into sheets is
//! optimized layer by layer ([`pattern::solve_all_layers`]); each layer's
//! loop counts are then turned into concrete bundle paths
//! ([`plan::assemble_layer`]) and checked for turning radius and overlap.

pub mod bezier;
pub mod error;
pub mod export;
pub mod graph;
pub mod ilp;
pub mod matrix;
pub mod pattern;
pub mod plan;
pub mod project;
pub mod report;

pub use bezier::Point2;
pub use error::{Error, Result};
pub use graph::{Connection, Edge, FiberGraph, Loop, LoopSpec, Sheet, Vertex};
pub use pattern::{LayerSolution, OptimizationParams, PatternHistory};
