use thiserror::Error;

/// Errors produced anywhere in the optimization and path-planning pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("edges {0} and {1} do not share a vertex")]
    NotChaining(usize, usize),

    #[error("vertex {vertex} has {degree} edges; at most 4 are supported")]
    UnsupportedDegree { vertex: usize, degree: usize },

    #[error("parameter {t} outside [0, 1]")]
    ParameterRange { t: f64 },

    #[error("curve is singular at t = {t} (vanishing first derivative)")]
    Singular { t: f64 },

    #[error("offset distance {distance} exceeds the inward radius {radius}")]
    SelfIntersection { distance: f64, radius: f64 },

    #[error("polyline has duplicate adjacent points at index {0}")]
    DuplicatePoints(usize),

    #[error("search space of {size} points exceeds the enumeration limit {limit}")]
    Intractable { size: f64, limit: f64 },

    #[error("invalid integer program: {0}")]
    InvalidProgram(String),

    #[error("undefined power: residual {residual} of connection {connection} with non-integer exponent {p}")]
    UndefinedPower { connection: usize, residual: f64, p: f64 },

    #[error("layer {layer} is infeasible in every sheet: {detail}")]
    InfeasibleLayer { layer: usize, detail: String },

    #[error("junction {vertex} is too tight: {detail}")]
    JunctionTooTight { vertex: usize, detail: String },

    #[error("layout conflict at junction {vertex}: {detail}")]
    Layout { vertex: usize, detail: String },

    #[error("geometry error at junction {vertex}: {detail}")]
    Geometry { vertex: usize, detail: String },

    #[error("{0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
