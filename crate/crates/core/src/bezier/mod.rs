//! Bézier curves, curvature, minimum-radius constructions and offset
//! polylines.

mod construct;
mod curve;
mod offset;
mod point;
pub mod search;

pub use construct::{
    construct_cubic, construct_cubic_uncached, inner_angle, optimal_fractions,
    optimal_fractions_uncached, scale_isosceles_for_radius, select_kind, turn_curve, CurveKind,
    QUADRATIC_PREFERENCE,
};
pub use curve::{max_abs_curvature, Bezier, CubicBezier, Curve, QuadBezier, CURVATURE_SCAN};
pub use offset::{
    bounding_box, offset_curve, point_polyline_distance, point_segment_distance,
    polyline_curvature, OffsetPolyline, OFFSET_SAMPLES,
};
pub use point::{line_intersection, Point2};
