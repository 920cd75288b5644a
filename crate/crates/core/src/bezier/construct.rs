//! Minimum-radius constructions on a control triangle `V, U, W`, where `U`
//! is the intersection of the end tangents.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::curve::{max_abs_curvature, Bezier, CubicBezier, Curve, QuadBezier};
use super::point::Point2;
use super::search::golden_min;
use crate::error::Result;

const FRACTION_MAX: f64 = 0.98;
const LINE_SCAN: usize = 16;
const SEARCH_TOL: f64 = 1e-7;
const MAX_SWEEPS: usize = 50;
const STRAIGHT_EPS: f64 = 1e-9;

/// Quadratic legs may be up to this factor longer than cubic legs and the
/// quadratic is still preferred.
pub const QUADRATIC_PREFERENCE: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Quadratic,
    Cubic,
}

/// Inner angle at `u` of the triangle `v, u, w`, in `[0, pi]`.
pub fn inner_angle(v: Point2, u: Point2, w: Point2) -> f64 {
    let a = v - u;
    let b = w - u;
    a.cross(b).abs().atan2(a.dot(b))
}

fn canonical(beta: f64, ratio: f64, fs: f64, ft: f64) -> CubicBezier {
    let v = Point2::new(1.0, 0.0);
    let w = Point2::from_angle(beta) * ratio;
    CubicBezier::new(v, v * fs, w * ft, w)
}

fn search_objective(beta: f64, ratio: f64, fs: f64, ft: f64) -> f64 {
    max_abs_curvature(&canonical(beta, ratio, fs, ft), 128, 1e-7).1
}

/// Scan-then-golden line search along `dir` from `x`, staying in the box.
fn line_search<F: Fn(f64, f64) -> f64>(f: &F, x: (f64, f64), fx: f64, dir: (f64, f64)) -> ((f64, f64), f64) {
    let range = |p: f64, d: f64| -> (f64, f64) {
        if d > 0.0 {
            (-p / d, (FRACTION_MAX - p) / d)
        } else if d < 0.0 {
            ((FRACTION_MAX - p) / d, -p / d)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    };
    let (a0, b0) = range(x.0, dir.0);
    let (a1, b1) = range(x.1, dir.1);
    let (lo, hi) = (a0.max(a1), b0.min(b1));
    if !(hi > lo) {
        return (x, fx);
    }
    let at = |s: f64| (x.0 + s * dir.0, x.1 + s * dir.1);
    let g = |s: f64| {
        let p = at(s);
        f(p.0, p.1)
    };
    let step = (hi - lo) / LINE_SCAN as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..=LINE_SCAN {
        let v = g(lo + step * i as f64);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = lo + step * (best_i + 1).min(LINE_SCAN) as f64;
    let (s, v) = golden_min(g, a, b, SEARCH_TOL);
    let (s, v) = if v < best_v { (s, v) } else { (lo + step * best_i as f64, best_v) };
    if v < fx {
        (at(s), v)
    } else {
        (x, fx)
    }
}

/// Optimal inner-point fractions `(|US|/|UV|, |UT|/|UW|)` for a triangle
/// with inner angle `beta` and leg ratio `|UW|/|UV|`.
pub fn optimal_fractions_uncached(beta: f64, ratio: f64) -> (f64, f64) {
    let f = |a: f64, b: f64| search_objective(beta, ratio, a, b);
    let (c, fc) = golden_min(|c| f(c, c), 0.0, FRACTION_MAX, SEARCH_TOL);
    let mut x = (c, c);
    let mut fx = fc;
    let dirs = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)];
    for _ in 0..MAX_SWEEPS {
        let start = fx;
        for d in dirs {
            let (nx, nf) = line_search(&f, x, fx, d);
            x = nx;
            fx = nf;
        }
        if start - fx <= 1e-12 * start {
            break;
        }
    }
    x
}

fn cache() -> &'static Mutex<HashMap<(u64, u64), (f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), (f64, f64)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized [`optimal_fractions_uncached`]. Keys are the exact bit patterns
/// of the inputs, so cached and direct results are identical.
pub fn optimal_fractions(beta: f64, ratio: f64) -> (f64, f64) {
    let key = (beta.to_bits(), ratio.to_bits());
    if let Some(v) = cache().lock().expect("cache poisoned").get(&key) {
        return *v;
    }
    let v = optimal_fractions_uncached(beta, ratio);
    cache().lock().expect("cache poisoned").insert(key, v);
    v
}

fn construct_with(
    v: Point2,
    u: Point2,
    w: Point2,
    fractions: impl Fn(f64, f64) -> (f64, f64),
) -> Result<(CubicBezier, f64, f64)> {
    let a = v.distance(u);
    let b = w.distance(u);
    let beta = inner_angle(v, u, w);
    if a < STRAIGHT_EPS || b < STRAIGHT_EPS || beta > PI - STRAIGHT_EPS || beta < STRAIGHT_EPS {
        let line = CubicBezier::line(v, w);
        return Ok((line, line.s.distance(u), line.t.distance(u)));
    }
    let (fs, ft) = fractions(beta, b / a);
    let s = u + (v - u) * fs;
    let t = u + (w - u) * ft;
    Ok((CubicBezier::new(v, s, t, w), fs * a, ft * b))
}

/// Cubic through `V` and `W`, tangent to `UV` and `UW`, whose inner points
/// `S = U + c_S (V - U)/|UV|`, `T = U + c_T (W - U)/|UW|` minimize the
/// maximum curvature. Collinear input yields a straight segment.
pub fn construct_cubic(v: Point2, u: Point2, w: Point2) -> Result<(CubicBezier, f64, f64)> {
    construct_with(v, u, w, optimal_fractions)
}

/// As [`construct_cubic`] without consulting the cache.
pub fn construct_cubic_uncached(v: Point2, u: Point2, w: Point2) -> Result<(CubicBezier, f64, f64)> {
    construct_with(v, u, w, optimal_fractions_uncached)
}

fn unit_curve(angle: f64, kind: CurveKind) -> Curve {
    let v = Point2::new(1.0, 0.0);
    let w = Point2::from_angle(angle);
    match kind {
        CurveKind::Quadratic => QuadBezier::new(v, Point2::ZERO, w).into(),
        CurveKind::Cubic => {
            let (fs, ft) = optimal_fractions(angle, 1.0);
            CubicBezier::new(v, v * fs, w * ft, w).into()
        }
    }
}

/// Leg length `|UV| = |UW|` at which the isosceles curve with inner angle
/// `angle` has minimum radius `r_min`. Curvature scales inversely with size,
/// so one evaluation at unit legs suffices.
pub fn scale_isosceles_for_radius(angle: f64, r_min: f64, kind: CurveKind) -> f64 {
    if angle >= PI - STRAIGHT_EPS {
        return 0.0;
    }
    let (_, k) = unit_curve(angle, kind).max_curvature();
    r_min * k
}

/// Quadratic unless its legs would be noticeably longer than the cubic's.
pub fn select_kind(angle: f64) -> CurveKind {
    if angle >= PI - STRAIGHT_EPS {
        return CurveKind::Quadratic;
    }
    let q = scale_isosceles_for_radius(angle, 1.0, CurveKind::Quadratic);
    let c = scale_isosceles_for_radius(angle, 1.0, CurveKind::Cubic);
    if q <= c * QUADRATIC_PREFERENCE {
        CurveKind::Quadratic
    } else {
        CurveKind::Cubic
    }
}

/// Reference curve for a turn with control triangle `V, U, W`, using the
/// kind [`select_kind`] picks for its inner angle.
pub fn turn_curve(v: Point2, u: Point2, w: Point2) -> Result<Curve> {
    let beta = inner_angle(v, u, w);
    Ok(match select_kind(beta) {
        CurveKind::Quadratic => QuadBezier::new(v, u, w).into(),
        CurveKind::Cubic => construct_cubic(v, u, w)?.0.into(),
    })
}
