use serde::{Deserialize, Serialize};

use super::point::Point2;
use super::search::golden_max;
use crate::error::{Error, Result};

/// Samples used by the coarse scan of [`Bezier::max_curvature`].
pub const CURVATURE_SCAN: usize = 512;
const REFINE_TOL: f64 = 1e-9;
const SINGULAR_SPEED: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadBezier {
    pub v: Point2,
    pub u: Point2,
    pub w: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicBezier {
    pub v: Point2,
    pub s: Point2,
    pub t: Point2,
    pub w: Point2,
}

/// Either kind of reference curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Curve {
    Quadratic(QuadBezier),
    Cubic(CubicBezier),
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::ParameterRange { t })
    }
}

/// Shared evaluation interface of the Bézier forms. The `*_at` methods do
/// not range-check `t`.
pub trait Bezier {
    fn point_at(&self, t: f64) -> Point2;
    fn d1_at(&self, t: f64) -> Point2;
    fn d2_at(&self, t: f64) -> Point2;
    fn start(&self) -> Point2;
    fn end(&self) -> Point2;

    fn eval(&self, t: f64) -> Result<Point2> {
        check_t(t)?;
        Ok(self.point_at(t))
    }

    fn deriv1(&self, t: f64) -> Result<Point2> {
        check_t(t)?;
        Ok(self.d1_at(t))
    }

    fn deriv2(&self, t: f64) -> Result<Point2> {
        check_t(t)?;
        Ok(self.d2_at(t))
    }

    /// Signed curvature; positive for left turns.
    fn curvature(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        let d1 = self.d1_at(t);
        let speed = d1.norm();
        if speed < SINGULAR_SPEED {
            return Err(Error::Singular { t });
        }
        Ok(d1.cross(self.d2_at(t)) / (speed * speed * speed))
    }

    /// `|kappa|`, infinite at singular points.
    fn abs_curvature_at(&self, t: f64) -> f64 {
        let d1 = self.d1_at(t);
        let speed = d1.norm();
        if speed < SINGULAR_SPEED {
            return f64::INFINITY;
        }
        (d1.cross(self.d2_at(t)) / (speed * speed * speed)).abs()
    }

    /// `(t*, max |kappa|)` from a dense scan refined by golden section
    /// around every local maximum of the scan.
    fn max_curvature(&self) -> (f64, f64) {
        max_abs_curvature(self, CURVATURE_SCAN, REFINE_TOL)
    }

    /// `1 / max |kappa|`; infinite for straight curves.
    fn min_radius(&self) -> f64 {
        let (_, k) = self.max_curvature();
        if k == 0.0 {
            f64::INFINITY
        } else {
            1.0 / k
        }
    }

    /// Parameters of `n >= 2` points spaced evenly in arclength.
    fn arclength_params(&self, n: usize) -> Vec<f64> {
        arclength_params(self, n)
    }

    fn length(&self) -> f64 {
        let m = 1024;
        let mut prev = self.point_at(0.0);
        let mut len = 0.0;
        for i in 1..=m {
            let p = self.point_at(i as f64 / m as f64);
            len += p.distance(prev);
            prev = p;
        }
        len
    }
}

/// Scan-and-refine maximum of `|kappa|` with an explicit scan size.
pub fn max_abs_curvature<B: Bezier + ?Sized>(curve: &B, scan: usize, tol: f64) -> (f64, f64) {
    let ts: Vec<f64> = (0..=scan).map(|i| i as f64 / scan as f64).collect();
    let ks: Vec<f64> = ts.iter().map(|&t| curve.abs_curvature_at(t)).collect();
    let mut best = (0.0, ks[0]);
    for (i, &k) in ks.iter().enumerate() {
        if k > best.1 || (best.1.is_nan() && !k.is_nan()) {
            best = (ts[i], k);
        }
    }
    if best.1.is_infinite() {
        return best;
    }
    for i in 0..ks.len() {
        let left = if i > 0 { ks[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < ks.len() { ks[i + 1] } else { f64::NEG_INFINITY };
        if ks[i] >= left && ks[i] >= right && ks[i] > 0.0 {
            let a = ts[i.saturating_sub(1)];
            let b = ts[(i + 1).min(ts.len() - 1)];
            let (t, k) = golden_max(|t| curve.abs_curvature_at(t), a, b, tol);
            if k > best.1 {
                best = (t, k);
            }
        }
    }
    best
}

fn arclength_params<B: Bezier + ?Sized>(curve: &B, n: usize) -> Vec<f64> {
    assert!(n >= 2, "need at least two samples");
    let m = 2048;
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    let mut prev = curve.point_at(0.0);
    for i in 1..=m {
        let p = curve.point_at(i as f64 / m as f64);
        cum.push(cum[i - 1] + p.distance(prev));
        prev = p;
    }
    let total = cum[m];
    if total == 0.0 {
        return (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    }
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let target = total * i as f64 / (n - 1) as f64;
        while j + 1 < m && cum[j + 1] < target {
            j += 1;
        }
        let seg = cum[j + 1] - cum[j];
        let f = if seg > 0.0 { (target - cum[j]) / seg } else { 0.0 };
        out.push(((j as f64 + f.clamp(0.0, 1.0)) / m as f64).min(1.0));
    }
    out[0] = 0.0;
    out[n - 1] = 1.0;
    out
}

impl QuadBezier {
    pub fn new(v: Point2, u: Point2, w: Point2) -> Self {
        QuadBezier { v, u, w }
    }

    /// The same curve in cubic form.
    pub fn elevate(&self) -> CubicBezier {
        CubicBezier {
            v: self.v,
            s: self.v + (self.u - self.v) * (2.0 / 3.0),
            t: self.w + (self.u - self.w) * (2.0 / 3.0),
            w: self.w,
        }
    }
}

impl Bezier for QuadBezier {
    fn point_at(&self, t: f64) -> Point2 {
        let s = 1.0 - t;
        self.v * (s * s) + self.u * (2.0 * s * t) + self.w * (t * t)
    }

    fn d1_at(&self, t: f64) -> Point2 {
        (self.u - self.v) * (2.0 * (1.0 - t)) + (self.w - self.u) * (2.0 * t)
    }

    fn d2_at(&self, _t: f64) -> Point2 {
        (self.w - self.u * 2.0 + self.v) * 2.0
    }

    fn start(&self) -> Point2 {
        self.v
    }

    fn end(&self) -> Point2 {
        self.w
    }
}

impl CubicBezier {
    pub fn new(v: Point2, s: Point2, t: Point2, w: Point2) -> Self {
        CubicBezier { v, s, t, w }
    }

    /// Straight segment from `a` to `b` in cubic form.
    pub fn line(a: Point2, b: Point2) -> Self {
        CubicBezier::new(a, a.lerp(b, 1.0 / 3.0), a.lerp(b, 2.0 / 3.0), b)
    }
}

impl Bezier for CubicBezier {
    fn point_at(&self, t: f64) -> Point2 {
        let s = 1.0 - t;
        self.v * (s * s * s) + self.s * (3.0 * s * s * t) + self.t * (3.0 * s * t * t) + self.w * (t * t * t)
    }

    fn d1_at(&self, t: f64) -> Point2 {
        let s = 1.0 - t;
        (self.s - self.v) * (3.0 * s * s) + (self.t - self.s) * (6.0 * s * t) + (self.w - self.t) * (3.0 * t * t)
    }

    fn d2_at(&self, t: f64) -> Point2 {
        (self.t - self.s * 2.0 + self.v) * (6.0 * (1.0 - t)) + (self.w - self.t * 2.0 + self.s) * (6.0 * t)
    }

    fn start(&self) -> Point2 {
        self.v
    }

    fn end(&self) -> Point2 {
        self.w
    }
}

impl Curve {
    pub fn control_points(&self) -> Vec<Point2> {
        match self {
            Curve::Quadratic(q) => vec![q.v, q.u, q.w],
            Curve::Cubic(c) => vec![c.v, c.s, c.t, c.w],
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, Curve::Quadratic(_))
    }

    pub fn reversed(&self) -> Curve {
        match *self {
            Curve::Quadratic(q) => Curve::Quadratic(QuadBezier::new(q.w, q.u, q.v)),
            Curve::Cubic(c) => Curve::Cubic(CubicBezier::new(c.w, c.t, c.s, c.v)),
        }
    }

    /// Samples `n` points evenly spaced in arclength.
    pub fn sample(&self, n: usize) -> Vec<Point2> {
        self.arclength_params(n)
            .into_iter()
            .map(|t| self.point_at(t))
            .collect()
    }
}

impl Bezier for Curve {
    fn point_at(&self, t: f64) -> Point2 {
        match self {
            Curve::Quadratic(q) => q.point_at(t),
            Curve::Cubic(c) => c.point_at(t),
        }
    }

    fn d1_at(&self, t: f64) -> Point2 {
        match self {
            Curve::Quadratic(q) => q.d1_at(t),
            Curve::Cubic(c) => c.d1_at(t),
        }
    }

    fn d2_at(&self, t: f64) -> Point2 {
        match self {
            Curve::Quadratic(q) => q.d2_at(t),
            Curve::Cubic(c) => c.d2_at(t),
        }
    }

    fn start(&self) -> Point2 {
        match self {
            Curve::Quadratic(q) => q.v,
            Curve::Cubic(c) => c.v,
        }
    }

    fn end(&self) -> Point2 {
        match self {
            Curve::Quadratic(q) => q.w,
            Curve::Cubic(c) => c.w,
        }
    }
}

impl From<QuadBezier> for Curve {
    fn from(q: QuadBezier) -> Self {
        Curve::Quadratic(q)
    }
}

impl From<CubicBezier> for Curve {
    fn from(c: CubicBezier) -> Self {
        Curve::Cubic(c)
    }
}
