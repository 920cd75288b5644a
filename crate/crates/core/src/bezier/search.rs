//! Derivative-free one-dimensional minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `f` on `[a, b]` down to an interval of
/// width `tol`. Returns the best point seen and its value.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Golden-section maximization; see [`golden_min`].
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|t| -f(t), a, b, tol);
    (x, -v)
}

/// Smallest `x` in `[lo, hi]` with `ok(x)`, assuming `ok` is monotone
/// (false below, true above) and `ok(hi)` holds.
pub fn bisect_threshold<F: FnMut(f64) -> bool>(mut ok: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_minimum() {
        let (x, v) = golden_min(|x| (x - 1.3).powi(2) + 2.0, -4.0, 5.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn maximum_and_reversed_bracket() {
        let (x, _) = golden_max(|x: f64| x.sin(), 3.0, 0.0, 1e-10);
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
    }

    #[test]
    fn threshold() {
        let x = bisect_threshold(|x| x * x >= 2.0, 0.0, 2.0, 1e-12);
        assert!((x - 2f64.sqrt()).abs() < 1e-11);
    }
}
