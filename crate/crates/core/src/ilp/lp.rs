//! Dense two-phase simplex used only to bound branch-and-bound nodes.

const EPS: f64 = 1e-10;

/// Maximizes `c . x` subject to `a_r . x <= b_r` for every row and
/// `0 <= x_j <= upper_j`. Returns `None` when the region is empty.
pub(crate) fn lp_max(c: &[f64], rows: &[(Vec<f64>, f64)], upper: &[f64]) -> Option<f64> {
    let n = c.len();
    if n == 0 {
        return rows.iter().all(|(_, b)| *b >= -1e-9).then_some(0.0);
    }
    let mut all_rows: Vec<(Vec<f64>, f64)> = rows.to_vec();
    for (j, &u) in upper.iter().enumerate() {
        let mut r = vec![0.0; n];
        r[j] = 1.0;
        all_rows.push((r, u));
    }
    let m = all_rows.len();
    let n_art = all_rows.iter().filter(|(_, b)| *b < 0.0).count();
    let width = n + m + n_art + 1;
    let rhs = width - 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    let mut basis = vec![0usize; m];
    let mut art = n + m;
    for (i, (a, b)) in all_rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[j];
        }
        t[i][n + i] = sign;
        t[i][rhs] = sign * b;
        if *b < 0.0 {
            t[i][art] = 1.0;
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }

    if n_art > 0 {
        // phase 1: maximize -sum(artificials)
        for j in n + m..n + m + n_art {
            t[m][j] = 1.0;
        }
        for i in 0..m {
            if basis[i] >= n + m {
                for j in 0..width {
                    t[m][j] -= t[i][j];
                }
            }
        }
        run_simplex(&mut t, &mut basis, width - 1);
        let scale = 1.0 + all_rows.iter().map(|(_, b)| b.abs()).fold(0.0, f64::max);
        if t[m][rhs] < -1e-7 * scale {
            return None;
        }
        // drive remaining artificials out of the basis
        for i in 0..m {
            if basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| t[i][j].abs() > 1e-9) {
                    pivot(&mut t, &mut basis, i, j);
                }
            }
        }
        for row in t.iter_mut() {
            for j in n + m..n + m + n_art {
                row[j] = 0.0;
            }
        }
    }

    // phase 2
    for j in 0..width {
        t[m][j] = 0.0;
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    for i in 0..m {
        let bv = basis[i];
        if bv < n + m {
            let f = t[m][bv];
            if f != 0.0 {
                for j in 0..width {
                    t[m][j] -= f * t[i][j];
                }
            }
        }
    }
    run_simplex(&mut t, &mut basis, n + m);
    Some(t[m][rhs])
}

/// Bland's rule simplex over the first `n_cols` columns.
fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], n_cols: usize) {
    let m = basis.len();
    let rhs = t[0].len() - 1;
    for _ in 0..10_000 {
        let Some(enter) = (0..n_cols).find(|&j| t[m][j] < -EPS) else {
            return;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let a = t[i][enter];
            if a > EPS {
                let ratio = t[i][rhs] / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            // unbounded direction; cannot happen with explicit upper bounds
            return;
        };
        pivot(t, basis, leave, enter);
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row {
            let f = r[col];
            if f != 0.0 {
                for (v, pr) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
    }
    basis[row] = col;
}
