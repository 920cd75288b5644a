//! Bounded integer linear programs: maximize `c . x` over non-negative
//! integer vectors subject to linear inequalities.
//!
//! The solver is a depth-first branch-and-bound. Variables are branched in
//! index order with values tried from the largest down, so among optima of
//! equal value the lexicographically greatest one is found first and kept.
//! Nodes are pruned by interval arithmetic and then by the LP relaxation.

mod lp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest search space `enumerate_feasible` will walk.
pub const ENUMERATION_LIMIT: f64 = 1e7;

const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerProgram {
    pub objective: Vec<f64>,
    pub leq_rows: Vec<(Vec<f64>, f64)>,
    pub geq_rows: Vec<(Vec<f64>, f64)>,
    explicit_bounds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpSolution {
    pub x: Vec<u64>,
    pub objective_value: f64,
    pub status: Status,
}

impl IlpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

impl IntegerProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        IntegerProgram {
            objective,
            leq_rows: Vec::new(),
            geq_rows: Vec::new(),
            explicit_bounds: None,
        }
    }

    /// Adds `row . x <= bound`.
    pub fn leq(mut self, row: Vec<f64>, bound: f64) -> Self {
        self.leq_rows.push((row, bound));
        self
    }

    /// Adds `row . x >= bound`.
    pub fn geq(mut self, row: Vec<f64>, bound: f64) -> Self {
        self.geq_rows.push((row, bound));
        self
    }

    /// Caps every variable explicitly, in addition to the derived bounds.
    pub fn with_upper_bounds(mut self, bounds: Vec<u64>) -> Self {
        self.explicit_bounds = Some(bounds);
        self
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProgram("non-finite objective".into()));
        }
        for (row, b) in self.leq_rows.iter().chain(&self.geq_rows) {
            if row.len() != n {
                return Err(Error::InvalidProgram(format!(
                    "row of length {} for {n} variables",
                    row.len()
                )));
            }
            if !b.is_finite() || row.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidProgram("non-finite constraint".into()));
            }
        }
        if let Some(ub) = &self.explicit_bounds {
            if ub.len() != n {
                return Err(Error::InvalidProgram("bound vector length mismatch".into()));
            }
        }
        Ok(())
    }

    /// Per-variable bounds: the minimum of `floor(b / a_i)` over `<=` rows
    /// whose coefficients are all non-negative, combined with any explicit
    /// bounds.
    pub fn upper_bounds(&self) -> Result<Vec<u64>> {
        self.validate()?;
        let n = self.n_vars();
        let mut ub: Vec<Option<u64>> = match &self.explicit_bounds {
            Some(b) => b.iter().map(|&v| Some(v)).collect(),
            None => vec![None; n],
        };
        for (row, b) in &self.leq_rows {
            if row.iter().any(|&a| a < 0.0) {
                continue;
            }
            for (i, &a) in row.iter().enumerate() {
                if a > 0.0 {
                    let cap = if *b < 0.0 {
                        0
                    } else {
                        (b / a + FEAS_TOL).floor() as u64
                    };
                    ub[i] = Some(ub[i].map_or(cap, |u| u.min(cap)));
                }
            }
        }
        ub.into_iter()
            .enumerate()
            .map(|(i, u)| {
                u.ok_or_else(|| {
                    Error::InvalidProgram(format!("variable {i} has no finite upper bound"))
                })
            })
            .collect()
    }

    pub fn objective_at(&self, x: &[u64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(c, &v)| c * v as f64)
            .sum()
    }

    pub fn is_feasible(&self, x: &[u64]) -> bool {
        let dot = |row: &[f64]| -> f64 { row.iter().zip(x).map(|(a, &v)| a * v as f64).sum() };
        self.leq_rows
            .iter()
            .all(|(r, b)| dot(r) <= b + FEAS_TOL * b.abs().max(1.0))
            && self
                .geq_rows
                .iter()
                .all(|(r, b)| dot(r) >= b - FEAS_TOL * b.abs().max(1.0))
    }

    fn integral_objective(&self) -> bool {
        self.objective.iter().all(|c| c.fract() == 0.0)
    }
}

/// Globally optimal integer solution; lexicographically greatest among ties.
pub fn solve(program: &IntegerProgram) -> Result<IlpSolution> {
    let ub = program.upper_bounds()?;
    let mut search = Search::new(program, ub);
    search.descend(0);
    Ok(match search.best_x {
        Some(x) => IlpSolution {
            x,
            objective_value: search.best,
            status: Status::Optimal,
        },
        None => IlpSolution {
            x: Vec::new(),
            objective_value: f64::NEG_INFINITY,
            status: Status::Infeasible,
        },
    })
}

/// Every feasible integer point with its objective, in lexicographic order.
pub fn enumerate_feasible(program: &IntegerProgram) -> Result<Vec<(Vec<u64>, f64)>> {
    let ub = program.upper_bounds()?;
    let size: f64 = ub.iter().map(|&u| u as f64 + 1.0).product();
    if size > ENUMERATION_LIMIT {
        return Err(Error::Intractable {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    let n = ub.len();
    let mut out = Vec::new();
    let mut x = vec![0u64; n];
    loop {
        if program.is_feasible(&x) {
            out.push((x.clone(), program.objective_at(&x)));
        }
        // odometer, last variable fastest
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if x[i] < ub[i] {
                x[i] += 1;
                break;
            }
            x[i] = 0;
        }
    }
}

struct Search<'a> {
    p: &'a IntegerProgram,
    ub: Vec<u64>,
    integral: bool,
    x: Vec<u64>,
    leq_acc: Vec<f64>,
    geq_acc: Vec<f64>,
    obj_acc: f64,
    best: f64,
    best_x: Option<Vec<u64>>,
}

impl<'a> Search<'a> {
    fn new(p: &'a IntegerProgram, ub: Vec<u64>) -> Self {
        Search {
            integral: p.integral_objective(),
            x: vec![0; ub.len()],
            leq_acc: vec![0.0; p.leq_rows.len()],
            geq_acc: vec![0.0; p.geq_rows.len()],
            obj_acc: 0.0,
            best: f64::NEG_INFINITY,
            best_x: None,
            p,
            ub,
        }
    }

    fn improves(&self, value: f64) -> bool {
        if self.best_x.is_none() {
            return true;
        }
        if self.integral {
            value > self.best
        } else {
            value > self.best + 1e-9
        }
    }

    /// True when no point below this bound can beat the incumbent.
    fn bound_prunes(&self, bound: f64) -> bool {
        if self.best_x.is_none() {
            return false;
        }
        if self.integral {
            (bound + 1e-6).floor() <= self.best
        } else {
            bound <= self.best + 1e-9
        }
    }

    fn descend(&mut self, k: usize) {
        let n = self.ub.len();
        let p = self.p;

        // interval feasibility of the remaining free variables
        for (r, (row, b)) in p.leq_rows.iter().enumerate() {
            let min_rest: f64 = (k..n).map(|j| (row[j] * self.ub[j] as f64).min(0.0)).sum();
            if self.leq_acc[r] + min_rest > b + FEAS_TOL * b.abs().max(1.0) {
                return;
            }
        }
        for (r, (row, b)) in p.geq_rows.iter().enumerate() {
            let max_rest: f64 = (k..n).map(|j| (row[j] * self.ub[j] as f64).max(0.0)).sum();
            if self.geq_acc[r] + max_rest < b - FEAS_TOL * b.abs().max(1.0) {
                return;
            }
        }
        if k == n {
            if self.improves(self.obj_acc) {
                self.best = self.obj_acc;
                self.best_x = Some(self.x.clone());
            }
            return;
        }

        let interval: f64 = self.obj_acc
            + (k..n)
                .map(|j| (p.objective[j] * self.ub[j] as f64).max(0.0))
                .sum::<f64>();
        if self.bound_prunes(interval) {
            return;
        }
        if self.best_x.is_some() {
            match self.relaxation(k) {
                None => return,
                Some(v) if self.bound_prunes(self.obj_acc + v) => return,
                _ => {}
            }
        }

        let mut hi = self.ub[k];
        for (r, (row, b)) in p.leq_rows.iter().enumerate() {
            if row[k] > 0.0 {
                let min_rest: f64 = (k + 1..n)
                    .map(|j| (row[j] * self.ub[j] as f64).min(0.0))
                    .sum();
                let room = (b - self.leq_acc[r] - min_rest) / row[k];
                let cap = (room + FEAS_TOL).floor().max(0.0) as u64;
                hi = hi.min(cap);
            }
        }
        for value in (0..=hi).rev() {
            let v = value as f64;
            self.x[k] = value;
            for (r, (row, _)) in p.leq_rows.iter().enumerate() {
                self.leq_acc[r] += row[k] * v;
            }
            for (r, (row, _)) in p.geq_rows.iter().enumerate() {
                self.geq_acc[r] += row[k] * v;
            }
            self.obj_acc += p.objective[k] * v;
            self.descend(k + 1);
            self.obj_acc -= p.objective[k] * v;
            for (r, (row, _)) in p.leq_rows.iter().enumerate() {
                self.leq_acc[r] -= row[k] * v;
            }
            for (r, (row, _)) in p.geq_rows.iter().enumerate() {
                self.geq_acc[r] -= row[k] * v;
            }
        }
        self.x[k] = 0;
    }

    /// LP relaxation over the free variables `k..n`.
    fn relaxation(&self, k: usize) -> Option<f64> {
        let p = self.p;
        let c = &p.objective[k..];
        let mut rows = Vec::with_capacity(p.leq_rows.len() + p.geq_rows.len());
        for (r, (row, b)) in p.leq_rows.iter().enumerate() {
            rows.push((row[k..].to_vec(), b - self.leq_acc[r]));
        }
        for (r, (row, b)) in p.geq_rows.iter().enumerate() {
            rows.push((row[k..].iter().map(|a| -a).collect(), -(b - self.geq_acc[r])));
        }
        let upper: Vec<f64> = self.ub[k..].iter().map(|&u| u as f64).collect();
        lp::lp_max(c, &rows, &upper)
    }
}
