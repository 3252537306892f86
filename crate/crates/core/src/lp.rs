//! Dense two-phase primal simplex for small bounded-variable linear programs.
//!
//! Every variable carries finite bounds `[lo, hi]`, so the problems are never
//! unbounded. Variables are shifted to `x - lo >= 0`, the upper bounds become
//! explicit rows, and Bland's rule picks both the entering and the leaving
//! variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivot tolerance.
pub const PIVOT_TOL: f64 = 1e-9;
/// Hard cap on simplex pivots across both phases.
pub const MAX_PIVOTS: usize = 1_000_000;

const CONSTRAINT_TOL: f64 = 1e-8;
const BOUND_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize objective . x` subject to the constraints and `lo <= x <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, bounds: Vec<(f64, f64)>) -> Self {
        LpProblem {
            objective,
            constraints: Vec::new(),
            bounds,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.bounds.len(),
            });
        }
        for (k, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Lp(format!("variable {k} has a non-finite bound")));
            }
            if lo > hi {
                return Err(Error::Lp(format!("variable {k} has lo {lo} > hi {hi}")));
            }
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Lp(format!(
                    "constraint {r} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Lp(format!("constraint {r} has a non-finite entry")));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound by `x`: `(constraint, bound)`.
    pub fn violations(&self, x: &[f64]) -> (f64, f64) {
        let mut cv: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            cv = cv.max(v);
        }
        let mut bv: f64 = 0.0;
        for (&xi, &(lo, hi)) in x.iter().zip(&self.bounds) {
            bv = bv.max(lo - xi).max(xi - hi);
        }
        (cv, bv)
    }

    /// Independent feasibility check of a candidate solution at the
    /// tolerances promised for optimal solutions.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let (cv, bv) = self.violations(x);
        let scale = 1.0
            + self
                .constraints
                .iter()
                .map(|c| c.rhs.abs())
                .fold(0.0, f64::max);
        cv <= CONSTRAINT_TOL * scale && bv <= BOUND_TOL
    }
}

/// Solves `p` with the two-phase simplex method under Bland's rule.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let lo: Vec<f64> = p.bounds.iter().map(|b| b.0).collect();

    // Rows in terms of the shifted variables, each with rhs >= 0.
    struct Row {
        coeffs: Vec<f64>,
        rel: Relation,
        rhs: f64,
    }
    let mut rows: Vec<Row> = Vec::new();
    for c in &p.constraints {
        let shift: f64 = c.coeffs.iter().zip(&lo).map(|(a, l)| a * l).sum();
        rows.push(Row {
            coeffs: c.coeffs.clone(),
            rel: c.relation,
            rhs: c.rhs - shift,
        });
    }
    for (j, &(l, h)) in p.bounds.iter().enumerate() {
        let mut coeffs = vec![0.0; n];
        coeffs[j] = 1.0;
        rows.push(Row {
            coeffs,
            rel: Relation::Le,
            rhs: h - l,
        });
    }
    for r in rows.iter_mut() {
        if r.rhs < 0.0 {
            r.rhs = -r.rhs;
            r.coeffs.iter_mut().for_each(|v| *v = -*v);
            r.rel = match r.rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Column layout: structural | slack/surplus | artificial.
    let n_slack = rows.iter().filter(|r| r.rel != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.rel != Relation::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;
    let mut tab = Tableau {
        a: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        width,
        pivots: 0,
    };
    let (mut s, mut a) = (n, art_start);
    for r in &rows {
        let mut t = vec![0.0; width + 1];
        t[..n].copy_from_slice(&r.coeffs);
        t[width] = r.rhs;
        match r.rel {
            Relation::Le => {
                t[s] = 1.0;
                tab.basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                t[s] = -1.0;
                t[a] = 1.0;
                tab.basis.push(a);
                s += 1;
                a += 1;
            }
            Relation::Eq => {
                t[a] = 1.0;
                tab.basis.push(a);
                a += 1;
            }
        }
        tab.a.push(t);
    }
    let rhs_scale = 1.0 + rows.iter().map(|r| r.rhs).fold(0.0, f64::max);

    // Phase 1: maximize -(sum of artificials).
    if n_art > 0 {
        let mut cost = vec![0.0; width];
        cost[art_start..].iter_mut().for_each(|c| *c = -1.0);
        let allowed = width;
        tab.optimize(&cost, allowed)?;
        let infeas: f64 = tab
            .basis
            .iter()
            .zip(&tab.a)
            .filter(|(&b, _)| b >= art_start)
            .map(|(_, row)| row[width])
            .sum();
        if infeas > PIVOT_TOL * rhs_scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NAN,
            });
        }
        tab.drive_out_artificials(art_start);
    }

    // Phase 2 on the structural + slack columns only.
    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(&p.objective);
    tab.optimize(&cost, art_start)?;

    let mut x = lo.clone();
    for (row, &b) in tab.a.iter().zip(&tab.basis) {
        if b < n {
            x[b] += row[width];
        }
    }
    for (xi, &(l, h)) in x.iter_mut().zip(&p.bounds) {
        *xi = xi.clamp(l, h);
    }
    if !p.is_feasible(&x) {
        let (cv, bv) = p.violations(&x);
        return Err(Error::Lp(format!(
            "solution failed verification (constraint violation {cv:e}, bound violation {bv:e})"
        )));
    }
    let objective = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
    })
}

struct Tableau {
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
    pivots: usize,
}

impl Tableau {
    /// Maximizes `cost . x` over the columns `< allowed` by Bland's rule.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        let w = self.width;
        loop {
            // reduced cost d_j = c_j - c_B . column_j; enter on the lowest j with d_j > tol
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let zj: f64 = self
                    .a
                    .iter()
                    .zip(&self.basis)
                    .map(|(row, &b)| cost[b] * row[j])
                    .sum();
                cost[j] - zj > PIVOT_TOL
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if row[j] > PIVOT_TOL {
                    let ratio = row[w] / row[j];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - PIVOT_TOL
                                || (ratio <= best + PIVOT_TOL && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((i, _)) = leave else {
                return Err(Error::Lp(
                    "unbounded direction in a problem with finite bounds".into(),
                ));
            };
            self.pivot(i, j)?;
        }
    }

    fn pivot(&mut self, i: usize, j: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > MAX_PIVOTS {
            return Err(Error::Lp(format!("exceeded {MAX_PIVOTS} pivots")));
        }
        let p = self.a[i][j];
        self.a[i].iter_mut().for_each(|v| *v /= p);
        let prow = self.a[i].clone();
        for (k, row) in self.a.iter_mut().enumerate() {
            if k != i {
                let f = row[j];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&prow) {
                        *v -= f * pv;
                    }
                    row[j] = 0.0;
                }
            }
        }
        // rhs can drift slightly negative through cancellation
        for row in self.a.iter_mut() {
            let last = row.len() - 1;
            if row[last] < 0.0 && row[last] > -PIVOT_TOL {
                row[last] = 0.0;
            }
        }
        self.basis[i] = j;
        Ok(())
    }

    /// After phase 1, pivots zero-level artificials out of the basis and drops
    /// rows that are redundant.
    fn drive_out_artificials(&mut self, art_start: usize) {
        let mut i = 0;
        while i < self.a.len() {
            if self.basis[i] >= art_start {
                let col = (0..art_start).find(|&j| self.a[i][j].abs() > PIVOT_TOL);
                match col {
                    Some(j) => {
                        // cannot exceed the cap here: at most one pivot per row
                        let _ = self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.a.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in self.a.iter_mut() {
            row[art_start..self.width].iter_mut().for_each(|v| *v = 0.0);
        }
    }
}
