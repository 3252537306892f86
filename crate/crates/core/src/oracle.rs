//! Brute-force baselines for small instances: grid branch-and-bound for the
//! minimum loss, minimum norm and sublevel-set distance (at most 3
//! columns), and vertex enumeration for small LPs.
//!
//! Each grid point `g` owns the box of half-widths `r` around it. On that box
//! every margin moves by at most `sum_j r_j max_i |M_ij|`, which gives a
//! certified lower bound on the loss. Boxes that cannot beat the incumbent
//! are discarded and the rest are split 3 ways per axis, so each level's
//! incumbent is at least as good as the previous one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::lp::{LpProblem, Relation};
use crate::matrix::{log_mean_exp_neg, margins_unchecked, Combination, FeatureMatrix};

pub const MAX_GRID_COLS: usize = 3;
pub const MAX_LP_VARS: usize = 8;
const MAX_LP_CONSTRAINTS: usize = 16;
/// Boxes kept per refinement level; beyond this the most promising survive
/// and the best discarded bound is folded into the error.
pub const MAX_CELLS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Points per axis on the first level.
    pub resolution: usize,
    /// Number of levels, counting the first.
    pub levels: usize,
}

impl GridSpec {
    /// The same range `[lo, hi]` on each of `n` axes.
    pub fn cube(n: usize, lo: f64, hi: f64, resolution: usize, levels: usize) -> Self {
        GridSpec {
            lo: vec![lo; n],
            hi: vec![hi; n],
            resolution,
            levels,
        }
    }

    fn validate(&self, m: &FeatureMatrix) -> Result<()> {
        let n = m.cols();
        if n > MAX_GRID_COLS {
            return Err(Error::OracleRefused(format!(
                "{n} columns; grid oracles handle at most {MAX_GRID_COLS}"
            )));
        }
        if self.lo.len() != n || self.hi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.lo.len().min(self.hi.len()),
            });
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidArgument("grid needs finite lo < hi on every axis".into()));
        }
        if self.resolution < 3 || self.levels == 0 {
            return Err(Error::InvalidArgument(
                "grid needs resolution >= 3 and at least one level".into(),
            ));
        }
        Ok(())
    }
}

/// A certified estimate: the true optimum over the grid's range lies in
/// `[value - error, value]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub value: f64,
    pub error: f64,
    pub argmin: Vec<f64>,
    /// `(value, error)` after each refinement level.
    pub levels: Vec<(f64, f64)>,
}

#[derive(Clone)]
struct Cell {
    center: Vec<f64>,
    radius: Vec<f64>,
}

/// How a search scores a point and bounds a box.
trait Objective {
    /// `(value, feasible)` at a point.
    fn eval(&self, g: &[f64]) -> (f64, bool);
    /// Lower bound of the value over a box, or `None` when no point in it
    /// can be feasible.
    fn bound(&self, c: &Cell) -> Option<f64>;
}

struct Search<'a> {
    col_max: Vec<f64>,
    m: &'a FeatureMatrix,
}

impl Search<'_> {
    fn new(m: &FeatureMatrix) -> Search<'_> {
        let col_max = (0..m.cols())
            .map(|j| m.column(j).iter().map(|v| v.abs()).fold(0.0, f64::max))
            .collect();
        Search { col_max, m }
    }

    fn log_loss(&self, g: &[f64]) -> f64 {
        log_mean_exp_neg(&margins_unchecked(self.m, g))
    }

    fn slack(&self, c: &Cell) -> f64 {
        c.radius.iter().zip(&self.col_max).map(|(r, a)| r * a).sum()
    }
}

struct MinLoss<'a>(Search<'a>);

impl Objective for MinLoss<'_> {
    fn eval(&self, g: &[f64]) -> (f64, bool) {
        (self.0.log_loss(g), true)
    }
    fn bound(&self, c: &Cell) -> Option<f64> {
        Some(self.0.log_loss(&c.center) - self.0.slack(c))
    }
}

struct Distance<'a> {
    s: Search<'a>,
    anchor: &'a [f64],
    log_target: f64,
}

impl Objective for Distance<'_> {
    fn eval(&self, g: &[f64]) -> (f64, bool) {
        let d = g.iter().zip(self.anchor).map(|(a, b)| (a - b).abs()).sum();
        (d, self.s.log_loss(g) <= self.log_target)
    }
    fn bound(&self, c: &Cell) -> Option<f64> {
        if self.s.log_loss(&c.center) - self.s.slack(c) > self.log_target {
            return None;
        }
        Some(
            c.center
                .iter()
                .zip(&c.radius)
                .zip(self.anchor)
                .map(|((g, r), a)| ((g - a).abs() - r).max(0.0))
                .sum(),
        )
    }
}

fn branch_and_bound(obj: &dyn Objective, grid: &GridSpec) -> Option<OracleEstimate> {
    let n = grid.lo.len();
    let steps: Vec<f64> = grid
        .lo
        .iter()
        .zip(&grid.hi)
        .map(|(l, h)| (h - l) / (grid.resolution - 1) as f64)
        .collect();
    let mut cells = Vec::new();
    let total = grid.resolution.pow(n as u32);
    for k in 0..total {
        let mut rem = k;
        let center: Vec<f64> = (0..n)
            .map(|j| {
                let idx = rem % grid.resolution;
                rem /= grid.resolution;
                grid.lo[j] + idx as f64 * steps[j]
            })
            .collect();
        cells.push(Cell {
            center,
            radius: steps.iter().map(|s| s / 2.0).collect(),
        });
    }

    let mut best = f64::INFINITY;
    let mut argmin: Vec<f64> = Vec::new();
    let mut floor = f64::INFINITY;
    let mut levels = Vec::new();
    for level in 0..grid.levels {
        if level > 0 {
            let mut next = Vec::with_capacity(cells.len() * 3usize.pow(n as u32));
            for c in &cells {
                let r: Vec<f64> = c.radius.iter().map(|r| r / 3.0).collect();
                for k in 0..3usize.pow(n as u32) {
                    let mut rem = k;
                    let center: Vec<f64> = (0..n)
                        .map(|j| {
                            let off = (rem % 3) as f64 - 1.0;
                            rem /= 3;
                            c.center[j] + off * 2.0 * r[j]
                        })
                        .collect();
                    next.push(Cell {
                        center,
                        radius: r.clone(),
                    });
                }
            }
            cells = next;
        }
        for c in &cells {
            let (v, ok) = obj.eval(&c.center);
            if ok && v < best {
                best = v;
                argmin = c.center.clone();
            }
        }
        let mut scored: Vec<(f64, Cell)> = cells
            .drain(..)
            .filter_map(|c| obj.bound(&c).map(|b| (b, c)))
            .filter(|(b, _)| *b < best)
            .collect();
        if scored.len() > MAX_CELLS {
            // stable sort keeps the order deterministic among equal bounds
            scored.sort_by(|a, b| a.0.total_cmp(&b.0));
            floor = floor.min(scored[MAX_CELLS].0);
            scored.truncate(MAX_CELLS);
        }
        let lower = scored.iter().map(|(b, _)| *b).fold(floor, f64::min);
        let lower = if lower.is_finite() { lower.min(best) } else { best };
        levels.push((best, best - lower));
        cells = scored.into_iter().map(|(_, c)| c).collect();
    }
    if !best.is_finite() {
        return None;
    }
    let error = levels.last().map_or(0.0, |l| l.1);
    Some(OracleEstimate {
        value: best,
        error,
        argmin,
        levels,
    })
}

/// Smallest normalized loss over the grid's range, with a certified error.
pub fn brute_min_loss(m: &FeatureMatrix, grid: &GridSpec) -> Result<OracleEstimate> {
    grid.validate(m)?;
    let est = branch_and_bound(&MinLoss(Search::new(m)), grid)
        .ok_or_else(|| Error::Inconsistent("empty grid".into()))?;
    // the search runs in log-loss; convert value and error back
    let value = est.value.exp();
    let conv = |(v, e): (f64, f64)| (v.exp(), v.exp() - (v - e).exp());
    Ok(OracleEstimate {
        value,
        error: value - (est.value - est.error).exp(),
        argmin: est.argmin,
        levels: est.levels.into_iter().map(conv).collect(),
    })
}

/// Smallest l1 norm among grid points with loss at most `target`.
pub fn brute_min_norm(m: &FeatureMatrix, target: f64, grid: &GridSpec) -> Result<OracleEstimate> {
    brute_distance(m, &Combination::zeros(m.cols()), target, grid)
}

/// l1 distance from `anchor` to the sublevel set `{L <= target}` over the
/// grid's range. `anchor` itself is tried first.
pub fn brute_distance(
    m: &FeatureMatrix,
    anchor: &Combination,
    target: f64,
    grid: &GridSpec,
) -> Result<OracleEstimate> {
    grid.validate(m)?;
    if anchor.len() != m.cols() {
        return Err(Error::DimensionMismatch {
            expected: m.cols(),
            got: anchor.len(),
        });
    }
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!("target loss must be positive, got {target}")));
    }
    let s = Search::new(m);
    let log_target = target.ln();
    if s.log_loss(anchor.as_slice()) <= log_target {
        return Ok(OracleEstimate {
            value: 0.0,
            error: 0.0,
            argmin: anchor.0.clone(),
            levels: vec![(0.0, 0.0)],
        });
    }
    let obj = Distance {
        s,
        anchor: anchor.as_slice(),
        log_target,
    };
    branch_and_bound(&obj, grid).ok_or_else(|| {
        Error::NotFound(format!("no grid point reaches loss {target}; widen the range"))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VertexResult {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
}

/// Exact LP optimum by enumerating every basic point: each choice of active
/// constraints, the same number of free variables, and a bound for each
/// remaining variable.
pub fn vertex_enumerate_lp(p: &LpProblem) -> Result<VertexResult> {
    p.validate()?;
    let n = p.num_vars();
    let k = p.constraints.len();
    if n > MAX_LP_VARS || k > MAX_LP_CONSTRAINTS {
        return Err(Error::OracleRefused(format!(
            "{n} variables and {k} constraints; vertex enumeration handles at most {MAX_LP_VARS} and {MAX_LP_CONSTRAINTS}"
        )));
    }
    let tol = 1e-9
        * (1.0 + p.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max));
    let feasible = |x: &[f64]| {
        p.bounds.iter().zip(x).all(|(&(l, h), &v)| v >= l - 1e-9 && v <= h + 1e-9)
            && p.constraints.iter().all(|c| {
                let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs + tol,
                    Relation::Ge => lhs >= c.rhs - tol,
                    Relation::Eq => (lhs - c.rhs).abs() <= tol,
                }
            })
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for cmask in 0u32..(1 << k) {
        let active: Vec<usize> = (0..k).filter(|i| cmask >> i & 1 == 1).collect();
        let s = active.len();
        if s > n {
            continue;
        }
        for fmask in 0u32..(1 << n) {
            if fmask.count_ones() as usize != s {
                continue;
            }
            let free: Vec<usize> = (0..n).filter(|j| fmask >> j & 1 == 1).collect();
            let fixed: Vec<usize> = (0..n).filter(|j| fmask >> j & 1 == 0).collect();
            for bmask in 0u32..(1 << fixed.len()) {
                let mut x = vec![0.0; n];
                for (b, &j) in fixed.iter().enumerate() {
                    x[j] = if bmask >> b & 1 == 1 { p.bounds[j].1 } else { p.bounds[j].0 };
                }
                if s > 0 {
                    let a: Vec<Vec<f64>> = active
                        .iter()
                        .map(|&i| free.iter().map(|&j| p.constraints[i].coeffs[j]).collect())
                        .collect();
                    let rhs: Vec<f64> = active
                        .iter()
                        .map(|&i| {
                            let c = &p.constraints[i];
                            c.rhs - fixed.iter().map(|&j| c.coeffs[j] * x[j]).sum::<f64>()
                        })
                        .collect();
                    let Some(sol) = solve_square(&a, &rhs, 1e-12) else {
                        continue;
                    };
                    for (&j, v) in free.iter().zip(sol) {
                        x[j] = v;
                    }
                }
                if feasible(&x) {
                    let val: f64 = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                    if best.as_ref().is_none_or(|(b, _)| val > *b) {
                        best = Some((val, x));
                    }
                }
            }
        }
    }
    Ok(match best {
        Some((value, x)) => VertexResult::Optimal { value, x },
        None => VertexResult::Infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_nonintegral, gen_three_example};
    use crate::lp::{solve, LpStatus};

    #[test]
    fn refuses_wide_matrices() {
        let m = FeatureMatrix::from_rows(&[[1.0, 0.0, 0.0, 1.0]]).unwrap();
        let g = GridSpec::cube(4, -1.0, 1.0, 3, 1);
        assert!(matches!(brute_min_loss(&m, &g), Err(Error::OracleRefused(_))));
        let bad = GridSpec::cube(1, 1.0, 1.0, 3, 1);
        let one = FeatureMatrix::from_rows(&[[1.0]]).unwrap();
        assert!(brute_min_loss(&one, &bad).is_err());
    }

    #[test]
    fn min_loss_examples() {
        let m = gen_three_example().matrix;
        let est = brute_min_loss(&m, &GridSpec::cube(2, -2.0, 12.0, 57, 3)).unwrap();
        assert!((est.value - 2.0 / 3.0).abs() < 1e-3);
        assert!(est.value - est.error <= 2.0 / 3.0);

        let m = gen_nonintegral(0.1).unwrap().matrix;
        let est = brute_min_loss(&m, &GridSpec::cube(2, -5.0, 150.0, 32, 3)).unwrap();
        assert!((est.value - 0.5).abs() < 1e-3, "{}", est.value);

        // a range holding only lambda = 0 (to within 1e-12)
        let est = brute_min_loss(&m, &GridSpec::cube(2, -1e-12, 1e-12, 3, 1)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn refinement_is_monotone() {
        let m = gen_three_example().matrix;
        let est = brute_min_loss(&m, &GridSpec::cube(2, -1.0, 2.0, 5, 5)).unwrap();
        for w in est.levels.windows(2) {
            assert!(w[1].0 <= w[0].0 + w[0].1);
            assert!(w[1].0 <= w[0].0);
        }
    }

    #[test]
    fn min_norm_examples() {
        let m = gen_nonintegral(0.1).unwrap().matrix;
        let est = brute_min_norm(&m, 0.6, &GridSpec::cube(2, 0.0, 24.0, 49, 4)).unwrap();
        let floor = 20.0 * 5f64.ln();
        assert!(est.value >= floor - est.error - 1e-9);
        assert!(est.value <= 1.05 * floor, "{}", est.value);

        assert_eq!(brute_min_norm(&m, 1.0, &GridSpec::cube(2, 0.0, 1.0, 3, 1)).unwrap().value, 0.0);

        let t = gen_three_example().matrix;
        let est = brute_min_norm(&t, 2.0 / 3.0 + 0.05, &GridSpec::cube(2, -1.0, 4.0, 51, 3)).unwrap();
        assert!(est.value <= 20f64.ln() + est.error + 1e-9);
    }

    #[test]
    fn distance_examples() {
        let m = gen_three_example().matrix;
        let star: Combination = vec![1.0, 1.0].into();
        let target = crate::matrix::exp_loss(&m, &star).unwrap();
        let g = GridSpec::cube(2, -1.0, 3.0, 41, 3);
        assert_eq!(brute_distance(&m, &star, target, &g).unwrap().value, 0.0);
        let est = brute_distance(&m, &Combination::zeros(2), target, &g).unwrap();
        assert!(est.value <= 2.0 + est.error);
        assert!(est.value > 0.0);
        assert!(matches!(
            brute_distance(&m, &Combination::zeros(2), 0.5, &g),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn vertex_enumeration_matches_simplex_examples() {
        let mut p = LpProblem::new(vec![1.0], vec![(0.0, 10.0)]);
        p.add(vec![1.0], Relation::Le, 1.0);
        assert_eq!(
            vertex_enumerate_lp(&p).unwrap(),
            VertexResult::Optimal { value: 1.0, x: vec![1.0] }
        );

        let mut p = LpProblem::new(vec![1.0], vec![(-5.0, 5.0)]);
        p.add(vec![1.0], Relation::Ge, 1.0).add(vec![1.0], Relation::Le, 0.0);
        assert_eq!(vertex_enumerate_lp(&p).unwrap(), VertexResult::Infeasible);

        let mut p = LpProblem::new(vec![1.0, 1.0], vec![(0.0, 1.0), (0.0, 1.0)]);
        p.add(vec![1.0, 1.0], Relation::Le, 1.0);
        match vertex_enumerate_lp(&p).unwrap() {
            VertexResult::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }

        // degenerate equality-only system
        let mut p = LpProblem::new(vec![1.0, -2.0, 0.5], vec![(-1.0, 1.0); 3]);
        p.add(vec![1.0, 1.0, 1.0], Relation::Eq, 0.0)
            .add(vec![2.0, 2.0, 2.0], Relation::Eq, 0.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        match vertex_enumerate_lp(&p).unwrap() {
            VertexResult::Optimal { value, .. } => assert!((value - s.objective).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            vertex_enumerate_lp(&LpProblem::new(vec![0.0; 9], vec![(0.0, 1.0); 9])),
            Err(Error::OracleRefused(_))
        ));
    }
}
