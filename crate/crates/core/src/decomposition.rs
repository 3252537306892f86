//! Zero-loss / finite-margin decomposition of a feature matrix, its margin
//! certificate, the finite optimum on the finite-margin set, and the rate
//! constants built from them.
//!
//! The zero-loss set is the largest set of examples that can all receive
//! strictly positive margin while every other example keeps a non-negative
//! one. Certificates for different examples add, so a single LP that
//! maximizes capped slacks finds it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, gram, jacobi_eigen};
use crate::lp::{solve, LpProblem, LpStatus, Relation};
use crate::matrix::{margins_unchecked, Combination, ExampleSet, FeatureMatrix};

/// Slack threshold separating the zero-loss set from pivot noise.
pub const SLACK_THRESHOLD: f64 = 1e-7;
/// Eigenvalues at or below this fraction of the largest count as zero.
pub const EIGEN_REL_TOL: f64 = 1e-9;
pub const NEWTON_GRAD_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITERS: usize = 10_000;
/// Probe count used by [`decompose`] for the empirical margin bound.
pub const DEFAULT_PROBES: usize = 1000;
/// Largest `m` for which the factorial certificate bounds are meaningful.
pub const MAX_CERTIFICATE_ROWS: usize = 10;

/// `n!` as a float; `+inf` once it overflows.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroLossSet {
    pub z: ExampleSet,
    pub f: ExampleSet,
    /// A combination with positive margin on `z` and non-negative margins elsewhere.
    pub witness: Combination,
}

/// Computes the zero-loss set `Z`, its complement `F`, and a witness.
pub fn zero_loss_set(m: &FeatureMatrix) -> Result<ZeroLossSet> {
    let (rows, n) = (m.rows(), m.cols());
    if rows > MAX_CERTIFICATE_ROWS && m.is_integral() {
        log::warn!("{rows} examples: certificate bounds grow like m! and may be unreliable");
    }
    let cap = rows as f64 * factorial(rows) + 1.0;
    if !cap.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "{rows} examples is beyond the range of the certificate bound"
        )));
    }
    // variables: lambda+ (n), lambda- (n), s (rows)
    let nv = 2 * n + rows;
    let mut objective = vec![0.0; nv];
    objective[2 * n..].iter_mut().for_each(|c| *c = 1.0);
    let mut bounds = vec![(0.0, cap); 2 * n];
    bounds.extend(std::iter::repeat_n((0.0, 1.0), rows));
    let mut lp = LpProblem::new(objective, bounds);
    for i in 0..rows {
        let mut row = vec![0.0; nv];
        for (j, &e) in m.row(i).iter().enumerate() {
            row[j] = e;
            row[n + j] = -e;
        }
        row[2 * n + i] = -1.0;
        lp.add(row, Relation::Ge, 0.0);
    }
    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Inconsistent("zero-loss LP infeasible at lambda = 0".into()));
    }
    let witness = Combination((0..n).map(|j| sol.x[j] - sol.x[n + j]).collect());
    let z: Vec<usize> = (0..rows).filter(|&i| sol.x[2 * n + i] >= SLACK_THRESHOLD).collect();
    let z = ExampleSet::new(z, rows)?;
    let f = z.complement(rows);
    Ok(ZeroLossSet { z, f, witness })
}

/// Max-margin certificate: `eta` with unit l1 norm, margin at least `gamma`
/// on `z` and zero margin on `f`. `None` when `z` is empty.
pub fn gamma_certificate(
    m: &FeatureMatrix,
    z: &ExampleSet,
    f: &ExampleSet,
) -> Result<Option<(Combination, f64)>> {
    if z.is_empty() {
        return Ok(None);
    }
    let n = m.cols();
    // variables: eta+ (n), eta- (n), gamma
    let nv = 2 * n + 1;
    let mut objective = vec![0.0; nv];
    objective[2 * n] = 1.0;
    let mut bounds = vec![(0.0, 1.0); 2 * n];
    bounds.push((-1.0, 1.0));
    let mut lp = LpProblem::new(objective, bounds);
    let split = |i: usize| {
        let mut row = vec![0.0; nv];
        for (j, &e) in m.row(i).iter().enumerate() {
            row[j] = e;
            row[n + j] = -e;
        }
        row
    };
    for i in z.iter() {
        let mut row = split(i);
        row[2 * n] = -1.0;
        lp.add(row, Relation::Ge, 0.0);
    }
    for i in f.iter() {
        lp.add(split(i), Relation::Eq, 0.0);
    }
    let mut norm = vec![1.0; nv];
    norm[2 * n] = 0.0;
    lp.add(norm, Relation::Le, 1.0);

    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal || sol.x[2 * n] <= 0.0 {
        return Err(Error::Inconsistent(
            "no positive margin certificate for the zero-loss set".into(),
        ));
    }
    let eta = Combination((0..n).map(|j| sol.x[j] - sol.x[n + j]).collect());
    let eta = eta.scaled(1.0 / eta.l1_norm());
    let mu = margins_unchecked(m, eta.as_slice());
    let gamma = z.iter().map(|i| mu[i]).fold(f64::INFINITY, f64::min);
    Ok(Some((eta, gamma)))
}

fn eigen_of_restriction(m: &FeatureMatrix, f: &ExampleSet) -> (Vec<Vec<f64>>, crate::linalg::SymmetricEigen) {
    let rows = m.restrict_rows(f);
    let g = gram(&rows, m.cols());
    let e = jacobi_eigen(&g);
    (rows, e)
}

fn positive_cutoff(values: &[f64]) -> Option<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    (max > 0.0).then_some(EIGEN_REL_TOL * max)
}

/// Minimizes `l(eta; F) = sum_{i in F} exp(-(M eta)_i)` by damped Newton in
/// the row space of `M_F`. Returns `(eta*, K_F)`.
pub fn finite_optimum(m: &FeatureMatrix, f: &ExampleSet) -> Result<(Combination, f64)> {
    let n = m.cols();
    if f.is_empty() {
        return Ok((Combination::zeros(n), 0.0));
    }
    let (rows, eig) = eigen_of_restriction(m, f);
    let Some(cut) = positive_cutoff(&eig.values) else {
        return Ok((Combination::zeros(n), f.len() as f64));
    };
    let basis: Vec<&Vec<f64>> = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .filter(|(v, _)| **v > cut)
        .map(|(_, u)| u)
        .collect();
    let k = basis.len();
    // A = M_F U, f x k
    let a: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| basis.iter().map(|u| r.iter().zip(*u).map(|(x, y)| x * y).sum()).collect())
        .collect();
    let objective = |c: &[f64]| -> f64 {
        a.iter()
            .map(|row| (-row.iter().zip(c).map(|(x, y)| x * y).sum::<f64>()).exp())
            .sum()
    };
    let to_eta = |c: &[f64]| -> Vec<f64> {
        // `+ 0.0` folds -0.0 into 0.0 for stable reports
        (0..n).map(|j| basis.iter().zip(c).map(|(u, ci)| u[j] * ci).sum::<f64>() + 0.0).collect()
    };

    let mut c = vec![0.0; k];
    let mut value = objective(&c);
    let mut grad_eta = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITERS {
        let w: Vec<f64> = a
            .iter()
            .map(|row| (-row.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>()).exp())
            .collect();
        // gradient in eta-space: -M_F^T w
        grad_eta = (0..n)
            .map(|j| rows.iter().zip(&w).map(|(r, wi)| r[j] * wi).sum::<f64>().abs())
            .fold(0.0, f64::max);
        if grad_eta <= NEWTON_GRAD_TOL {
            let eta = Combination(to_eta(&c));
            let mu = margins_unchecked(m, eta.as_slice());
            let kf = f.iter().map(|i| (-mu[i]).exp()).sum();
            return Ok((eta, kf));
        }
        let g: Vec<f64> = (0..k)
            .map(|p| -a.iter().zip(&w).map(|(row, wi)| row[p] * wi).sum::<f64>())
            .collect();
        let mut h = vec![vec![0.0; k]; k];
        for (row, wi) in a.iter().zip(&w) {
            for p in 0..k {
                for q in 0..k {
                    h[p][q] += wi * row[p] * row[q];
                }
            }
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let step = cholesky_solve(&h, &neg_g).or_else(|| {
            let tr: f64 = (0..k).map(|p| h[p][p]).sum();
            let mut hd = h.clone();
            (0..k).for_each(|p| hd[p][p] += 1e-12 * tr.max(1e-300));
            cholesky_solve(&hd, &neg_g)
        });
        let p = step.unwrap_or(neg_g);
        let slope: f64 = g.iter().zip(&p).map(|(x, y)| x * y).sum();
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = c.iter().zip(&p).map(|(ci, pi)| ci + t * pi).collect();
            let v = objective(&trial);
            if v <= value + 1e-4 * t * slope {
                c = trial;
                value = v;
                break;
            }
            t *= 0.5;
            if t < 1e-20 {
                // no further progress at double precision
                let eta = Combination(to_eta(&c));
                let mu = margins_unchecked(m, eta.as_slice());
                let kf = f.iter().map(|i| (-mu[i]).exp()).sum();
                if grad_eta <= 1e-8 {
                    return Ok((eta, kf));
                }
                return Err(Error::NoConvergence {
                    iterations: 0,
                    gradient: grad_eta,
                });
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITERS,
        gradient: grad_eta,
    })
}

/// Square root of the smallest positive eigenvalue of `M_F^T M_F`; `None`
/// when `M_F` is zero or `F` is empty.
pub fn lambda_min(m: &FeatureMatrix, f: &ExampleSet) -> Option<f64> {
    if f.is_empty() {
        return None;
    }
    let (_, eig) = eigen_of_restriction(m, f);
    let cut = positive_cutoff(&eig.values)?;
    eig.values.iter().copied().find(|&v| v > cut).map(f64::sqrt)
}

/// `ln(m) * f^{3/2} * f!`, the bound on finite-set margins of any
/// combination with loss at most `m`. `+inf` beyond `f = 20`.
pub fn mu_max_bound(m: usize, f: usize) -> f64 {
    if f == 0 {
        return 0.0;
    }
    if f > 20 {
        log::warn!("mu_max bound with |F| = {f} overflows; reporting +inf");
        return f64::INFINITY;
    }
    (m as f64).ln() * (f as f64).powf(1.5) * factorial(f)
}

/// A vector `y >= 1` with `M_F^T y = 0`, minimizing its sum.
pub fn separating_vector(m: &FeatureMatrix, f: &ExampleSet) -> Result<Vec<f64>> {
    let k = f.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let hi = 1.0 + k as f64 * factorial(k);
    let mut lp = LpProblem::new(vec![-1.0; k], vec![(1.0, hi); k]);
    for j in 0..m.cols() {
        lp.add(f.iter().map(|i| m.get(i, j)).collect(), Relation::Eq, 0.0);
    }
    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Inconsistent(
            "no positive vector separates the finite-margin rows".into(),
        ));
    }
    Ok(sol.x)
}

/// `(1/(sqrt(N) m m!), 1/m!)`, the floors on `gamma` and `lambda_min` for
/// matrices with entries in `{-1, 0, 1}`. `None` once `m!` overflows.
pub fn worst_case_bounds(m: usize, n: usize) -> Option<(f64, f64)> {
    if m > 20 {
        log::warn!("worst-case bounds for m = {m} overflow");
        return None;
    }
    let mf = factorial(m);
    Some((1.0 / ((n as f64).sqrt() * m as f64 * mf), 1.0 / mf))
}

/// Extremes of finite-set margins seen over random combinations whose loss
/// on `F` is at most `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginProbe {
    pub max_margin: f64,
    pub min_margin: f64,
    pub probes: usize,
}

/// Probes `count` random rays from `eta_star`, each followed until the
/// finite-set loss reaches `m`, and samples the endpoint and a random point
/// inside. Deterministic for a given `seed`.
pub fn probe_finite_margins(
    m: &FeatureMatrix,
    f: &ExampleSet,
    eta_star: &Combination,
    count: usize,
    seed: u64,
) -> MarginProbe {
    let mut out = MarginProbe {
        max_margin: f64::NEG_INFINITY,
        min_margin: f64::INFINITY,
        probes: 0,
    };
    if f.is_empty() {
        return out;
    }
    let limit = m.rows() as f64;
    let rows = m.restrict_rows(f);
    let base: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(eta_star.as_slice()).map(|(x, y)| x * y).sum())
        .collect();
    let loss_at = |dir: &[f64], t: f64| -> f64 {
        base.iter().zip(dir).map(|(b, d)| (-(b + t * d)).exp()).sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let record = |dir: &[f64], t: f64, out: &mut MarginProbe| {
        for (b, d) in base.iter().zip(dir) {
            let v = b + t * d;
            out.max_margin = out.max_margin.max(v);
            out.min_margin = out.min_margin.min(v);
        }
        out.probes += 1;
    };
    record(&vec![0.0; base.len()], 0.0, &mut out);
    let mut attempts = 0;
    while out.probes < count && attempts < 100 * count {
        attempts += 1;
        let u: Vec<f64> = (0..m.cols()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let dir: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().zip(&u).map(|(x, y)| x * y).sum())
            .collect();
        if dir.iter().all(|d| d.abs() < 1e-12) {
            continue;
        }
        // the loss along the ray is convex and unbounded (F admits no
        // improving direction), so doubling finds a bracket
        let mut hi = 1.0;
        while loss_at(&dir, hi) <= limit {
            hi *= 2.0;
            if hi > 1e12 {
                break;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if loss_at(&dir, mid) <= limit {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
        }
        record(&dir, lo, &mut out);
        if out.probes < count {
            let t = lo * rng.random::<f64>();
            record(&dir, t, &mut out);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `F` is empty: every example can be driven to zero loss.
    WeakLearning,
    /// `Z` is empty: the optimum is attained by a finite combination.
    FiniteOptimum,
    /// Both sets nonempty.
    General,
    /// `M_F = 0`: the finite-margin losses never move.
    FlatFiniteSet,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::WeakLearning => "weak-learning",
            Regime::FiniteOptimum => "finite-optimum",
            Regime::General => "general",
            Regime::FlatFiniteSet => "flat-finite-set",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub regime: Regime,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c: Option<f64>,
    /// `ln C`, finite even when `C` overflows.
    pub ln_c: Option<f64>,
    pub mu_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub z: ExampleSet,
    pub f: ExampleSet,
    pub witness: Combination,
    pub eta_dagger: Option<Combination>,
    pub gamma: Option<f64>,
    pub eta_star: Combination,
    pub k_f: f64,
    pub lambda_min: Option<f64>,
    pub mu_max_bound: f64,
    pub empirical_mu: MarginProbe,
    pub separating: Vec<f64>,
}

/// Computes every decomposition object for `m`. `seed` drives the margin probes.
pub fn decompose(m: &FeatureMatrix, seed: u64) -> Result<Decomposition> {
    let zl = zero_loss_set(m)?;
    let cert = gamma_certificate(m, &zl.z, &zl.f)?;
    let (eta_star, k_f) = finite_optimum(m, &zl.f)?;
    let lmin = lambda_min(m, &zl.f);
    let separating = separating_vector(m, &zl.f)?;
    let empirical_mu = probe_finite_margins(m, &zl.f, &eta_star, DEFAULT_PROBES, seed);
    Ok(Decomposition {
        mu_max_bound: mu_max_bound(m.rows(), zl.f.len()),
        z: zl.z,
        f: zl.f,
        witness: zl.witness,
        gamma: cert.as_ref().map(|c| c.1),
        eta_dagger: cert.map(|c| c.0),
        eta_star,
        k_f,
        lambda_min: lmin,
        empirical_mu,
        separating,
    })
}

impl Decomposition {
    pub fn regime(&self) -> Regime {
        if self.f.is_empty() {
            Regime::WeakLearning
        } else if self.lambda_min.is_none() {
            Regime::FlatFiniteSet
        } else if self.z.is_empty() {
            Regime::FiniteOptimum
        } else {
            Regime::General
        }
    }

    /// JSON report. Example sets use `labels` when given.
    pub fn report(&self, m: &FeatureMatrix, labels: Option<&[String]>) -> Value {
        let rc = rate_constants(self, m.rows(), m.cols());
        let set = |s: &ExampleSet| -> Value {
            match labels {
                Some(l) => json!(s.iter().map(|i| l[i].clone()).collect::<Vec<_>>()),
                None => json!(s.indices()),
            }
        };
        let mut v = json!({
            "m": m.rows(),
            "N": m.cols(),
            "Z": set(&self.z),
            "F": set(&self.f),
            "eta_dagger": self.eta_dagger,
            "gamma": self.gamma,
            "eta_star": self.eta_star,
            "K_F": self.k_f,
            "lambda_min": self.lambda_min,
            "mu_max_bound": finite_or_null(self.mu_max_bound),
            "empirical_mu": finite_or_null(self.empirical_mu.max_margin),
            "separating_vector": self.separating,
            "C0": rc.c0.and_then(finite_or_null),
            "C1": rc.c1.and_then(finite_or_null),
            "C2": rc.c2.and_then(finite_or_null),
            "C3": rc.c3.and_then(finite_or_null),
            "C": rc.c.and_then(finite_or_null),
            "ln_C": rc.ln_c.and_then(finite_or_null),
            "regime": rc.regime.as_str(),
        });
        if m.is_integral() && m.rows() <= MAX_CERTIFICATE_ROWS {
            if let Some((g, l)) = worst_case_bounds(m.rows(), m.cols()) {
                v["gamma_floor"] = json!(g);
                v["lambda_floor"] = json!(l);
            }
        } else {
            log::warn!("certificate floors omitted: they apply to integral matrices with m <= {MAX_CERTIFICATE_ROWS}");
        }
        v
    }
}

fn finite_or_null(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Rate constants from a decomposition of an `m x n` matrix.
pub fn rate_constants(dec: &Decomposition, m: usize, n: usize) -> RateConstants {
    let mu = dec.mu_max_bound;
    let regime = dec.regime();
    let mut rc = RateConstants {
        regime,
        c0: None,
        c1: None,
        c2: None,
        c3: None,
        c: None,
        ln_c: None,
        mu_used: mu,
    };
    let (Some(lmin), true) = (dec.lambda_min, matches!(regime, Regime::General | Regime::FiniteOptimum))
    else {
        return rc;
    };
    let (mf, nf) = (m as f64, n as f64);
    let c0 = 2.0 * lmin * lmin / (nf * mf) * (-mu).exp();
    let c1 = f64::min(0.5, 0.25 * (c0 / (2.0 * mf)).sqrt());
    let c2 = c0 / (4.0 * mf);
    let (c3, c, ln_c) = match dec.gamma {
        Some(g) if regime == Regime::General => (
            f64::min(c2 / mf, g * g * c1 * c1 / (2.0 * mf * mf)),
            32.0 * mf.powi(3) * nf * mu.exp() / (g * g * lmin * lmin),
            (32.0 * mf.powi(3) * nf).ln() + mu - 2.0 * g.ln() - 2.0 * lmin.ln(),
        ),
        _ => (
            c2 / mf,
            32.0 * mf.powi(3) * nf * mu.exp() / (lmin * lmin),
            (32.0 * mf.powi(3) * nf).ln() + mu - 2.0 * lmin.ln(),
        ),
    };
    rc.c0 = Some(c0);
    rc.c1 = Some(c1);
    rc.c2 = Some(c2);
    rc.c3 = Some(c3);
    rc.c = Some(c);
    rc.ln_c = Some(ln_c);
    rc
}

/// A combination whose normalized loss is within `eps` of the optimum
/// `K_F / m`: the finite optimum pushed along the certificate until every
/// zero-loss example has margin at least `ln(1/eps)`. Values `eps >= 1` are
/// treated as `1`.
pub fn near_optimal_solution(m: &FeatureMatrix, dec: &Decomposition, eps: f64) -> Result<Combination> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if m.cols() != dec.eta_star.len() || dec.z.len() + dec.f.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.cols(),
            got: dec.eta_star.len(),
        });
    }
    let eps = eps.min(1.0);
    let (Some(eta), Some(gamma)) = (&dec.eta_dagger, dec.gamma) else {
        return Ok(dec.eta_star.clone());
    };
    let mu = margins_unchecked(m, dec.eta_star.as_slice());
    let c = dec.z.iter().map(|i| mu[i]).fold(f64::INFINITY, f64::min);
    let k = ((1.0 / eps).ln() - c).max(0.0) / gamma;
    Ok(dec.eta_star.add_scaled(k, eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_mint_mumax, gen_three_example, gen_triangular};
    use crate::matrix::{exp_loss, margins};

    fn set(v: &[usize], m: usize) -> ExampleSet {
        ExampleSet::new(v.to_vec(), m).unwrap()
    }

    #[test]
    fn zero_loss_set_examples() {
        let zl = zero_loss_set(&gen_three_example().matrix).unwrap();
        assert_eq!(zl.z.indices(), &[2]);
        assert_eq!(zl.f.indices(), &[0, 1]);

        let zl = zero_loss_set(&gen_mint_mumax(5).unwrap().matrix).unwrap();
        assert!(zl.z.is_empty());

        let tri = gen_triangular(5).unwrap().matrix;
        let zl = zero_loss_set(&tri).unwrap();
        assert_eq!(zl.z.indices(), &[2, 3, 4]);
        let mu = margins(&tri, &zl.witness).unwrap();
        assert!(zl.z.iter().all(|i| mu[i] > 0.0));
        assert!(mu.iter().all(|&v| v >= -1e-8));
    }

    #[test]
    fn gamma_certificate_examples() {
        let m = gen_three_example().matrix;
        let (eta, g) = gamma_certificate(&m, &set(&[2], 3), &set(&[0, 1], 3))
            .unwrap()
            .unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        assert!((eta.0[0] - 0.5).abs() < 1e-12 && (eta.0[1] - 0.5).abs() < 1e-12);

        assert!(gamma_certificate(&m, &ExampleSet::empty(), &ExampleSet::full(3))
            .unwrap()
            .is_none());

        let one = FeatureMatrix::from_rows(&[[1.0]]).unwrap();
        let (eta, g) = gamma_certificate(&one, &set(&[0], 1), &ExampleSet::empty())
            .unwrap()
            .unwrap();
        assert_eq!(eta.0, vec![1.0]);
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_optimum_examples() {
        let m = gen_three_example().matrix;
        let (eta, k) = finite_optimum(&m, &set(&[0, 1], 3)).unwrap();
        assert!(eta.l1_norm() < 1e-12);
        assert!((k - 2.0).abs() < 1e-12);

        let (eta, k) = finite_optimum(&m, &ExampleSet::empty()).unwrap();
        assert_eq!((eta.0, k), (vec![0.0, 0.0], 0.0));

        let scaled = FeatureMatrix::from_rows(&[[0.5, -0.5], [-0.5, 0.5]]).unwrap();
        let (_, k) = finite_optimum(&scaled, &ExampleSet::full(2)).unwrap();
        assert!((k - 2.0).abs() < 1e-12);

        // asymmetric: rows (1), (-1/2): minimize e^{-x} + e^{x/2} at x = (2/3) ln 2
        let m = FeatureMatrix::from_rows(&[[1.0], [-0.5]]).unwrap();
        let (eta, k) = finite_optimum(&m, &ExampleSet::full(2)).unwrap();
        let x = 2.0 / 3.0 * 2f64.ln();
        assert!((eta.0[0] - x).abs() < 1e-9);
        assert!((k - ((-x).exp() + (x / 2.0).exp())).abs() < 1e-12);
    }

    #[test]
    fn lambda_min_examples() {
        let m = gen_three_example().matrix;
        assert!((lambda_min(&m, &set(&[0, 1], 3)).unwrap() - 2.0).abs() < 1e-12);
        let one = FeatureMatrix::from_rows(&[[1.0]]).unwrap();
        assert_eq!(lambda_min(&one, &ExampleSet::full(1)), Some(1.0));
        let zero = FeatureMatrix::from_rows(&[[0.0, 0.0]]).unwrap();
        assert_eq!(lambda_min(&zero, &ExampleSet::full(1)), None);
    }

    #[test]
    fn mu_max_bound_examples() {
        assert!((mu_max_bound(3, 2) - 3f64.ln() * 2.0 * 2f64.sqrt() * 2.0).abs() < 1e-12);
        assert!((mu_max_bound(3, 2) - 6.21469).abs() < 1e-4);
        assert!((mu_max_bound(5, 2) - 9.10436).abs() < 1e-4);
        assert_eq!(mu_max_bound(7, 0), 0.0);
        assert_eq!(mu_max_bound(30, 21), f64::INFINITY);
    }

    #[test]
    fn separating_vector_examples() {
        let m = gen_three_example().matrix;
        let y = separating_vector(&m, &set(&[0, 1], 3)).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-12 && (y[1] - 1.0).abs() < 1e-12);
        assert!(separating_vector(&m, &ExampleSet::empty()).unwrap().is_empty());
        let mm = gen_mint_mumax(4).unwrap().matrix;
        let y = separating_vector(&mm, &ExampleSet::full(4)).unwrap();
        for (a, b) in y.iter().zip([4.0, 2.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-9, "{y:?}");
        }
    }

    #[test]
    fn rate_constant_examples() {
        let m = gen_three_example().matrix;
        let dec = decompose(&m, 1).unwrap();
        let rc = rate_constants(&dec, 3, 2);
        assert_eq!(rc.regime, Regime::General);
        assert!((rc.c0.unwrap() - 2.6664e-3).abs() < 1e-7);
        let c = rc.c.unwrap();
        assert!((c / 2.15e5 - 1.0).abs() < 0.01, "{c}");
        assert!((rc.ln_c.unwrap() - c.ln()).abs() < 1e-9);

        let toy = Decomposition {
            z: set(&[0], 2),
            f: set(&[1], 2),
            witness: Combination::zeros(1),
            eta_dagger: Some(vec![1.0].into()),
            gamma: Some(1.0),
            eta_star: Combination::zeros(1),
            k_f: 1.0,
            lambda_min: Some(1.0),
            mu_max_bound: 0.0,
            empirical_mu: MarginProbe { max_margin: 0.0, min_margin: 0.0, probes: 0 },
            separating: vec![1.0],
        };
        assert!((rate_constants(&toy, 2, 1).c.unwrap() - 256.0).abs() < 1e-12);
        let doubled = Decomposition { gamma: Some(2.0), ..toy };
        assert!((rate_constants(&doubled, 2, 1).c.unwrap() - 64.0).abs() < 1e-12);
    }

    #[test]
    fn worst_case_bound_examples() {
        let (g, l) = worst_case_bounds(3, 2).unwrap();
        assert!((g - 1.0 / (18.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((l - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(worst_case_bounds(1, 1), Some((1.0, 1.0)));
        let (g, l) = worst_case_bounds(5, 4).unwrap();
        assert!((g - 1.0 / 1200.0).abs() < 1e-15 && (l - 1.0 / 120.0).abs() < 1e-15);
        assert!(worst_case_bounds(21, 1).is_none());
    }

    #[test]
    fn near_optimal_examples() {
        let m = gen_three_example().matrix;
        let dec = decompose(&m, 1).unwrap();
        let lam = near_optimal_solution(&m, &dec, 0.1).unwrap();
        let h = 0.5 * 10f64.ln();
        assert!((lam.0[0] - h).abs() < 1e-12 && (lam.0[1] - h).abs() < 1e-12);
        assert!((exp_loss(&m, &lam).unwrap() - 0.7).abs() < 1e-12);
        let one = near_optimal_solution(&m, &dec, 5.0).unwrap();
        assert!(exp_loss(&m, &one).unwrap() <= 2.0 / 3.0 + 1.0);

        let tri = gen_triangular(5).unwrap().matrix;
        let dec = decompose(&tri, 1).unwrap();
        let lam = near_optimal_solution(&tri, &dec, 0.1).unwrap();
        assert!(exp_loss(&tri, &lam).unwrap() <= 0.4 + 0.1 + 1e-9);
    }

    #[test]
    fn probes_stay_in_bounds() {
        let m = gen_three_example().matrix;
        let dec = decompose(&m, 7).unwrap();
        let p = dec.empirical_mu;
        assert_eq!(p.probes, DEFAULT_PROBES);
        assert!(p.max_margin <= dec.mu_max_bound);
        assert!(p.min_margin >= -(3f64.ln()) - 1e-9);
        // rows a, b are complementary: margins bounded by ln 3
        assert!(p.max_margin <= 3f64.ln() + 1e-9);
    }
}
