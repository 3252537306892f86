//! Verification batteries behind `boostlab verify`. Each check reruns the
//! relevant experiment from scratch and compares it against the bound or
//! closed form it is supposed to satisfy.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::booster::{check_step_bounds, reference_metrics, run, TerminalStatus, Variant};
use crate::datasets::{
    gen_mint_mumax, gen_nonintegral, gen_random, gen_three_example, gen_triangular,
    nonintegral_round_floor, triangular_round_floor, Alphabet, NamedInstance,
};
use crate::decomposition::{decompose, near_optimal_solution, worst_case_bounds, Decomposition};
use crate::error::{Error, Result};
use crate::lp::{solve, LpProblem, LpStatus, Relation};
use crate::matrix::{
    distribution, exp_loss, margins, margins_unchecked, Combination, FeatureMatrix,
};
use crate::oracle::{brute_min_loss, vertex_enumerate_lp, GridSpec, VertexResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Suite {
    TraceIdentities,
    RateBounds,
    LowerBounds,
    DecompositionConsistency,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::TraceIdentities,
        Suite::RateBounds,
        Suite::LowerBounds,
        Suite::DecompositionConsistency,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::TraceIdentities => "trace-identities",
            Suite::RateBounds => "rate-bounds",
            Suite::LowerBounds => "lower-bounds",
            Suite::DecompositionConsistency => "decomposition-consistency",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: &str, r: Result<String, String>) -> Self {
        match r {
            Ok(d) => Check::new(name, true, d),
            Err(d) => Check::new(name, false, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One line per check.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{tag}] {:width$}  {}\n", c.name, c.detail));
        }
        out
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let checks = match suite {
        Suite::TraceIdentities => vec![three_example_trace(), drop_identity(seed)],
        Suite::RateBounds => vec![
            polynomial_envelope(seed),
            distance_bounds(),
            zero_loss_edge(seed),
            near_optimal_construction(seed),
        ],
        Suite::LowerBounds => vec![lower_bound_floors(), scaled_variant_rate(seed)],
        Suite::DecompositionConsistency => {
            vec![decomposition_consistency(seed), oracle_equivalences(seed)]
        }
    };
    SuiteReport { suite, checks }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Weight distributions of the first five rounds on the three-example
/// dataset when the first step picks the column with `h(b) = +1`.
pub const THREE_EXAMPLE_WEIGHTS: [[f64; 3]; 5] = [
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    [1.0 / 2.0, 1.0 / 4.0, 1.0 / 4.0],
    [1.0 / 3.0, 1.0 / 2.0, 1.0 / 6.0],
    [1.0 / 2.0, 3.0 / 8.0, 1.0 / 8.0],
    [2.0 / 5.0, 1.0 / 2.0, 1.0 / 10.0],
];

/// Edges `1/t`, losses `(2/3) sqrt(1 + 1/T)` and the weight table on the
/// three-example dataset.
pub fn three_example_trace() -> Check {
    let body = || -> Result<String, String> {
        let m = gen_three_example().matrix;
        let start = Instant::now();
        let tr = run(&m, 200, Variant::Plain, None, None).map_err(err)?;
        let elapsed = start.elapsed();
        if tr.len() != 200 {
            return Err(format!("run stopped after {} rounds", tr.len()));
        }
        let mut worst: f64 = 0.0;
        for rec in &tr.records {
            let t = rec.t as f64;
            let want = 2.0 / 3.0 * (1.0 + 1.0 / t).sqrt();
            worst = worst.max((rec.loss - want).abs());
            if rec.t >= 2 && (rec.delta - 1.0 / t).abs() > 1e-9 {
                return Err(format!("round {}: edge {} != 1/{}", rec.t, rec.delta, rec.t));
            }
        }
        if worst > 1e-9 {
            return Err(format!("loss formula off by {worst:e}"));
        }
        let lams = tr.combinations();
        let dists: Vec<Vec<f64>> = lams[..5]
            .iter()
            .map(|l| distribution(&m, l).map(|d| d.probs().to_vec()))
            .collect::<Result<_>>()
            .map_err(err)?;
        let matches = |swap: bool| {
            dists.iter().zip(THREE_EXAMPLE_WEIGHTS).all(|(d, w)| {
                let w = if swap { [w[1], w[0], w[2]] } else { w };
                d.iter().zip(w).all(|(a, b)| (a - b).abs() <= 1e-9)
            })
        };
        if !(matches(false) || matches(true)) {
            return Err(format!("weights {dists:?} do not match the table"));
        }
        if elapsed.as_secs_f64() >= 1.0 {
            return Err(format!("200 rounds took {elapsed:?}"));
        }
        Ok(format!("200 rounds, max loss error {worst:.1e}, {elapsed:?}"))
    };
    Check::from_result("three-example analytic trace", body())
}

fn sign_matrix(m: usize, n: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e: Vec<f64> = (0..m * n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    FeatureMatrix::new(m, n, e).expect("sign entries are valid")
}

/// `L_t = L_{t-1} sqrt(1 - delta_t^2)` on sign matrices; `<=` otherwise.
pub fn drop_identity(seed: u64) -> Check {
    let body = || -> Result<String, String> {
        let mut exact = vec![gen_three_example().matrix];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut k = 0;
        while exact.len() < 13 {
            // a column of one sign would separate everything in one step
            let m = sign_matrix(rng.random_range(2..=8), rng.random_range(1..=5), seed + k);
            k += 1;
            if !has_constant_sign_column(&m) {
                exact.push(m);
            }
        }
        let mut inexact = vec![
            gen_nonintegral(0.1).map_err(err)?.matrix,
            gen_nonintegral(0.2).map_err(err)?.matrix,
            gen_triangular(5).map_err(err)?.matrix,
        ];
        for k in 0..12 {
            let (mm, nn) = (rng.random_range(2..=8), rng.random_range(1..=5));
            inexact.push(gen_random(mm, nn, Alphabet::Continuous, seed + 100 + k).map_err(err)?.matrix);
        }
        let mut rounds = 0;
        for (equality, set) in [(true, &exact), (false, &inexact)] {
            for m in set.iter() {
                let tr = run(m, 150, Variant::Plain, None, None).map_err(err)?;
                for rec in &tr.records {
                    let prev = tr.loss_at(rec.t - 1);
                    let pred = prev * (1.0 - rec.delta * rec.delta).sqrt();
                    let ok = if equality {
                        (rec.loss - pred).abs() <= 1e-12
                    } else {
                        rec.loss <= pred + 1e-12
                    };
                    if !ok {
                        return Err(format!(
                            "round {} on a {}x{} matrix: loss {} vs {}",
                            rec.t,
                            m.rows(),
                            m.cols(),
                            rec.loss,
                            pred
                        ));
                    }
                    rounds += 1;
                }
            }
        }
        Ok(format!(
            "{} sign and {} other matrices, {rounds} rounds",
            exact.len(),
            inexact.len()
        ))
    };
    Check::from_result("drop identity", body())
}

/// A random ternary matrix with its reference combinations.
pub struct RateInstance {
    pub instance: NamedInstance,
    pub decomposition: Decomposition,
    /// `(label, lambda*)` pairs.
    pub references: Vec<(String, Combination)>,
}

fn has_constant_sign_column(m: &FeatureMatrix) -> bool {
    (0..m.cols()).any(|j| {
        let c = m.column(j);
        c.iter().all(|&v| v > 0.0) || c.iter().all(|&v| v < 0.0)
    })
}

/// Seeded random ternary matrices (`m <= 6`, `N <= 4`) without a column that
/// separates every example, each with a near-optimal and a random reference
/// of l1 norm at most 3.
pub fn rate_instances(count: usize, seed: u64, eps: f64) -> Result<Vec<RateInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut k = 0u64;
    while out.len() < count {
        k += 1;
        if k > 100 * count as u64 {
            return Err(Error::Inconsistent("could not draw enough instances".into()));
        }
        let (m, n) = (rng.random_range(2..=6), rng.random_range(1..=4));
        let inst = gen_random(m, n, Alphabet::Ternary, seed.wrapping_add(k))?;
        if has_constant_sign_column(&inst.matrix) {
            continue;
        }
        let dec = decompose(&inst.matrix, seed)?;
        let near = near_optimal_solution(&inst.matrix, &dec, eps)?;
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let norm: f64 = u.iter().map(|v| v.abs()).sum();
        let radius = 3.0 * rng.random_range(0.05..=1.0);
        let random = if norm > 0.0 {
            Combination(u.iter().map(|v| v / norm * radius).collect())
        } else {
            Combination::zeros(n)
        };
        out.push(RateInstance {
            instance: inst,
            decomposition: dec,
            references: vec![("near-optimal".into(), near), ("random".into(), random)],
        });
    }
    Ok(out)
}

const ROUND_CAP: usize = 2_000_000;

/// Rounds to reach `L(lambda*) + eps` never exceed `13 B^6 eps^-5`.
pub fn polynomial_envelope(seed: u64) -> Check {
    let body = || -> Result<String, String> {
        let mut runs = 0;
        let mut tightest: f64 = 0.0;
        for eps in [0.1, 0.05] {
            for ri in rate_instances(20, seed, eps).map_err(err)? {
                let m = &ri.instance.matrix;
                for (label, star) in &ri.references {
                    let b = star.l1_norm();
                    let bound = 13.0 * b.powi(6) * eps.powi(-5);
                    let target = exp_loss(m, star).map_err(err)? + eps;
                    let cap = bound.floor().min(ROUND_CAP as f64) as usize;
                    let tr = run(m, cap, Variant::Plain, Some(target), None).map_err(err)?;
                    if tr.status != TerminalStatus::TargetReached {
                        return Err(format!(
                            "{} ({label}, eps {eps}): target {target} not reached in {cap} rounds (bound {bound:.3e})",
                            ri.instance.name
                        ));
                    }
                    if bound > 0.0 {
                        tightest = tightest.max(tr.len() as f64 / bound);
                    }
                    runs += 1;
                }
            }
        }
        Ok(format!("{runs} runs, max rounds/bound {tightest:.2e}"))
    };
    Check::from_result("13 B^6 / eps^5 envelope", body())
}

/// The scaled variant reaches `L(lambda*) + eps` within `3 B^2 / eps` rounds
/// and every edge is at least `R_{t-1} / B`.
pub fn scaled_variant_rate(seed: u64) -> Check {
    let body = || -> Result<String, String> {
        let mut runs = 0;
        for eps in [0.1, 0.05] {
            for ri in rate_instances(20, seed, eps).map_err(err)? {
                let m = &ri.instance.matrix;
                for (label, star) in &ri.references {
                    let b = star.l1_norm();
                    let bound = 3.0 * b * b / eps;
                    let target = exp_loss(m, star).map_err(err)? + eps;
                    let cap = bound.floor().min(ROUND_CAP as f64) as usize;
                    let tr = run(m, cap, Variant::Scaled, Some(target), None).map_err(err)?;
                    if tr.status != TerminalStatus::TargetReached {
                        return Err(format!(
                            "{} ({label}, eps {eps}): not within {cap} rounds",
                            ri.instance.name
                        ));
                    }
                    if b > 0.0 {
                        let rt = reference_metrics(m, &tr, star, None).map_err(err)?;
                        for rec in &tr.records {
                            if rec.delta < rt.r[rec.t - 1] / b - 1e-9 {
                                return Err(format!(
                                    "{} ({label}): round {} edge {} < R/B = {}",
                                    ri.instance.name,
                                    rec.t,
                                    rec.delta,
                                    rt.r[rec.t - 1] / b
                                ));
                            }
                        }
                    }
                    runs += 1;
                }
            }
        }
        Ok(format!("{runs} scaled runs"))
    };
    Check::from_result("AdaBoost.S rate and edge", body())
}

/// On the three-example dataset with `lambda* = (1, 1)`:
/// `delta_t >= R_{t-1} / S_{t-1}` and `R_t^2 S_t` non-increasing, using
/// grid estimates of `S_t` (which never undershoot `S_t` by more than their
/// certified error and never overshoot... below the true value).
pub fn distance_bounds() -> Check {
    let body = || -> Result<String, String> {
        let m = gen_three_example().matrix;
        let star: Combination = vec![1.0, 1.0].into();
        let grid = GridSpec::cube(2, -2.0, 5.0, 71, 7);
        let tr = run(&m, 30, Variant::Plain, None, None).map_err(err)?;
        let rt = reference_metrics(&m, &tr, &star, Some(&grid)).map_err(err)?;
        if rt.s.len() != tr.len() + 1 {
            return Err("distance oracle did not cover every round".into());
        }
        let lams = tr.combinations();
        let mut s_hat = Vec::new();
        let mut max_err: f64 = 0.0;
        for (t, e) in rt.s.iter().enumerate() {
            let e = e.as_ref().ok_or(format!("round {t}: sublevel set outside the grid"))?;
            // the l1 ball of radius S around the anchor must lie inside the grid
            let inside = lams[t]
                .as_slice()
                .iter()
                .zip(grid.lo.iter().zip(&grid.hi))
                .all(|(x, (lo, hi))| x - e.value >= *lo && x + e.value <= *hi);
            if !inside {
                return Err(format!("round {t}: grid too small for S = {}", e.value));
            }
            max_err = max_err.max(e.error);
            s_hat.push((e.value, e.error));
        }
        let mut checked = 0;
        for rec in &tr.records {
            let t = rec.t;
            let (r_prev, r_now) = (rt.r[t - 1], rt.r[t]);
            if r_prev > 0.0 {
                let (s_prev, _) = s_hat[t - 1];
                if rec.delta < r_prev / s_prev - 1e-9 {
                    return Err(format!("round {t}: edge {} < R/S = {}", rec.delta, r_prev / s_prev));
                }
                checked += 1;
            }
            if r_now > 0.0 {
                let (s_now, e_now) = s_hat[t];
                let (s_prev, _) = s_hat[t - 1];
                let lhs = r_now * r_now * (s_now - e_now);
                let rhs = r_prev * r_prev * s_prev;
                if lhs > rhs + 1e-12 {
                    return Err(format!("round {t}: R^2 S rose from {rhs} to at least {lhs}"));
                }
            }
        }
        Ok(format!("{checked} rounds with R > 0, max grid error {max_err:.1e}"))
    };
    Check::from_result("distance bounds (S_t)", body())
}

fn decomposable_instances(seed: u64) -> Result<Vec<NamedInstance>> {
    let mut v = vec![
        gen_three_example(),
        gen_triangular(5)?,
        gen_mint_mumax(5)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut k = 0u64;
    while v.len() < 23 {
        let (m, n) = (rng.random_range(2..=6), rng.random_range(1..=4));
        let inst = gen_random(m, n, Alphabet::Ternary, seed.wrapping_add(1000 + k))?;
        k += 1;
        if !has_constant_sign_column(&inst.matrix) {
            v.push(inst);
        }
    }
    Ok(v)
}

/// `delta_t >= gamma * l(Z) / l(X)` with losses at the start of the round.
pub fn zero_loss_edge(seed: u64) -> Check {
    let body = || -> Result<String, String> {
        let mut rounds = 0;
        for inst in decomposable_instances(seed).map_err(err)? {
            let m = &inst.matrix;
            let dec = decompose(m, seed).map_err(err)?;
            let Some(gamma) = dec.gamma else { continue };
            let tr = run(m, 300, Variant::Plain, None, Some(&dec)).map_err(err)?;
            let (mut lz, mut lf) = (dec.z.len() as f64, dec.f.len() as f64);
            for rec in &tr.records {
                let want = gamma * lz / (lz + lf);
                if rec.delta < want - 1e-9 {
                    return Err(format!("{} round {}: edge {} < {want}", inst.name, rec.t, rec.delta));
                }
                lz = rec.loss_z.unwrap_or(0.0);
                lf = rec.loss_f.unwrap_or(0.0);
                rounds += 1;
            }
        }
        Ok(format!("{rounds} rounds"))
    };
    Check::from_result("edge from the zero-loss set", body())
}

/// `near_optimal_solution(eps)` has normalized loss at most `K_F/m + eps`.
pub fn near_optimal_construction(seed: u64) -> Check {
    let body = || -> Result<String, String> {
        let mut n = 0;
        for inst in decomposable_instances(seed).map_err(err)? {
            let m = &inst.matrix;
            let dec = decompose(m, seed).map_err(err)?;
            for eps in [0.1, 0.01] {
                let lam = near_optimal_solution(m, &dec, eps).map_err(err)?;
                let loss = exp_loss(m, &lam).map_err(err)?;
                let bound = dec.k_f / m.rows() as f64 + eps;
                if loss > bound + 1e-9 {
                    return Err(format!("{} eps {eps}: loss {loss} > {bound}", inst.name));
                }
                n += 1;
            }
        }
        Ok(format!("{n} constructions"))
    };
    Check::from_result("near-optimal construction", body())
}

/// Rounds-to-target floors on the triangular, non-integral and three-example
/// datasets, and the step-length bounds along the way.
pub fn lower_bound_floors() -> Check {
    let body = || -> Result<String, String> {
        let mut lines = Vec::new();
        let mut check = |name: &str, m: &FeatureMatrix, target: f64, floor: f64| -> Result<(), String> {
            let tr = run(m, ROUND_CAP, Variant::Plain, Some(target), None).map_err(err)?;
            if tr.status != TerminalStatus::TargetReached {
                return Err(format!("{name}: target {target} not reached"));
            }
            if (tr.len() as f64) < floor {
                return Err(format!("{name}: {} rounds < floor {floor}", tr.len()));
            }
            let rep = check_step_bounds(m, &tr);
            if !rep.passed() {
                return Err(format!("{name}: step bound violated: {rep:?}"));
            }
            lines.push(format!("{name} {}>={floor:.1}", tr.len()));
            Ok(())
        };
        let eps = 0.05;
        for m in [4, 5, 6] {
            let inst = gen_triangular(m).map_err(err)?;
            check(&inst.name, &inst.matrix, 2.0 / m as f64 + eps, triangular_round_floor(m, eps))?;
        }
        for nu in [0.2, 0.1] {
            let inst = gen_nonintegral(nu).map_err(err)?;
            for eps in [0.1, 0.05] {
                check(&inst.name, &inst.matrix, 0.5 + eps, nonintegral_round_floor(nu, eps))?;
            }
        }
        let three = gen_three_example();
        for eps in [0.1, 0.02] {
            check(&three.name, &three.matrix, 2.0 / 3.0 + eps, 2.0 / (9.0 * eps))?;
        }
        Ok(lines.join(", "))
    };
    Check::from_result("lower-bound floors", body())
}

fn f_gradient_inf_norm(m: &FeatureMatrix, dec: &Decomposition) -> f64 {
    let mu = margins_unchecked(m, dec.eta_star.as_slice());
    (0..m.cols())
        .map(|j| dec.f.iter().map(|i| m.get(i, j) * (-mu[i]).exp()).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// Every stored property of a decomposition, checked directly.
pub fn check_decomposition(m: &FeatureMatrix, dec: &Decomposition) -> Result<(), String> {
    let rows = m.rows();
    if dec.z.len() + dec.f.len() != rows || dec.z.iter().any(|i| dec.f.contains(i)) {
        return Err("Z and F do not partition the examples".into());
    }
    let w = margins(m, &dec.witness).map_err(err)?;
    if dec.z.iter().any(|i| w[i] <= 0.0) || w.iter().any(|&v| v < -1e-8) {
        return Err(format!("witness margins {w:?}"));
    }
    if let (Some(eta), Some(gamma)) = (&dec.eta_dagger, dec.gamma) {
        if (eta.l1_norm() - 1.0).abs() > 1e-10 || gamma <= 0.0 {
            return Err(format!("certificate norm {} gamma {gamma}", eta.l1_norm()));
        }
        let mu = margins(m, eta).map_err(err)?;
        if dec.z.iter().any(|i| mu[i] < gamma - 1e-8) || dec.f.iter().any(|i| mu[i].abs() > 1e-8) {
            return Err(format!("certificate margins {mu:?} gamma {gamma}"));
        }
        for t in [1.0, 10.0, 100.0] {
            let shifted = dec.eta_star.add_scaled(t, eta);
            let mu = margins(m, &shifted).map_err(err)?;
            let lf: f64 = dec.f.iter().map(|i| (-mu[i]).exp()).sum();
            if (lf - dec.k_f).abs() > 1e-8 {
                return Err(format!("finite-set loss moved to {lf} along the certificate (t = {t})"));
            }
        }
    } else if !dec.z.is_empty() {
        return Err("missing certificate for a nonempty zero-loss set".into());
    }
    let g = f_gradient_inf_norm(m, dec);
    if g > 1e-8 {
        return Err(format!("finite optimum gradient {g:e}"));
    }
    if !dec.f.is_empty() {
        let y = &dec.separating;
        let resid = (0..m.cols())
            .map(|j| dec.f.iter().zip(y).map(|(i, yi)| m.get(i, j) * yi).sum::<f64>().abs())
            .fold(0.0, f64::max);
        if resid > 1e-8 || y.iter().any(|&v| v < 1.0 - 1e-12) {
            return Err(format!("separating vector {y:?} residual {resid:e}"));
        }
    }
    if m.is_integral() {
        if let Some((gf, lf)) = worst_case_bounds(rows, m.cols()) {
            if dec.gamma.is_some_and(|g| g < gf * (1.0 - 1e-9)) {
                return Err(format!("gamma {:?} below floor {gf}", dec.gamma));
            }
            if dec.lambda_min.is_some_and(|l| l < lf * (1.0 - 1e-9)) {
                return Err(format!("lambda_min {:?} below floor {lf}", dec.lambda_min));
            }
        }
    }
    let p = dec.empirical_mu;
    if !dec.f.is_empty() {
        if p.max_margin > dec.mu_max_bound {
            return Err(format!("probe margin {} above bound {}", p.max_margin, dec.mu_max_bound));
        }
        if p.min_margin < -(rows as f64).ln() - 1e-9 {
            return Err(format!("probe margin {} below -ln m", p.min_margin));
        }
    }
    Ok(())
}

pub fn decomposition_consistency(seed: u64) -> Check {
    let body = || -> Result<String, String> {
        let expected_z: [(&str, Vec<usize>); 3] = [
            ("three-example", vec![2]),
            ("triangular:5", vec![2, 3, 4]),
            ("mint-mumax:5", vec![]),
        ];
        let mut count = 0;
        for inst in decomposable_instances(seed).map_err(err)? {
            let dec = decompose(&inst.matrix, seed).map_err(err)?;
            check_decomposition(&inst.matrix, &dec).map_err(|e| format!("{}: {e}", inst.name))?;
            if let Some((_, z)) = expected_z.iter().find(|(n, _)| *n == inst.name) {
                if dec.z.indices() != z.as_slice() {
                    return Err(format!("{}: Z = {:?}", inst.name, dec.z.indices()));
                }
            }
            count += 1;
        }
        Ok(format!("{count} instances"))
    };
    Check::from_result("decomposition consistency", body())
}

/// Random bounded LP with a known feasible point (unless `infeasible`).
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.random_range(1..=8);
    let k = rng.random_range(0..=4);
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let lo = rng.random_range(-2.0..=0.0);
            (lo, lo + rng.random_range(0.5..=3.0))
        })
        .collect();
    let x0: Vec<f64> = bounds.iter().map(|&(l, h)| rng.random_range(l..=h)).collect();
    let objective = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut p = LpProblem::new(objective, bounds);
    let infeasible = rng.random_range(0..10) == 0;
    for _ in 0..k {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let ax: f64 = a.iter().zip(&x0).map(|(x, y)| x * y).sum();
        let slack = rng.random_range(0.0..=1.0);
        let (rel, rhs) = match rng.random_range(0..3) {
            0 => (Relation::Le, ax + slack),
            1 => (Relation::Ge, ax - slack),
            _ => (Relation::Eq, ax),
        };
        p.add(a, rel, rhs);
    }
    if infeasible && n >= 1 {
        let mut a = vec![0.0; n];
        a[0] = 1.0;
        p.add(a, Relation::Ge, p.bounds[0].1 + 1.0);
    }
    p
}

/// `2x2` symmetric eigenvalues in closed form, smallest positive one's root.
pub fn lambda_min_2x2(g: [[f64; 2]; 2]) -> Option<f64> {
    let (a, b, c) = (g[0][0], g[0][1], g[1][1]);
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (lo, hi) = (mid - rad, mid + rad);
    if hi <= 0.0 {
        return None;
    }
    let v = if lo > 1e-9 * hi { lo } else { hi };
    Some(v.sqrt())
}

pub fn oracle_equivalences(seed: u64) -> Check {
    let body = || -> Result<String, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1f);
        let (mut worst, mut infeasible) = (0.0f64, 0);
        for k in 0..200 {
            let p = random_lp(&mut rng);
            let s = solve(&p).map_err(err)?;
            match (vertex_enumerate_lp(&p).map_err(err)?, s.status) {
                (VertexResult::Optimal { value, .. }, LpStatus::Optimal) => {
                    let d = (value - s.objective).abs();
                    worst = worst.max(d);
                    if d > 1e-7 {
                        return Err(format!("instance {k}: simplex {} vs vertices {value}", s.objective));
                    }
                }
                (VertexResult::Infeasible, LpStatus::Infeasible) => infeasible += 1,
                (v, st) => return Err(format!("instance {k}: status {st:?} vs {v:?}")),
            }
        }
        let three = gen_three_example().matrix;
        let l = brute_min_loss(&three, &GridSpec::cube(2, -2.0, 12.0, 57, 3)).map_err(err)?;
        if (l.value - 2.0 / 3.0).abs() > 1e-3 {
            return Err(format!("three-example minimum {}", l.value));
        }
        let non = gen_nonintegral(0.1).map_err(err)?.matrix;
        let l2 = brute_min_loss(&non, &GridSpec::cube(2, -5.0, 150.0, 32, 3)).map_err(err)?;
        if (l2.value - 0.5).abs() > 1e-3 {
            return Err(format!("non-integral minimum {}", l2.value));
        }
        let mut lmin_worst: f64 = 0.0;
        for k in 0..50u64 {
            let inst = gen_random(rng.random_range(1..=5), 2, Alphabet::Continuous, seed + k)
                .map_err(err)?;
            let m = &inst.matrix;
            let f = crate::matrix::ExampleSet::full(m.rows());
            let mut g = [[0.0; 2]; 2];
            for i in 0..m.rows() {
                for (p, q) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    g[p][q] += m.get(i, p) * m.get(i, q);
                }
            }
            let a = crate::decomposition::lambda_min(m, &f);
            let b = lambda_min_2x2(g);
            match (a, b) {
                (Some(x), Some(y)) => lmin_worst = lmin_worst.max((x - y).abs()),
                (None, None) => {}
                _ => return Err(format!("lambda_min {a:?} vs closed form {b:?}")),
            }
        }
        if lmin_worst > 1e-9 {
            return Err(format!("lambda_min off by {lmin_worst:e}"));
        }
        Ok(format!(
            "200 LPs ({infeasible} infeasible, max gap {worst:.1e}), minima {:.6} and {:.6}, lambda_min gap {lmin_worst:.1e}",
            l.value, l2.value
        ))
    };
    Check::from_result("oracle equivalences", body())
}
