//! AdaBoost and AdaBoost.S as coordinate descent on the exponential loss,
//! with per-round instrumentation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::datasets::has_complementary_rows;
use crate::decomposition::{zero_loss_set, Decomposition};
use crate::error::{Error, Result};
use crate::matrix::{
    best_edge, distribution_from_margins, log_mean_exp_neg, loss_from_margins, margins,
    margins_unchecked, set_loss_from_margins, Combination, FeatureMatrix,
};
use crate::oracle::{brute_distance, GridSpec, OracleEstimate};

/// `|r|` at or above this leaves no finite step.
pub const PERFECT_SEPARATION: f64 = 1.0 - 1e-12;
/// Interval width at which the AdaBoost.S line search stops.
pub const SCALE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Plain AdaBoost.
    Plain,
    /// AdaBoost.S: after each step the whole combination is rescaled by the
    /// best factor in `[0, 1]`.
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalStatus {
    Completed,
    PerfectSeparation,
    TargetReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: usize,
    pub j: usize,
    pub r: f64,
    pub delta: f64,
    pub alpha: f64,
    /// Normalized loss after the round.
    pub loss: f64,
    pub l1_norm: f64,
    pub scale: f64,
    pub loss_z: Option<f64>,
    pub loss_f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostTrace {
    pub variant: Variant,
    pub cols: usize,
    pub records: Vec<RoundRecord>,
    pub initial_loss: f64,
    pub status: TerminalStatus,
    pub final_weights: Combination,
}

impl BoostTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Loss after `t` rounds (`t = 0` is the starting loss).
    pub fn loss_at(&self, t: usize) -> f64 {
        if t == 0 {
            self.initial_loss
        } else {
            self.records[t - 1].loss
        }
    }

    /// `lambda^0, ..., lambda^T`, rebuilt from the records with the same
    /// floating-point operations the run performed.
    pub fn combinations(&self) -> Vec<Combination> {
        let mut out = Vec::with_capacity(self.records.len() + 1);
        let mut lam = Combination::zeros(self.cols);
        out.push(lam.clone());
        for rec in &self.records {
            lam = advance(&lam, rec.j, rec.alpha, self.variant, rec.scale);
            out.push(lam.clone());
        }
        out
    }

    /// CSV with the fixed header; `R` and `S` columns are filled from
    /// `reference` when given.
    pub fn to_csv(&self, reference: Option<&ReferenceTrace>) -> String {
        let mut out = String::from("t,j,r,delta,alpha,loss,l1_norm,scale,loss_Z,loss_F,R,S\n");
        for rec in &self.records {
            let (r_t, s_t) = match reference {
                Some(rt) => (
                    rt.r.get(rec.t).copied(),
                    rt.s.get(rec.t).and_then(|e| e.as_ref()).map(|e| e.value),
                ),
                None => (None, None),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                rec.t,
                rec.j,
                fmt_f(rec.r),
                fmt_f(rec.delta),
                fmt_f(rec.alpha),
                fmt_f(rec.loss),
                fmt_f(rec.l1_norm),
                fmt_f(rec.scale),
                fmt_opt(rec.loss_z),
                fmt_opt(rec.loss_f),
                fmt_opt(r_t),
                fmt_opt(s_t),
            );
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

/// `alpha = 1/2 ln((1 + r) / (1 - r))`.
pub fn step_size(r: f64) -> Result<f64> {
    if !r.is_finite() {
        return Err(Error::NonFinite(format!("correlation {r}")));
    }
    if r.abs() >= PERFECT_SEPARATION {
        return Err(Error::PerfectSeparation { r });
    }
    // atanh is the same quantity with better accuracy near 0
    Ok(r.atanh())
}

fn advance(lam: &Combination, j: usize, alpha: f64, variant: Variant, scale: f64) -> Combination {
    let mut next = lam.clone();
    next.0[j] += alpha;
    match variant {
        Variant::Plain => next,
        Variant::Scaled => next.scaled(scale),
    }
}

/// One round: weights, best column, step, and for [`Variant::Scaled`] the
/// rescaling. The returned record has `t = 1`; [`run`] renumbers.
pub fn boost_round(
    m: &FeatureMatrix,
    lambda_prev: &Combination,
    variant: Variant,
) -> Result<(Combination, RoundRecord)> {
    let mu = margins(m, lambda_prev)?;
    if !log_mean_exp_neg(&mu).is_finite() {
        return Err(Error::NonFinite("loss of the previous combination".into()));
    }
    let d = distribution_from_margins(&mu);
    let (j, r) = best_edge(&d, m)?;
    let alpha = step_size(r)?;
    let mut tilde = lambda_prev.clone();
    tilde.0[j] += alpha;
    let (scale, next) = match variant {
        Variant::Plain => (1.0, tilde),
        Variant::Scaled => scale_back(m, &tilde)?,
    };
    let next_mu = margins_unchecked(m, next.as_slice());
    let loss = loss_from_margins(&next_mu)?;
    let rec = RoundRecord {
        t: 1,
        j,
        r,
        delta: r.abs(),
        alpha,
        loss,
        l1_norm: next.l1_norm(),
        scale,
        loss_z: None,
        loss_f: None,
    };
    Ok((next, rec))
}

/// Minimizes the convex `G(s) = L(s * lambda_tilde)` over `[0, 1]` by
/// golden-section search. Returns `(s*, s* lambda_tilde)`.
pub fn scale_back(m: &FeatureMatrix, lambda_tilde: &Combination) -> Result<(f64, Combination)> {
    let mu = margins(m, lambda_tilde)?;
    if mu.iter().all(|&v| v == 0.0) {
        return Ok((1.0, lambda_tilde.clone()));
    }
    let g = |s: f64| {
        let scaled: Vec<f64> = mu.iter().map(|v| v * s).collect();
        log_mean_exp_neg(&scaled)
    };
    let s_star = golden_section_min(&g, 0.0, 1.0, SCALE_TOL);
    let g_star = g(s_star);
    let s = if g(1.0) <= g_star {
        1.0
    } else if g(0.0) <= g_star {
        0.0
    } else {
        s_star
    };
    let out = if s == 1.0 {
        lambda_tilde.clone()
    } else {
        lambda_tilde.scaled(s)
    };
    Ok((s, out))
}

fn golden_section_min(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > tol {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

/// Runs up to `rounds` rounds from `lambda = 0`. Stops early on perfect
/// separation or once the normalized loss is at most `stop`.
pub fn run(
    m: &FeatureMatrix,
    rounds: usize,
    variant: Variant,
    stop: Option<f64>,
    decomposition: Option<&Decomposition>,
) -> Result<BoostTrace> {
    let mut trace = BoostTrace {
        variant,
        cols: m.cols(),
        records: Vec::new(),
        initial_loss: 1.0,
        status: TerminalStatus::Completed,
        final_weights: Combination::zeros(m.cols()),
    };
    if stop.is_some_and(|s| trace.initial_loss <= s) {
        trace.status = TerminalStatus::TargetReached;
        return Ok(trace);
    }
    let mut lam = Combination::zeros(m.cols());
    for t in 1..=rounds {
        let (next, mut rec) = match boost_round(m, &lam, variant) {
            Ok(v) => v,
            Err(Error::PerfectSeparation { r }) => {
                log::warn!("round {t}: perfect separation (r = {r}), stopping");
                trace.status = TerminalStatus::PerfectSeparation;
                break;
            }
            Err(e) => return Err(e),
        };
        rec.t = t;
        if let Some(dec) = decomposition {
            let mu = margins_unchecked(m, next.as_slice());
            rec.loss_z = Some(set_loss_from_margins(&mu, &dec.z));
            rec.loss_f = Some(set_loss_from_margins(&mu, &dec.f));
        }
        let reached = stop.is_some_and(|s| rec.loss <= s);
        trace.records.push(rec);
        lam = next;
        if reached {
            trace.status = TerminalStatus::TargetReached;
            break;
        }
    }
    trace.final_weights = lam;
    Ok(trace)
}

/// Suboptimality and distance measurements against a reference `lambda*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrace {
    /// `R_t = ln L(lambda^t) - ln L(lambda*)` for `t = 0..=T`.
    pub r: Vec<f64>,
    /// Oracle estimates of `S_t` for `t = 0..=T`; empty when no oracle was
    /// used, `None` where the grid held no point of the sublevel set.
    pub s: Vec<Option<OracleEstimate>>,
    /// `B = ||lambda*||_1`.
    pub b: f64,
    /// `R_{t-1} - R_t` for `t = 1..=T`.
    pub dr: Vec<f64>,
    /// `S_{t-1} - S_t` where both estimates exist.
    pub ds: Vec<Option<f64>>,
    pub target_loss: f64,
}

pub fn reference_metrics(
    m: &FeatureMatrix,
    trace: &BoostTrace,
    lambda_star: &Combination,
    oracle: Option<&GridSpec>,
) -> Result<ReferenceTrace> {
    let log_star = log_mean_exp_neg(&margins(m, lambda_star)?);
    let lams = trace.combinations();
    let r: Vec<f64> = lams
        .iter()
        .map(|l| log_mean_exp_neg(&margins_unchecked(m, l.as_slice())) - log_star)
        .collect();
    let dr = r.windows(2).map(|w| w[0] - w[1]).collect();
    let target_loss = log_star.exp();

    let mut s = Vec::new();
    if let Some(grid) = oracle {
        for (t, l) in lams.iter().enumerate() {
            match brute_distance(m, l, target_loss, grid) {
                Ok(e) => s.push(Some(e)),
                Err(Error::OracleRefused(msg)) => {
                    log::warn!("distance oracle refused, S omitted: {msg}");
                    s.clear();
                    break;
                }
                Err(Error::NotFound(msg)) => {
                    log::warn!("round {t}: {msg}");
                    s.push(None);
                }
                Err(e) => return Err(e),
            }
        }
    }
    let ds = s
        .windows(2)
        .map(|w| match (&w[0], &w[1]) {
            (Some(a), Some(b)) => Some(a.value - b.value),
            _ => None,
        })
        .collect();
    Ok(ReferenceTrace {
        r,
        s,
        b: lambda_star.l1_norm(),
        dr,
        ds,
        target_loss,
    })
}

/// Per-round step-length bound check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCheck {
    pub bound: f64,
    pub max_abs_alpha: f64,
    /// Rounds (1-based) whose step exceeded the bound.
    pub violations: Vec<usize>,
}

impl StepCheck {
    fn new(bound: f64, trace: &BoostTrace) -> Self {
        let tol = 1e-9 * bound.max(1.0);
        StepCheck {
            bound,
            max_abs_alpha: trace.records.iter().map(|r| r.alpha.abs()).fold(0.0, f64::max),
            violations: trace
                .records
                .iter()
                .filter(|r| r.alpha.abs() > bound + tol)
                .map(|r| r.t)
                .collect(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepBoundReport {
    pub complementary_pair: Option<(usize, usize)>,
    /// `|alpha_t| <= 2 ln m`, checked when complementary rows exist.
    pub two_ln_m: Option<StepCheck>,
    /// `|alpha_t| <= 1 + ln m`, checked on sign-valued matrices with a
    /// nonempty finite-margin set.
    pub one_plus_ln_m: Option<StepCheck>,
    /// Per round `t = 0..=T`: both complementary-row margins lie in `[-ln m, ln m]`.
    pub pair_margins_in_range: Vec<bool>,
}

impl StepBoundReport {
    pub fn passed(&self) -> bool {
        self.two_ln_m.as_ref().is_none_or(StepCheck::passed)
            && self.one_plus_ln_m.as_ref().is_none_or(StepCheck::passed)
            && self.pair_margins_in_range.iter().all(|&b| b)
    }
}

/// Checks the step-length bounds that apply to `m` against `trace`.
pub fn check_step_bounds(m: &FeatureMatrix, trace: &BoostTrace) -> StepBoundReport {
    let ln_m = (m.rows() as f64).ln();
    let pair = has_complementary_rows(m);
    let mut report = StepBoundReport {
        complementary_pair: pair,
        two_ln_m: None,
        one_plus_ln_m: None,
        pair_margins_in_range: Vec::new(),
    };
    if let Some((a, _)) = pair {
        report.two_ln_m = Some(StepCheck::new(2.0 * ln_m, trace));
        let tol = 1e-9 * ln_m.max(1.0);
        report.pair_margins_in_range = trace
            .combinations()
            .iter()
            .map(|l| {
                let mu: f64 = m.row(a).iter().zip(l.as_slice()).map(|(x, y)| x * y).sum();
                mu.abs() <= ln_m + tol
            })
            .collect();
    }
    if m.is_sign_valued() {
        match zero_loss_set(m) {
            Ok(zl) if !zl.f.is_empty() => {
                report.one_plus_ln_m = Some(StepCheck::new(1.0 + ln_m, trace));
            }
            Ok(_) => {}
            Err(e) => log::warn!("finite-margin set unavailable, 1 + ln m check skipped: {e}"),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_three_example, gen_triangular};
    use crate::matrix::exp_loss;

    fn three() -> FeatureMatrix {
        gen_three_example().matrix
    }

    #[test]
    fn step_size_examples() {
        assert_eq!(step_size(0.0).unwrap(), 0.0);
        assert!((step_size(1.0 / 3.0).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((step_size(0.6).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((step_size(-0.6).unwrap() + 2f64.ln()).abs() < 1e-15);
        assert!(matches!(step_size(1.0), Err(Error::PerfectSeparation { .. })));
        assert!(matches!(step_size(-1.0 + 1e-13), Err(Error::PerfectSeparation { .. })));
    }

    #[test]
    fn first_two_rounds_on_three_example() {
        let m = three();
        let (lam, rec) = boost_round(&m, &Combination::zeros(2), Variant::Plain).unwrap();
        assert!((rec.delta - 1.0 / 3.0).abs() < 1e-15);
        assert!((rec.alpha - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((rec.loss - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-15);
        let (_, rec2) = boost_round(&m, &lam, Variant::Plain).unwrap();
        assert!((rec2.delta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn perfect_column_stops_the_run() {
        let m = FeatureMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            boost_round(&m, &Combination::zeros(2), Variant::Plain),
            Err(Error::PerfectSeparation { .. })
        ));
        let tr = run(&m, 10, Variant::Plain, None, None).unwrap();
        assert_eq!(tr.status, TerminalStatus::PerfectSeparation);
        assert!(tr.is_empty());
    }

    #[test]
    fn scale_back_examples() {
        let m = FeatureMatrix::from_rows(&[[1.0], [-1.0], [-1.0]]).unwrap();
        let (s, lam) = scale_back(&m, &vec![2.0].into()).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(lam.0, vec![0.0]);

        let t = three();
        let (s, _) = scale_back(&t, &vec![0.0, 0.5 * 2f64.ln()].into()).unwrap();
        assert_eq!(s, 1.0);

        let (s, _) = scale_back(&t, &vec![0.0, 0.0].into()).unwrap();
        assert_eq!(s, 1.0);

        // interior minimizer: G(s) = (e^{-2s} + e^{s}) / 2 is minimized at ln(2)/3
        let m = FeatureMatrix::from_rows(&[[1.0], [-0.5]]).unwrap();
        let (s, _) = scale_back(&m, &vec![2.0].into()).unwrap();
        assert!((s - 2f64.ln() / 3.0).abs() < 1e-7, "{s}");
    }

    #[test]
    fn zero_rounds_and_stop() {
        let m = three();
        let tr = run(&m, 0, Variant::Plain, None, None).unwrap();
        assert!(tr.is_empty());
        assert_eq!(tr.initial_loss, 1.0);
        assert_eq!(tr.status, TerminalStatus::Completed);

        let tr = run(&m, 10_000, Variant::Plain, Some(2.0 / 3.0 + 0.01), None).unwrap();
        assert_eq!(tr.status, TerminalStatus::TargetReached);
        assert!(tr.len() as f64 >= 2.0 / (9.0 * 0.01));
    }

    #[test]
    fn loss_formula_prefixes() {
        let m = three();
        let tr = run(&m, 100, Variant::Plain, None, None).unwrap();
        for rec in &tr.records {
            let want = 2.0 / 3.0 * (1.0 + 1.0 / rec.t as f64).sqrt();
            assert!((rec.loss - want).abs() < 1e-9, "t={}", rec.t);
        }
    }

    #[test]
    fn combinations_reproduce_final_weights() {
        let m = gen_triangular(5).unwrap().matrix;
        for v in [Variant::Plain, Variant::Scaled] {
            let tr = run(&m, 40, v, None, None).unwrap();
            let lams = tr.combinations();
            assert_eq!(lams.last().unwrap(), &tr.final_weights);
            for (rec, l) in tr.records.iter().zip(&lams[1..]) {
                assert_eq!(exp_loss(&m, l).unwrap(), rec.loss);
            }
        }
    }

    #[test]
    fn reference_metrics_examples() {
        let m = three();
        let tr = run(&m, 20, Variant::Plain, None, None).unwrap();
        let rt = reference_metrics(&m, &tr, &tr.final_weights, None).unwrap();
        assert_eq!(*rt.r.last().unwrap(), 0.0);

        let rt = reference_metrics(&m, &tr, &vec![1.0, 1.0].into(), None).unwrap();
        assert!((rt.r[0] - 0.339989).abs() < 1e-6);
        assert!(rt.r[0] <= rt.b);
        assert!(rt.s.is_empty());
        assert!(rt.dr.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn csv_layout() {
        let m = three();
        let tr = run(&m, 3, Variant::Plain, None, None).unwrap();
        let csv = tr.to_csv(None);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,j,r,delta,alpha,loss,l1_norm,scale,loss_Z,loss_F,R,S");
        assert_eq!(lines.len(), 4);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 12);
        assert_eq!(fields[0], "1");
        assert_eq!(fields[2], "3.3333333333333331e-1");
        assert_eq!(&fields[8..], &["", "", "", ""]);
    }

    #[test]
    fn step_bounds_on_known_instances() {
        let m = three();
        let tr = run(&m, 50, Variant::Plain, None, None).unwrap();
        let rep = check_step_bounds(&m, &tr);
        assert_eq!(rep.complementary_pair, Some((0, 1)));
        assert!(rep.passed());
        assert!(rep.one_plus_ln_m.is_some());

        let m = gen_triangular(5).unwrap().matrix;
        let tr = run(&m, 200, Variant::Plain, None, None).unwrap();
        let rep = check_step_bounds(&m, &tr);
        assert_eq!(rep.complementary_pair, Some((0, 1)));
        assert!(rep.two_ln_m.as_ref().unwrap().passed());

        let m = FeatureMatrix::from_rows(&[[1.0, -1.0]]).unwrap();
        let tr = run(&m, 5, Variant::Plain, None, None).unwrap();
        assert!(check_step_bounds(&m, &tr).two_ln_m.is_none());
    }
}
