//! Problem instances: the feature matrix `M` with `M_ij = y_i h_j(x_i)`,
//! combinations of its columns, and the loss-derived quantities computed
//! from them (margins, exponential loss, example weights, edges).
//!
//! All loss-like quantities shift the margins by their minimum before
//! exponentiating, so instances whose margins grow like `2^m` stay finite.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Margin magnitude above which [`exp_loss`] switches to log-domain accumulation.
const LOG_DOMAIN_THRESHOLD: f64 = 500.0;

/// The `m x N` feature matrix of a boosting instance, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    integral: bool,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for FeatureMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        let m = FeatureMatrix::from_rows(&raw.entries)?;
        if m.rows != raw.rows || m.cols != raw.cols {
            return Err(Error::InvalidMatrix(format!(
                "declared {}x{} but entries are {}x{}",
                raw.rows, raw.cols, m.rows, m.cols
            )));
        }
        Ok(m)
    }
}

impl From<FeatureMatrix> for RawMatrix {
    fn from(m: FeatureMatrix) -> Self {
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            entries: (0..m.rows).map(|i| m.row(i).to_vec()).collect(),
        }
    }
}

impl FeatureMatrix {
    /// Builds a matrix from row-major entries, validating the range `[-1, 1]`.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        for (k, &e) in entries.iter().enumerate() {
            if !(-1.0..=1.0).contains(&e) {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({}, {}) = {e} outside [-1, 1]",
                    k / cols,
                    k % cols
                )));
            }
        }
        let integral = entries.iter().all(|&e| e == -1.0 || e == 0.0 || e == 1.0);
        Ok(FeatureMatrix {
            rows,
            cols,
            entries,
            integral,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(m * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
            entries.extend_from_slice(r);
        }
        FeatureMatrix::new(m, n, entries)
    }

    /// Number of examples `m`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of weak hypotheses `N`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// True iff every entry is one of `-1`, `0`, `+1`.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// True iff every entry is exactly `-1` or `+1`.
    pub fn is_sign_valued(&self) -> bool {
        self.entries.iter().all(|&e| e == -1.0 || e == 1.0)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// The sub-matrix made of the rows in `set`, in order.
    pub fn restrict_rows(&self, set: &ExampleSet) -> Vec<Vec<f64>> {
        set.iter().map(|i| self.row(i).to_vec()).collect()
    }

    /// Parses the plain-text dataset format: a header line `m N` followed by
    /// `m` lines of `N` whitespace-separated entries. Lines starting with `#`
    /// and blank lines are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing header line `m N`".into(),
        })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header must be `m N`, got `{header}`"),
            });
        }
        let parse_dim = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: hline,
                msg: format!("bad dimension `{s}`: {e}"),
            })
        };
        let (m, n) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
        if m == 0 || n == 0 {
            return Err(Error::Parse {
                line: hline,
                msg: format!("dimensions must be positive, got {m} {n}"),
            });
        }

        let mut entries = Vec::with_capacity(m * n);
        let mut seen = 0;
        for (lineno, line) in lines {
            if seen == m {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("more than {m} data rows"),
                });
            }
            let before = entries.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad entry `{tok}`: {e}"),
                })?;
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("entry {v} outside [-1, 1]"),
                    });
                }
                entries.push(v);
            }
            if entries.len() - before != n {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {n} entries, found {}", entries.len() - before),
                });
            }
            seen += 1;
        }
        if seen != m {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {m} data rows, found {seen}"),
            });
        }
        FeatureMatrix::new(m, n, entries)
    }

    /// Inverse of [`FeatureMatrix::from_text`]. Floats use the shortest
    /// representation that round-trips.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

/// A weight vector over the columns of a feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Combination(pub Vec<f64>);

impl Combination {
    pub fn zeros(n: usize) -> Self {
        Combination(vec![0.0; n])
    }

    /// Unit vector `e_j` in `R^n`.
    pub fn basis(n: usize, j: usize) -> Self {
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        Combination(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn l1_distance(&self, other: &Combination) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> Combination {
        Combination(self.0.iter().map(|v| v * s).collect())
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: f64, other: &Combination) -> Combination {
        Combination(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    fn check(&self, m: &FeatureMatrix) -> Result<()> {
        if self.0.len() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.cols(),
                got: self.0.len(),
            });
        }
        Ok(())
    }
}

impl From<Vec<f64>> for Combination {
    fn from(v: Vec<f64>) -> Self {
        Combination(v)
    }
}

/// A probability distribution over examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExampleDistribution(Vec<f64>);

impl ExampleDistribution {
    /// Validates non-negativity and unit mass (within 1e-12).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("negative or non-finite probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(ExampleDistribution(probs))
    }

    pub fn uniform(m: usize) -> Self {
        ExampleDistribution(vec![1.0 / m as f64; m])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A sorted, duplicate-free set of example indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExampleSet(Vec<usize>);

impl ExampleSet {
    /// Sorts and de-duplicates `indices`; every index must be `< m`.
    pub fn new(mut indices: Vec<usize>, m: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidExampleSet(format!(
                "index {bad} out of range for {m} examples"
            )));
        }
        Ok(ExampleSet(indices))
    }

    pub fn empty() -> Self {
        ExampleSet(Vec::new())
    }

    /// The full example set `X = {0, ..., m-1}`.
    pub fn full(m: usize) -> Self {
        ExampleSet((0..m).collect())
    }

    /// `{0..m} \ self`
    pub fn complement(&self, m: usize) -> Self {
        ExampleSet((0..m).filter(|i| !self.contains(*i)).collect())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    fn check(&self, m: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= m => Err(Error::InvalidExampleSet(format!(
                "index {last} out of range for {m} examples"
            ))),
            _ => Ok(()),
        }
    }
}

/// The margin vector `M lambda`.
pub fn margins(m: &FeatureMatrix, lambda: &Combination) -> Result<Vec<f64>> {
    lambda.check(m)?;
    Ok(margins_unchecked(m, lambda.as_slice()))
}

pub(crate) fn margins_unchecked(m: &FeatureMatrix, lambda: &[f64]) -> Vec<f64> {
    (0..m.rows())
        .map(|i| m.row(i).iter().zip(lambda).map(|(a, b)| a * b).sum())
        .collect()
}

/// `ln( (1/m) sum_i exp(-mu_i) )` for a margin vector, accumulated around the
/// minimum margin. Finite for any finite margins.
pub fn log_mean_exp_neg(margins: &[f64]) -> f64 {
    let lo = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = margins.iter().map(|&mu| (-(mu - lo)).exp()).sum();
    -lo + s.ln() - (margins.len() as f64).ln()
}

/// Normalized exponential loss from a precomputed margin vector.
pub fn loss_from_margins(margins: &[f64]) -> Result<f64> {
    let big = margins.iter().any(|mu| mu.abs() > LOG_DOMAIN_THRESHOLD);
    let loss = if big {
        log_mean_exp_neg(margins).exp()
    } else {
        margins.iter().map(|&mu| (-mu).exp()).sum::<f64>() / margins.len() as f64
    };
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!(
            "exponential loss overflowed (min margin {})",
            margins.iter().copied().fold(f64::INFINITY, f64::min)
        )));
    }
    Ok(loss)
}

/// Normalized exponential loss `L(lambda) = (1/m) sum_i exp(-(M lambda)_i)`.
pub fn exp_loss(m: &FeatureMatrix, lambda: &Combination) -> Result<f64> {
    loss_from_margins(&margins(m, lambda)?)
}

/// Natural log of [`exp_loss`], finite whenever the margins are.
pub fn log_exp_loss(m: &FeatureMatrix, lambda: &Combination) -> Result<f64> {
    Ok(log_mean_exp_neg(&margins(m, lambda)?))
}

/// Unnormalized loss `sum_{i in S} exp(-(M lambda)_i)`.
pub fn set_loss(m: &FeatureMatrix, lambda: &Combination, set: &ExampleSet) -> Result<f64> {
    set.check(m.rows())?;
    let mu = margins(m, lambda)?;
    Ok(set_loss_from_margins(&mu, set))
}

pub(crate) fn set_loss_from_margins(mu: &[f64], set: &ExampleSet) -> f64 {
    set.iter().map(|i| (-mu[i]).exp()).sum()
}

/// Distribution over examples proportional to their exponential losses.
pub fn distribution(m: &FeatureMatrix, lambda: &Combination) -> Result<ExampleDistribution> {
    Ok(distribution_from_margins(&margins(m, lambda)?))
}

pub(crate) fn distribution_from_margins(mu: &[f64]) -> ExampleDistribution {
    let lo = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = mu.iter().map(|&v| (-(v - lo)).exp()).collect();
    let total: f64 = w.iter().sum();
    ExampleDistribution(w.into_iter().map(|v| v / total).collect())
}

/// Edge of column `j` on the set `S` under the loss weights of `lambda`:
/// `| sum_{i in S} l(i) M_ij | / sum_{i in S} l(i)`.
pub fn edge(m: &FeatureMatrix, lambda: &Combination, j: usize, set: &ExampleSet) -> Result<f64> {
    set.check(m.rows())?;
    if j >= m.cols() {
        return Err(Error::InvalidArgument(format!(
            "column {j} out of range for {} columns",
            m.cols()
        )));
    }
    if set.is_empty() {
        return Err(Error::ZeroLoss);
    }
    let mu = margins(m, lambda)?;
    let lo = set.iter().map(|i| mu[i]).fold(f64::INFINITY, f64::min);
    let (mut num, mut den) = (0.0, 0.0);
    for i in set.iter() {
        let w = (-(mu[i] - lo)).exp();
        num += w * m.get(i, j);
        den += w;
    }
    if den <= 0.0 {
        return Err(Error::ZeroLoss);
    }
    Ok((num / den).abs())
}

/// Column with the largest absolute correlation `|sum_i D_i M_ij|`, with its
/// signed correlation. Ties go to the lowest column index.
pub fn best_edge(d: &ExampleDistribution, m: &FeatureMatrix) -> Result<(usize, f64)> {
    if d.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: d.len(),
        });
    }
    let mut corr = vec![0.0; m.cols()];
    for (i, &p) in d.probs().iter().enumerate() {
        for (c, &e) in corr.iter_mut().zip(m.row(i)) {
            *c += p * e;
        }
    }
    let mut best = (0, corr[0]);
    for (j, &r) in corr.iter().enumerate().skip(1) {
        if r.abs() > best.1.abs() {
            best = (j, r);
        }
    }
    Ok(best)
}
