//! Instance generators: the worked three-example dataset, the adversarial
//! lower-bound families, the large-constant families, and seeded random
//! matrices.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedInstance {
    pub name: String,
    pub matrix: FeatureMatrix,
    /// Optional human-readable example names, one per row.
    pub row_labels: Option<Vec<String>>,
    /// Analytic facts about the instance, re-derived by the tests.
    pub expected: BTreeMap<String, Value>,
}

impl NamedInstance {
    fn new(name: impl Into<String>, matrix: FeatureMatrix) -> Self {
        NamedInstance {
            name: name.into(),
            matrix,
            row_labels: None,
            expected: BTreeMap::new(),
        }
    }

    fn fact(mut self, key: &str, v: Value) -> Self {
        self.expected.insert(key.into(), v);
        self
    }

    /// The `expected` facts as a JSON object, for a sidecar file.
    pub fn expected_json(&self) -> Value {
        json!({ "name": self.name, "expected": self.expected })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    /// Entries drawn uniformly from `{-1, 0, 1}`.
    Ternary,
    /// Entries drawn uniformly from `[-1, 1]`.
    Continuous,
}

/// Rows `a = (+1, -1)`, `b = (-1, +1)`, `c = (+1, +1)`.
pub fn gen_three_example() -> NamedInstance {
    let m = FeatureMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]])
        .expect("static matrix");
    let mut inst = NamedInstance::new("three-example", m)
        .fact("optimal_loss", json!(2.0 / 3.0))
        .fact("Z", json!([2]))
        .fact("edge_rule", json!("delta_t = 1/t for t >= 2"))
        .fact("loss_rule", json!("L_T = (2/3) sqrt(1 + 1/T)"))
        .fact("complementary_rows", json!([0, 1]));
    inst.row_labels = Some(vec!["a".into(), "b".into(), "c".into()]);
    inst
}

/// `m x (m-1)`: row `i >= 1` has `+1` in column `i-1`, `-1` to its right and
/// `0` to its left; row 0 is the negation of row 1.
pub fn gen_triangular(m: usize) -> Result<NamedInstance> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("triangular dataset needs m >= 3, got {m}")));
    }
    let n = m - 1;
    let mut rows = vec![vec![0.0; n]; m];
    for i in 1..m {
        rows[i][i - 1] = 1.0;
        for v in rows[i][i..].iter_mut() {
            *v = -1.0;
        }
    }
    rows[0] = rows[1].iter().map(|v| -v).collect();
    let matrix = FeatureMatrix::from_rows(&rows)?;
    let witness = triangular_witness(m);
    Ok(NamedInstance::new(format!("triangular:{m}"), matrix)
        .fact("optimal_loss", json!(2.0 / m as f64))
        .fact("Z", json!((2..m).collect::<Vec<_>>()))
        .fact("witness_direction", json!(witness))
        .fact("achievable_loss", json!("(2 + (m - 2) eps) / m at ln(1/eps) * witness_direction"))
        .fact("norm_floor", json!("(2^(m-2) - 1) ln(1/(3 eps))"))
        .fact("round_floor", json!("(2^(m-2) - 1) ln(1/(3 eps)) / (2 ln m)"))
        .fact("complementary_rows", json!([0, 1])))
}

/// The triangular family's witness direction `(2^{m-2} - 1, 2^{m-3}, ..., 1)`.
pub fn triangular_witness(m: usize) -> Vec<f64> {
    let mut w = vec![2f64.powi(m as i32 - 2) - 1.0];
    w.extend((0..m - 2).rev().map(|k| 2f64.powi(k as i32)));
    w
}

/// Lower bound on rounds to reach loss `2/m + eps` on `gen_triangular(m)`.
pub fn triangular_round_floor(m: usize, eps: f64) -> f64 {
    (2f64.powi(m as i32 - 2) - 1.0) * (1.0 / (3.0 * eps)).ln() / (2.0 * (m as f64).ln())
}

/// 4x2 rows `(-1, 1)`, `(1, -1)`, `(-1 + nu, 1)`, `(1, -1 + nu)`.
pub fn gen_nonintegral(nu: f64) -> Result<NamedInstance> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidArgument(format!("nu must lie in (0, 1), got {nu}")));
    }
    let matrix = FeatureMatrix::from_rows(&[
        [-1.0, 1.0],
        [1.0, -1.0],
        [-1.0 + nu, 1.0],
        [1.0, -1.0 + nu],
    ])?;
    Ok(NamedInstance::new(format!("nonintegral:{nu}"), matrix)
        .fact("optimal_loss", json!(0.5))
        .fact("witness", json!("(c, c) with c = ln(1/(2 eps)) / nu"))
        .fact("norm_floor", json!("2 ln(1/(2 eps)) / nu"))
        .fact("round_floor", json!("ln(1/(2 eps)) / (nu ln m)"))
        .fact("complementary_rows", json!([0, 1])))
}

/// Lower bound on rounds to reach loss `1/2 + eps` on `gen_nonintegral(nu)`.
pub fn nonintegral_round_floor(nu: f64, eps: f64) -> f64 {
    (1.0 / (2.0 * eps)).ln() / (nu * 4f64.ln())
}

/// `m x m` upper triangular: `+1` on the diagonal, `-1` above.
pub fn gen_mint_triangular(m: usize) -> Result<NamedInstance> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("needs m >= 3, got {m}")));
    }
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|k| match k.cmp(&i) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => -1.0,
        }).collect())
        .collect();
    let y: Vec<f64> = (0..m).rev().map(|k| 2f64.powi(k as i32)).collect();
    Ok(NamedInstance::new(format!("mint-triangular:{m}"), FeatureMatrix::from_rows(&rows)?)
        .fact("unit_margin_vector", json!(y)))
}

/// `m x (m-1)`: a lower-triangular block with `-1` on the diagonal and `+1`
/// below, followed by an all-ones row.
pub fn gen_mint_mumax(m: usize) -> Result<NamedInstance> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("needs m >= 3, got {m}")));
    }
    let n = m - 1;
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|k| match k.cmp(&i) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => -1.0,
            std::cmp::Ordering::Greater => 0.0,
        }).collect())
        .collect();
    rows.push(vec![1.0; n]);
    let mut y: Vec<f64> = (0..n).rev().map(|k| 2f64.powi(k as i32)).collect();
    y.push(1.0);
    Ok(NamedInstance::new(format!("mint-mumax:{m}"), FeatureMatrix::from_rows(&rows)?)
        .fact("Z", json!([]))
        .fact("separating_vector", json!(y)))
}

/// First pair `(i, i')`, `i < i'`, of `+-1` rows that sum to zero.
pub fn has_complementary_rows(m: &FeatureMatrix) -> Option<(usize, usize)> {
    let sign = |i: usize| m.row(i).iter().all(|&e| e == 1.0 || e == -1.0);
    for i in 0..m.rows() {
        if !sign(i) {
            continue;
        }
        for k in i + 1..m.rows() {
            if m.row(i).iter().zip(m.row(k)).all(|(a, b)| a + b == 0.0) {
                return Some((i, k));
            }
        }
    }
    None
}

/// Seeded random `m x n` matrix.
pub fn gen_random(m: usize, n: usize, alphabet: Alphabet, seed: u64) -> Result<NamedInstance> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("dimensions must be positive, got {m}x{n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..m * n)
        .map(|_| match alphabet {
            Alphabet::Ternary => rng.random_range(-1i32..=1) as f64,
            Alphabet::Continuous => rng.random_range(-1.0..=1.0),
        })
        .collect();
    let name = match alphabet {
        Alphabet::Ternary => format!("random:{m}:{n}:ternary:{seed}"),
        Alphabet::Continuous => format!("random:{m}:{n}:continuous:{seed}"),
    };
    Ok(NamedInstance::new(name, FeatureMatrix::new(m, n, entries)?))
}

/// Resolves a dataset source: `three-example`, `triangular:M`,
/// `nonintegral:NU`, `mint-triangular:M`, `mint-mumax:M`,
/// `random:M:N:ternary|continuous[:SEED]` or `file:PATH`.
pub fn parse_dataset(source: &str, default_seed: u64) -> Result<NamedInstance> {
    let bad = |msg: String| Error::InvalidArgument(format!("dataset `{source}`: {msg}"));
    let (kind, rest) = source.split_once(':').unwrap_or((source, ""));
    let int = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("`{s}`: {e}")));
    match kind {
        "three-example" if rest.is_empty() => Ok(gen_three_example()),
        "triangular" => gen_triangular(int(rest)?),
        "nonintegral" => gen_nonintegral(rest.parse().map_err(|e| bad(format!("`{rest}`: {e}")))?),
        "mint-triangular" => gen_mint_triangular(int(rest)?),
        "mint-mumax" => gen_mint_mumax(int(rest)?),
        "random" => {
            let parts: Vec<&str> = rest.split(':').collect();
            if !(3..=4).contains(&parts.len()) {
                return Err(bad("expected random:M:N:ternary|continuous[:SEED]".into()));
            }
            let alphabet = match parts[2] {
                "ternary" => Alphabet::Ternary,
                "continuous" => Alphabet::Continuous,
                other => return Err(bad(format!("unknown alphabet `{other}`"))),
            };
            let seed = match parts.get(3) {
                Some(s) => s.parse().map_err(|e| bad(format!("seed `{s}`: {e}")))?,
                None => default_seed,
            };
            gen_random(int(parts[0])?, int(parts[1])?, alphabet, seed)
        }
        "file" => load_file(Path::new(rest)),
        _ => Err(bad("unknown dataset".into())),
    }
}

pub fn load_file(path: &Path) -> Result<NamedInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let matrix = FeatureMatrix::from_text(&text)?;
    Ok(NamedInstance::new(format!("file:{}", path.display()), matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{exp_loss, margins};

    #[test]
    fn three_example_layout() {
        let inst = gen_three_example();
        let m = &inst.matrix;
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.row(2), &[1.0, 1.0]);
        assert_eq!(inst.expected["optimal_loss"], json!(2.0 / 3.0));
        assert_eq!(has_complementary_rows(m), Some((0, 1)));
    }

    #[test]
    fn triangular_construction() {
        // m = 5: 5 rows, 4 columns, row 0 = -(row 1)
        let inst = gen_triangular(5).unwrap();
        let m = &inst.matrix;
        assert_eq!((m.rows(), m.cols()), (5, 4));
        assert_eq!(m.row(0), &[-1.0, 1.0, 1.0, 1.0]);
        assert_eq!(m.row(1), &[1.0, -1.0, -1.0, -1.0]);
        assert_eq!(m.row(4), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(triangular_witness(5), vec![7.0, 4.0, 2.0, 1.0]);

        let eps: f64 = 0.1;
        let lam = crate::Combination(triangular_witness(5)).scaled((1.0 / eps).ln());
        assert!((exp_loss(m, &lam).unwrap() - 0.46).abs() < 1e-12);

        let lam: crate::Combination = vec![0.3, -1.2, 2.5, 0.7].into();
        let mu = margins(m, &lam).unwrap();
        for i in 1..5 {
            let tail: f64 = lam.0[i..].iter().sum();
            assert!((mu[i] - (lam.0[i - 1] - tail)).abs() < 1e-12);
        }
        assert!((mu[4] - lam.0[3]).abs() < 1e-15);
        assert!(gen_triangular(2).is_err());
    }

    #[test]
    fn nonintegral_witness() {
        let nu = 0.1;
        let eps: f64 = 0.1;
        let inst = gen_nonintegral(nu).unwrap();
        let c = (1.0 / (2.0 * eps)).ln() / nu;
        assert!((c - 10.0 * 5f64.ln()).abs() < 1e-12);
        let mu = margins(&inst.matrix, &vec![c, c].into()).unwrap();
        assert!(mu[0].abs() < 1e-12 && mu[1].abs() < 1e-12);
        assert!((mu[2] - 5f64.ln()).abs() < 1e-9);
        let l = exp_loss(&inst.matrix, &vec![c, c].into()).unwrap();
        assert!((l - 0.6).abs() < 1e-9);
        assert_eq!(has_complementary_rows(&inst.matrix), Some((0, 1)));
        assert!(gen_nonintegral(0.0).is_err() && gen_nonintegral(1.0).is_err());
    }

    #[test]
    fn mint_families() {
        let t = gen_mint_triangular(3).unwrap().matrix;
        assert_eq!(margins(&t, &vec![4.0, 2.0, 1.0].into()).unwrap(), vec![1.0; 3]);

        for m in 3..8 {
            let mm = gen_mint_mumax(m).unwrap().matrix;
            let x: Vec<f64> = (0..m - 1).map(|k| 2f64.powi(k as i32)).collect();
            let mu = margins(&mm, &x.into()).unwrap();
            assert!(mu[..m - 1].iter().all(|&v| v == -1.0));
            assert_eq!(mu[m - 1], 2f64.powi(m as i32 - 1) - 1.0);
            let y: Vec<f64> = serde_json::from_value(
                gen_mint_mumax(m).unwrap().expected["separating_vector"].clone(),
            )
            .unwrap();
            for j in 0..m - 1 {
                let s: f64 = (0..m).map(|i| y[i] * mm.get(i, j)).sum();
                assert_eq!(s, 0.0);
            }
        }
    }

    #[test]
    fn complementary_rows() {
        let one = FeatureMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        assert_eq!(has_complementary_rows(&one), None);
        let tri = gen_triangular(6).unwrap().matrix;
        assert_eq!(has_complementary_rows(&tri), Some((0, 1)));
    }

    #[test]
    fn random_is_deterministic() {
        let a = gen_random(5, 3, Alphabet::Ternary, 42).unwrap();
        let b = gen_random(5, 3, Alphabet::Ternary, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.matrix.is_integral());
        let c = gen_random(5, 3, Alphabet::Continuous, 42).unwrap();
        assert!(c.matrix.entries().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn spec_strings() {
        assert_eq!(parse_dataset("three-example", 0).unwrap().name, "three-example");
        assert_eq!(parse_dataset("triangular:5", 0).unwrap().matrix.rows(), 5);
        assert_eq!(parse_dataset("nonintegral:0.1", 0).unwrap().matrix.rows(), 4);
        assert_eq!(parse_dataset("mint-mumax:5", 0).unwrap().matrix.cols(), 4);
        assert_eq!(
            parse_dataset("random:4:3:ternary", 9).unwrap(),
            parse_dataset("random:4:3:ternary:9", 0).unwrap()
        );
        for bad in ["", "triangular", "triangular:x", "random:4:3", "random:4:3:binary", "bogus"] {
            assert!(parse_dataset(bad, 0).is_err(), "{bad}");
        }
    }
}
