//! Small dense linear algebra: cyclic Jacobi eigendecomposition, Cholesky,
//! and Gaussian elimination. Sizes here are a handful of rows.

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// `1e-12` times the Frobenius norm of the input.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> SymmetricEigen {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-12 * scale;

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= tol || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    SymmetricEigen {
        values: order.iter().map(|&k| a[k][k]).collect(),
        vectors: order
            .iter()
            .map(|&k| (0..n).map(|i| v[i][k]).collect())
            .collect(),
    }
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if i != j {
                s += x * x;
            }
        }
    }
    s.sqrt()
}

/// `A^T A` for a row-major `rows x cols` matrix given as rows.
pub fn gram(rows: &[Vec<f64>], cols: usize) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; cols]; cols];
    for r in rows {
        for j in 0..cols {
            for k in j..cols {
                g[j][k] += r[j] * r[k];
            }
        }
    }
    for j in 0..cols {
        for k in 0..j {
            g[j][k] = g[k][j];
        }
    }
    g
}

/// Solves `H x = b` for symmetric positive-definite `H`. Returns `None` when
/// a pivot is not positive.
pub fn cholesky_solve(h: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = h.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = h[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (h[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Some(x)
}

/// Solves the square system `A x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot magnitude drops below `tol`.
pub fn solve_square(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))?;
        if aug[piv][col].abs() < tol {
            return None;
        }
        aug.swap(col, piv);
        for r in col + 1..n {
            let f = aug[r][col] / aug[col][col];
            if f != 0.0 {
                for c in col..=n {
                    aug[r][c] -= f * aug[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| aug[i][k] * x[k]).sum();
        x[i] = (aug[i][n] - s) / aug[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_2x2() {
        let e = jacobi_eigen(&[vec![2.0, -2.0], vec![-2.0, 2.0]]);
        assert!(e.values[0].abs() < 1e-12);
        assert!((e.values[1] - 4.0).abs() < 1e-12);
        // eigenvector for 0 is along (1,1)
        let v = &e.vectors[0];
        assert!((v[0] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn jacobi_reconstructs_3x3() {
        let a = vec![
            vec![4.0, 1.0, -2.0],
            vec![1.0, 3.0, 0.5],
            vec![-2.0, 0.5, 1.0],
        ];
        let e = jacobi_eigen(&a);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j]).sum();
                assert!((r - a[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_and_gauss_agree() {
        let h = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let b = [1.0, 2.0];
        let x = cholesky_solve(&h, &b).unwrap();
        let y = solve_square(&h, &b, 1e-12).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(cholesky_solve(&[vec![0.0]], &[1.0]).is_none());
        assert!(solve_square(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 1.0], 1e-12).is_none());
    }
}
