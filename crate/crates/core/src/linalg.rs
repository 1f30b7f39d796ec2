//! Small dense helpers for row-major symmetric matrices.

use crate::error::{Error, Result};

/// Cholesky factor `L` (row-major, lower) of a symmetric positive-definite matrix.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::InvalidArgument(format!("expected {n}x{n} matrix")));
    }
    for i in 0..n {
        for j in 0..i {
            let (u, v) = (a[i * n + j], a[j * n + i]);
            if (u - v).abs() > 1e-12 * (1.0 + u.abs().max(v.abs())) {
                return Err(Error::InvalidStructure("metric matrix is not symmetric".into()));
            }
        }
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::InvalidStructure("metric matrix is not positive definite".into()));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solve `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    y
}

pub fn inverse_spd(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(l, n, &e);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    // symmetrize roundoff
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (inv[i * n + j] + inv[j * n + i]);
            inv[i * n + j] = m;
            inv[j * n + i] = m;
        }
    }
    inv
}

pub fn quad_form(a: &[f64], n: usize, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        let mut r = 0.0;
        for j in 0..n {
            r += a[i * n + j] * y[j];
        }
        s += x[i] * r;
    }
    s
}

pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Smallest generalized eigenvalue of the symmetric 2×2 pencil `A v = λ B v`, B positive definite.
pub fn min_gen_eig_2x2(a: [f64; 4], b: [f64; 4]) -> f64 {
    // det(A − λB) = 0 as a quadratic in λ
    let qa = b[0] * b[3] - b[1] * b[2];
    let qb = -(a[0] * b[3] + a[3] * b[0] - a[1] * b[2] - a[2] * b[1]);
    let qc = a[0] * a[3] - a[1] * a[2];
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    let sq = disc.sqrt();
    // stable root pair
    let q = -0.5 * (qb + qb.signum() * sq);
    let (r1, r2) = if q != 0.0 { (q / qa, qc / q) } else { (0.0, 0.0) };
    r1.min(r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_round_trip() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let l = cholesky(&a, 3).unwrap();
        let inv = inverse_spd(&l, 3);
        for i in 0..3 {
            for j in 0..3 {
                let e: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
        assert!(cholesky(&[1.0, 0.5, 0.0, 1.0], 2).is_err());
    }

    #[test]
    fn generalized_eigen_of_diagonal_pencil() {
        let l = min_gen_eig_2x2([2.0, 0.0, 0.0, 9.0], [1.0, 0.0, 0.0, 3.0]);
        assert!((l - 2.0).abs() < 1e-14);
    }
}
