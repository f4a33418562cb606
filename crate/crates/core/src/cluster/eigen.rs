//! Dense symmetric eigensolver (cyclic Jacobi).
//!
//! Sized for a few hundred nodes. Each sweep rotates away every off-diagonal
//! pair; iteration stops when the off-diagonal Frobenius norm falls below
//! `1e-12` of the matrix norm.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFFDIAG_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order with their eigenvectors.
/// `vectors[j]` is the unit eigenvector for `values[j]`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Full eigendecomposition of a dense symmetric matrix given in row-major
/// order. Eigenvectors are sign-canonicalized: the largest-magnitude entry of
/// each vector is positive.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<EigenPairs> {
    assert_eq!(matrix.len(), n * n, "matrix must be n x n");
    if n == 0 {
        return Ok(EigenPairs { values: vec![], vectors: vec![] });
    }

    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = OFFDIAG_TOL * frob.max(f64::MIN_POSITIVE);

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        sweeps += 1;
    }
    if !converged && off_diagonal_norm(&a, n) > threshold {
        return Err(Error::EigenNoConvergence {
            sweeps,
            offdiag: off_diagonal_norm(&a, n),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<f64> = (0..n).map(|row| v[row * n + col]).collect();
            canonicalize_sign(&mut vec);
            vec
        })
        .collect();
    Ok(EigenPairs { values, vectors })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i * n + j] * a[i * n + j];
            }
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation zeroing a[p][q].
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for i in 0..n {
        if i != p && i != q {
            let aip = a[i * n + p];
            let aiq = a[i * n + q];
            a[i * n + p] = aip - s * (aiq + tau * aip);
            a[i * n + q] = aiq + s * (aip - tau * aiq);
            a[p * n + i] = a[i * n + p];
            a[q * n + i] = a[i * n + q];
        }
    }
    for i in 0..n {
        let vip = v[i * n + p];
        let viq = v[i * n + q];
        v[i * n + p] = vip - s * (viq + tau * vip);
        v[i * n + q] = viq + s * (vip - tau * viq);
    }
}

fn canonicalize_sign(vec: &mut [f64]) {
    let mut idx = 0;
    let mut best = 0.0;
    for (i, &x) in vec.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            idx = i;
        }
    }
    if vec[idx] < 0.0 {
        for x in vec.iter_mut() {
            *x = -*x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(matrix: &[f64], n: usize, value: f64, vector: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let mut lv = 0.0;
            for j in 0..n {
                lv += matrix[i * n + j] * vector[j];
            }
            let r = lv - value * vector[i];
            acc += r * r;
        }
        acc.sqrt()
    }

    #[test]
    fn diagonal_matrix_is_already_solved() {
        let m = [3.0, 0.0, 0.0, -1.0];
        let eig = symmetric_eigen(&m, 2).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_stay_small_on_random_symmetric() {
        use rand::Rng;
        let mut rng = crate::seeding::rng_for(5, "eigen.test");
        let n = 30;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x = rng.random::<f64>() * 2.0 - 1.0;
                m[i * n + j] = x;
                m[j * n + i] = x;
            }
        }
        let frob: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
        let eig = symmetric_eigen(&m, n).unwrap();
        for (val, vec) in eig.values.iter().zip(&eig.vectors) {
            assert!(residual(&m, n, *val, vec) <= 1e-8 * frob);
        }
        for w in eig.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let m = [2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        let eig = symmetric_eigen(&m, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = eig.vectors[i].iter().zip(&eig.vectors[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sign_canonicalization_makes_largest_entry_positive() {
        let m = [0.0, 1.0, 1.0, 0.0];
        let eig = symmetric_eigen(&m, 2).unwrap();
        for vec in &eig.vectors {
            let max = vec.iter().cloned().fold(f64::MIN, f64::max);
            let maxabs = vec.iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!((max - maxabs).abs() < 1e-12);
        }
    }
}
