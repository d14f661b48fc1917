//! Dense symmetric eigensolvers.
//!
//! `jacobi_eigen` is a self-contained cyclic Jacobi solver. It is exact to
//! round-off but costs `O(n^3)` per sweep, so matrices above
//! [`JACOBI_MAX_DIM`] go through nalgebra's Householder tridiagonalization
//! and implicit QR instead. When only a few of the smallest eigenpairs of
//! a large matrix are needed, [`smallest_eigenpairs`] builds a block Krylov
//! basis and stops as soon as the wanted Ritz pairs have converged.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const JACOBI_TOLERANCE: f64 = 1e-10;
pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const JACOBI_MAX_DIM: usize = 96;
/// Matrices up to this size are always decomposed densely.
pub const KRYLOV_MIN_DIM: usize = 256;
/// Residual norm `|A y - theta y|` at which a Ritz pair counts as converged.
pub const KRYLOV_TOLERANCE: f64 = 1e-10;

/// Eigenvalues in ascending order with matching column eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// `vectors[j]` is the unit eigenvector for `values[j]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi rotations on a dense symmetric matrix given row-major.
///
/// Stops once the off-diagonal Frobenius norm drops below `tolerance`
/// (relative to the matrix norm when that exceeds 1).
pub fn jacobi_eigen(
    matrix: &[f64],
    n: usize,
    tolerance: f64,
    max_sweeps: usize,
) -> Result<EigenDecomposition> {
    assert_eq!(matrix.len(), n * n, "matrix must be n x n");
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let off_norm = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= tolerance * scale;
    let mut sweep = 0;
    while !converged && sweep < max_sweeps {
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
        converged = off_norm(&a) <= tolerance * scale;
    }
    if !converged {
        return Err(Error::EigenFailure);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].total_cmp(&a[y * n + y]));
    Ok(EigenDecomposition {
        values: order.iter().map(|&j| a[j * n + j]).collect(),
        vectors: order
            .iter()
            .map(|&j| (0..n).map(|k| v[k * n + j]).collect())
            .collect(),
    })
}

/// Full decomposition through nalgebra.
pub fn householder_eigen(matrix: &[f64], n: usize) -> Result<EigenDecomposition> {
    let m = DMatrix::from_row_slice(n, n, matrix);
    let eig = m
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    Ok(EigenDecomposition {
        values: order.iter().map(|&j| eig.eigenvalues[j]).collect(),
        vectors: order
            .iter()
            .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
            .collect(),
    })
}

/// Ascending eigendecomposition, choosing the solver by size.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<EigenDecomposition> {
    if n <= JACOBI_MAX_DIM {
        jacobi_eigen(matrix, n, JACOBI_TOLERANCE, JACOBI_MAX_SWEEPS)
    } else {
        householder_eigen(matrix, n)
    }
}

/// The `k` smallest eigenpairs, ascending.
///
/// Small matrices go through [`symmetric_eigen`]. Larger ones use a
/// randomized block Krylov space (block size `k + 2`, fully
/// reorthogonalized) with Rayleigh-Ritz extraction. The block start picks
/// up repeated eigenvalues a single-vector Lanczos run would miss, and the
/// basis can grow to the full dimension, where the answer is exact.
pub fn smallest_eigenpairs(matrix: &[f64], n: usize, k: usize, seed: u64) -> Result<EigenDecomposition> {
    assert_eq!(matrix.len(), n * n, "matrix must be n x n");
    assert!(k <= n, "cannot take {k} eigenpairs of a {n} x {n} matrix");
    if n <= KRYLOV_MIN_DIM {
        let mut eig = symmetric_eigen(matrix, n)?;
        eig.values.truncate(k);
        eig.vectors.truncate(k);
        return Ok(eig);
    }
    if k == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }

    let apply = |v: &[f64]| -> Vec<f64> {
        matrix
            .chunks_exact(n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block_size = (k + 2).min(n);
    let random_block = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..block_size)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    };

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    // projected matrix basis^T A basis, grown one row and column at a time
    let mut projected: Vec<Vec<f64>> = Vec::new();
    let mut next_check = k.max(block_size);
    let mut block = random_block(&mut rng);
    loop {
        let mut grew = Vec::new();
        for mut v in block {
            if basis.len() == n {
                break;
            }
            let before = dot(&v, &v).sqrt();
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &v);
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= c * y;
                    }
                }
            }
            let norm = dot(&v, &v).sqrt();
            if !(norm > 1e-8 * before) {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let image = apply(&v);
            let row: Vec<f64> = basis.iter().map(|q| dot(q, &image)).collect();
            for (r, &x) in projected.iter_mut().zip(&row) {
                r.push(x);
            }
            let mut own = row;
            own.push(dot(&v, &image));
            projected.push(own);
            basis.push(v);
            images.push(image.clone());
            grew.push(image);
        }

        let m = basis.len();
        if m >= next_check || m == n {
            let mut flat = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..m {
                    flat[i * m + j] = 0.5 * (projected[i][j] + projected[j][i]);
                }
            }
            let ritz = symmetric_eigen(&flat, m)?;
            let mut vectors = Vec::with_capacity(k);
            let mut worst = 0.0f64;
            for (theta, s) in ritz.values.iter().zip(&ritz.vectors).take(k) {
                let mut y = vec![0.0; n];
                let mut ay = vec![0.0; n];
                for ((q, aq), &c) in basis.iter().zip(&images).zip(s) {
                    for i in 0..n {
                        y[i] += c * q[i];
                        ay[i] += c * aq[i];
                    }
                }
                let r: f64 = ay.iter().zip(&y).map(|(a, b)| (a - theta * b).powi(2)).sum();
                worst = worst.max(r.sqrt());
                vectors.push(y);
            }
            if worst <= KRYLOV_TOLERANCE || m == n {
                return Ok(EigenDecomposition {
                    values: ritz.values[..k].to_vec(),
                    vectors,
                });
            }
            next_check = (m + m / 4).max(m + block_size);
        }
        block = if grew.is_empty() { random_block(&mut rng) } else { grew };
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.random_range(-1.0..1.0);
                m[i * n + j] = x;
                m[j * n + i] = x;
            }
        }
        m
    }

    fn residual(m: &[f64], n: usize, e: &EigenDecomposition) -> f64 {
        let mut worst: f64 = 0.0;
        for (lambda, v) in e.values.iter().zip(&e.vectors) {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| m[i * n + j] * v[j]).sum();
                worst = worst.max((av - lambda * v[i]).abs());
            }
        }
        worst
    }

    #[test]
    fn jacobi_diagonal_and_2x2() {
        let e = jacobi_eigen(&[2.0, 1.0, 1.0, 2.0], 2, 1e-12, 50).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        let e = jacobi_eigen(&[5.0, 0.0, 0.0, -1.0], 2, 1e-12, 50).unwrap();
        assert_eq!(e.values, vec![-1.0, 5.0]);
    }

    #[test]
    fn jacobi_residuals_small() {
        for seed in 0..5 {
            let n = 12;
            let m = random_symmetric(n, seed);
            let e = jacobi_eigen(&m, n, JACOBI_TOLERANCE, JACOBI_MAX_SWEEPS).unwrap();
            assert!(residual(&m, n, &e) < 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn solvers_agree_on_spectrum() {
        for seed in 10..14 {
            let n = 20;
            let m = random_symmetric(n, seed);
            let a = jacobi_eigen(&m, n, JACOBI_TOLERANCE, JACOBI_MAX_SWEEPS).unwrap();
            let b = householder_eigen(&m, n).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
            assert!(residual(&m, n, &b) < 1e-9);
        }
    }

    #[test]
    fn jacobi_sweep_cap_reports_failure() {
        let m = random_symmetric(10, 3);
        assert!(matches!(jacobi_eigen(&m, 10, 1e-10, 1), Err(Error::EigenFailure)));
    }

    fn block_laplacian(n: usize, seed: u64) -> Vec<f64> {
        // two disconnected random blocks: eigenvalue 0 appears twice
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = n / 2;
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                if (i < half) == (j < half) {
                    let x: f64 = rng.random_range(0.0..1.0);
                    w[i * n + j] = x;
                    w[j * n + i] = x;
                }
            }
        }
        let deg: Vec<f64> = w.chunks(n).map(|r| r.iter().sum::<f64>()).collect();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let delta = f64::from(u8::from(i == j));
                l[i * n + j] = delta - w[i * n + j] / (deg[i] * deg[j]).sqrt();
            }
        }
        l
    }

    #[test]
    fn krylov_matches_dense() {
        let n = 300;
        for (seed, m) in [(0, random_symmetric(n, 20)), (1, block_laplacian(n, 21))] {
            let dense = householder_eigen(&m, n).unwrap();
            let few = smallest_eigenpairs(&m, n, 4, seed).unwrap();
            assert_eq!(few.vectors.len(), 4);
            for (x, y) in few.values.iter().zip(&dense.values) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
            assert!(residual(&m, n, &few) < 1e-9);
        }
    }

    #[test]
    fn krylov_finds_repeated_eigenvalue() {
        let n = 400;
        let m = block_laplacian(n, 5);
        let few = smallest_eigenpairs(&m, n, 2, 9).unwrap();
        assert!(few.values[0].abs() < 1e-9 && few.values[1].abs() < 1e-9, "{:?}", few.values);
        assert!(dot(&few.vectors[0], &few.vectors[1]).abs() < 1e-9);
    }

    #[test]
    fn small_matrices_stay_dense() {
        let m = random_symmetric(30, 2);
        let all = symmetric_eigen(&m, 30).unwrap();
        let few = smallest_eigenpairs(&m, 30, 3, 0).unwrap();
        assert_eq!(few.values, all.values[..3]);
    }
}
