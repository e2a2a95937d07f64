//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use nalgebra::DMatrix;

/// Eigenvalues in ascending order; `vectors` column `k` pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 100;
const REL_TOL: f64 = 1e-13;

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Diagonalize a symmetric matrix with cyclic Jacobi rotations.
///
/// Iterates until the off-diagonal Frobenius norm drops below
/// `1e-13 · ‖A‖_F`. Only the lower triangle of `matrix` is trusted.
pub fn jacobi_eigen(matrix: &DMatrix<f64>) -> SymmetricEigen {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");

    // row-major, kept exactly symmetric
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            a[i * n + j] = matrix[(i, j)];
            a[j * n + i] = matrix[(i, j)];
        }
    }
    // row k of `v` holds eigenvector component k
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = REL_TOL * a.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS && off_diagonal_norm(&a, n) > threshold {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_p = c * akp - s * akq;
                    let new_q = s * akp + c * akq;
                    a[k * n + p] = new_p;
                    a[p * n + k] = new_p;
                    a[k * n + q] = new_q;
                    a[q * n + k] = new_q;
                }
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                // exact zero for the annihilated pair
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);

    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}
