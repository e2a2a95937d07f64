//! The circulant second-difference matrix `A`, the cross-term matrix `L`,
//! and the orthogonal splitting `ℝ^M = Y ⊕ Z` around the distinguished
//! index `n0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::eigen::{jacobi_eigen, SymmetricEigen};
use crate::error::{invalid, Error, Result};
use crate::sequence::{PeriodicSequence, MIN_PERIOD};

/// Numeric and closed-form spectra may differ by at most this much.
pub const SPECTRUM_TOL: f64 = 1e-10;

fn check_period(m: usize) -> Result<()> {
    if m < MIN_PERIOD {
        return Err(Error::PeriodTooSmall(m));
    }
    Ok(())
}

pub fn check_distinguished_index(m: usize, n0: usize) -> Result<()> {
    check_period(m)?;
    if n0 < 3 || n0 + 2 > m {
        return Err(Error::IndexOutOfRange { n0, max: m - 2 });
    }
    Ok(())
}

/// `2(1 − cos(2π/M))`, the smallest positive eigenvalue of `A`.
pub fn lambda_min(m: usize) -> f64 {
    2.0 * (1.0 - (2.0 * PI / m as f64).cos())
}

/// Circulant matrix with `2` on the diagonal and `−1` on both cyclic
/// off-diagonals, so that `uᵀAu = Σ (Δu_s)²`.
pub fn build_a(m: usize) -> Result<DMatrix<f64>> {
    check_period(m)?;
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = 2.0;
        a[(i, (i + 1) % m)] = -1.0;
        a[((i + 1) % m, i)] = -1.0;
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ASpectrum {
    /// `{2 − 2cos(2πj/M) : j = 0..M−1}`, ascending.
    pub eigs: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Closed-form spectrum of [`build_a`].
pub fn spectrum_a(m: usize) -> Result<ASpectrum> {
    check_period(m)?;
    let mut eigs: Vec<f64> = (0..m)
        .map(|j| 2.0 - 2.0 * (2.0 * PI * j as f64 / m as f64).cos())
        .collect();
    eigs.sort_by(f64::total_cmp);
    let lambda_max = *eigs.last().expect("m >= 5");
    Ok(ASpectrum {
        eigs,
        lambda_min: lambda_min(m),
        lambda_max,
    })
}

/// Identity plus ones at `(n0−1, n0)` and `(n0, n0−1)` (1-based), so that
/// `vᵀLv = Σ v_s² + 2 v_{n0−1} v_{n0}`.
///
/// Returns the matrix and its smallest positive eigenvalue, which is
/// computed numerically.
pub fn build_l(m: usize, n0: usize) -> Result<(DMatrix<f64>, f64)> {
    check_distinguished_index(m, n0)?;
    let mut l = DMatrix::identity(m, m);
    l[(n0 - 2, n0 - 1)] = 1.0;
    l[(n0 - 1, n0 - 2)] = 1.0;
    let eig = jacobi_eigen(&l);
    let gamma_min = eig
        .values
        .iter()
        .copied()
        .find(|&v| v > SPECTRUM_TOL)
        .expect("L has positive eigenvalues");
    if (gamma_min - 1.0).abs() > SPECTRUM_TOL {
        return Err(invalid(
            "gamma_min",
            format!("numeric value {gamma_min} deviates from 1"),
        ));
    }
    Ok((l, gamma_min))
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub m: usize,
    pub n0: usize,
    pub a_matrix: DMatrix<f64>,
    pub l_matrix: DMatrix<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub gamma_min: f64,
    /// Orthonormal basis of `Z = span{(1,…,1), e_{n0}}`; the first vector spans `K`.
    pub basis_z: Vec<DVector<f64>>,
    /// Orthonormal basis of `Y = Z^⊥ = {u : Σu = 0, u_{n0} = 0}`.
    pub basis_y: Vec<DVector<f64>>,
}

fn gram_schmidt_step(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // two passes keep orthogonality at the 1e-16 level
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
}

/// Build `A`, `L`, their spectral scalars, and orthonormal bases of `Y` and `Z`.
pub fn decompose(m: usize, n0: usize) -> Result<SpectralData> {
    check_distinguished_index(m, n0)?;
    let a_matrix = build_a(m)?;
    let spec = spectrum_a(m)?;
    let (l_matrix, gamma_min) = build_l(m, n0)?;

    let mut basis_z: Vec<DVector<f64>> = Vec::with_capacity(2);
    basis_z.push(DVector::from_element(m, 1.0 / (m as f64).sqrt()));
    let mut spike = DVector::zeros(m);
    spike[n0 - 1] = 1.0;
    gram_schmidt_step(&mut spike, &basis_z);
    let len = spike.norm();
    basis_z.push(spike / len);

    let mut basis_y: Vec<DVector<f64>> = Vec::with_capacity(m - 2);
    for k in 0..m {
        let mut v = DVector::zeros(m);
        v[k] = 1.0;
        gram_schmidt_step(&mut v, &basis_z);
        gram_schmidt_step(&mut v, &basis_y);
        let len = v.norm();
        if len > 1e-8 {
            basis_y.push(v / len);
        }
        if basis_y.len() == m - 2 {
            break;
        }
    }

    Ok(SpectralData {
        m,
        n0,
        a_matrix,
        l_matrix,
        lambda_min: spec.lambda_min,
        lambda_max: spec.lambda_max,
        gamma_min,
        basis_z,
        basis_y,
    })
}

fn project(basis: &[DVector<f64>], u: &PeriodicSequence) -> PeriodicSequence {
    let x = DVector::from_column_slice(u.as_slice());
    let mut out = DVector::zeros(x.len());
    for b in basis {
        out.axpy(b.dot(&x), b, 1.0);
    }
    PeriodicSequence::from_vec_unchecked(out.as_slice().to_vec())
}

impl SpectralData {
    pub fn project_z(&self, u: &PeriodicSequence) -> PeriodicSequence {
        project(&self.basis_z, u)
    }

    pub fn project_y(&self, u: &PeriodicSequence) -> PeriodicSequence {
        project(&self.basis_y, u)
    }

    pub fn projector_z(&self) -> DMatrix<f64> {
        self.basis_z.iter().map(|b| b * b.transpose()).sum()
    }

    pub fn projector_y(&self) -> DMatrix<f64> {
        self.basis_y.iter().map(|b| b * b.transpose()).sum()
    }

    /// `Σ_k c_k y_k` for coefficients in the `Y` basis.
    pub fn combine_y(&self, coeffs: &[f64]) -> PeriodicSequence {
        combine(&self.basis_y, coeffs, self.m)
    }

    /// `Σ_k c_k z_k` for coefficients in the `Z` basis.
    pub fn combine_z(&self, coeffs: &[f64]) -> PeriodicSequence {
        combine(&self.basis_z, coeffs, self.m)
    }

    /// Numeric eigendecomposition of `A`.
    pub fn eigen_a(&self) -> SymmetricEigen {
        jacobi_eigen(&self.a_matrix)
    }

    pub fn eigen_l(&self) -> SymmetricEigen {
        jacobi_eigen(&self.l_matrix)
    }
}

fn combine(basis: &[DVector<f64>], coeffs: &[f64], m: usize) -> PeriodicSequence {
    assert_eq!(basis.len(), coeffs.len());
    let mut out = DVector::zeros(m);
    for (b, &c) in basis.iter().zip(coeffs) {
        out.axpy(c, b, 1.0);
    }
    PeriodicSequence::from_vec_unchecked(out.as_slice().to_vec())
}

/// `uᵀ A u`.
pub fn quadratic_form(matrix: &DMatrix<f64>, u: &[f64]) -> f64 {
    let x = DVector::from_column_slice(u);
    x.dot(&(matrix * &x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::forward_difference;
    use proptest::prelude::*;

    #[test]
    fn a_rows() {
        let a = build_a(5).unwrap();
        assert_eq!(
            a.row(0).iter().copied().collect::<Vec<_>>(),
            vec![2.0, -1.0, 0.0, 0.0, -1.0]
        );
        for m in 5..20 {
            let a = build_a(m).unwrap();
            assert_eq!(a, a.transpose());
            let ones = DVector::from_element(m, 1.0);
            assert!((&a * ones).iter().all(|&v| v == 0.0));
        }
        assert_eq!(build_a(4), Err(Error::PeriodTooSmall(4)));
    }

    #[test]
    fn a_quadratic_form_on_spike() {
        let a = build_a(6).unwrap();
        let e3 = PeriodicSequence::unit(6, 3).unwrap();
        let lhs = quadratic_form(&a, e3.as_slice());
        let d = forward_difference(&e3);
        assert_eq!(lhs, 2.0);
        assert_eq!(d.as_slice().iter().map(|v| v * v).sum::<f64>(), 2.0);
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum_a(6).unwrap();
        // cos(π/3) rounds to 0.5000000000000001 in binary
        assert!((s.lambda_min - 1.0).abs() < 1e-15);
        assert_eq!(s.lambda_max, 4.0);
        let s = spectrum_a(5).unwrap();
        assert!((s.lambda_min - 1.381_966_011_3).abs() < 1e-10);
        for m in 5..40 {
            let s = spectrum_a(m).unwrap();
            assert_eq!(s.eigs.iter().filter(|&&v| v == 0.0).count(), 1);
            assert!(s.lambda_min > 0.0 && s.lambda_min <= s.lambda_max);
            assert!((s.eigs[1] - s.lambda_min).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_jacobi() {
        for m in 5..=64 {
            let closed = spectrum_a(m).unwrap();
            let numeric = jacobi_eigen(&build_a(m).unwrap());
            for (c, n) in closed.eigs.iter().zip(&numeric.values) {
                assert!((c - n).abs() < SPECTRUM_TOL, "m={m}: {c} vs {n}");
            }
        }
    }

    #[test]
    fn l_structure() {
        let (l, gamma) = build_l(5, 3).unwrap();
        let mut expected = DMatrix::identity(5, 5);
        expected[(1, 2)] = 1.0;
        expected[(2, 1)] = 1.0;
        assert_eq!(l, expected);
        assert_eq!(gamma, 1.0);

        let eta = DVector::from_vec(vec![0.0, 2.5, -2.5, 0.0, 0.0]);
        assert!((&l * eta).iter().all(|&v| v == 0.0));

        for m in 5..16 {
            for n0 in 3..=m - 2 {
                let (l, gamma) = build_l(m, n0).unwrap();
                assert!((gamma - 1.0).abs() < SPECTRUM_TOL);
                let e = jacobi_eigen(&l);
                assert!(e.values[0].abs() < SPECTRUM_TOL);
                assert!((e.values[m - 1] - 2.0).abs() < SPECTRUM_TOL);
                assert!(e.values[1..m - 1]
                    .iter()
                    .all(|v| (v - 1.0).abs() < SPECTRUM_TOL));
            }
        }
    }

    #[test]
    fn rejects_bad_index() {
        assert!(matches!(build_l(6, 2), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(build_l(6, 5), Err(Error::IndexOutOfRange { .. })));
        assert!(decompose(6, 4).is_ok());
        assert!(decompose(6, 1).is_err());
    }

    #[test]
    fn decomposition_is_orthonormal() {
        for (m, n0) in [(5, 3), (6, 3), (6, 4), (10, 5), (32, 17)] {
            let sd = decompose(m, n0).unwrap();
            assert_eq!(sd.basis_z.len(), 2);
            assert_eq!(sd.basis_y.len(), m - 2);
            let all: Vec<_> = sd.basis_y.iter().chain(&sd.basis_z).collect();
            for (i, a) in all.iter().enumerate() {
                for (j, b) in all.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((a.dot(b) - want).abs() < 1e-12);
                }
            }
            let py = sd.projector_y();
            let pz = sd.projector_z();
            assert!((&py + &pz - DMatrix::identity(m, m)).norm() < 1e-12);
            assert!((&py * &pz).norm() < 1e-12);
            for y in &sd.basis_y {
                assert!(y.sum().abs() < 1e-12);
                assert!(y[n0 - 1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let sd = decompose(5, 3).unwrap();
        let e3 = PeriodicSequence::unit(5, 3).unwrap();
        let pz = sd.project_z(&e3);
        assert!(pz.distance(&e3) < 1e-15);

        let ones = PeriodicSequence::constant(5, 1.0).unwrap();
        assert!(sd.project_y(&ones).norm() < 1e-15);

        // P_Z e1 = (1/5)·1 + ⟨e1, z2⟩ z2 with z2 ∝ e3 − (1/5)·1, which gives
        // (1/4)(1, 1, 0, 1, 1) by hand.
        let e1 = PeriodicSequence::unit(5, 1).unwrap();
        let pz = sd.project_z(&e1);
        let want = [0.25, 0.25, 0.0, 0.25, 0.25];
        for (a, b) in pz.as_slice().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let py = sd.project_y(&e1);
        for (k, v) in py.as_slice().iter().enumerate() {
            assert!((v + pz.as_slice()[k] - e1.as_slice()[k]).abs() < 1e-15);
        }
        for z in &sd.basis_z {
            let zs = PeriodicSequence::new(z.as_slice().to_vec()).unwrap();
            assert!(py.dot(&zs).abs() < 1e-15);
        }
    }

    #[test]
    fn z_differences_have_the_twin_form() {
        for (m, n0) in [(5, 3), (7, 4), (12, 9)] {
            let sd = decompose(m, n0).unwrap();
            for z in &sd.basis_z {
                let d = forward_difference(&PeriodicSequence::new(z.as_slice().to_vec()).unwrap());
                for s in 1..=m {
                    if s != n0 - 1 && s != n0 {
                        assert!(d.at(s as i64).abs() < 1e-15);
                    }
                }
                assert!((d.at(n0 as i64 - 1) + d.at(n0 as i64)).abs() < 1e-15);
            }
        }
    }

    fn arb_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::sample::select(vec![5usize, 6, 10, 32])
            .prop_flat_map(|m| prop::collection::vec(-10.0f64..10.0, m))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn a_form_is_difference_energy(u in arb_vec()) {
            let a = build_a(u.len()).unwrap();
            let q = quadratic_form(&a, &u);
            let seq = PeriodicSequence::new(u).unwrap();
            let d = forward_difference(&seq);
            let energy: f64 = d.as_slice().iter().map(|v| v * v).sum();
            prop_assert!((q - energy).abs() <= 1e-12 * (1.0 + q));
        }

        #[test]
        fn l_form_identity(v in arb_vec()) {
            let m = v.len();
            let n0 = 3 + (m - 5) / 2;
            let (l, _) = build_l(m, n0).unwrap();
            let q = quadratic_form(&l, &v);
            let direct = v.iter().map(|x| x * x).sum::<f64>() + 2.0 * v[n0 - 2] * v[n0 - 1];
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            prop_assert!((q - direct).abs() <= 1e-12 * (1.0 + norm2));
        }
    }
}
