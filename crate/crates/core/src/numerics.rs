//! Dense complex-matrix workhorse: singular values, polar projection,
//! rank decisions and the Hermitian matrix exponential.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex matrix, row-major semantics throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

pub const C_ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const C_ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Tolerances shared by all certification routines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToleranceConfig {
    /// Frobenius tolerance on unitarity residuals.
    pub unitarity_tol: f64,
    /// Relative singular-value threshold separating rank from null space.
    pub rank_gap_tol: f64,
    /// Phase-clustering width for invariant counting.
    pub phase_cluster_tol: f64,
    /// Convergence target for iterative searches.
    pub convergence_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            unitarity_tol: 1e-10,
            rank_gap_tol: 1e-8,
            phase_cluster_tol: 1e-8,
            convergence_tol: 1e-12,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("unitarity_tol", self.unitarity_tol),
            ("rank_gap_tol", self.rank_gap_tol),
            ("phase_cluster_tol", self.phase_cluster_tol),
            ("convergence_tol", self.convergence_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Contract(format!(
                    "{name} must lie strictly between 0 and 1, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Checks that every entry is finite.
pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `‖M M† − c·I‖_F`, the distance of the Gram matrix of `M` from `c·I`.
pub fn gram_residual(m: &CMatrix, c: f64) -> f64 {
    let n = m.nrows();
    let mut g = m * m.adjoint();
    for i in 0..n {
        g[(i, i)] -= Complex64::new(c, 0.0);
    }
    g.norm()
}

/// Singular values of `M` in nonincreasing order.
///
/// Uses the direct bidiagonalization SVD; if it fails to converge on a
/// degenerate spectrum, falls back to the Hermitian eigendecomposition of
/// the Gram matrix.
pub fn svd_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Dimension("svd of an empty matrix".into()));
    }
    let mut sv: Vec<f64> = match m.clone().try_svd(false, false, f64::EPSILON, 10_000) {
        Some(svd) => svd.singular_values.iter().copied().collect(),
        None => {
            let gram = if m.nrows() >= m.ncols() {
                m.adjoint() * m
            } else {
                m * m.adjoint()
            };
            SymmetricEigen::new(gram)
                .eigenvalues
                .iter()
                .map(|l| l.max(0.0).sqrt())
                .collect()
        }
    };
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

/// Number of singular values exceeding `tol` relative to the largest one.
pub fn rank_from_singulars(sigmas: &[f64], tol: f64) -> usize {
    match sigmas.first() {
        None => 0,
        Some(&s0) if s0 <= 0.0 => 0,
        Some(&s0) => sigmas.iter().take_while(|&&s| s > tol * s0).count(),
    }
}

/// Nearest unitary to `M` in Frobenius norm, `W·V†` from the singular
/// decomposition `M = W·Σ·V†`.
pub fn polar_unitary(m: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "polar projection needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::Dimension("polar of an empty matrix".into()));
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= tol.rank_gap_tol * smax {
        return Err(Error::Singular(format!(
            "rank-deficient input to polar projection (sigma_min/sigma_max = {:.3e})",
            smin / smax
        )));
    }
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    Ok(u * vt)
}

/// `exp(i·H)` for Hermitian `H`, unitary by construction.
pub fn matrix_exponential_hermitian(h: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension(
            "matrix exponential needs a square matrix".into(),
        ));
    }
    let herm_dev = (h - h.adjoint()).norm();
    if herm_dev > tol.unitarity_tol * (1.0 + h.norm()) {
        return Err(Error::Contract(format!(
            "input is not Hermitian (‖H−H†‖ = {herm_dev:.3e})"
        )));
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let n = h.nrows();
    let mut diag = CMatrix::zeros(n, n);
    for i in 0..n {
        diag[(i, i)] = Complex64::new(0.0, eig.eigenvalues[i]).exp();
    }
    Ok(&eig.eigenvectors * diag * eig.eigenvectors.adjoint())
}

/// Singular values of a real matrix in nonincreasing order.
pub fn real_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = match a.clone().try_svd(false, false, f64::EPSILON, 10_000) {
        Some(svd) => svd.singular_values.iter().copied().collect(),
        None => {
            let gram = if a.nrows() >= a.ncols() {
                a.transpose() * a
            } else {
                a * a.transpose()
            };
            SymmetricEigen::new(gram)
                .eigenvalues
                .iter()
                .map(|l| l.max(0.0).sqrt())
                .collect()
        }
    };
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

#[cfg(test)]
pub(crate) fn random_complex(n: usize, seed: u64) -> CMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn svd_of_identity() {
        let sv = svd_values(&CMatrix::identity(4, 4)).unwrap();
        assert_eq!(sv.len(), 4);
        for s in sv {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn svd_of_flat_matrix() {
        let m = CMatrix::from_element(2, 2, C_ONE);
        let sv = svd_values(&m).unwrap();
        assert_abs_diff_eq!(sv[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sv[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn svd_rejects_empty() {
        assert!(matches!(
            svd_values(&CMatrix::zeros(0, 0)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn sum_of_squares_matches_frobenius() {
        let m = random_complex(7, 1);
        let sv = svd_values(&m).unwrap();
        let sum: f64 = sv.iter().map(|s| s * s).sum();
        assert_abs_diff_eq!(sum, m.norm_squared(), epsilon = 1e-10 * m.norm_squared());
    }

    #[test]
    fn svd_invariant_under_unitaries() {
        let tol = ToleranceConfig::default();
        let m = random_complex(6, 2);
        let u = polar_unitary(&random_complex(6, 3), &tol).unwrap();
        let v = polar_unitary(&random_complex(6, 4), &tol).unwrap();
        let s1 = svd_values(&m).unwrap();
        let s2 = svd_values(&(&u * &m * &v)).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn polar_fixes_unitaries() {
        let tol = ToleranceConfig::default();
        let u = polar_unitary(&random_complex(5, 5), &tol).unwrap();
        let u2 = polar_unitary(&u, &tol).unwrap();
        assert!((&u - &u2).norm() < 1e-12);
    }

    #[test]
    fn polar_strips_positive_scale() {
        let tol = ToleranceConfig::default();
        let m = CMatrix::identity(3, 3) * Complex64::new(2.0, 0.0);
        let u = polar_unitary(&m, &tol).unwrap();
        assert!((&u - CMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn polar_matches_gram_inverse_sqrt_route() {
        // independent route: U = M (M†M)^{-1/2} via the Hermitian eigendecomposition
        let tol = ToleranceConfig::default();
        let m = random_complex(5, 8);
        let u = polar_unitary(&m, &tol).unwrap();
        let eig = SymmetricEigen::new(m.adjoint() * &m);
        let mut inv_sqrt = CMatrix::zeros(5, 5);
        for i in 0..5 {
            inv_sqrt[(i, i)] = Complex64::new(1.0 / eig.eigenvalues[i].sqrt(), 0.0);
        }
        let alt = &m * &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
        assert!((u - alt).norm() < 1e-12);
    }

    #[test]
    fn polar_rejects_rank_deficient() {
        let tol = ToleranceConfig::default();
        let mut m = random_complex(4, 9);
        let row = m.row(0).into_owned();
        m.set_row(3, &row);
        assert!(matches!(polar_unitary(&m, &tol), Err(Error::Singular(_))));
    }

    #[test]
    fn rank_thresholds() {
        assert_eq!(rank_from_singulars(&[3.0, 2.0, 1e-14], 1e-8), 2);
        assert_eq!(rank_from_singulars(&[0.0, 0.0, 0.0], 1e-8), 0);
        assert_eq!(rank_from_singulars(&[], 1e-8), 0);
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let tol = ToleranceConfig::default();
        let e = matrix_exponential_hermitian(&CMatrix::zeros(3, 3), &tol).unwrap();
        assert!((e - CMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn expm_of_diagonal() {
        let tol = ToleranceConfig::default();
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = Complex64::new(std::f64::consts::PI, 0.0);
        let e = matrix_exponential_hermitian(&h, &tol).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[(1, 1)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn expm_output_is_unitary() {
        let tol = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = DMatrix::<f64>::from_fn(36, 36, |_, _| rng.gen::<f64>() - 0.5);
        let sym = (&g + g.transpose()) * 0.025; // eps = 0.05 overall
        let h = sym.map(|x| Complex64::new(x, 0.0));
        let e = matrix_exponential_hermitian(&h, &tol).unwrap();
        assert!(gram_residual(&e, 1.0) < 1e-12);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let tol = ToleranceConfig::default();
        let m = random_complex(3, 7);
        assert!(matches!(
            matrix_exponential_hermitian(&m, &tol),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn tolerance_validation() {
        assert!(ToleranceConfig::default().validate().is_ok());
        let bad = ToleranceConfig {
            unitarity_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
