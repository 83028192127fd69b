//! Restricted (Hermitian) defect of Gram matrices of symmetric quantum
//! measurements, POVM builders (prime-dimension unbiased bases, equiangular
//! frames, the qutrit symmetric POVM family) and the robustness bound.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::numerics::{
    rank_from_singulars, real_singular_values, CMatrix, ToleranceConfig, C_ONE,
};
use crate::{Error, Result};

/// `N` unit vectors in dimension `d`; inputs are normalized on ingest.
#[derive(Debug, Clone)]
pub struct PovmSet {
    pub d: usize,
    pub vectors: Vec<Vec<Complex64>>,
}

impl PovmSet {
    pub fn new(d: usize, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Degenerate("empty vector set".into()));
        }
        let mut out = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.into_iter().enumerate() {
            if v.len() != d {
                return Err(Error::Dimension(format!(
                    "vector {i} has length {}, expected {d}",
                    v.len()
                )));
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-14 {
                return Err(Error::Degenerate(format!("vector {i} is zero")));
            }
            out.push(v.into_iter().map(|z| z / norm).collect());
        }
        Ok(PovmSet { d, vectors: out })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Gram matrix of a vector family together with its source dimension.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub g: CMatrix,
    pub source_dim: usize,
}

/// Hermitian `N×N` Gram matrix with unit diagonal.
pub fn gram_from_vectors(p: &PovmSet) -> GramMatrix {
    let n = p.len();
    let g = CMatrix::from_fn(n, n, |i, j| {
        p.vectors[i]
            .iter()
            .zip(&p.vectors[j])
            .map(|(a, b)| a.conj() * b)
            .sum()
    });
    GramMatrix {
        g,
        source_dim: p.d,
    }
}

/// The rank-1 POVM condition `G² = (N/d)·G` within `1e-8·N`.
pub fn is_valid_povm_gram(g: &GramMatrix, n: usize, d: usize) -> bool {
    if g.g.nrows() != n || d == 0 {
        return false;
    }
    let lhs = &g.g * &g.g;
    let rhs = &g.g * Complex64::new(n as f64 / d as f64, 0.0);
    (lhs - rhs).norm() <= 1e-8 * n as f64
}

/// `U = I_N − (2d/N)·G`: Hermitian, unitary, constant diagonal `1 − 2d/N`.
pub fn gram_to_hermitian_unitary(g: &GramMatrix, n: usize, d: usize) -> Result<CMatrix> {
    if !is_valid_povm_gram(g, n, d) {
        return Err(Error::Contract(
            "not a valid rank-1 POVM Gram matrix (G² ≠ GN/d)".into(),
        ));
    }
    let mut u = &g.g * Complex64::new(-2.0 * d as f64 / n as f64, 0.0);
    for i in 0..n {
        u[(i, i)] += C_ONE;
    }
    Ok(u)
}

/// The quadruple (τ, f, z, r) and the defect `Δ = τ − f − z − r`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RestrictedDefectReport {
    /// Upper-triangle pair count of the unitary's order.
    pub tau: usize,
    /// Dephasing freedoms, `order − 1`.
    pub f: usize,
    /// Zeros strictly above the diagonal.
    pub z: usize,
    /// Rank of the assembled perturbation system.
    pub r: usize,
    pub delta: i64,
    /// Smallest singular value counted into the rank.
    pub smallest_kept_sv: f64,
    /// Largest singular value below the rank threshold (0 if none).
    pub largest_dropped_sv: f64,
    /// Largest singular value of the system.
    pub sigma_max: f64,
}

/// Builds the first-order perturbation system of a Hermitian unitary with
/// constant diagonal: for each pair `j<k`,
/// `−2c·U_kj·R_jk + Σ_{l≠j,k} U_kl·U_lj·(R_kl − R_jl) = 0`
/// over the τ real upper-triangle variables of the antisymmetric `R`
/// (reversed indices substituted via `R_ab = −R_ba`), two real rows per
/// complex equation.
pub fn restricted_system(u: &CMatrix) -> DMatrix<f64> {
    let n = u.nrows();
    let c = u[(0, 0)].re;
    let tau = n * (n - 1) / 2;
    // index of the (a, b) upper-triangle variable with its antisymmetry sign
    let vidx = |a: usize, b: usize| -> (usize, f64) {
        if a < b {
            (a * (2 * n - a - 1) / 2 + (b - a - 1), 1.0)
        } else {
            (b * (2 * n - b - 1) / 2 + (a - b - 1), -1.0)
        }
    };
    let mut sys = DMatrix::<f64>::zeros(2 * tau, tau);
    let mut row = 0;
    for j in 0..n {
        for k in (j + 1)..n {
            let mut coef = vec![Complex64::new(0.0, 0.0); tau];
            let (i0, s0) = vidx(j, k);
            coef[i0] += Complex64::new(-2.0 * c * s0, 0.0) * u[(k, j)];
            for l in 0..n {
                if l == j || l == k {
                    continue;
                }
                let w = u[(k, l)] * u[(l, j)];
                let (i1, s1) = vidx(k, l);
                coef[i1] += w * s1;
                let (i2, s2) = vidx(j, l);
                coef[i2] -= w * s2;
            }
            for (col, w) in coef.iter().enumerate() {
                sys[(row, col)] = w.re;
                sys[(row + 1, col)] = w.im;
            }
            row += 2;
        }
    }
    sys
}

/// Restricted defect of a Hermitian matrix with constant diagonal that is
/// unitary up to a positive scale.
pub fn restricted_defect(u: &CMatrix, tol: &ToleranceConfig) -> Result<RestrictedDefectReport> {
    let n = u.nrows();
    if n != u.ncols() || n < 2 {
        return Err(Error::Dimension("restricted defect needs a square matrix of order ≥ 2".into()));
    }
    let scale = u.norm_squared() / n as f64; // row norm²; U² = scale·I for Hermitian unitary-up-to-scale
    let herm = (u - u.adjoint()).norm();
    if herm > tol.unitarity_tol * (1.0 + u.norm()) {
        return Err(Error::Contract(format!(
            "restricted defect needs a Hermitian input (‖U−U†‖ = {herm:.3e})"
        )));
    }
    let mut sq = u * u;
    for i in 0..n {
        sq[(i, i)] -= Complex64::new(scale, 0.0);
    }
    if sq.norm() > tol.unitarity_tol.max(1e-8) * scale * n as f64 {
        return Err(Error::Contract(
            "restricted defect needs a unitary-up-to-scale input".into(),
        ));
    }
    let diag0 = u[(0, 0)];
    for i in 0..n {
        if (u[(i, i)] - diag0).norm() > tol.unitarity_tol.max(1e-8) * (1.0 + diag0.norm()) {
            return Err(Error::Contract("diagonal is not constant".into()));
        }
    }
    let tau = n * (n - 1) / 2;
    let f = n - 1;
    let max_mod = u.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let mut z = 0usize;
    for j in 0..n {
        for k in (j + 1)..n {
            if u[(j, k)].norm() < tol.rank_gap_tol * max_mod {
                z += 1;
            }
        }
    }
    let sys = restricted_system(u);
    let sv = real_singular_values(&sys);
    let r = rank_from_singulars(&sv, tol.rank_gap_tol);
    Ok(RestrictedDefectReport {
        tau,
        f,
        z,
        r,
        delta: tau as i64 - f as i64 - z as i64 - r as i64,
        smallest_kept_sv: if r > 0 { sv[r - 1] } else { 0.0 },
        largest_dropped_sv: if r < sv.len() { sv[r] } else { 0.0 },
        sigma_max: sv.first().copied().unwrap_or(0.0),
    })
}

/// Restricted defect of the Gram-derived unitary of a vector set.
pub fn restricted_defect_of_set(
    p: &PovmSet,
    tol: &ToleranceConfig,
) -> Result<RestrictedDefectReport> {
    let g = gram_from_vectors(p);
    let u = gram_to_hermitian_unitary(&g, p.len(), p.d)?;
    restricted_defect(&u, tol)
}

/// The `p+1` pairwise unbiased bases of a prime dimension, each returned as
/// the column matrix of one orthonormal basis. Odd primes use the quadratic
/// exponent construction; `p = 2` uses the three Pauli eigenbases.
pub fn mub_prime(p: usize) -> Result<Vec<CMatrix>> {
    if p < 2 || (2..p).any(|q| p % q == 0) {
        return Err(Error::Unsupported(format!("{p} is not prime")));
    }
    if p == 2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b0 = CMatrix::identity(2, 2);
        let b1 = CMatrix::from_row_slice(2, 2, &[
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
        ]);
        let b2 = CMatrix::from_row_slice(2, 2, &[
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(0.0, s),
            Complex64::new(0.0, -s),
        ]);
        return Ok(vec![b0, b1, b2]);
    }
    let mut bases = vec![CMatrix::identity(p, p)];
    let scale = 1.0 / (p as f64).sqrt();
    for r in 0..p {
        bases.push(CMatrix::from_fn(p, p, |j, s| {
            let e = (r * j * j + s * j) % p;
            Complex64::from_polar(scale, TAU * e as f64 / p as f64)
        }));
    }
    Ok(bases)
}

/// Vector set of the first `m` unbiased bases in prime dimension `p`.
pub fn mub_prime_subset(p: usize, m: usize) -> Result<PovmSet> {
    let bases = mub_prime(p)?;
    if m < 2 || m > bases.len() {
        return Err(Error::Contract(format!(
            "subset size must lie in [2, {}], got {m}",
            bases.len()
        )));
    }
    let mut vectors = Vec::with_capacity(m * p);
    for b in bases.iter().take(m) {
        for s in 0..p {
            vectors.push((0..p).map(|j| b[(j, s)]).collect());
        }
    }
    PovmSet::new(p, vectors)
}

/// Hermitian Fourier matrix of order `N = k²`:
/// `[F]_ab = exp{(2πi/k)·(mod(a,k)·⌊b/k⌋ − mod(b,k)·⌊a/k⌋)}`.
pub fn etf_hermitian_fourier(k: usize) -> Result<CMatrix> {
    if k < 2 {
        return Err(Error::Dimension("need k ≥ 2".into()));
    }
    let n = k * k;
    Ok(CMatrix::from_fn(n, n, |a, b| {
        let e = (a % k) as i64 * (b / k) as i64 - (b % k) as i64 * (a / k) as i64;
        Complex64::from_polar(1.0, TAU * e as f64 / k as f64)
    }))
}

/// The nine-vector Weyl-Heisenberg orbit of the qutrit fiducial family
/// `φ(γ) = (1, e^{iγ}, 0)/√2`.
pub fn sic_d3(gamma: f64) -> PovmSet {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi = [
        Complex64::new(s, 0.0),
        Complex64::from_polar(s, gamma),
        Complex64::new(0.0, 0.0),
    ];
    let w = |e: usize| Complex64::from_polar(1.0, TAU * (e % 3) as f64 / 3.0);
    let mut vectors = Vec::with_capacity(9);
    for a in 0..3usize {
        for b in 0..3usize {
            // X^a Z^b phi: (Z^b phi)_j = w^{bj} phi_j ; (X^a v)_j = v_{j-a mod 3}
            let v: Vec<Complex64> = (0..3)
                .map(|j| {
                    let src = (j + 3 - a) % 3;
                    w(b * src) * phi[src]
                })
                .collect();
            vectors.push(v);
        }
    }
    PovmSet::new(3, vectors).expect("fiducial orbit is never degenerate")
}

/// Parses the vector-set JSON schema into a normalized set.
pub fn dataset_load(path: &std::path::Path) -> Result<PovmSet> {
    let text = std::fs::read_to_string(path)?;
    let (d, vectors) = crate::io::vectors_from_json(&text)?;
    PovmSet::new(d, vectors)
}

/// Perturbation bound for the two smallest singular values of the assembled
/// system, and the resulting confidence scale for the defect.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ConfidenceBound {
    pub sigma1: f64,
    /// Right side of the perturbation bound evaluated at `s = 1`.
    pub f_dn: f64,
    /// Perturbation bound at the given inaccuracy factor `s`.
    pub bound: f64,
    /// Largest inaccuracy factor keeping the rank decision valid.
    pub s_max: f64,
}

/// `|σ′ − σ| ≤ (64·s·d²/N)(1 − 2d/N)²·√((N−d)/(N(N−1)))` and
/// `s_max = σ₁ / (2·f(d,N))`.
pub fn robustness_bound(d: usize, n: usize, sigma1: f64, s: f64) -> Result<ConfidenceBound> {
    if n <= 2 * d {
        return Err(Error::Contract(format!(
            "robustness bound needs N > 2d, got N = {n}, d = {d}"
        )));
    }
    if s < 0.0 || sigma1 <= 0.0 {
        return Err(Error::Contract("need s ≥ 0 and sigma1 > 0".into()));
    }
    let (df, nf) = (d as f64, n as f64);
    let f_dn = 64.0 * df * df / nf
        * (1.0 - 2.0 * df / nf).powi(2)
        * ((nf - df) / (nf * (nf - 1.0))).sqrt();
    Ok(ConfidenceBound {
        sigma1,
        f_dn,
        bound: s * f_dn,
        s_max: sigma1 / (2.0 * f_dn),
    })
}
