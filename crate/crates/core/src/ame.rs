//! Bipartite-matrix realignment algebra, entanglement functionals, the
//! isoentropic projection, a polar-projection dynamical map, the orthogonal
//! P/Q/V/W ladder of order 36 and the golden AME(4,6) matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{polar_unitary, CMatrix, ToleranceConfig, C_ONE, C_ZERO};
use crate::{Error, Result};

/// A square matrix of order `d²` carrying its local dimension `d`.
#[derive(Debug, Clone)]
pub struct BipartiteMatrix {
    pub d: usize,
    pub m: CMatrix,
}

impl BipartiteMatrix {
    pub fn new(d: usize, m: CMatrix) -> Result<Self> {
        if d < 1 || m.nrows() != d * d || m.ncols() != d * d {
            return Err(Error::Dimension(format!(
                "bipartite matrix must have order d² = {}, got {}x{}",
                d * d,
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(BipartiteMatrix { d, m })
    }

    /// Infers `d` from the matrix order, which must be a perfect square.
    pub fn from_square(m: CMatrix) -> Result<Self> {
        let n = m.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::Dimension(format!(
                "order {n} is not a perfect square"
            )));
        }
        BipartiteMatrix::new(d, m)
    }
}

/// The three realignments of a bipartite matrix; all are involutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realignment {
    /// Reshuffling: `U_{jklm} → U_{jlkm}` (blocks become rows).
    R,
    /// Partial transpose: `U_{jklm} → U_{jmlk}`.
    Gamma,
    /// Full transpose.
    T,
}

/// Applies the index permutation of the chosen realignment.
pub fn realign(b: &BipartiteMatrix, kind: Realignment) -> BipartiteMatrix {
    let d = b.d;
    let m = match kind {
        Realignment::T => b.m.transpose(),
        Realignment::R => realign_r(&b.m, d),
        Realignment::Gamma => realign_g(&b.m, d),
    };
    BipartiteMatrix { d, m }
}

fn realign_r(m: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |a, c| {
        m[((a / d) * d + c / d, (a % d) * d + c % d)]
    })
}

fn realign_g(m: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |a, c| {
        m[((a / d) * d + c % d, (c / d) * d + a % d)]
    })
}

/// Linear entropy of the singular-value distribution,
/// `E(M) = d²/(d²−1) · (1 − Tr((MM†)²)/Tr²(MM†))`, in `[0, 1]`.
pub fn linear_entropy(b: &BipartiteMatrix) -> Result<f64> {
    let dd = (b.d * b.d) as f64;
    let t1 = b.m.norm_squared(); // Tr(MM†)
    if t1 == 0.0 {
        return Err(Error::Degenerate("linear entropy of the zero matrix".into()));
    }
    let g = &b.m * b.m.adjoint();
    let t2 = g.norm_squared(); // Tr((MM†)²) for Hermitian Gram
    Ok(dd / (dd - 1.0) * (1.0 - t2 / (t1 * t1)))
}

/// The swap operator `S|jk⟩ = |kj⟩` of order `d²`.
pub fn swap(d: usize) -> BipartiteMatrix {
    let m = CMatrix::from_fn(d * d, d * d, |a, c| {
        if a / d == c % d && a % d == c / d {
            C_ONE
        } else {
            C_ZERO
        }
    });
    BipartiteMatrix { d, m }
}

/// Entangling power and gate typicality of one matrix.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EpGtPoint {
    pub e_p: f64,
    pub g_t: f64,
}

/// `e_p(U) = E(U^R) + E((US)^R) − 1` and `g_t(U) = E(U^R) − E((US)^R) + 1`.
pub fn ep_gt(b: &BipartiteMatrix) -> Result<EpGtPoint> {
    let d = b.d;
    let s = swap(d);
    let er = linear_entropy(&BipartiteMatrix {
        d,
        m: realign_r(&b.m, d),
    })?;
    let us = &b.m * &s.m;
    let es = linear_entropy(&BipartiteMatrix {
        d,
        m: realign_r(&us, d),
    })?;
    Ok(EpGtPoint {
        e_p: er + es - 1.0,
        g_t: er - es + 1.0,
    })
}

pub fn entangling_power(b: &BipartiteMatrix) -> Result<f64> {
    Ok(ep_gt(b)?.e_p)
}

pub fn gate_typicality(b: &BipartiteMatrix) -> Result<f64> {
    Ok(ep_gt(b)?.g_t)
}

/// True iff `B`, `B^R` and `B^Γ` are each unitary within `tol.unitarity_tol`.
pub fn is_two_unitary(b: &BipartiteMatrix, tol: &ToleranceConfig) -> bool {
    let check = |m: &CMatrix| crate::numerics::gram_residual(m, 1.0) <= tol.unitarity_tol;
    check(&b.m) && check(&realign_r(&b.m, b.d)) && check(&realign_g(&b.m, b.d))
}

/// Permutation matrix from its vectorized one-based form: row `j` carries a
/// unity in column `vec[j]`.
pub fn permutation_from_vector(vec: &[usize]) -> Result<CMatrix> {
    let n = vec.len();
    let mut seen = vec![false; n];
    for &c in vec {
        if c < 1 || c > n || seen[c - 1] {
            return Err(Error::Contract(format!("not a permutation vector: {vec:?}")));
        }
        seen[c - 1] = true;
    }
    let mut m = CMatrix::zeros(n, n);
    for (j, &c) in vec.iter().enumerate() {
        m[(j, c - 1)] = C_ONE;
    }
    Ok(m)
}

/// The order-36 permutation maximizing entangling power among permutations,
/// encoded by two superimposed nearly-orthogonal Latin squares.
pub const P36_VECTOR: [usize; 36] = [
    1, 15, 8, 29, 36, 22, 16, 2, 30, 7, 21, 35, 23, 31, 3, 18, 10, 26, 32, 24, 17, 4, 25, 9, 12,
    28, 33, 20, 5, 13, 27, 11, 19, 34, 14, 6,
];

pub fn permutation_p36() -> BipartiteMatrix {
    BipartiteMatrix {
        d: 6,
        m: permutation_from_vector(&P36_VECTOR).expect("fixed permutation"),
    }
}

/// The 2-unitary permutation of order 9 behind the four-qutrit AME state.
pub fn ame43() -> BipartiteMatrix {
    BipartiteMatrix {
        d: 3,
        m: permutation_from_vector(&[3, 7, 5, 4, 2, 9, 8, 6, 1]).expect("fixed permutation"),
    }
}

fn rot_vec(w: f64) -> Vec<Vec<f64>> {
    vec![vec![w.cos(), -w.sin()], vec![w.sin(), w.cos()]]
}

fn eye_vec(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn block_diag_real(blocks: &[Vec<Vec<f64>>]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut m = CMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(off + i, off + j)] = Complex64::new(v, 0.0);
            }
        }
        off += b.len();
    }
    m
}

/// `Q(ω₁, ω₂)`: the template `I₂ ⊕ R(ω₁) ⊕ I₂₈ ⊕ R(ω₂) ⊕ I₂` applied to the
/// distinguished permutation; `Q(0, 0)` is the permutation itself.
pub fn build_q(w1: f64, w2: f64) -> BipartiteMatrix {
    let q0 = block_diag_real(&[eye_vec(2), rot_vec(w1), eye_vec(28), rot_vec(w2), eye_vec(2)]);
    BipartiteMatrix {
        d: 6,
        m: permutation_p36().m * q0,
    }
}

/// `V(ω)`: eighteen 2×2 rotations applied to the distinguished permutation.
pub fn build_v(w: &[f64]) -> Result<BipartiteMatrix> {
    if w.len() != 18 {
        return Err(Error::Dimension(format!("V needs 18 phases, got {}", w.len())));
    }
    let blocks: Vec<Vec<Vec<f64>>> = w.iter().map(|&x| rot_vec(x)).collect();
    Ok(BipartiteMatrix {
        d: 6,
        m: permutation_p36().m * block_diag_real(&blocks),
    })
}

/// `W(ω)`: six `I₂ ⊕ R(ω_j) ⊕ I₂` bands applied to the distinguished
/// permutation; the five-degree-of-freedom reduction of `V`.
pub fn build_w(w: &[f64]) -> Result<BipartiteMatrix> {
    if w.len() != 6 {
        return Err(Error::Dimension(format!("W needs 6 phases, got {}", w.len())));
    }
    let mut blocks = Vec::with_capacity(18);
    for &x in w {
        blocks.push(eye_vec(2));
        blocks.push(rot_vec(x));
        blocks.push(eye_vec(2));
    }
    Ok(BipartiteMatrix {
        d: 6,
        m: permutation_p36().m * block_diag_real(&blocks),
    })
}

/// Phases at which `W` reaches the best known orthogonal entangling power
/// `(208+√3)/210`.
pub fn w_star_phases() -> [f64; 6] {
    [
        PI * 5.0 / 6.0,
        PI * 23.0 / 12.0,
        PI / 12.0,
        0.0,
        PI * 7.0 / 6.0,
        PI * 5.0 / 4.0,
    ]
}

/// Phases at which `V` reaches the same optimum.
pub fn v_star_phases() -> [f64; 18] {
    [
        1.0 / 5.0,
        5.0 / 6.0,
        1.0 / 4.0,
        6.0 / 5.0,
        3.0 / 4.0,
        1.0 / 4.0,
        6.0 / 5.0,
        7.0 / 12.0,
        5.0 / 4.0,
        6.0 / 5.0,
        5.0 / 3.0,
        5.0 / 4.0,
        6.0 / 5.0,
        3.0 / 2.0,
        5.0 / 4.0,
        6.0 / 5.0,
        17.0 / 12.0,
        5.0 / 4.0,
    ]
    .map(|x| x * PI)
}

/// Idempotent projection onto the isoentropic set:
/// `Ξ(X) = (X + X^{RΓ} + X^{ΓR}) / 3`.
pub fn iso_map(b: &BipartiteMatrix) -> BipartiteMatrix {
    let d = b.d;
    let xr = realign_r(&b.m, d);
    let xg = realign_g(&b.m, d);
    let y = (&b.m + realign_g(&xr, d) + realign_r(&xg, d)) / Complex64::new(3.0, 0.0);
    BipartiteMatrix { d, m: y }
}

/// Sample mean and standard deviation of `E(Ξ(X))` over real Gaussian `X`.
pub fn iso_random_stats(d: usize, n_samples: usize, rng_seed: u64) -> Result<(f64, f64)> {
    if d < 2 {
        return Err(Error::Dimension("need local dimension at least 2".into()));
    }
    if n_samples == 0 {
        return Err(Error::Dimension("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut values = Vec::with_capacity(n_samples);
    let n = d * d;
    for _ in 0..n_samples {
        let x = CMatrix::from_fn(n, n, |_, _| Complex64::new(standard_normal(&mut rng), 0.0));
        let y = iso_map(&BipartiteMatrix { d, m: x });
        values.push(linear_entropy(&y)?);
    }
    let mean = values.iter().sum::<f64>() / n_samples as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_samples as f64;
    Ok((mean, var.sqrt()))
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Haar-random unitary of order `n` via the polar projection of a complex
/// Gaussian matrix.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    });
    polar_unitary(&g, &ToleranceConfig::default()).expect("Gaussian matrices are full rank")
}

/// `(e_p, g_t)` samples over Haar-random unitaries of order `d²`.
pub fn ep_gt_sample(d: usize, n: usize, rng_seed: u64) -> Result<Vec<EpGtPoint>> {
    if n == 0 {
        return Err(Error::Dimension("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u = haar_unitary(d * d, &mut rng);
        out.push(ep_gt(&BipartiteMatrix { d, m: u })?);
    }
    Ok(out)
}

/// Unitary seed `P·exp(i·(ε/2)(G+Gᵀ))` built from a permutation disturbed
/// in a random complex direction.
pub fn seed_m0(p: &BipartiteMatrix, eps: f64, rng_seed: u64) -> Result<BipartiteMatrix> {
    if eps < 0.0 {
        return Err(Error::Contract("eps must be nonnegative".into()));
    }
    let n = p.m.nrows();
    let entries_ok = p
        .m
        .iter()
        .all(|z| z.norm() < 1e-12 || (z - C_ONE).norm() < 1e-12);
    let lines_ok = (0..n).all(|i| {
        (0..n).filter(|&j| (p.m[(i, j)] - C_ONE).norm() < 1e-12).count() == 1
            && (0..n).filter(|&j| (p.m[(j, i)] - C_ONE).norm() < 1e-12).count() == 1
    });
    if !(entries_ok && lines_ok) {
        return Err(Error::Contract("seed base must be a permutation matrix".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| standard_normal(&mut rng));
    let sym = (&g + g.transpose()) * (eps / 2.0);
    let h = sym.map(|x| Complex64::new(x, 0.0));
    let e = crate::numerics::matrix_exponential_hermitian(&h, &ToleranceConfig::default())?;
    Ok(BipartiteMatrix {
        d: p.d,
        m: &p.m * e,
    })
}

/// Where a dynamical-map run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapOutcome {
    /// Reached a 2-unitary matrix.
    TwoUnitary,
    /// Stagnated on the attractor line at the Q-star entangling power.
    AttractorQ,
    /// Iteration budget exhausted.
    Exhausted,
}

/// Record of one dynamical-map run.
#[derive(Debug, Clone)]
pub struct MapRunRecord {
    pub iterations: usize,
    pub trajectory: Vec<EpGtPoint>,
    pub outcome: MapOutcome,
    pub final_matrix: BipartiteMatrix,
}

pub const Q_STAR_EP: f64 = 419.0 / 420.0;

/// Iterates `M ← π(M^{RΓ})`, the polar projection of the double realignment,
/// recording `(e_p, g_t)` every iteration.
///
/// Stops when `|1 − e_p| ≤ tol.convergence_tol` and the iterate passes the
/// 2-unitarity check; detects stagnation on the Q-star vertical line as
/// fifty consecutive iterations with `|e_p − 419/420| < 1e-6`.
pub fn dynamical_map_run(
    m0: &BipartiteMatrix,
    max_iters: usize,
    tol: &ToleranceConfig,
) -> Result<MapRunRecord> {
    let d = m0.d;
    if crate::numerics::gram_residual(&m0.m, 1.0) > 1e-6 {
        return Err(Error::Contract("dynamical map needs a unitary seed".into()));
    }
    let mut m = m0.m.clone();
    let mut trajectory = Vec::new();
    let start = ep_gt(m0)?;
    trajectory.push(start);
    if (1.0 - start.e_p).abs() <= tol.convergence_tol && is_two_unitary(m0, tol) {
        return Ok(MapRunRecord {
            iterations: 0,
            trajectory,
            outcome: MapOutcome::TwoUnitary,
            final_matrix: m0.clone(),
        });
    }
    let mut near_qstar = 0usize;
    for it in 1..=max_iters {
        let rg = realign_g(&realign_r(&m, d), d);
        m = polar_unitary(&rg, tol)?;
        let pt = ep_gt(&BipartiteMatrix { d, m: m.clone() })?;
        trajectory.push(pt);
        if (1.0 - pt.e_p).abs() <= tol.convergence_tol {
            let b = BipartiteMatrix { d, m: m.clone() };
            if is_two_unitary(&b, tol) {
                return Ok(MapRunRecord {
                    iterations: it,
                    trajectory,
                    outcome: MapOutcome::TwoUnitary,
                    final_matrix: b,
                });
            }
        }
        if (pt.e_p - Q_STAR_EP).abs() < 1e-6 {
            near_qstar += 1;
            if near_qstar >= 50 {
                return Ok(MapRunRecord {
                    iterations: it,
                    trajectory,
                    outcome: MapOutcome::AttractorQ,
                    final_matrix: BipartiteMatrix { d, m },
                });
            }
        } else {
            near_qstar = 0;
        }
    }
    Ok(MapRunRecord {
        iterations: max_iters,
        trajectory,
        outcome: MapOutcome::Exhausted,
        final_matrix: BipartiteMatrix { d, m },
    })
}

// Golden AME(4,6) blocks: entries are coefficient letters a, b, c times a
// power of ω = exp(iπ/10); (letter, power) with letters 0,1,2 ↦ a,b,c.
type BlockSpec = [[Option<(u8, u8)>; 12]; 12];

const N_: Option<(u8, u8)> = None;
const fn a_(p: u8) -> Option<(u8, u8)> {
    Some((0, p))
}
const fn b_(p: u8) -> Option<(u8, u8)> {
    Some((1, p))
}
const fn c_(p: u8) -> Option<(u8, u8)> {
    Some((2, p))
}

const GOLDEN_B1: BlockSpec = [
    [N_, N_, c_(19), N_, N_, N_, b_(18), N_, N_, N_, N_, a_(6)],
    [N_, c_(9), N_, N_, N_, N_, N_, a_(3), b_(0), N_, N_, N_],
    [N_, N_, N_, c_(7), c_(15), N_, N_, N_, N_, b_(13), b_(14), N_],
    [N_, N_, N_, b_(2), b_(14), N_, N_, N_, N_, c_(2), c_(19), N_],
    [N_, b_(5), N_, N_, N_, a_(19), N_, N_, c_(6), N_, N_, N_],
    [a_(19), N_, b_(17), N_, N_, N_, c_(6), N_, N_, N_, N_, N_],
    [a_(0), N_, b_(8), N_, N_, N_, c_(17), N_, N_, N_, N_, N_],
    [N_, b_(6), N_, N_, N_, a_(10), N_, N_, c_(7), N_, N_, N_],
    [N_, N_, N_, b_(16), b_(12), N_, N_, N_, N_, c_(12), c_(1), N_],
    [N_, N_, N_, c_(1), c_(1), N_, N_, N_, N_, b_(11), b_(16), N_],
    [N_, c_(12), N_, N_, N_, N_, N_, a_(16), b_(3), N_, N_, N_],
    [N_, N_, c_(16), N_, N_, N_, b_(15), N_, N_, N_, N_, a_(13)],
];

const GOLDEN_B2: BlockSpec = [
    [N_, N_, b_(0), N_, N_, N_, N_, a_(13), c_(16), N_, N_, N_],
    [b_(18), N_, N_, N_, c_(1), a_(14), N_, N_, N_, N_, N_, N_],
    [N_, N_, N_, a_(15), N_, N_, N_, N_, N_, b_(1), N_, c_(3)],
    [N_, N_, N_, N_, N_, N_, a_(18), N_, N_, c_(2), N_, b_(14)],
    [c_(8), a_(14), N_, N_, b_(1), N_, N_, N_, N_, N_, N_, N_],
    [N_, N_, c_(0), N_, N_, N_, N_, N_, b_(6), N_, a_(0), N_],
    [N_, N_, c_(11), N_, N_, N_, N_, N_, b_(17), N_, a_(1), N_],
    [c_(1), a_(17), N_, N_, b_(14), N_, N_, N_, N_, N_, N_, N_],
    [N_, N_, N_, N_, N_, N_, a_(6), N_, N_, c_(0), N_, b_(12)],
    [N_, N_, N_, a_(15), N_, N_, N_, N_, N_, b_(11), N_, c_(13)],
    [b_(1), N_, N_, N_, c_(4), a_(7), N_, N_, N_, N_, N_, N_],
    [N_, N_, b_(1), N_, N_, N_, N_, a_(4), c_(17), N_, N_, N_],
];

const GOLDEN_B3: BlockSpec = [
    [b_(4), N_, N_, N_, N_, N_, a_(8), N_, N_, c_(14), N_, N_],
    [N_, N_, a_(14), N_, N_, N_, N_, b_(6), N_, N_, N_, c_(17)],
    [N_, b_(6), N_, N_, c_(16), N_, N_, N_, a_(0), N_, N_, N_],
    [N_, c_(19), N_, N_, b_(19), N_, N_, N_, N_, N_, a_(15), N_],
    [N_, N_, N_, N_, N_, a_(1), N_, c_(8), N_, N_, N_, b_(9)],
    [c_(0), N_, N_, a_(14), N_, N_, N_, N_, N_, b_(0), N_, N_],
    [c_(2), N_, N_, a_(6), N_, N_, N_, N_, N_, b_(2), N_, N_],
    [N_, N_, N_, N_, N_, a_(19), N_, c_(16), N_, N_, N_, b_(17)],
    [N_, c_(12), N_, N_, b_(12), N_, N_, N_, N_, N_, a_(18), N_],
    [N_, b_(15), N_, N_, c_(5), N_, N_, N_, a_(19), N_, N_, N_],
    [N_, N_, a_(6), N_, N_, N_, N_, b_(8), N_, N_, N_, c_(19)],
    [b_(8), N_, N_, N_, N_, N_, a_(2), N_, N_, c_(18), N_, N_],
];

/// Golden-ratio coefficients of the AME(4,6) matrix:
/// `a = 1/√2`, `b = a/(ω+ω*)`, `c = a/(ω³+ω*³)` with `ω = exp(iπ/10)`,
/// satisfying `a² = 1/2 = b² + c²` and `c/b = (1+√5)/2`.
pub fn golden_coefficients() -> (f64, f64, f64) {
    let a = 1.0 / 2.0f64.sqrt();
    let b = 1.0 / (5.0 + 5.0f64.sqrt()).sqrt();
    let c = (5.0 + 5.0f64.sqrt()).sqrt() / (2.0 * 5.0f64.sqrt());
    (a, b, c)
}

fn golden_block(spec: &BlockSpec) -> CMatrix {
    let (a, b, c) = golden_coefficients();
    let coeff = [a, b, c];
    CMatrix::from_fn(12, 12, |i, j| match spec[i][j] {
        None => C_ZERO,
        Some((letter, power)) => {
            Complex64::from_polar(coeff[letter as usize], PI / 10.0 * power as f64)
        }
    })
}

/// The exact golden AME(4,6) matrix `A = (B₁ ⊕ B₂ ⊕ B₃)·Pᵀ`, a 2-unitary
/// matrix of order 36 with 112 nonzero entries.
pub fn golden_ame() -> BipartiteMatrix {
    let mut bd = CMatrix::zeros(36, 36);
    for (off, spec) in [(0usize, &GOLDEN_B1), (12, &GOLDEN_B2), (24, &GOLDEN_B3)] {
        let blk = golden_block(spec);
        for i in 0..12 {
            for j in 0..12 {
                bd[(off + i, off + j)] = blk[(i, j)];
            }
        }
    }
    BipartiteMatrix {
        d: 6,
        m: bd * permutation_p36().m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn random_bipartite(d: usize, seed: u64) -> BipartiteMatrix {
        BipartiteMatrix {
            d,
            m: crate::numerics::random_complex(d * d, seed),
        }
    }

    #[test]
    fn realignments_are_involutions() {
        for d in [2usize, 3] {
            let b = random_bipartite(d, 40 + d as u64);
            for kind in [Realignment::R, Realignment::Gamma, Realignment::T] {
                let twice = realign(&realign(&b, kind), kind);
                assert!((&twice.m - &b.m).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rgr_equals_grg() {
        for d in [2usize, 3] {
            let b = random_bipartite(d, 50 + d as u64);
            let rgr = realign(
                &realign(&realign(&b, Realignment::R), Realignment::Gamma),
                Realignment::R,
            );
            let grg = realign(
                &realign(&realign(&b, Realignment::Gamma), Realignment::R),
                Realignment::Gamma,
            );
            assert!((rgr.m - grg.m).norm() < 1e-15);
        }
    }

    #[test]
    fn reshuffle_moves_blocks_to_rows() {
        // the 4x4 schematic: rows of the reshuffled matrix are the four
        // 2x2 blocks of the original, flattened
        let m = CMatrix::from_fn(4, 4, |i, j| Complex64::new((i * 4 + j) as f64, 0.0));
        let r = realign(&BipartiteMatrix { d: 2, m: m.clone() }, Realignment::R);
        for (bi, bj) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
            let row = bi * 2 + bj;
            for (t, (i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
                assert_eq!(r.m[(row, t)], m[(2 * bi + i, 2 * bj + j)]);
            }
        }
    }

    #[test]
    fn swap_squares_to_identity() {
        let s = swap(3);
        assert!((&s.m * &s.m - CMatrix::identity(9, 9)).norm() < 1e-15);
    }

    #[test]
    fn swap_extreme_point() {
        let s = swap(2);
        let pt = ep_gt(&s).unwrap();
        assert_abs_diff_eq!(pt.e_p, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.g_t, 2.0, epsilon = 1e-12);
        let sg = realign(&s, Realignment::Gamma);
        assert_abs_diff_eq!(linear_entropy(&sg).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn unitary_entropy_is_one() {
        let u = haar_unitary(9, &mut ChaCha8Rng::seed_from_u64(3));
        let e = linear_entropy(&BipartiteMatrix { d: 3, m: u }).unwrap();
        assert_abs_diff_eq!(e, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_matrix_entropy_is_zero() {
        let j = CMatrix::from_element(4, 4, C_ONE);
        let e = linear_entropy(&BipartiteMatrix { d: 2, m: j }).unwrap();
        assert_abs_diff_eq!(e, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert!(matches!(
            linear_entropy(&BipartiteMatrix {
                d: 2,
                m: CMatrix::zeros(4, 4)
            }),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn p36_signature() {
        let p = permutation_p36();
        let pt = ep_gt(&p).unwrap();
        assert_abs_diff_eq!(pt.e_p, 314.0 / 315.0, epsilon = 1e-13);
        let pg = realign(&p, Realignment::Gamma);
        // the partial transpose is a permutation too
        assert!(pg
            .m
            .iter()
            .all(|z| z.norm() < 1e-12 || (z - C_ONE).norm() < 1e-12));
    }

    #[test]
    fn ame43_is_two_unitary() {
        let t = ame43();
        let pt = ep_gt(&t).unwrap();
        assert_abs_diff_eq!(pt.e_p, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.g_t, 1.0, epsilon = 1e-12);
        assert!(is_two_unitary(&t, &tol()));
    }

    #[test]
    fn identity_is_not_two_unitary() {
        let b = BipartiteMatrix {
            d: 6,
            m: CMatrix::identity(36, 36),
        };
        assert!(!is_two_unitary(&b, &tol()));
    }

    #[test]
    fn q_at_zero_is_p() {
        let q = build_q(0.0, 0.0);
        assert!((q.m - permutation_p36().m).norm() < 1e-15);
    }

    #[test]
    fn q_star_value() {
        let q = build_q(PI * 5.0 / 6.0, PI / 6.0);
        assert_abs_diff_eq!(ep_gt(&q).unwrap().e_p, 419.0 / 420.0, epsilon = 1e-13);
    }

    #[test]
    fn w_and_v_star_values() {
        let target = (208.0 + 3.0f64.sqrt()) / 210.0;
        let w = build_w(&w_star_phases()).unwrap();
        let pw = ep_gt(&w).unwrap();
        assert_abs_diff_eq!(pw.e_p, target, epsilon = 1e-13);
        assert_abs_diff_eq!(pw.g_t, 1.0, epsilon = 1e-11);
        let v = build_v(&v_star_phases()).unwrap();
        assert_abs_diff_eq!(ep_gt(&v).unwrap().e_p, target, epsilon = 1e-13);
    }

    #[test]
    fn trajectory_from_p_to_q_star_crosses_upper_edge() {
        let mut crossed = false;
        for t in 0..=10 {
            let t = t as f64 / 10.0;
            let q = build_q(PI / 6.0 * t * 5.0, PI / 6.0 * t);
            let pt = ep_gt(&q).unwrap();
            if pt.g_t > 1.0 + 1e-6 {
                crossed = true;
            }
        }
        assert!(crossed);
    }

    #[test]
    fn wrong_arity_is_rejected() {
        assert!(build_v(&[0.0; 5]).is_err());
        assert!(build_w(&[0.0; 7]).is_err());
    }

    #[test]
    fn iso_map_is_idempotent_projection() {
        for d in [2usize, 3] {
            let b = random_bipartite(d, 60 + d as u64);
            let y = iso_map(&b);
            let yy = iso_map(&y);
            assert!((&yy.m - &y.m).norm() < 1e-12);
            let sy = crate::numerics::svd_values(&y.m).unwrap();
            let sr = crate::numerics::svd_values(&realign(&y, Realignment::R).m).unwrap();
            let sg = crate::numerics::svd_values(&realign(&y, Realignment::Gamma).m).unwrap();
            for i in 0..sy.len() {
                assert_abs_diff_eq!(sy[i], sr[i], epsilon = 1e-10);
                assert_abs_diff_eq!(sy[i], sg[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn iso_map_d2_is_entrywise_invariant() {
        let x = CMatrix::from_fn(4, 4, |i, j| Complex64::new((i * 4 + j) as f64, 0.0));
        let y = iso_map(&BipartiteMatrix { d: 2, m: x });
        let yr = realign(&y, Realignment::R);
        let yg = realign(&y, Realignment::Gamma);
        assert!((&y.m - &yr.m).norm() < 1e-13);
        assert!((&y.m - &yg.m).norm() < 1e-13);
        // rank of the d=2 image is at most 3
        let sv = crate::numerics::svd_values(&y.m).unwrap();
        assert!(sv[3] < 1e-10 * sv[0]);
    }

    #[test]
    fn iso_map_matches_iterated_recursion() {
        // the averaging recursion contracts its transient at rate 1/2 per
        // step, so 40 steps land comfortably below 1e-10
        let b = random_bipartite(3, 77);
        let y = iso_map(&b);
        let mut x = b.m.clone();
        for _ in 0..40 {
            x = (realign_r(&x, 3) + realign_g(&x, 3)) / Complex64::new(2.0, 0.0);
        }
        assert!((x - y.m).norm() < 1e-10);
    }

    #[test]
    fn seed_m0_properties() {
        let p = permutation_p36();
        let s1 = seed_m0(&p, 0.05, 1).unwrap();
        assert!(crate::numerics::gram_residual(&s1.m, 1.0) < 1e-12);
        let s2 = seed_m0(&p, 0.05, 2).unwrap();
        assert!((&s1.m - &s2.m).norm() > 1e-6);
        let eps0 = seed_m0(&p, 0.0, 3).unwrap();
        assert!((&eps0.m - &p.m).norm() < 1e-12);
    }

    #[test]
    fn seed_m0_rejects_non_permutation() {
        let b = BipartiteMatrix {
            d: 2,
            m: CMatrix::from_element(4, 4, C_ONE),
        };
        assert!(matches!(seed_m0(&b, 0.1, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn map_fixed_point_at_ame43() {
        let t = ame43();
        let rec = dynamical_map_run(
            &t,
            10,
            &ToleranceConfig {
                convergence_tol: 1e-10,
                ..tol()
            },
        )
        .unwrap();
        assert_eq!(rec.outcome, MapOutcome::TwoUnitary);
        assert_eq!(rec.iterations, 0);
    }

    #[test]
    fn map_reaches_two_unitary_for_qutrits() {
        let mut successes = 0;
        for seed in 0..4u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
            let u = haar_unitary(9, &mut rng);
            let rec = dynamical_map_run(
                &BipartiteMatrix { d: 3, m: u },
                3000,
                &ToleranceConfig {
                    convergence_tol: 1e-10,
                    ..tol()
                },
            )
            .unwrap();
            if rec.outcome == MapOutcome::TwoUnitary {
                successes += 1;
                assert!(is_two_unitary(&rec.final_matrix, &tol()));
            }
        }
        assert!(successes >= 2, "only {successes}/4 runs converged");
    }

    #[test]
    fn map_preserves_unitarity_along_trajectory() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let u = haar_unitary(9, &mut rng);
        let rec = dynamical_map_run(
            &BipartiteMatrix { d: 3, m: u },
            50,
            &ToleranceConfig {
                convergence_tol: 1e-10,
                ..tol()
            },
        )
        .unwrap();
        // final iterate is unitary; intermediate ones are by construction
        assert!(crate::numerics::gram_residual(&rec.final_matrix.m, 1.0) < 1e-8);
        assert_eq!(rec.trajectory.len(), rec.iterations + 1);
    }

    #[test]
    fn golden_matrix_is_the_golden_ame() {
        let a = golden_ame();
        assert!(is_two_unitary(&a, &tol()));
        let pt = ep_gt(&a).unwrap();
        assert_abs_diff_eq!(pt.e_p, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.g_t, 1.0, epsilon = 1e-12);
        let nnz = a.m.iter().filter(|z| z.norm() > 1e-14).count();
        assert_eq!(nnz, 112);
        let (_, b, c) = golden_coefficients();
        assert_abs_diff_eq!(c / b, (1.0 + 5.0f64.sqrt()) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ep_invariant_under_local_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = BipartiteMatrix {
            d: 3,
            m: haar_unitary(9, &mut rng),
        };
        let base = ep_gt(&b).unwrap();
        for _ in 0..3 {
            let u1 = haar_unitary(3, &mut rng);
            let u2 = haar_unitary(3, &mut rng);
            let u3 = haar_unitary(3, &mut rng);
            let u4 = haar_unitary(3, &mut rng);
            let kron = |x: &CMatrix, y: &CMatrix| {
                CMatrix::from_fn(9, 9, |i, j| x[(i / 3, j / 3)] * y[(i % 3, j % 3)])
            };
            let rotated = BipartiteMatrix {
                d: 3,
                m: kron(&u1, &u2) * &b.m * kron(&u3, &u4),
            };
            let pt = ep_gt(&rotated).unwrap();
            assert_abs_diff_eq!(pt.e_p, base.e_p, epsilon = 1e-10);
        }
    }

    #[test]
    fn samples_stay_in_triangle() {
        let pts = ep_gt_sample(2, 40, 5).unwrap();
        for p in pts {
            assert!(p.e_p >= -1e-9 && p.e_p <= 1.0 + 1e-9);
            assert!(p.g_t >= -1e-9 && p.g_t <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = ep_gt_sample(2, 5, 42).unwrap();
        let b = ep_gt_sample(2, 5, 42).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.e_p, y.e_p);
        }
    }

    #[test]
    fn iso_stats_single_sample_has_zero_std() {
        let (_, sd) = iso_random_stats(2, 1, 0).unwrap();
        assert_eq!(sd, 0.0);
    }

    #[test]
    fn iso_stats_d2_ceiling() {
        let (mean, _) = iso_random_stats(2, 200, 1).unwrap();
        assert!(mean <= 8.0 / 9.0 + 1e-9, "mean {mean}");
    }

    #[test]
    fn bipartite_requires_square_order() {
        assert!(BipartiteMatrix::new(2, CMatrix::zeros(3, 3)).is_err());
        assert!(BipartiteMatrix::from_square(CMatrix::zeros(8, 8)).is_err());
        assert!(BipartiteMatrix::from_square(CMatrix::zeros(9, 9)).is_ok());
    }
}
