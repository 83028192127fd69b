//! Complex Hadamard matrices: generation (Sinkhorn alternating projections,
//! random walk over core phases, circulant constraint solving), certification
//! (deviation, Butson type, Haagerup invariant, defect) and a catalogue of
//! published matrices.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{
    polar_unitary, rank_from_singulars, real_singular_values, CMatrix, ToleranceConfig, C_ONE,
};
use crate::{Error, Result};

/// `Z(M) = ‖MM† − N·I‖_F`, the target function of all searches.
pub fn deviation(m: &CMatrix) -> f64 {
    crate::numerics::gram_residual(m, m.nrows() as f64)
}

/// Unnormalized Fourier matrix, entries `exp(2πi·jk/N)`.
pub fn fourier(n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::Dimension("fourier of order 0".into()));
    }
    Ok(CMatrix::from_fn(n, n, |j, k| {
        Complex64::from_polar(1.0, TAU * ((j * k) % n) as f64 / n as f64)
    }))
}

/// True iff `M` has unimodular entries and `MM† = N·I` within tolerance.
pub fn is_chm(m: &CMatrix, tol: &ToleranceConfig) -> Result<bool> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension("is_chm needs a square matrix".into()));
    }
    let n = m.nrows() as f64;
    let unimodular = m.iter().all(|z| (z.norm() - 1.0).abs() <= tol.phase_cluster_tol);
    Ok(unimodular && deviation(m) <= tol.unitarity_tol * n)
}

/// Equivalent representative with all-ones first row and column.
///
/// Multiplies by unimodular diagonals only, so entry moduli are preserved;
/// for a CHM the first row and column come out exactly 1.
pub fn dephase(m: &CMatrix) -> Result<CMatrix> {
    let (r, c) = (m.nrows(), m.ncols());
    if r == 0 || c == 0 {
        return Err(Error::Dimension("dephase of an empty matrix".into()));
    }
    for i in 0..r {
        if m[(i, 0)].norm() == 0.0 {
            return Err(Error::Degenerate(format!("zero entry in first column at row {i}")));
        }
    }
    for j in 0..c {
        if m[(0, j)].norm() == 0.0 {
            return Err(Error::Degenerate(format!("zero entry in first row at column {j}")));
        }
    }
    let mut out = m.clone();
    for i in 0..r {
        let phase = out[(i, 0)] / out[(i, 0)].norm();
        for j in 0..c {
            out[(i, j)] /= phase;
        }
    }
    for j in 0..c {
        let phase = out[(0, j)] / out[(0, j)].norm();
        for i in 0..r {
            out[(i, j)] /= phase;
        }
    }
    Ok(out)
}

/// A numerical CHM candidate with its recorded deviation.
#[derive(Debug, Clone)]
pub struct HadamardCandidate {
    pub matrix: CMatrix,
    pub deviation: f64,
}

impl HadamardCandidate {
    pub fn new(matrix: CMatrix) -> Self {
        let deviation = deviation(&matrix);
        HadamardCandidate { matrix, deviation }
    }
}

/// Outcome of one seeded search run.
#[derive(Debug, Clone)]
pub struct SearchRun {
    pub candidate: HadamardCandidate,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
}

fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    // Box-Muller; the seed never contains zeros with probability one, and we
    // nudge any exact zero away to keep the unimodularization defined.
    CMatrix::from_fn(n, n, |_, _| {
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        let u3: f64 = rng.gen::<f64>().max(1e-300);
        let u4: f64 = rng.gen();
        let re = (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos();
        let im = (-2.0 * u3.ln()).sqrt() * (TAU * u4).cos();
        if re == 0.0 && im == 0.0 {
            Complex64::new(1e-12, 0.0)
        } else {
            Complex64::new(re, im)
        }
    })
}

fn unimodularize(m: &CMatrix) -> CMatrix {
    m.map(|z| {
        let r = z.norm();
        if r == 0.0 {
            C_ONE
        } else {
            z / r
        }
    })
}

/// Sinkhorn-style alternating projections between the entrywise torus and
/// the set of rescaled unitary matrices.
///
/// Runs until the unimodular iterate satisfies
/// `Z(M) ≤ tol.convergence_tol · N` or the iteration budget is exhausted.
/// Stalled runs (no factor-0.8 progress across 200 iterations) are reseeded
/// from the same generator, so the outcome is a deterministic function of
/// `rng_seed`.
pub fn sinkhorn_chm(
    n: usize,
    rng_seed: u64,
    max_iters: usize,
    tol: &ToleranceConfig,
) -> Result<SearchRun> {
    if n < 2 {
        return Err(Error::Dimension("sinkhorn needs order at least 2".into()));
    }
    let target = tol.convergence_tol * n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut m = gaussian_matrix(n, &mut rng);
    let mut best: Option<HadamardCandidate> = None;
    let mut z_checkpoint = f64::INFINITY;
    let mut since_restart = 0usize;
    let mut restarts = 0usize;
    let sqrt_n = (n as f64).sqrt();
    for it in 1..=max_iters {
        since_restart += 1;
        let torus = unimodularize(&m);
        let z = deviation(&torus);
        if best.as_ref().map_or(true, |b| z < b.deviation) {
            best = Some(HadamardCandidate {
                matrix: torus.clone(),
                deviation: z,
            });
        }
        if z <= target {
            return Ok(SearchRun {
                candidate: best.unwrap(),
                converged: true,
                iterations: it,
                restarts,
            });
        }
        if since_restart % 200 == 0 {
            if z > 0.8 * z_checkpoint {
                m = gaussian_matrix(n, &mut rng);
                restarts += 1;
                since_restart = 0;
                z_checkpoint = f64::INFINITY;
                continue;
            }
            z_checkpoint = z;
        }
        m = polar_unitary(&torus, tol)? * Complex64::new(sqrt_n, 0.0);
    }
    Ok(SearchRun {
        candidate: best.unwrap(),
        converged: false,
        iterations: max_iters,
        restarts,
    })
}

/// Step-size schedule of the random walk: geometric cooling from `start`
/// to `floor` radians over `cooling_iters` proposals, then held at `floor`.
#[derive(Debug, Clone, Copy)]
pub struct StepSchedule {
    pub start: f64,
    pub floor: f64,
    pub cooling_iters: usize,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule {
            start: 0.5,
            floor: 1e-7,
            cooling_iters: 100_000,
        }
    }
}

/// Stochastic coordinate descent over the unfixed core phases, minimizing
/// the deviation `Z`. Fixed entries never move; a symmetric proposal is
/// accepted only if it improves `Z`.
#[allow(clippy::too_many_arguments)]
pub fn random_walk_chm(
    n: usize,
    fixed_mask: &DMatrix<bool>,
    fixed_phases: &DMatrix<f64>,
    rng_seed: u64,
    schedule: StepSchedule,
    max_iters: usize,
    tol: &ToleranceConfig,
) -> Result<SearchRun> {
    if n < 2 {
        return Err(Error::Dimension("random walk needs order at least 2".into()));
    }
    let core = n - 1;
    if fixed_mask.nrows() != core
        || fixed_mask.ncols() != core
        || fixed_phases.nrows() != core
        || fixed_phases.ncols() != core
    {
        return Err(Error::Dimension(format!(
            "mask and phase matrices must be {core}x{core} (core-indexed)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut phases = DMatrix::<f64>::from_fn(core, core, |i, j| {
        if fixed_mask[(i, j)] {
            fixed_phases[(i, j)]
        } else {
            rng.gen::<f64>() * TAU
        }
    });
    let build = |ph: &DMatrix<f64>| -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            if i == 0 || j == 0 {
                C_ONE
            } else {
                Complex64::from_polar(1.0, ph[(i - 1, j - 1)])
            }
        })
    };
    let free: Vec<(usize, usize)> = (0..core)
        .flat_map(|i| (0..core).map(move |j| (i, j)))
        .filter(|&(i, j)| !fixed_mask[(i, j)])
        .collect();
    let target = tol.convergence_tol * n as f64;
    let mut m = build(&phases);
    let mut z = deviation(&m);
    if free.is_empty() {
        let candidate = HadamardCandidate { matrix: m, deviation: z };
        if z > target {
            return Ok(SearchRun {
                candidate,
                converged: false,
                iterations: 0,
                restarts: 0,
            });
        }
        return Ok(SearchRun {
            candidate,
            converged: true,
            iterations: 0,
            restarts: 0,
        });
    }
    let cool = (schedule.floor / schedule.start).powf(1.0 / schedule.cooling_iters.max(1) as f64);
    let mut step = schedule.start;
    let mut iters = 0usize;
    for it in 1..=max_iters {
        iters = it;
        let (i, j) = free[rng.gen_range(0..free.len())];
        let old = phases[(i, j)];
        let delta = step * (rng.gen::<f64>() * 2.0 - 1.0);
        phases[(i, j)] = old + delta;
        let m2 = build(&phases);
        let z2 = deviation(&m2);
        if z2 < z {
            z = z2;
            m = m2;
        } else {
            phases[(i, j)] = old;
        }
        if z <= target {
            break;
        }
        step = (step * cool).max(schedule.floor);
    }
    Ok(SearchRun {
        converged: z <= target,
        candidate: HadamardCandidate { matrix: m, deviation: z },
        iterations: iters,
        restarts: 0,
    })
}

/// Cardinality of the Haagerup invariant set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct HaagerupCard {
    pub cardinality: usize,
}

/// Counts distinct values among the `N⁴` quartet products
/// `H_jk·H_lm·H*_jm·H*_lk`, clustering phases within `phase_cluster_tol`.
pub fn haagerup_card(h: &CMatrix, tol: &ToleranceConfig) -> Result<HaagerupCard> {
    if !is_chm(h, tol)? {
        return Err(Error::Contract("haagerup invariant needs a CHM input".into()));
    }
    let n = h.nrows();
    let mut phases = Vec::with_capacity(n * n * n * n);
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let p = h[(j, k)] * h[(l, m)] * h[(j, m)].conj() * h[(l, k)].conj();
                    phases.push(p.arg().rem_euclid(TAU));
                }
            }
        }
    }
    phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut clusters = 1usize;
    for w in phases.windows(2) {
        if w[1] - w[0] > tol.phase_cluster_tol {
            clusters += 1;
        }
    }
    // first and last cluster may be identical modulo 2π
    if clusters > 1 && (TAU - phases[phases.len() - 1]) + phases[0] <= tol.phase_cluster_tol {
        clusters -= 1;
    }
    Ok(HaagerupCard { cardinality: clusters })
}

/// Result of the Butson-type scan.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ButsonReport {
    pub is_butson: bool,
    pub q: Option<usize>,
    pub max_phase_residual: f64,
}

/// Smallest `q ≤ q_max` such that every phase lies on the `q`-th root
/// lattice; the scan is an exact sweep so the reported `q` is minimal.
pub fn butson_fit(h: &CMatrix, q_max: usize, tol: &ToleranceConfig) -> ButsonReport {
    let phases: Vec<f64> = h.iter().map(|z| z.arg() / TAU).collect();
    for q in 1..=q_max {
        let residual = phases
            .iter()
            .map(|p| {
                let t = p * q as f64;
                (t - t.round()).abs()
            })
            .fold(0.0f64, f64::max);
        if residual < (q as f64 * tol.phase_cluster_tol).max(1e-7) {
            return ButsonReport {
                is_butson: true,
                q: Some(q),
                max_phase_residual: residual,
            };
        }
    }
    ButsonReport {
        is_butson: false,
        q: None,
        max_phase_residual: f64::NAN,
    }
}

/// Damped Gauss-Newton on a real residual map with numeric Jacobian.
/// Returns the argument after convergence of the residual norm.
pub(crate) fn gauss_newton<F>(residual: F, x0: &[f64], max_steps: usize, target: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = x0.to_vec();
    let k = x.len();
    let mut r = residual(&x);
    let mut rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut lambda = 1e-8;
    for _ in 0..max_steps {
        if rn <= target {
            break;
        }
        let m = r.len();
        let mut jac = DMatrix::<f64>::zeros(m, k);
        let h = 1e-7;
        for q in 0..k {
            let mut xs = x.clone();
            xs[q] += h;
            let rs = residual(&xs);
            for i in 0..m {
                jac[(i, q)] = (rs[i] - r[i]) / h;
            }
        }
        let jt = jac.transpose();
        let rhs = -(&jt * DMatrix::from_column_slice(m, 1, &r));
        let mut improved = false;
        for _ in 0..12 {
            let mut lhs = &jt * &jac;
            for q in 0..k {
                lhs[(q, q)] += lambda;
            }
            let Some(chol) = lhs.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let dx = chol.solve(&rhs);
            let xs: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, b)| a + b).collect();
            let rs = residual(&xs);
            let rsn = rs.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rsn < rn {
                x = xs;
                r = rs;
                rn = rsn;
                lambda = (lambda * 0.3).max(1e-14);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, rn)
}

fn circulant(first_row: &[Complex64]) -> CMatrix {
    let n = first_row.len();
    CMatrix::from_fn(n, n, |i, j| first_row[(j + n - i) % n])
}

/// Solves the circulant unitarity constraints
/// `Σ_j c_j / c_{(j+k) mod N} = 0` for `k = 1..N−1` over unimodular `c_j`
/// by damped least squares over the phases, re-unimodularizing by
/// construction. Multi-starts from the seeded generator.
pub fn circulant_chm_solve(n: usize, rng_seed: u64, tol: &ToleranceConfig) -> Result<SearchRun> {
    if n < 3 {
        return Err(Error::Dimension("circulant solver needs order at least 3".into()));
    }
    let residual = |ph: &[f64]| -> Vec<f64> {
        let c: Vec<Complex64> = ph.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        let mut out = Vec::with_capacity(2 * (n - 1));
        for k in 1..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                s += c[j] / c[(j + k) % n];
            }
            out.push(s.re);
            out.push(s.im);
        }
        out
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best_rn = f64::INFINITY;
    let mut best: Option<Vec<f64>> = None;
    let mut iterations = 0usize;
    for restart in 0..200 {
        let x0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * TAU).collect();
        let (x, rn) = gauss_newton(&residual, &x0, 120, 1e-13);
        iterations += 1;
        if rn < best_rn {
            best_rn = rn;
            best = Some(x.clone());
        }
        if rn <= 1e-12 {
            let c: Vec<Complex64> = x.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
            let candidate = HadamardCandidate::new(circulant(&c));
            if candidate.deviation <= tol.unitarity_tol.max(1e-10) * n as f64 {
                return Ok(SearchRun {
                    candidate,
                    converged: true,
                    iterations,
                    restarts: restart,
                });
            }
        }
    }
    let x = best.unwrap();
    let c: Vec<Complex64> = x.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    Ok(SearchRun {
        candidate: HadamardCandidate::new(circulant(&c)),
        converged: false,
        iterations,
        restarts: 200,
    })
}

/// Assembles the bordered block-circulant matrix: all-ones first row and
/// column, core built from 2×2 blocks `[[c, c*], [c*, c]]` arranged
/// circulantly. Requires `N = 3 + 4k` and `(N−1)/2` block values.
pub fn build_ln(n: usize, block_values: &[Complex64]) -> Result<CMatrix> {
    if n < 3 || n % 4 != 3 {
        return Err(Error::Unsupported(format!(
            "block-circulant pattern needs N = 3 + 4k, got {n}"
        )));
    }
    let nb = (n - 1) / 2;
    if block_values.len() != nb {
        return Err(Error::Dimension(format!(
            "expected {} block values for order {n}, got {}",
            nb,
            block_values.len()
        )));
    }
    let mut m = CMatrix::from_element(n, n, C_ONE);
    for bi in 0..nb {
        for bj in 0..nb {
            let c = block_values[(bj + nb - bi) % nb];
            m[(1 + 2 * bi, 1 + 2 * bj)] = c;
            m[(1 + 2 * bi, 2 + 2 * bj)] = c.conj();
            m[(2 + 2 * bi, 1 + 2 * bj)] = c.conj();
            m[(2 + 2 * bi, 2 + 2 * bj)] = c;
        }
    }
    Ok(m)
}

/// Solves the unitarity constraints of the bordered block-circulant pattern
/// for the block values, returning the assembled matrix.
pub fn solve_ln(n: usize, rng_seed: u64, tol: &ToleranceConfig) -> Result<SearchRun> {
    let nb = if n >= 3 && n % 4 == 3 {
        (n - 1) / 2
    } else {
        return Err(Error::Unsupported(format!(
            "block-circulant pattern needs N = 3 + 4k, got {n}"
        )));
    };
    let residual = |ph: &[f64]| -> Vec<f64> {
        let cs: Vec<Complex64> = ph.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        let m = build_ln(n, &cs).expect("pattern checked above");
        let mut g = &m * m.adjoint();
        for i in 0..n {
            g[(i, i)] -= Complex64::new(n as f64, 0.0);
        }
        let mut out = Vec::with_capacity(n * (n - 1));
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(g[(i, j)].re);
                out.push(g[(i, j)].im);
            }
        }
        out
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for restart in 0..200 {
        let x0: Vec<f64> = (0..nb).map(|_| rng.gen::<f64>() * TAU).collect();
        let (x, rn) = gauss_newton(&residual, &x0, 150, 1e-13);
        if rn <= 1e-11 {
            let cs: Vec<Complex64> = x.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
            let candidate = HadamardCandidate::new(build_ln(n, &cs)?);
            if candidate.deviation <= tol.unitarity_tol.max(1e-10) * n as f64 {
                return Ok(SearchRun {
                    candidate,
                    converged: true,
                    iterations: restart + 1,
                    restarts: restart,
                });
            }
        }
    }
    Err(Error::NonConvergence(format!(
        "no unimodular solution of the order-{n} block-circulant constraints found"
    )))
}

/// First-order defect analysis of a (rescaled) unitary matrix.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DefectReport {
    pub order: usize,
    /// Real rows of the assembled system (two per off-diagonal pair).
    pub system_rows: usize,
    /// Real variables (one phase per matrix entry).
    pub system_cols: usize,
    pub rank: usize,
    /// Solution-space dimension beyond the 2N−1 trivial phase directions.
    pub defect: usize,
    /// Smallest singular value counted into the rank.
    pub smallest_kept_sv: f64,
}

/// Assembles the first-order system for modulus-preserving, unitarity-
/// preserving perturbations `U_jk → U_jk·e^{i R_jk}` and reports
/// `defect = dim(solution space) − (2N−1)`, clamped at zero.
///
/// CHM inputs are rescaled by `1/√N` automatically.
pub fn unitary_defect(u: &CMatrix, tol: &ToleranceConfig) -> Result<DefectReport> {
    if u.nrows() != u.ncols() {
        return Err(Error::Dimension("defect needs a square matrix".into()));
    }
    let n = u.nrows();
    let m = if is_chm(u, tol)? {
        u / Complex64::new((n as f64).sqrt(), 0.0)
    } else {
        u.clone()
    };
    if crate::numerics::gram_residual(&m, 1.0) > tol.unitarity_tol * (n as f64) {
        return Err(Error::Contract(
            "defect needs a unitary matrix (after CHM rescale)".into(),
        ));
    }
    let pairs = n * (n - 1) / 2;
    let mut a = DMatrix::<f64>::zeros(2 * pairs, n * n);
    let mut row = 0;
    for j in 0..n {
        for k in (j + 1)..n {
            for l in 0..n {
                let w = m[(j, l)] * m[(k, l)].conj();
                a[(row, j * n + l)] += w.re;
                a[(row, k * n + l)] -= w.re;
                a[(row + 1, j * n + l)] += w.im;
                a[(row + 1, k * n + l)] -= w.im;
            }
            row += 2;
        }
    }
    let sv = real_singular_values(&a);
    let rank = rank_from_singulars(&sv, tol.rank_gap_tol);
    let dim_solution = n * n - rank;
    let trivial = 2 * n - 1;
    Ok(DefectReport {
        order: n,
        system_rows: 2 * pairs,
        system_cols: n * n,
        rank,
        defect: dim_solution.saturating_sub(trivial),
        smallest_kept_sv: if rank > 0 { sv[rank - 1] } else { 0.0 },
    })
}

/// Published matrices reachable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogueEntry {
    /// Fourier matrix of the given order.
    Fourier(usize),
    /// One-parameter nonaffine order-6 family, `γ ∈ [1/2, 3/2]`.
    T6(f64),
    /// Isolated order-9 matrix with a four-value core.
    T9,
    /// Order-8 Butson matrix in BH(8, 20), defect 7.
    B8a,
    /// Order-8 Butson matrix in BH(8, 20), defect 11.
    B8b,
    /// Isolated order-8 circulant found by Elser.
    V8,
}

impl CatalogueEntry {
    pub fn parse(name: &str, param: Option<f64>) -> Result<Self> {
        match name.to_ascii_uppercase().as_str() {
            "F" => {
                let n = param.ok_or_else(|| {
                    Error::Contract("catalogue entry F needs an order parameter".into())
                })?;
                if n < 1.0 || n.fract() != 0.0 {
                    return Err(Error::Contract(format!("bad Fourier order {n}")));
                }
                Ok(CatalogueEntry::Fourier(n as usize))
            }
            "T6" => {
                let g = param.ok_or_else(|| {
                    Error::Contract("catalogue entry T6 needs the gamma parameter".into())
                })?;
                if !(0.5..=1.5).contains(&g) {
                    return Err(Error::Contract(format!(
                        "T6 gamma must lie in [1/2, 3/2], got {g}"
                    )));
                }
                Ok(CatalogueEntry::T6(g))
            }
            "T9" => Ok(CatalogueEntry::T9),
            "B8A" => Ok(CatalogueEntry::B8a),
            "B8B" => Ok(CatalogueEntry::B8b),
            "V8" => Ok(CatalogueEntry::V8),
            other => Err(Error::Unsupported(format!("unknown catalogue entry {other:?}"))),
        }
    }
}

/// Returns the published matrix for `entry`. Entries known only numerically
/// are polished against their own unitarity constraints before use.
pub fn catalogue(entry: CatalogueEntry) -> Result<CMatrix> {
    match entry {
        CatalogueEntry::Fourier(n) => fourier(n),
        CatalogueEntry::T6(g) => Ok(t6(g)),
        CatalogueEntry::T9 => Ok(t9()),
        CatalogueEntry::B8a => Ok(exp_pi_over_10(&B8A_TABLE)),
        CatalogueEntry::B8b => Ok(exp_pi_over_10(&B8B_TABLE)),
        CatalogueEntry::V8 => Ok(v8()),
    }
}

const B8A_TABLE: [[u8; 8]; 8] = [
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 5, 10, 13, 8, 3, 15, 18],
    [0, 10, 5, 18, 3, 13, 15, 8],
    [0, 12, 7, 10, 15, 17, 5, 2],
    [0, 17, 2, 15, 10, 7, 5, 12],
    [0, 7, 17, 3, 13, 0, 10, 10],
    [0, 2, 12, 8, 18, 10, 0, 10],
    [0, 15, 15, 5, 5, 10, 10, 0],
];

const B8B_TABLE: [[u8; 8]; 8] = [
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 8, 10, 13, 5, 3, 15, 18],
    [0, 18, 10, 3, 5, 13, 15, 8],
    [0, 12, 10, 7, 15, 17, 5, 2],
    [0, 2, 10, 17, 15, 7, 5, 12],
    [0, 10, 0, 0, 10, 0, 10, 10],
    [0, 10, 0, 10, 0, 10, 0, 10],
    [0, 0, 0, 10, 10, 10, 10, 0],
];

fn exp_pi_over_10(table: &[[u8; 8]; 8]) -> CMatrix {
    CMatrix::from_fn(8, 8, |i, j| {
        Complex64::from_polar(1.0, PI / 10.0 * table[i][j] as f64)
    })
}

/// One-parameter order-6 family with `a = exp(iπγ)`, `b = a²` and `c`, `d`
/// the two roots of `t² + (1+a)²·t + a²`. The roots get a few Newton steps
/// to absorb cancellation near the branch point.
fn t6(gamma: f64) -> CMatrix {
    let a = Complex64::from_polar(1.0, PI * gamma);
    let b = a * a;
    let one = C_ONE;
    let p1 = (one + a) * (one + a); // linear coefficient
    let disc = (p1 * p1 - 4.0 * b).sqrt();
    let mut c = (-p1 - disc) / 2.0;
    let mut d = (-p1 + disc) / 2.0;
    // the smaller root loses digits to cancellation; recover it from the
    // exactly known product c·d = b
    if c.norm() > d.norm() {
        d = b / c;
    } else {
        c = b / d;
    }
    // Near the branch points of the discriminant the quadratic roots carry a
    // sqrt-of-roundoff error, so polish the unimodular phases against the
    // unitarity residual of the assembled matrix itself.
    let assemble = |c: Complex64, d: Complex64| -> CMatrix {
        let rows: [[Complex64; 6]; 6] = [
            [one, one, one, one, one, one],
            [one, a, b, c, a, d],
            [one, b, a, a, c, d],
            [one, d, a, -a, -one, -d],
            [one, a, d, -one, -a, -d],
            [one, c, c, -c, -c, -one],
        ];
        CMatrix::from_fn(6, 6, |i, j| rows[i][j])
    };
    let residual = |ph: &[f64]| -> Vec<f64> {
        let m = assemble(
            Complex64::from_polar(1.0, ph[0]),
            Complex64::from_polar(1.0, ph[1]),
        );
        let mut g = &m * m.adjoint();
        for i in 0..6 {
            g[(i, i)] -= Complex64::new(6.0, 0.0);
        }
        let mut out = Vec::with_capacity(30);
        for i in 0..6 {
            for j in (i + 1)..6 {
                out.push(g[(i, j)].re);
                out.push(g[(i, j)].im);
            }
        }
        out
    };
    let (ph, _) = gauss_newton(residual, &[c.arg(), d.arg()], 60, 1e-14);
    assemble(
        Complex64::from_polar(1.0, ph[0]),
        Complex64::from_polar(1.0, ph[1]),
    )
}

// Quadruplet of the isolated order-9 matrix, polished from the published
// values against its five unitarity constraints.
const T9_SEED: [Complex64; 4] = [
    Complex64 { re: -3.39621447393409770e-1, im: 9.40562210845409918e-1 },
    Complex64 { re: -9.63515424526196651e-1, im: 2.67652809998518648e-1 },
    Complex64 { re: -3.64845754738034461e-2, im: 9.99334216242242168e-1 },
    Complex64 { re: 8.39621447393410048e-1, im: 5.43172003215367516e-1 },
];

// Core pattern of T9: symbols 0..3 pick (a, b, c, d); negative index means
// the complex conjugate.
const T9_PATTERN: [[i8; 8]; 8] = [
    [1, 4, -1, -3, -2, 3, 2, -4],
    [2, 3, -2, 1, -4, -1, 4, -3],
    [3, -2, -3, 4, 1, -4, -1, 2],
    [-2, -3, 2, -1, 4, 1, -4, 3],
    [4, -1, -4, 2, -3, -2, 3, 1],
    [-1, -4, 1, 3, 2, -3, -2, 4],
    [-3, 2, 3, -4, -1, 4, 1, -2],
    [-4, 1, 4, -2, 3, 2, -3, -1],
];

fn t9_from_phases(ph: &[f64]) -> CMatrix {
    let vals: Vec<Complex64> = ph.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    CMatrix::from_fn(9, 9, |i, j| {
        if i == 0 || j == 0 {
            C_ONE
        } else {
            let code = T9_PATTERN[i - 1][j - 1];
            let v = vals[(code.unsigned_abs() - 1) as usize];
            if code < 0 {
                v.conj()
            } else {
                v
            }
        }
    })
}

fn t9_residual(ph: &[f64]) -> Vec<f64> {
    let (al, be, ga, de) = (ph[0], ph[1], ph[2], ph[3]);
    vec![
        1.0 + 2.0 * (al.cos() + be.cos() + ga.cos() + de.cos()),
        1.0 + 2.0 * ((2.0 * al).cos() + (2.0 * be).cos() + (2.0 * ga).cos() + (2.0 * de).cos()),
        1.0 + 2.0 * ((al - be).cos() + (be - de).cos() + (ga - de).cos() + (al + ga).cos()),
        1.0 + 2.0 * ((al - ga).cos() + (al + be).cos() + (ga + de).cos() + (be + de).cos()),
        1.0 + 2.0 * ((al - de).cos() + (be - ga).cos() + (be + ga).cos() + (al + de).cos()),
    ]
}

fn t9() -> CMatrix {
    let seed: Vec<f64> = T9_SEED.iter().map(|z| z.arg()).collect();
    let (ph, _) = gauss_newton(|p| t9_residual(p), &seed, 50, 1e-14);
    t9_from_phases(&ph)
}

const V8_SEED: [Complex64; 3] = [
    Complex64 { re: -6.50891015304204568e-1, im: -7.59171183723580056e-1 },
    Complex64 { re: -7.79956840999184164e-1, im: 6.25833305424514319e-1 },
    Complex64 { re: 6.18338726465554767e-1, im: -7.85911712187161493e-1 },
];

fn v8_residual(ph: &[f64]) -> Vec<f64> {
    let (al, be, ga) = (ph[0], ph[1], ph[2]);
    vec![
        2.0 * (-be.cos() + (be - ga).cos() + (ga - al).cos()),
        2.0 * (-be.cos() - ga.cos() - (ga - al).cos() + (al - be).cos()),
        2.0 * (ga.cos() + al.cos() + (al - be).cos()),
    ]
}

fn v8() -> CMatrix {
    let seed: Vec<f64> = V8_SEED.iter().map(|z| z.arg()).collect();
    let (ph, _) = gauss_newton(|p| v8_residual(p), &seed, 50, 1e-14);
    let a = Complex64::from_polar(1.0, ph[0]);
    let b = Complex64::from_polar(1.0, ph[1]);
    let c = Complex64::from_polar(1.0, ph[2]);
    let m = -C_ONE;
    let one = C_ONE;
    let rows: [[Complex64; 8]; 8] = [
        [m, m, b, b, c, c, a, a],
        [m, b, m, c, b, a, c, -a],
        [b, m, c, m, a, b, -a, c],
        [b, c, m, a, m, -a, b, -c],
        [c, b, a, m, -a, m, -c, b],
        [c, a, b, -a, m, -c, m, -b],
        [a, c, -a, b, -c, m, -b, m],
        [a, -a, c, -c, b, -b, m, one],
    ];
    CMatrix::from_fn(8, 8, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn fourier_order_two() {
        let f = fourier(2).unwrap();
        assert!((f[(0, 0)] - C_ONE).norm() < 1e-15);
        assert!((f[(1, 1)] + C_ONE).norm() < 1e-15);
        assert!(is_chm(&f, &tol()).unwrap());
    }

    #[test]
    fn fourier_rejects_zero() {
        assert!(matches!(fourier(0), Err(Error::Dimension(_))));
    }

    #[test]
    fn fourier_four_is_butson_four() {
        let f = fourier(4).unwrap();
        let rep = butson_fit(&f, 16, &tol());
        assert_eq!(rep.q, Some(4));
    }

    #[test]
    fn fourier_eleven_haagerup() {
        let f = fourier(11).unwrap();
        assert_eq!(haagerup_card(&f, &tol()).unwrap().cardinality, 11);
    }

    #[test]
    fn haagerup_of_f2() {
        // 16 quartets with values ±1 only
        let f = fourier(2).unwrap();
        assert_eq!(haagerup_card(&f, &tol()).unwrap().cardinality, 2);
    }

    #[test]
    fn identity_is_not_chm() {
        assert!(!is_chm(&CMatrix::identity(3, 3), &tol()).unwrap());
    }

    #[test]
    fn dephase_keeps_dephased_input() {
        let f = fourier(4).unwrap();
        let d = dephase(&f).unwrap();
        assert!((f - d).norm() < 1e-14);
    }

    #[test]
    fn dephase_absorbs_row_phase() {
        let f = fourier(4).unwrap();
        let mut g = f.clone();
        for j in 0..4 {
            g[(0, j)] *= Complex64::i();
        }
        let d = dephase(&g).unwrap();
        assert!((f - d).norm() < 1e-13);
    }

    #[test]
    fn dephase_rejects_zero_first_row() {
        let mut m = fourier(3).unwrap();
        m[(0, 1)] = Complex64::new(0.0, 0.0);
        assert!(matches!(dephase(&m), Err(Error::Degenerate(_))));
    }

    #[test]
    fn sinkhorn_order_two_hits_f2_class() {
        let run = sinkhorn_chm(2, 7, 2000, &tol()).unwrap();
        assert!(run.converged);
        let d = dephase(&run.candidate.matrix).unwrap();
        let f2 = fourier(2).unwrap();
        // all order-2 CHM are equivalent to F2: dephased core is -1
        assert!((d[(1, 1)] - f2[(1, 1)]).norm() < 1e-5);
    }

    #[test]
    fn sinkhorn_order_six_converges() {
        let t = ToleranceConfig {
            convergence_tol: 1e-9 / 6.0,
            ..tol()
        };
        let run = sinkhorn_chm(6, 1, 10_000, &t).unwrap();
        assert!(run.converged, "deviation {}", run.candidate.deviation);
        assert!(is_chm(&run.candidate.matrix, &ToleranceConfig {
            unitarity_tol: 1e-9,
            phase_cluster_tol: 1e-9,
            ..tol()
        })
        .unwrap());
    }

    #[test]
    fn random_walk_order_two_fixed_pi() {
        let mask = DMatrix::from_element(1, 1, true);
        let ph = DMatrix::from_element(1, 1, PI);
        let run = random_walk_chm(2, &mask, &ph, 3, StepSchedule::default(), 10, &tol()).unwrap();
        assert!(run.converged);
        assert!((run.candidate.matrix[(1, 1)] + C_ONE).norm() < 1e-14);
    }

    #[test]
    fn random_walk_infeasible_all_fixed() {
        let mask = DMatrix::from_element(1, 1, true);
        let ph = DMatrix::from_element(1, 1, PI / 2.0);
        let run = random_walk_chm(2, &mask, &ph, 3, StepSchedule::default(), 10, &tol()).unwrap();
        assert!(!run.converged);
        assert!(run.candidate.deviation > 0.1);
    }

    #[test]
    fn random_walk_order_four() {
        let mask = DMatrix::from_element(3, 3, false);
        let ph = DMatrix::from_element(3, 3, 0.0);
        let schedule = StepSchedule {
            floor: 1e-10,
            cooling_iters: 150_000,
            ..StepSchedule::default()
        };
        let t = ToleranceConfig {
            convergence_tol: 1e-9 / 4.0,
            ..tol()
        };
        let run = random_walk_chm(4, &mask, &ph, 11, schedule, 200_000, &t).unwrap();
        assert!(run.converged, "Z = {}", run.candidate.deviation);
    }

    #[test]
    fn butson_of_catalogue_entries() {
        let a = catalogue(CatalogueEntry::B8a).unwrap();
        let b = catalogue(CatalogueEntry::B8b).unwrap();
        assert_eq!(butson_fit(&a, 64, &tol()).q, Some(20));
        assert_eq!(butson_fit(&b, 64, &tol()).q, Some(20));
        assert!(is_chm(&a, &tol()).unwrap());
        assert!(is_chm(&b, &tol()).unwrap());
    }

    #[test]
    fn t9_is_isolated_non_butson() {
        let m = catalogue(CatalogueEntry::T9).unwrap();
        assert!(deviation(&m) < 1e-9);
        let rep = butson_fit(&m, 4096, &tol());
        assert!(!rep.is_butson);
        let def = unitary_defect(&m, &tol()).unwrap();
        assert_eq!(def.defect, 0);
    }

    #[test]
    fn t6_family_members_are_chm() {
        for g in [0.5, 0.75, 1.0, 1.25, 1.5] {
            let m = catalogue(CatalogueEntry::T6(g)).unwrap();
            assert!(deviation(&m) < 1e-9, "gamma {g}: Z = {}", deviation(&m));
            assert!(is_chm(&m, &tol()).unwrap(), "gamma {g}");
        }
    }

    #[test]
    fn t6_range_is_enforced() {
        assert!(CatalogueEntry::parse("T6", Some(0.3)).is_err());
        assert!(CatalogueEntry::parse("T6", Some(1.0)).is_ok());
        assert!(CatalogueEntry::parse("nope", None).is_err());
    }

    #[test]
    fn v8_is_chm_with_zero_defect() {
        let m = catalogue(CatalogueEntry::V8).unwrap();
        assert!(deviation(&m) < 1e-9);
        assert_eq!(unitary_defect(&m, &tol()).unwrap().defect, 0);
    }

    #[test]
    fn defects_of_prime_fouriers_vanish() {
        for p in [2usize, 3, 5, 7] {
            let f = fourier(p).unwrap();
            assert_eq!(unitary_defect(&f, &tol()).unwrap().defect, 0, "p = {p}");
        }
    }

    #[test]
    fn defects_of_b8_pair() {
        let a = catalogue(CatalogueEntry::B8a).unwrap();
        let b = catalogue(CatalogueEntry::B8b).unwrap();
        assert_eq!(unitary_defect(&a, &tol()).unwrap().defect, 7);
        assert_eq!(unitary_defect(&b, &tol()).unwrap().defect, 11);
    }

    #[test]
    fn build_ln_recovers_f3() {
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        let l3 = build_ln(3, &[w]).unwrap();
        let f3 = fourier(3).unwrap();
        assert!((l3 - f3).norm() < 1e-14);
    }

    #[test]
    fn build_ln_rejects_bad_order() {
        assert!(matches!(build_ln(5, &[C_ONE]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn solve_ln_order_seven() {
        let run = solve_ln(7, 5, &tol()).unwrap();
        assert!(run.converged);
        assert!(run.candidate.deviation < 1e-8);
    }

    #[test]
    fn circulant_solver_order_four() {
        let run = circulant_chm_solve(4, 9, &tol()).unwrap();
        assert!(run.converged);
        // direct substitution oracle on the constraints
        let m = &run.candidate.matrix;
        let c: Vec<Complex64> = (0..4).map(|j| m[(0, j)]).collect();
        for k in 1..4 {
            let s: Complex64 = (0..4).map(|j| c[j] / c[(j + k) % 4]).sum();
            assert!(s.norm() < 1e-9, "k={k}: {s}");
        }
    }

    #[test]
    fn circulant_solver_order_seven_gives_chm() {
        let run = circulant_chm_solve(7, 2, &tol()).unwrap();
        assert!(run.converged);
        assert!(is_chm(&run.candidate.matrix, &tol()).unwrap());
    }

    #[test]
    fn haagerup_and_defect_are_equivalence_invariant() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = fourier(5).unwrap();
        let card0 = haagerup_card(&h, &tol()).unwrap().cardinality;
        let def0 = unitary_defect(&h, &tol()).unwrap().defect;
        for _ in 0..5 {
            let mut perm1: Vec<usize> = (0..5).collect();
            let mut perm2: Vec<usize> = (0..5).collect();
            for i in (1..5).rev() {
                perm1.swap(i, rng.gen_range(0..=i));
                perm2.swap(i, rng.gen_range(0..=i));
            }
            let d1: Vec<Complex64> = (0..5)
                .map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * TAU))
                .collect();
            let d2: Vec<Complex64> = (0..5)
                .map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * TAU))
                .collect();
            let twin = CMatrix::from_fn(5, 5, |i, j| d1[i] * h[(perm1[i], perm2[j])] * d2[j]);
            assert_eq!(haagerup_card(&twin, &tol()).unwrap().cardinality, card0);
            assert_eq!(unitary_defect(&twin, &tol()).unwrap().defect, def0);
        }
    }

    #[test]
    fn dephase_preserves_invariants() {
        let m = catalogue(CatalogueEntry::B8a).unwrap();
        let mut twisted = m.clone();
        for j in 0..8 {
            twisted[(2, j)] *= Complex64::from_polar(1.0, 0.7);
            twisted[(j, 3)] *= Complex64::from_polar(1.0, -1.1);
        }
        let d = dephase(&twisted).unwrap();
        assert_eq!(
            haagerup_card(&d, &tol()).unwrap().cardinality,
            haagerup_card(&m, &tol()).unwrap().cardinality
        );
        assert_eq!(
            unitary_defect(&d, &tol()).unwrap().defect,
            unitary_defect(&m, &tol()).unwrap().defect
        );
    }

    #[test]
    fn butson_of_fourier_divisor_minimal() {
        for n in [3usize, 5, 6, 8, 12] {
            let f = fourier(n).unwrap();
            let q = butson_fit(&f, 64, &tol()).q.unwrap();
            assert_eq!(n % q, 0, "q = {q} must divide N = {n}");
            // q is the minimal lattice: for prime N it must equal N
            if n == 3 || n == 5 {
                assert_eq!(q, n);
            }
        }
    }

    #[test]
    fn t6_half_gamma_quadratic_is_polished() {
        // branch point gamma = 1/2 has a vanishing discriminant
        let m = catalogue(CatalogueEntry::T6(0.5)).unwrap();
        assert!(deviation(&m) < 1e-10, "Z = {}", deviation(&m));
        assert_abs_diff_eq!(m[(1, 3)].norm(), 1.0, epsilon = 1e-12);
    }
}
