//! Excess-based analysis of bipartite Bell inequalities: correlation
//! matrices, classical (LHV) values via the taxicab reduction, quantum and
//! classical upper bounds, the circulant family with quantum advantage,
//! qubit Bell operators, unbiased vectors and tightness of inequalities.

use std::collections::HashSet;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::numerics::{svd_values, CMatrix};
use crate::{Error, Result};

/// Two parties, `m` settings each, `q` outcomes per setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct BellScenario {
    pub q: usize,
    pub m: usize,
}

impl BellScenario {
    pub fn new(q: usize, m: usize) -> Result<Self> {
        if q < 2 || m < 2 {
            return Err(Error::Dimension(format!(
                "scenario needs q ≥ 2 and m ≥ 2, got q = {q}, m = {m}"
            )));
        }
        Ok(BellScenario { q, m })
    }

    pub fn order(&self) -> usize {
        self.q * self.m
    }
}

/// Coefficient matrix of order `qm` obeying the conjugation symmetry
/// `M_{m[q−s]+x, m[q−t]+y} = M*_{ms+x, mt+y}`.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub scenario: BellScenario,
    pub m: CMatrix,
}

impl CorrelationMatrix {
    /// `M_{ms+x, mt+y} = (1/√q) Σ_{a,b} ω^{sa+tb} S^{ab}_{xy}` from real
    /// coefficients `S` indexed `[a][b][x][y]`.
    pub fn from_coefficients(s: &[Vec<Vec<Vec<f64>>>], scenario: BellScenario) -> Result<Self> {
        let (q, m) = (scenario.q, scenario.m);
        if s.len() != q
            || s.iter().any(|sa| {
                sa.len() != q
                    || sa
                        .iter()
                        .any(|sab| sab.len() != m || sab.iter().any(|r| r.len() != m))
            })
        {
            return Err(Error::Dimension(format!(
                "coefficients must have shape {q}x{q}x{m}x{m}"
            )));
        }
        let n = q * m;
        let scale = 1.0 / (q as f64).sqrt();
        let mat = CMatrix::from_fn(n, n, |row, col| {
            let (sv, x) = (row / m, row % m);
            let (tv, y) = (col / m, col % m);
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, sa) in s.iter().enumerate() {
                for (b, sab) in sa.iter().enumerate() {
                    let phase = TAU * ((sv * a + tv * b) % q) as f64 / q as f64;
                    acc += Complex64::from_polar(sab[x][y] * scale, phase);
                }
            }
            acc
        });
        let out = CorrelationMatrix { scenario, m: mat };
        debug_assert!(out.symmetry_residual() < 1e-10);
        Ok(out)
    }

    /// Wraps an existing matrix, checking the symmetry constraint.
    pub fn from_matrix(scenario: BellScenario, m: CMatrix) -> Result<Self> {
        if m.nrows() != scenario.order() || m.ncols() != scenario.order() {
            return Err(Error::Dimension(format!(
                "correlation matrix must have order {}",
                scenario.order()
            )));
        }
        let out = CorrelationMatrix { scenario, m };
        let res = out.symmetry_residual();
        if res > 1e-10 {
            return Err(Error::Contract(format!(
                "symmetry constraint violated (residual {res:.3e})"
            )));
        }
        Ok(out)
    }

    /// Residual of the conjugation symmetry.
    pub fn symmetry_residual(&self) -> f64 {
        let (q, m) = (self.scenario.q, self.scenario.m);
        let mut worst = 0.0f64;
        for s in 0..q {
            for t in 0..q {
                for x in 0..m {
                    for y in 0..m {
                        let a = self.m[(m * ((q - s) % q) + x, m * ((q - t) % q) + y)];
                        let b = self.m[(m * s + x, m * t + y)];
                        worst = worst.max((a - b.conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// Deletes the first `m` rows and columns (the marginal block).
    pub fn core(&self) -> BellCore {
        let m = self.scenario.m;
        let n = self.scenario.order() - m;
        BellCore {
            core: CMatrix::from_fn(n, n, |i, j| self.m[(i + m, j + m)]),
        }
    }
}

/// The nontrivial core of order `(q−1)m`.
#[derive(Debug, Clone)]
pub struct BellCore {
    pub core: CMatrix,
}

impl BellCore {
    pub fn from_real(rows: &DMatrix<f64>) -> Self {
        BellCore {
            core: rows.map(|x| Complex64::new(x, 0.0)),
        }
    }

    pub fn order(&self) -> usize {
        self.core.nrows()
    }

    /// Real view; errors when materially complex.
    pub fn real(&self) -> Result<DMatrix<f64>> {
        let imax = self.core.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
        if imax > 1e-10 {
            return Err(Error::Contract(format!(
                "core has complex entries (max imaginary part {imax:.3e})"
            )));
        }
        Ok(self.core.map(|z| z.re))
    }
}

/// Sum of all entries; the imaginary part must vanish.
pub fn excess(m: &CMatrix) -> Result<f64> {
    let s: Complex64 = m.iter().sum();
    if s.im.abs() > 1e-10 * (1.0 + s.norm()) {
        return Err(Error::Contract(format!(
            "excess is materially complex ({s})"
        )));
    }
    Ok(s.re)
}

/// Classical value and one maximizing assignment.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LhvOutcome {
    pub value: f64,
    /// Optimal ±1 assignment on the first party (two-outcome path).
    pub assignment: Vec<i8>,
}

const ENUM_CAP: u64 = 1 << 24;

/// Two-outcome LHV value of a real core:
/// `C = max_{x ∈ {−1,1}ⁿ} ‖ core·x ‖₁`, evaluated with Gray-code
/// single-flip updates. Guarded at `n ≤ 24`.
pub fn lhv_value_core(core: &DMatrix<f64>) -> Result<LhvOutcome> {
    let n = core.ncols();
    if n == 0 {
        return Err(Error::Dimension("empty core".into()));
    }
    if n > 24 {
        return Err(Error::Capacity(format!(
            "two-outcome enumeration capped at n = 24, got {n}"
        )));
    }
    let rows = core.nrows();
    // start at x = (1, ..., 1)
    let mut v: Vec<f64> = (0..rows).map(|i| core.row(i).sum()).collect();
    let mut x = vec![1i8; n];
    let mut best = v.iter().map(|t| t.abs()).sum::<f64>();
    let mut best_x = x.clone();
    let total: u64 = 1 << n;
    for g in 1..total {
        let bit = g.trailing_zeros() as usize; // Gray code flip position
        let sign = -2.0 * x[bit] as f64;
        x[bit] = -x[bit];
        for i in 0..rows {
            v[i] += sign * core[(i, bit)];
        }
        let val: f64 = v.iter().map(|t| t.abs()).sum();
        if val > best + 1e-12 {
            best = val;
            best_x = x.clone();
        }
    }
    Ok(LhvOutcome {
        value: best,
        assignment: best_x,
    })
}

/// General-`q` LHV value of the full correlation matrix: enumerate the
/// first-party outputs, pick each second-party output by the per-column
/// maximum (the taxicab reduction generalized to roots of unity).
/// Returns the value and the optimal output relabelings.
pub fn lhv_value_general(corr: &CorrelationMatrix) -> Result<(f64, Vec<usize>, Vec<usize>)> {
    let (q, m) = (corr.scenario.q, corr.scenario.m);
    let total = (q as u64).checked_pow(m as u32).filter(|&t| t <= ENUM_CAP);
    let Some(total) = total else {
        return Err(Error::Capacity(format!(
            "general-q enumeration capped at q^m ≤ 2^24, got q = {q}, m = {m}"
        )));
    };
    let n = q * m;
    let omega: Vec<Complex64> = (0..q)
        .map(|e| Complex64::from_polar(1.0, TAU * e as f64 / q as f64))
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_a = vec![0usize; m];
    let mut best_b = vec![0usize; m];
    let mut a = vec![0usize; m];
    for code in 0..total {
        let mut c = code;
        for ax in a.iter_mut() {
            *ax = (c % q as u64) as usize;
            c /= q as u64;
        }
        // column functionals c_{t,y} = Σ_{s,x} M_{ms+x, mt+y} ω^{s a_x}
        let mut value = 0.0;
        let mut b = vec![0usize; m];
        for y in 0..m {
            let mut col = vec![Complex64::new(0.0, 0.0); q];
            for t in 0..q {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..q {
                    for x in 0..m {
                        acc += corr.m[(m * s + x, m * t + y)] * omega[(s * a[x]) % q];
                    }
                }
                col[t] = acc;
            }
            let (by, contrib) = (0..q)
                .map(|bv| {
                    let tot: Complex64 =
                        (0..q).map(|t| col[t] * omega[(t * bv) % q]).sum();
                    (bv, tot.re)
                })
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            b[y] = by;
            value += contrib;
        }
        if value > best + 1e-12 {
            best = value;
            best_a = a.clone();
            best_b = b;
        }
        let _ = n;
    }
    Ok((best, best_a, best_b))
}

/// Maximal excess with respect to the root-of-unity relabeling diagonals,
/// together with the optimal relabelings. Equals the LHV value of the full
/// matrix by construction of the reduction.
pub fn max_excess_q(corr: &CorrelationMatrix) -> Result<(f64, Vec<usize>, Vec<usize>)> {
    lhv_value_general(corr)
}

/// The three published bounds on classical and quantum values.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BoundsReport {
    /// `N·r(M)` with `r` the numerical radius (classical bound).
    pub c_radius: f64,
    /// `N·σ(M)` with `σ` the largest singular value (quantum bound).
    pub q_singular: f64,
    /// `√N·ν(M)` with `ν` the row-sum quadratic mean (classical bound).
    pub c_taxicab: f64,
    pub numerical_radius: f64,
}

fn hermitian_part_max_eig(m: &CMatrix, theta: f64) -> f64 {
    let rot = m * Complex64::from_polar(1.0, theta);
    let herm = (&rot + rot.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max)
}

/// Numerical radius via the rotated-Hermitian-part formulation: a coarse
/// 360-point sweep over the phase followed by golden-section refinement.
pub fn numerical_radius(m: &CMatrix) -> f64 {
    let coarse = 360;
    let mut best_theta = 0.0;
    let mut best = f64::MIN;
    for i in 0..coarse {
        let theta = TAU * i as f64 / coarse as f64;
        let v = hermitian_part_max_eig(m, theta);
        if v > best {
            best = v;
            best_theta = theta;
        }
    }
    // golden-section around the best coarse sample
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_theta - TAU / coarse as f64, best_theta + TAU / coarse as f64);
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    let mut fc = hermitian_part_max_eig(m, c);
    let mut fd = hermitian_part_max_eig(m, d);
    while hi - lo > 1e-10 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = hermitian_part_max_eig(m, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = hermitian_part_max_eig(m, d);
        }
    }
    best.max(fc).max(fd)
}

/// Evaluates the three bounds for a correlation matrix.
pub fn bounds(m: &CMatrix) -> Result<BoundsReport> {
    let n = m.nrows() as f64;
    let r = numerical_radius(m);
    let sigma = svd_values(m)?[0];
    let nu = (0..m.nrows())
        .map(|i| {
            let s: Complex64 = m.row(i).iter().copied().sum();
            s.norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    Ok(BoundsReport {
        c_radius: n * r,
        q_singular: n * sigma,
        c_taxicab: n.sqrt() * nu,
        numerical_radius: r,
    })
}

/// The circulant family `M_n = circ[−1 × ⌊n/2⌋, 1 × ⌈n/2⌉]`.
pub fn circulant_bell(n: usize) -> Result<BellCore> {
    if n < 3 {
        return Err(Error::Dimension("circulant family starts at n = 3".into()));
    }
    let first: Vec<f64> = (0..n)
        .map(|j| if j < n / 2 { -1.0 } else { 1.0 })
        .collect();
    let core = DMatrix::<f64>::from_fn(n, n, |i, j| first[(j + n - i) % n]);
    Ok(BellCore::from_real(&core))
}

/// Quantum value `n·σ_max(M_n)`; for even `n` the largest singular value is
/// `2/sin(π/n)`.
pub fn circulant_quantum_value(n: usize) -> Result<f64> {
    let core = circulant_bell(n)?;
    let sigma = svd_values(&core.core)?[0];
    Ok(n as f64 * sigma)
}

/// Qubit Bell operator analysis for a two-outcome core.
#[derive(Debug, Clone)]
pub struct QubitBellOperator {
    pub operator: CMatrix,
    /// Template parameter when the operator matches the single-parameter
    /// form, `c = Σ M_jk cos(2πα_j/n)·cos(2πβ_k/n)`.
    pub template_c: Option<f64>,
    pub largest_eigenvalue: f64,
}

/// Builds `Σ_jk core_jk · A_j ⊗ B_k` from the rotation-conjugated diagonal
/// observables `X(2πφ/n) = [[cos, −sin], [−sin, −cos]]` and checks it
/// against the single-parameter template.
pub fn qubit_bell_operator(
    core: &DMatrix<f64>,
    alphas: &[f64],
    betas: &[f64],
) -> Result<QubitBellOperator> {
    let n = core.nrows();
    if core.ncols() != n || alphas.len() != n || betas.len() != n {
        return Err(Error::Dimension(format!(
            "need square core with matching phase vectors of length {n}"
        )));
    }
    let x_op = |phi: f64| -> DMatrix<f64> {
        let t = TAU * phi / n as f64;
        DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), -t.sin(), -t.cos()])
    };
    let mut op = DMatrix::<f64>::zeros(4, 4);
    for j in 0..n {
        let aj = x_op(alphas[j]);
        for k in 0..n {
            let bk = x_op(betas[k]);
            let w = core[(j, k)];
            if w == 0.0 {
                continue;
            }
            for r in 0..4 {
                for c in 0..4 {
                    op[(r, c)] += w * aj[(r / 2, c / 2)] * bk[(r % 2, c % 2)];
                }
            }
        }
    }
    let c_val: f64 = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| {
            core[(j, k)] * (TAU * alphas[j] / n as f64).cos() * (TAU * betas[k] / n as f64).cos()
        })
        .sum();
    let template = DMatrix::from_row_slice(4, 4, &[
        c_val, 0.0, 0.0, c_val, //
        0.0, -c_val, c_val, 0.0, //
        0.0, c_val, -c_val, 0.0, //
        c_val, 0.0, 0.0, c_val,
    ]);
    let template_c = if (&op - &template).norm() <= 1e-10 * (1.0 + op.norm()) {
        Some(c_val)
    } else {
        None
    };
    let herm = op.map(|x| Complex64::new(x, 0.0));
    let eig = SymmetricEigen::new(herm);
    let largest = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    Ok(QubitBellOperator {
        operator: op.map(|x| Complex64::new(x, 0.0)),
        template_c,
        largest_eigenvalue: largest,
    })
}

/// All `x ∈ {±1}ⁿ` with `|⟨row_j, x⟩| = √n` for every row of an integer
/// ±1 Hadamard matrix, in exact integer arithmetic. Empty whenever `n` is
/// not a perfect square.
pub fn unbiased_vectors(h: &DMatrix<f64>) -> Result<Vec<Vec<i8>>> {
    let n = h.nrows();
    if h.ncols() != n || n == 0 {
        return Err(Error::Dimension("need a square ±1 matrix".into()));
    }
    if n > 24 {
        return Err(Error::Capacity(format!(
            "unbiased-vector enumeration capped at n = 24, got {n}"
        )));
    }
    let hi: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| h[(i, j)].round() as i64).collect())
        .collect();
    if hi
        .iter()
        .flatten()
        .zip(h.iter())
        .any(|(&a, &b)| (a as f64 - b).abs() > 1e-9 || a.abs() != 1)
    {
        return Err(Error::Contract("entries must be ±1".into()));
    }
    let s = (n as f64).sqrt().round() as i64;
    if (s * s) as usize != n {
        // |<row, x>| = sqrt(n) has no integer solution for non-square n
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut x = vec![1i8; n];
    let mut v: Vec<i64> = (0..n).map(|i| hi[i].iter().sum()).collect();
    if v.iter().all(|&t| t.abs() == s) {
        out.push(x.clone());
    }
    let total: u64 = 1 << n;
    for g in 1..total {
        let bit = g.trailing_zeros() as usize;
        let sgn = -2 * x[bit] as i64;
        x[bit] = -x[bit];
        for i in 0..n {
            v[i] += sgn * hi[i][bit];
        }
        if v.iter().all(|&t| t.abs() == s) {
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// Facet diagnosis of the two-outcome correlation inequality induced by a
/// ±1 matrix.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TightnessReport {
    pub classical_value: f64,
    pub vertex_count: usize,
    pub affine_rank: usize,
    pub is_tight: bool,
}

/// Enumerates the deterministic strategies attaining the classical value.
/// Vertices are the outer products `x·yᵀ` with `y` the componentwise sign
/// of `Hᵀx` (both completions for zero components); the inequality is tight
/// iff the affine rank of the vertex set is `m² − 1`.
pub fn tightness(h: &DMatrix<f64>) -> Result<TightnessReport> {
    let m = h.nrows();
    if h.ncols() != m || m == 0 {
        return Err(Error::Dimension("need a square ±1 matrix".into()));
    }
    if m > 12 {
        return Err(Error::Capacity(format!(
            "tightness enumeration capped at m = 12, got {m}"
        )));
    }
    let ht = h.transpose();
    let mut best = f64::MIN;
    let mut verts: HashSet<Vec<i8>> = HashSet::new();
    let mut x = vec![1i8; m];
    let mut v: Vec<f64> = (0..m).map(|i| ht.row(i).sum()).collect();
    let mut push_vertices = |x: &[i8], v: &[f64], verts: &mut HashSet<Vec<i8>>| {
        let zeros: Vec<usize> = (0..m).filter(|&i| v[i].abs() < 1e-9).collect();
        let combos: u64 = 1 << zeros.len();
        for zb in 0..combos {
            let mut y: Vec<i8> = v
                .iter()
                .map(|&t| if t >= 0.0 { 1i8 } else { -1i8 })
                .collect();
            for (t, &i) in zeros.iter().enumerate() {
                y[i] = if zb >> t & 1 == 1 { 1 } else { -1 };
            }
            let mut outer: Vec<i8> = Vec::with_capacity(m * m);
            for &xi in x {
                for &yj in &y {
                    outer.push(xi * yj);
                }
            }
            // canonical sign: (x, y) and (−x, −y) are the same vertex
            if outer.iter().find(|&&t| t != 0).map_or(false, |&t| t < 0) {
                for t in outer.iter_mut() {
                    *t = -*t;
                }
            }
            verts.insert(outer);
        }
    };
    let val0: f64 = v.iter().map(|t| t.abs()).sum();
    best = best.max(val0);
    push_vertices(&x, &v, &mut verts);
    let total: u64 = 1 << m;
    for g in 1..total {
        let bit = g.trailing_zeros() as usize;
        let sgn = -2.0 * x[bit] as f64;
        x[bit] = -x[bit];
        for i in 0..m {
            v[i] += sgn * ht[(i, bit)];
        }
        let val: f64 = v.iter().map(|t| t.abs()).sum();
        if val > best + 1e-9 {
            best = val;
            verts.clear();
            push_vertices(&x, &v, &mut verts);
        } else if (val - best).abs() <= 1e-9 {
            push_vertices(&x, &v, &mut verts);
        }
    }
    let vlist: Vec<Vec<i8>> = verts.into_iter().collect();
    let affine_rank = if vlist.len() < 2 {
        0
    } else {
        let rows = vlist.len() - 1;
        let diffs = DMatrix::<f64>::from_fn(rows, m * m, |i, j| {
            (vlist[i + 1][j] - vlist[0][j]) as f64
        });
        let sv = crate::numerics::real_singular_values(&diffs);
        crate::numerics::rank_from_singulars(&sv, 1e-9)
    };
    Ok(TightnessReport {
        classical_value: best,
        vertex_count: vlist.len(),
        affine_rank,
        is_tight: affine_rank == m * m - 1,
    })
}

/// Real Hadamard matrix of order 12 (Paley construction over GF(11)).
pub fn hadamard_12() -> DMatrix<f64> {
    let q = 11i64;
    let residues: HashSet<i64> = (1..q).map(|x| (x * x) % q).collect();
    let chi = |x: i64| -> f64 {
        let x = x.rem_euclid(q);
        if x == 0 {
            0.0
        } else if residues.contains(&x) {
            1.0
        } else {
            -1.0
        }
    };
    let mut s = DMatrix::<f64>::zeros(12, 12);
    for j in 1..12 {
        s[(0, j)] = 1.0;
        s[(j, 0)] = -1.0;
    }
    for i in 0..11 {
        for j in 0..11 {
            s[(i + 1, j + 1)] = chi(i as i64 - j as i64);
        }
    }
    s + DMatrix::identity(12, 12)
}
