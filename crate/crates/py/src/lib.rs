//! Python bindings for the structured-unitary toolkit: catalogue access,
//! certification, entanglement diagnostics and Bell-value computations.
//! Matrices cross the boundary as nested lists of Python complex numbers.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use umat_core::numerics::ToleranceConfig;
use umat_core::{ame, bell, chm, data, defect, CMatrix};

fn to_py_err(e: umat_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(PyValueError::new_err("need a nonempty rectangular matrix"));
    }
    Ok(CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn real_matrix(rows: Vec<Vec<f64>>) -> PyResult<nalgebra::DMatrix<f64>> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(PyValueError::new_err("need a nonempty rectangular matrix"));
    }
    Ok(nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]))
}

/// Fourier matrix of order n (unimodular, unnormalized).
#[pyfunction]
fn fourier(n: usize) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(matrix_to_rows(&chm::fourier(n).map_err(to_py_err)?))
}

/// Published catalogue matrix; `param` is gamma for T6 or the order for F.
#[pyfunction]
#[pyo3(signature = (name, param=None))]
fn catalogue(name: &str, param: Option<f64>) -> PyResult<Vec<Vec<Complex64>>> {
    let entry = chm::CatalogueEntry::parse(name, param).map_err(to_py_err)?;
    Ok(matrix_to_rows(&chm::catalogue(entry).map_err(to_py_err)?))
}

/// `‖MM† − N·I‖_F`.
#[pyfunction]
fn deviation(matrix: Vec<Vec<Complex64>>) -> PyResult<f64> {
    Ok(chm::deviation(&matrix_from_rows(matrix)?))
}

#[pyfunction]
fn is_chm(matrix: Vec<Vec<Complex64>>) -> PyResult<bool> {
    chm::is_chm(&matrix_from_rows(matrix)?, &ToleranceConfig::default()).map_err(to_py_err)
}

#[pyfunction]
fn dephase(matrix: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(matrix_to_rows(
        &chm::dephase(&matrix_from_rows(matrix)?).map_err(to_py_err)?,
    ))
}

#[pyfunction]
fn haagerup_card(matrix: Vec<Vec<Complex64>>) -> PyResult<usize> {
    Ok(chm::haagerup_card(&matrix_from_rows(matrix)?, &ToleranceConfig::default())
        .map_err(to_py_err)?
        .cardinality)
}

/// Smallest Butson root order up to `q_max`, or None.
#[pyfunction]
#[pyo3(signature = (matrix, q_max=65536))]
fn butson_fit(matrix: Vec<Vec<Complex64>>, q_max: usize) -> PyResult<Option<usize>> {
    Ok(chm::butson_fit(&matrix_from_rows(matrix)?, q_max, &ToleranceConfig::default()).q)
}

/// First-order defect of a (rescaled) unitary matrix.
#[pyfunction]
fn unitary_defect(matrix: Vec<Vec<Complex64>>) -> PyResult<usize> {
    Ok(
        chm::unitary_defect(&matrix_from_rows(matrix)?, &ToleranceConfig::default())
            .map_err(to_py_err)?
            .defect,
    )
}

/// Sinkhorn search; returns (matrix, deviation, iterations, converged).
#[pyfunction]
#[pyo3(signature = (n, seed=0, max_iters=10000, target=1e-9))]
fn sinkhorn(
    n: usize,
    seed: u64,
    max_iters: usize,
    target: f64,
) -> PyResult<(Vec<Vec<Complex64>>, f64, usize, bool)> {
    let tol = ToleranceConfig {
        convergence_tol: target / n as f64,
        ..Default::default()
    };
    let run = chm::sinkhorn_chm(n, seed, max_iters, &tol).map_err(to_py_err)?;
    Ok((
        matrix_to_rows(&run.candidate.matrix),
        run.candidate.deviation,
        run.iterations,
        run.converged,
    ))
}

/// The golden AME(4,6) matrix of order 36.
#[pyfunction]
fn golden_ame() -> Vec<Vec<Complex64>> {
    matrix_to_rows(&ame::golden_ame().m)
}

/// The distinguished order-36 permutation.
#[pyfunction]
fn permutation_p36() -> Vec<Vec<Complex64>> {
    matrix_to_rows(&ame::permutation_p36().m)
}

/// The 2-unitary permutation of order 9.
#[pyfunction]
fn ame43() -> Vec<Vec<Complex64>> {
    matrix_to_rows(&ame::ame43().m)
}

/// `(e_p, g_t)` of a bipartite matrix with local dimension d.
#[pyfunction]
fn ep_gt(matrix: Vec<Vec<Complex64>>, d: usize) -> PyResult<(f64, f64)> {
    let b = ame::BipartiteMatrix::new(d, matrix_from_rows(matrix)?).map_err(to_py_err)?;
    let pt = ame::ep_gt(&b).map_err(to_py_err)?;
    Ok((pt.e_p, pt.g_t))
}

#[pyfunction]
fn is_two_unitary(matrix: Vec<Vec<Complex64>>, d: usize) -> PyResult<bool> {
    let b = ame::BipartiteMatrix::new(d, matrix_from_rows(matrix)?).map_err(to_py_err)?;
    Ok(ame::is_two_unitary(&b, &ToleranceConfig::default()))
}

/// Isoentropic projection `(X + X^{RΓ} + X^{ΓR})/3`.
#[pyfunction]
fn iso_map(matrix: Vec<Vec<Complex64>>, d: usize) -> PyResult<Vec<Vec<Complex64>>> {
    let b = ame::BipartiteMatrix::new(d, matrix_from_rows(matrix)?).map_err(to_py_err)?;
    Ok(matrix_to_rows(&ame::iso_map(&b).m))
}

/// Restricted defect of a normalized vector set: returns the dict
/// {tau, f, z, r, delta}.
#[pyfunction]
fn restricted_defect(
    py: Python<'_>,
    d: usize,
    vectors: Vec<Vec<Complex64>>,
) -> PyResult<PyObject> {
    let set = defect::PovmSet::new(d, vectors).map_err(to_py_err)?;
    let rep =
        defect::restricted_defect_of_set(&set, &ToleranceConfig::default()).map_err(to_py_err)?;
    let out = pyo3::types::PyDict::new_bound(py);
    out.set_item("tau", rep.tau)?;
    out.set_item("f", rep.f)?;
    out.set_item("z", rep.z)?;
    out.set_item("r", rep.r)?;
    out.set_item("delta", rep.delta)?;
    Ok(out.into())
}

/// Two-outcome LHV value of a real core; returns (value, assignment).
#[pyfunction]
fn lhv_value(core: Vec<Vec<f64>>) -> PyResult<(f64, Vec<i8>)> {
    let out = bell::lhv_value_core(&real_matrix(core)?).map_err(to_py_err)?;
    Ok((out.value, out.assignment))
}

/// Circulant Bell-family core of order n.
#[pyfunction]
fn circulant_bell(n: usize) -> PyResult<Vec<Vec<f64>>> {
    let core = bell::circulant_bell(n).map_err(to_py_err)?;
    let r = core.real().map_err(to_py_err)?;
    Ok((0..n).map(|i| (0..n).map(|j| r[(i, j)]).collect()).collect())
}

#[pyfunction]
fn circulant_quantum_value(n: usize) -> PyResult<f64> {
    bell::circulant_quantum_value(n).map_err(to_py_err)
}

/// Tightness report of a ±1 matrix: (classical, vertices, affine_rank, tight).
#[pyfunction]
fn tightness(h: Vec<Vec<f64>>) -> PyResult<(f64, usize, usize, bool)> {
    let rep = bell::tightness(&real_matrix(h)?).map_err(to_py_err)?;
    Ok((
        rep.classical_value,
        rep.vertex_count,
        rep.affine_rank,
        rep.is_tight,
    ))
}

/// Bundled dataset by name: returns (d, vectors).
#[pyfunction]
fn bundled_dataset(name: &str) -> PyResult<(usize, Vec<Vec<Complex64>>)> {
    let set = data::bundled(name)
        .and_then(|b| b.load())
        .map_err(to_py_err)?;
    Ok((set.d, set.vectors))
}

#[pymodule]
fn umat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fourier, m)?)?;
    m.add_function(wrap_pyfunction!(catalogue, m)?)?;
    m.add_function(wrap_pyfunction!(deviation, m)?)?;
    m.add_function(wrap_pyfunction!(is_chm, m)?)?;
    m.add_function(wrap_pyfunction!(dephase, m)?)?;
    m.add_function(wrap_pyfunction!(haagerup_card, m)?)?;
    m.add_function(wrap_pyfunction!(butson_fit, m)?)?;
    m.add_function(wrap_pyfunction!(unitary_defect, m)?)?;
    m.add_function(wrap_pyfunction!(sinkhorn, m)?)?;
    m.add_function(wrap_pyfunction!(golden_ame, m)?)?;
    m.add_function(wrap_pyfunction!(permutation_p36, m)?)?;
    m.add_function(wrap_pyfunction!(ame43, m)?)?;
    m.add_function(wrap_pyfunction!(ep_gt, m)?)?;
    m.add_function(wrap_pyfunction!(is_two_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(iso_map, m)?)?;
    m.add_function(wrap_pyfunction!(restricted_defect, m)?)?;
    m.add_function(wrap_pyfunction!(lhv_value, m)?)?;
    m.add_function(wrap_pyfunction!(circulant_bell, m)?)?;
    m.add_function(wrap_pyfunction!(circulant_quantum_value, m)?)?;
    m.add_function(wrap_pyfunction!(tightness, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_dataset, m)?)?;
    Ok(())
}
