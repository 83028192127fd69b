#!/usr/bin/env python3
"""Smoke test for the Python bindings: exercises the catalogue, the golden
AME matrix, defect reports and Bell values end to end."""

import math
import os
import shutil
import sys
import tempfile

def load_module():
    here = os.path.dirname(os.path.abspath(__file__))
    lib = os.path.join(here, "..", "target", "release", "libumat.so")
    if not os.path.exists(lib):
        sys.exit("build the bindings first: cargo build -p umat-py --release")
    tmp = tempfile.mkdtemp(prefix="umat_py_")
    shutil.copy(lib, os.path.join(tmp, "umat.so"))
    sys.path.insert(0, tmp)
    import umat
    return umat

def approx(a, b, eps=1e-10):
    assert abs(a - b) <= eps, f"{a} != {b} (tol {eps})"

def main():
    umat = load_module()

    f2 = umat.fourier(2)
    assert abs(f2[1][1] - (-1 + 0j)) < 1e-14
    assert umat.is_chm(f2)
    assert umat.haagerup_card(umat.fourier(11)) == 11
    assert umat.butson_fit(umat.fourier(8)) == 8

    t6 = umat.catalogue("T6", 1.0)
    assert umat.is_chm(t6)
    b8a = umat.catalogue("B8a")
    assert umat.butson_fit(b8a) == 20
    assert umat.unitary_defect(b8a) == 7

    m, z, iters, ok = umat.sinkhorn(6, seed=1)
    assert ok and z < 1e-9, (z, iters)
    assert umat.is_chm([[v for v in row] for row in umat.dephase(m)])

    a = umat.golden_ame()
    assert umat.is_two_unitary(a, 6)
    ep, gt = umat.ep_gt(a, 6)
    approx(ep, 1.0, 1e-12)
    approx(gt, 1.0, 1e-12)
    nnz = sum(1 for row in a for v in row if abs(v) > 1e-14)
    assert nnz == 112

    ep, gt = umat.ep_gt(umat.permutation_p36(), 6)
    approx(ep, 314 / 315, 1e-12)
    ep, gt = umat.ep_gt(umat.ame43(), 3)
    approx(ep, 1.0, 1e-12)

    d, vectors = umat.bundled_dataset("ks13_d3")
    rep = umat.restricted_defect(d, vectors)
    assert (rep["tau"], rep["z"]) == (78, 24), rep

    value, x = umat.lhv_value([[1, 1], [1, -1]])
    approx(value, 2.0)
    value, _ = umat.lhv_value(umat.circulant_bell(6))
    approx(value, 20.0)
    approx(umat.circulant_quantum_value(6), 24.0, 1e-9)

    c, verts, rank, tight = umat.tightness([[1, 1], [1, -1]])
    assert (verts, rank, tight) == (4, 3, True)

    print("smoke test passed")

if __name__ == "__main__":
    main()
