"""Equivalence of the compiled flux kernel and its pure-NumPy twin."""

import numpy as np
import pytest

from wfr_split_lab import _kernels_py, kernels
from wfr_split_lab.pde1d import GaussianTarget, edge_weights, gaussian_field, suggest_grid

compiled = pytest.importorskip(
    "wfr_split_lab._cc_kernel", reason="compiled kernel not built"
)


@pytest.fixture(scope="module")
def workload():
    target = GaussianTarget(2.0, 4.0)
    grid = suggest_grid(target, 0.0, 1.0, 1001)
    v = gaussian_field(grid, 0.0, 1.0)
    bp, bm = edge_weights(target, grid)
    r = 0.2  # dt/h^2 under the stability bound
    return v.values, bp, bm, r


def test_backend_selected(workload):
    assert kernels.backend_name() in ("compiled", "numpy")


@pytest.mark.parametrize("n_substeps", [1, 7, 250])
def test_bitwise_identical_results(workload, n_substeps):
    v, bp, bm, r = workload
    a = compiled.advance_flux(v, bp, bm, r, n_substeps)
    b = _kernels_py.advance_flux(v, bp, bm, r, n_substeps)
    assert np.array_equal(a, b)


def test_signed_field_equivalence(workload):
    _, bp, bm, r = workload
    rng = np.random.default_rng(0)
    f = rng.normal(size=bp.shape[0] + 1)
    a = compiled.advance_flux(f, bp, bm, r, 100)
    b = _kernels_py.advance_flux(f, bp, bm, r, 100)
    assert np.array_equal(a, b)


def test_input_not_mutated(workload):
    v, bp, bm, r = workload
    before = v.copy()
    compiled.advance_flux(v, bp, bm, r, 10)
    _kernels_py.advance_flux(v, bp, bm, r, 10)
    assert np.array_equal(v, before)


def test_mass_conserved_exactly(workload):
    v, bp, bm, r = workload
    out = kernels.advance_flux(v, bp, bm, r, 500)
    assert float(np.sum(out)) == pytest.approx(float(np.sum(v)), rel=1e-13)
