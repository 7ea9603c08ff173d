import math

import numpy as np
import pytest

from wfr_split_lab.divergences import (
    default_domain,
    divergence_report,
    fisher_info_gaussian,
    kl_gaussian,
    kl_grid,
)
from wfr_split_lab.errors import ConsistencyError, DimensionError, GridMismatchError
from wfr_split_lab.grid import DensityField, Grid1D
from wfr_split_lab.linalg import gaussian
from wfr_split_lab.pde1d import gaussian_field

# hand evaluation of the closed form for a=(0,1), b=(0,e):
# (log e - 1 + 1/e)/2 = 1/(2e)
KL_UNIT_VS_E = 1.0 / (2.0 * math.e)


def mc_kl_oracle(a, b, n=10**7, seed=42):
    """Independent oracle: Monte Carlo estimate of E_a[log a/b] in 1D."""
    rng = np.random.default_rng(seed)
    sa = math.sqrt(a.cov.entries[0, 0])
    x = rng.normal(a.mean[0], sa, size=n)
    log_a = -0.5 * (x - a.mean[0]) ** 2 / a.cov.entries[0, 0] - math.log(sa)
    sb = math.sqrt(b.cov.entries[0, 0])
    log_b = -0.5 * (x - b.mean[0]) ** 2 / b.cov.entries[0, 0] - math.log(sb)
    return float(np.mean(log_a - log_b))


def mc_fisher_oracle(a, b, n=10**7, seed=42):
    """Independent oracle: Monte Carlo estimate of E_a|d/dx log(a/b)|^2 in 1D."""
    rng = np.random.default_rng(seed)
    x = rng.normal(a.mean[0], math.sqrt(a.cov.entries[0, 0]), size=n)
    grad = -(x - a.mean[0]) / a.cov.entries[0, 0] + (x - b.mean[0]) / b.cov.entries[0, 0]
    return float(np.mean(grad**2))


def quadrature_kl_oracle(a, b, lo, hi, n=200001):
    x = np.linspace(lo, hi, n)
    log_a = -0.5 * (x - a.mean[0]) ** 2 / a.cov.entries[0, 0]
    log_b = -0.5 * (x - b.mean[0]) ** 2 / b.cov.entries[0, 0]
    pa = np.exp(log_a)
    pa /= np.trapezoid(pa, x)
    pb = np.exp(log_b)
    pb /= np.trapezoid(pb, x)
    mask = pa > 1e-300
    integrand = np.zeros_like(pa)
    integrand[mask] = pa[mask] * (np.log(pa[mask]) - np.log(pb[mask]))
    return float(np.trapezoid(integrand, x))


class TestKlGaussian:
    def test_zero_on_equal(self):
        a = gaussian([1.0, -2.0], np.diag([2.0, 3.0]))
        assert kl_gaussian(a, a) == 0.0

    def test_unit_vs_e_closed_form(self):
        a = gaussian([0.0], [[1.0]])
        b = gaussian([0.0], [[math.e]])
        assert kl_gaussian(a, b) == pytest.approx(KL_UNIT_VS_E, abs=1e-15)

    def test_against_monte_carlo_oracle(self):
        a = gaussian([0.0], [[1.0]])
        b = gaussian([0.0], [[math.e]])
        assert abs(kl_gaussian(a, b) - mc_kl_oracle(a, b)) < 1e-3

    def test_figure_normalizer_against_quadrature(self):
        init = gaussian([0.0], [[1.0]])
        target = gaussian([20.0], [[100.0]])
        oracle = quadrature_kl_oracle(init, target, -60.0, 100.0)
        assert abs(kl_gaussian(init, target) - oracle) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            kl_gaussian(gaussian([0.0], [[1.0]]), gaussian([0.0, 0.0], np.eye(2)))

    def test_nonnegative_random_pairs(self):
        rng = np.random.default_rng(30)
        for d in (1, 2, 4):
            for _ in range(10):
                ma = rng.normal(size=(d, d))
                mb = rng.normal(size=(d, d))
                a = gaussian(rng.normal(size=d), ma @ ma.T + d * np.eye(d))
                b = gaussian(rng.normal(size=d), mb @ mb.T + d * np.eye(d))
                kl = kl_gaussian(a, b)
                assert kl >= 0.0
                assert kl > 1e-8  # distinct pairs with overwhelming probability


class TestFisherInfo:
    def test_zero_on_equal(self):
        a = gaussian([0.5], [[2.0]])
        assert fisher_info_gaussian(a, a) == 0.0

    def test_against_monte_carlo_oracle(self):
        a = gaussian([0.0], [[1.0]])
        b = gaussian([0.0], [[2.0]])
        val = fisher_info_gaussian(a, b)
        oracle = mc_fisher_oracle(a, b)
        assert abs(val - oracle) / oracle < 1e-3

    def test_log_sobolev_sanity(self):
        # for a Gaussian reference the functional inequality constant is the
        # largest covariance eigenvalue
        rng = np.random.default_rng(31)
        for _ in range(20):
            a = gaussian([rng.uniform(-2, 2)], [[10 ** rng.uniform(-1, 1)]])
            b = gaussian([rng.uniform(-2, 2)], [[10 ** rng.uniform(-1, 1)]])
            lam = b.cov.entries[0, 0]
            assert kl_gaussian(a, b) <= 0.5 * lam * fisher_info_gaussian(a, b) + 1e-12


class TestDivergenceReport:
    def test_jeffreys_is_sum(self):
        a = gaussian([0.0], [[1.0]])
        b = gaussian([2.0], [[3.0]])
        rep = divergence_report(a, b)
        assert rep.jeffreys == rep.kl_forward + rep.kl_reverse
        assert abs(rep.jeffreys - kl_gaussian(a, b) - kl_gaussian(b, a)) <= 1e-12

    def test_all_fields_nonnegative(self):
        a = gaussian([0.0], [[1.0]])
        b = gaussian([1.0], [[0.5]])
        rep = divergence_report(a, b)
        assert min(rep.kl_forward, rep.kl_reverse, rep.jeffreys, rep.fisher_info) >= 0.0


class TestKlGrid:
    def test_zero_on_equal(self):
        grid = Grid1D(-10.0, 10.0, 2001)
        p = gaussian_field(grid, 0.0, 1.0)
        assert kl_grid(p, p) <= 1e-10

    def test_matches_gaussian_closed_form(self):
        grid = Grid1D(-12.0, 12.0, 4001)
        p = gaussian_field(grid, 0.0, 1.0)
        q = gaussian_field(grid, 0.0, math.e)
        assert abs(kl_grid(p, q) - KL_UNIT_VS_E) < 1e-5

    def test_refinement_converges_monotonically(self):
        gaps = []
        for n in (1001, 4001, 16001):
            grid = Grid1D(-12.0, 12.0, n)
            p = gaussian_field(grid, 0.0, 1.0)
            q = gaussian_field(grid, 0.0, math.e)
            gaps.append(abs(kl_grid(p, q) - KL_UNIT_VS_E))
        assert gaps[0] >= gaps[1] >= gaps[2]
        assert gaps[2] < 1e-6

    def test_zero_density_cells_skipped(self):
        grid = Grid1D(-10.0, 10.0, 1001)
        q = gaussian_field(grid, 0.0, 4.0)
        vals = np.exp(-0.5 * grid.nodes**2)
        vals[: grid.n_points // 4] = 0.0  # hard support cut where q > 0
        p = DensityField.from_raw(grid, vals)
        assert math.isfinite(kl_grid(p, q))

    def test_grid_mismatch(self):
        p = gaussian_field(Grid1D(-10.0, 10.0, 1001), 0.0, 1.0)
        q = gaussian_field(Grid1D(-11.0, 10.0, 1001), 0.0, 1.0)
        with pytest.raises(GridMismatchError):
            kl_grid(p, q)

    def test_unnormalized_input_rejected(self):
        grid = Grid1D(-10.0, 10.0, 1001)
        p = gaussian_field(grid, 0.0, 1.0)
        bad = DensityField(grid, p.values * 2.0)
        with pytest.raises(ConsistencyError):
            kl_grid(bad, p)


class TestDefaultDomain:
    def test_covers_both_laws(self):
        a = gaussian([0.0], [[1.0]])
        b = gaussian([20.0], [[100.0]])
        lo, hi = default_domain(a, b)
        assert lo == -80.0
        assert hi == 120.0
