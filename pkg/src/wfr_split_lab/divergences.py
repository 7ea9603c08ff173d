"""Exact divergences between Gaussians and quadrature divergences on grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DimensionError, GridMismatchError
from .grid import DensityField
from .linalg import GaussianDist, sym_sqrt_inv

# magnitudes below these thresholds are treated as round-off and clamped to 0
GAUSSIAN_CLAMP = 1e-12
GRID_CLAMP = 1e-8
SUPPORT_FLOOR = 1e-300


@dataclass(frozen=True)
class DivergenceReport:
    """Forward/reverse KL, their sum, and the relative Fisher information."""

    kl_forward: float
    kl_reverse: float
    jeffreys: float
    fisher_info: float


def _check_pair(a: GaussianDist, b: GaussianDist):
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def _clamp(x: float, tol: float, what: str) -> float:
    if x < -tol:
        raise ConsistencyError(f"{what} is {x:.3e}, more negative than round-off allows")
    return max(x, 0.0)


def kl_gaussian(a: GaussianDist, b: GaussianDist) -> float:
    """KL(a || b) between Gaussians.

    Evaluated in gap form: with ``E = cov_a - cov_b`` and ``d = mean_a -
    mean_b``, the value is ``(sum_i [s_i - log(1 + s_i)] + d^T B^{-1} d)/2``
    where ``s_i`` are eigenvalues of ``B^{-1/2} E B^{-1/2}``.  The
    ``log1p``-based form stays accurate as ``a -> b``.
    """
    _check_pair(a, b)
    b_isqrt = sym_sqrt_inv(b.cov)
    gap = a.cov.entries - b.cov.entries
    s = np.linalg.eigvalsh(b_isqrt @ gap @ b_isqrt)
    eps = b_isqrt @ (a.mean - b.mean)
    val = 0.5 * (float(np.sum(s - np.log1p(s))) + float(eps @ eps))
    return _clamp(val, GAUSSIAN_CLAMP, "Gaussian KL")


def fisher_info_gaussian(a: GaussianDist, b: GaussianDist) -> float:
    """Relative Fisher information of ``a`` with respect to ``b``.

    The mean-zero part is ``Tr[(A^{-1} - B^{-1}) A (A^{-1} - B^{-1})]`` and
    the mean shift contributes ``d^T B^{-2} d``.
    """
    from .linalg import spd_inverse

    _check_pair(a, b)
    a_inv = spd_inverse(a.cov).entries
    b_inv = spd_inverse(b.cov).entries
    diff = a_inv - b_inv
    d = b_inv @ (a.mean - b.mean)
    val = float(np.trace(diff @ a.cov.entries @ diff)) + float(d @ d)
    return _clamp(val, GAUSSIAN_CLAMP, "relative Fisher information")


def divergence_report(a: GaussianDist, b: GaussianDist) -> DivergenceReport:
    kl_f = kl_gaussian(a, b)
    kl_r = kl_gaussian(b, a)
    return DivergenceReport(kl_f, kl_r, kl_f + kl_r, fisher_info_gaussian(a, b))


def kl_grid(p: DensityField, q: DensityField) -> float:
    """KL(p || q) by composite trapezoid quadrature on a shared grid.

    Cells where ``p`` is below the support floor contribute zero (the
    ``0 log 0 = 0`` convention).  Values in ``(-1e-8, 0)`` are quadrature
    round-off and clamp to zero; anything more negative raises.
    """
    if p.grid != q.grid:
        raise GridMismatchError("density fields live on different grids")
    for f, name in ((p, "p"), (q, "q")):
        norm = f.normalization()
        if abs(norm - 1.0) > 1e-8:
            raise ConsistencyError(f"{name} is not normalized: integral {norm!r}")
    mask = p.values >= SUPPORT_FLOOR
    integrand = np.zeros_like(p.values)
    qv = np.where(q.values >= SUPPORT_FLOOR, q.values, SUPPORT_FLOOR)
    integrand[mask] = p.values[mask] * (np.log(p.values[mask]) - np.log(qv[mask]))
    val = float(np.trapezoid(integrand, dx=p.grid.spacing))
    return _clamp(val, GRID_CLAMP, "grid KL")


def default_domain(*dists: GaussianDist, half_widths: float = 10.0) -> tuple[float, float]:
    """1D quadrature domain covering every law to ``half_widths`` deviations."""
    lo = np.inf
    hi = -np.inf
    for d in dists:
        if d.dim != 1:
            raise DimensionError("default_domain is for 1D laws")
        m = float(d.mean[0])
        s = float(np.sqrt(d.cov.entries[0, 0]))
        lo = min(lo, m - half_widths * s)
        hi = max(hi, m + half_widths * s)
    return lo, hi
