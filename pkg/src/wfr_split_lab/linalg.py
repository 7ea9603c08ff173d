"""Dense symmetric / SPD matrix utilities.

Everything downstream (flow maps, decay functionals, log-concavity
constants) works with symmetric matrices that are analytically symmetric
but accumulate asymmetric round-off, so symmetry is enforced once at
construction by averaging.  Eigendecomposition is the sole matrix-function
mechanism: all matrices in scope are symmetric, so ``V f(L) V^T`` is exact
in exact arithmetic and there is no need for Pade or scaling-and-squaring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionError, NumericInputError, SingularMatrixError

MAX_DIM = 64
SPD_RTOL = 1e-12  # smallest eigenvalue must exceed SPD_RTOL * largest
ORTHONORMALITY_TOL = 1e-10


def _as_matrix(entries) -> np.ndarray:
    a = np.asarray(entries, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DimensionError("matrix dimension must be >= 1")
    if a.shape[0] > MAX_DIM:
        raise DimensionError(f"matrix dimension {a.shape[0]} exceeds the cap {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise NumericInputError("matrix has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """A real symmetric matrix; symmetrized as ``(A + A^T)/2`` on construction."""

    entries: np.ndarray

    def __init__(self, entries):
        a = _as_matrix(entries)
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and orthonormal eigenvectors."""
        w, v = np.linalg.eigh(self.entries)
        gram_defect = np.max(np.abs(v.T @ v - np.eye(self.dim)))
        if gram_defect > ORTHONORMALITY_TOL:
            raise NumericInputError(
                f"eigenvector orthonormality defect {gram_defect:.3e}"
            )
        w.setflags(write=False)
        v.setflags(write=False)
        return w, v

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)


@dataclass(frozen=True, eq=False)
class SpdMatrix(SymMatrix):
    """A symmetric strictly positive definite matrix with cached spectrum."""

    def __init__(self, entries):
        super().__init__(entries)
        w, _ = self.eig
        tol = SPD_RTOL * w[-1]
        if w[-1] <= 0.0 or w[0] <= tol:
            raise SingularMatrixError(
                f"matrix is not strictly positive definite: "
                f"min eigenvalue {w[0]:.6e}, threshold {tol:.6e}"
            )


@dataclass(frozen=True, eq=False)
class GaussianDist:
    """A Gaussian law given by its mean vector and SPD covariance."""

    mean: np.ndarray
    cov: SpdMatrix = field(repr=False)

    def __init__(self, mean, cov):
        m = np.atleast_1d(np.asarray(mean, dtype=float))
        if m.ndim != 1:
            raise DimensionError(f"mean must be a vector, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NumericInputError("mean has non-finite entries")
        if not isinstance(cov, SpdMatrix):
            cov = SpdMatrix(cov)
        if m.shape[0] != cov.dim:
            raise DimensionError(
                f"mean length {m.shape[0]} != covariance dimension {cov.dim}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def gaussian(mean, cov) -> GaussianDist:
    """Convenience constructor accepting scalars, vectors and matrices.

    A scalar covariance is promoted to ``cov * I`` of the mean's dimension.
    """
    m = np.atleast_1d(np.asarray(mean, dtype=float))
    c = np.asarray(cov, dtype=float)
    if c.ndim == 0:
        c = float(c) * np.eye(m.shape[0])
    elif c.ndim == 1:
        c = np.diag(c)
    return GaussianDist(m, SpdMatrix(c))


def sym_expm(a: SymMatrix, s: float) -> SymMatrix:
    """Matrix exponential ``exp(s a)`` of a symmetric matrix.

    Computed as ``V exp(s L) V^T`` from the eigendecomposition; ``s = 0``
    returns the identity exactly.
    """
    if not np.isfinite(s):
        raise NumericInputError("scale factor must be finite")
    if not isinstance(a, SymMatrix):
        a = SymMatrix(a)
    if s == 0.0:
        return SymMatrix(np.eye(a.dim))
    w, v = a.eig
    return SymMatrix((v * np.exp(s * w)) @ v.T)


def spd_inverse(a: SpdMatrix) -> SpdMatrix:
    """Inverse of an SPD matrix via its cached eigendecomposition."""
    if not isinstance(a, SpdMatrix):
        a = SpdMatrix(a)
    w, v = a.eig
    return SpdMatrix((v / w) @ v.T)


def logdet(a: SpdMatrix) -> float:
    """log-determinant of an SPD matrix, as the sum of eigenvalue logs."""
    if not isinstance(a, SpdMatrix):
        a = SpdMatrix(a)
    w, _ = a.eig
    return float(np.sum(np.log(w)))


def min_eig(a: SymMatrix) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    if not isinstance(a, SymMatrix):
        a = SymMatrix(a)
    return float(a.eig[0][0])


def max_eig(a: SymMatrix) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    if not isinstance(a, SymMatrix):
        a = SymMatrix(a)
    return float(a.eig[0][-1])


def sym_inverse(a: SymMatrix, *, context: str = "symmetric inverse"):
    """Inverse of a (possibly indefinite) symmetric matrix.

    Raises :class:`SingularConfigurationError` with the offending eigenvalue
    when the matrix is numerically singular.
    """
    from .errors import SingularConfigurationError

    if not isinstance(a, SymMatrix):
        a = SymMatrix(a)
    w, v = a.eig
    scale = np.max(np.abs(w))
    tol = SPD_RTOL * scale if scale > 0 else 0.0
    small = np.abs(w) <= tol
    if scale == 0.0 or np.any(small):
        bad = 0.0 if scale == 0.0 else float(w[np.argmin(np.abs(w))])
        raise SingularConfigurationError(f"{context} is singular", bad)
    return SymMatrix((v / w) @ v.T)


def sym_sqrt_inv(a: SpdMatrix) -> np.ndarray:
    """``a^{-1/2}`` of an SPD matrix (plain ndarray, internal helper)."""
    w, v = a.eig
    return (v / np.sqrt(w)) @ v.T
