"""Closed-form evolution maps for Gaussian initial and target laws.

The three flows of interest (diffusion/transport toward the target,
birth-death reweighting toward the target, and their combination) all map
Gaussians to Gaussians.  This module implements:

* the exact combined flow ``wfr_exact``,
* the pure transport map ``w_step`` (an Ornstein-Uhlenbeck update),
* the pure reweighting map ``fr_step`` (precision interpolation),
* single steps of the two alternating compositions (``split_step``),
* multi-step trajectories (``iterate_split``),
* a generalized perturbed flow ``general_mt_solution`` covering all of the
  above through one time-dependent quadratic perturbation matrix,
* a fixed-step RK4 moment-ODE integrator used as an independent oracle,
* a series/closed-form cross-check for the quadratic perturbation that the
  reweight-first ordering induces.

Everything is expressed with decaying matrix exponentials only, so the maps
stay finite for arbitrarily large times.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import divergences
from .errors import (
    DimensionError,
    NumericInputError,
    SingularConfigurationError,
    StepSizeError,
)
from .linalg import GaussianDist, SpdMatrix, SymMatrix

# Relative threshold below which the initial covariance is treated as equal
# to the target covariance; the resolvent closed forms need the gap to be
# invertible even though the flow itself is perfectly well posed there.
DEGENERATE_RTOL = 1e-10


class MtKind(enum.Enum):
    """Which quadratic perturbation drives the generalized flow."""

    ZERO = "zero"
    WFR_SPLIT_WFR = "wfr-split-wfr"
    WFR_SPLIT_FRW = "wfr-split-frw"


@dataclass(frozen=True, eq=False)
class MtSpec:
    """Perturbation selector for the generalized flow.

    ``gamma_step`` records the step size whose one-step splitting the
    perturbed PDE reproduces; it is required (and only meaningful) for the
    split kinds.
    """

    kind: MtKind
    gamma_step: float | None = None

    def __post_init__(self):
        if self.kind is not MtKind.ZERO:
            if self.gamma_step is None or not self.gamma_step > 0:
                raise ValueError("gamma_step must be > 0 for split kinds")


class SplitOrder(enum.Enum):
    W_THEN_FR = "w-fr"
    FR_THEN_W = "fr-w"


@dataclass(frozen=True, eq=False)
class WfrContext:
    """Precomputed target data shared by every Gaussian operation.

    Holds the target law, its precision, the symmetric rate matrix
    ``precision + I/2`` that governs the covariance-gap decay, and that
    matrix's spectrum.
    """

    target: GaussianDist
    c_pi_inv: SpdMatrix
    gamma_mat: SpdMatrix
    gamma_eigvals: np.ndarray
    gamma_eigvecs: np.ndarray

    @classmethod
    def from_target(cls, target: GaussianDist) -> "WfrContext":
        from .linalg import spd_inverse

        c_pi_inv = spd_inverse(target.cov)
        gamma_mat = SpdMatrix(c_pi_inv.entries + 0.5 * np.eye(target.dim))
        w, v = gamma_mat.eig
        return cls(target, c_pi_inv, gamma_mat, w, v)

    @property
    def dim(self) -> int:
        return self.target.dim

    @cached_property
    def c_pi(self) -> np.ndarray:
        return self.target.cov.entries

    def exp_gamma(self, s: float) -> np.ndarray:
        """``exp(s * rate_matrix)`` as a plain array."""
        return (self.gamma_eigvecs * np.exp(s * self.gamma_eigvals)) @ self.gamma_eigvecs.T

    def exp_c_pi_inv(self, s: float) -> np.ndarray:
        """``exp(s * target_precision)``; shares the rate matrix's eigenbasis."""
        return (
            self.gamma_eigvecs * np.exp(s * (self.gamma_eigvals - 0.5))
        ) @ self.gamma_eigvecs.T


@dataclass(frozen=True, eq=False)
class TrajectoryPoint:
    """One step of a discrete trajectory plus its divergences to the target."""

    step: int
    time: float
    state: GaussianDist
    divergences: "divergences.DivergenceReport"


def make_context(target: GaussianDist) -> WfrContext:
    return WfrContext.from_target(target)


def _check_state(ctx: WfrContext, v: GaussianDist):
    if v.dim != ctx.dim:
        raise DimensionError(f"state dimension {v.dim} != context dimension {ctx.dim}")


def _check_time(t: float):
    if not np.isfinite(t) or t < 0:
        raise NumericInputError(f"time must be finite and >= 0, got {t}")


def is_degenerate_gap(ctx: WfrContext, v: GaussianDist) -> bool:
    """True when the covariance gap to the target is below resolvent tolerance."""
    gap = np.max(np.abs(v.cov.entries - ctx.c_pi))
    return gap < DEGENERATE_RTOL * np.max(np.abs(ctx.c_pi))


def _gap_inverse(ctx: WfrContext, v: GaussianDist) -> np.ndarray:
    e0 = SymMatrix(v.cov.entries - ctx.c_pi)
    w, vec = e0.eig
    scale = np.max(np.abs(w))
    tol = 1e-14 * max(scale, np.max(np.abs(ctx.c_pi)))
    if np.any(np.abs(w) <= tol):
        bad = float(w[np.argmin(np.abs(w))])
        raise SingularConfigurationError("covariance gap is singular", bad)
    return (vec / w) @ vec.T


def _resolvent_inverse(inner: np.ndarray, scale: float, what: str) -> np.ndarray:
    """Invert a symmetric resolvent, guarding against catastrophic cancellation.

    ``scale`` is the magnitude of the terms that were summed to form the
    resolvent; an eigenvalue vanishing relative to it means the closed form
    is singular at this configuration.
    """
    sym = SymMatrix(inner)
    w, vec = sym.eig
    if scale <= 0.0 or np.any(np.abs(w) <= 1e-13 * scale):
        bad = float(w[np.argmin(np.abs(w))]) if scale > 0.0 else 0.0
        raise SingularConfigurationError(f"{what} resolvent is singular", bad)
    return (vec / w) @ vec.T


def _degenerate_mean(ctx: WfrContext, v: GaussianDist, t: float) -> np.ndarray:
    # with the covariance pinned at the target the mean relaxes linearly:
    # d(mean)/dt = -(I + precision)(mean - target_mean)
    decay = math.exp(-t) * ctx.exp_c_pi_inv(-t)
    return ctx.target.mean + decay @ (v.mean - ctx.target.mean)


def _mean_from_gap(
    ctx: WfrContext, t: float, k_mat: np.ndarray, e0_inv: np.ndarray, eps0: np.ndarray
) -> np.ndarray:
    # (C_t - C_target) e^{t precision} gap0^{-1} eps0, folded so only decaying
    # exponentials appear: e^{t precision} e^{-t rate} = e^{-t/2} I.
    decay = ctx.exp_gamma(-t)
    return ctx.target.mean + math.exp(-0.5 * t) * (decay @ (k_mat @ (e0_inv @ eps0)))


def wfr_exact(ctx: WfrContext, init: GaussianDist, t: float) -> GaussianDist:
    """Exact combined-flow law at time ``t`` started from ``init``.

    Uses the decaying resolvent form of the covariance interpolation; the
    mean follows the universal translate of the covariance gap.
    """
    _check_state(ctx, init)
    _check_time(t)
    if t == 0.0:
        return init
    if is_degenerate_gap(ctx, init):
        return GaussianDist(_degenerate_mean(ctx, init, t), ctx.target.cov)
    e0_inv = _gap_inverse(ctx, init)
    decay = ctx.exp_gamma(-t)
    decay2 = ctx.exp_gamma(-2.0 * t)
    # (2I + C_target)^{-1} written as a function of the rate matrix
    two_plus_c_inv = _two_plus_c_inverse(ctx)
    weight = two_plus_c_inv @ (np.eye(ctx.dim) - decay2)
    inner = e0_inv + weight
    scale = max(np.max(np.abs(e0_inv)), np.max(np.abs(weight)))
    k_mat = _resolvent_inverse(inner, scale, "combined-flow")
    cov = ctx.c_pi + decay @ k_mat @ decay
    mean = _mean_from_gap(ctx, t, k_mat, e0_inv, init.mean - ctx.target.mean)
    return GaussianDist(mean, SpdMatrix(cov))


def _two_plus_c_inverse(ctx: WfrContext) -> np.ndarray:
    c_eigs = 1.0 / (ctx.gamma_eigvals - 0.5)
    return (ctx.gamma_eigvecs / (2.0 + c_eigs)) @ ctx.gamma_eigvecs.T


def w_step(ctx: WfrContext, v: GaussianDist, t: float) -> GaussianDist:
    """Pure transport map over time ``t``: the Ornstein-Uhlenbeck update.

    ``mean -> target_mean + e^{-t P}(mean - target_mean)`` and
    ``cov -> e^{-t P} cov e^{-t P} + C_target (I - e^{-2 t P})`` with ``P``
    the target precision.  Its correctness is pinned by the composition
    identities with the one-step split closed forms, not assumed.
    """
    _check_state(ctx, v)
    _check_time(t)
    if t == 0.0:
        return v
    decay = ctx.exp_c_pi_inv(-t)
    decay2 = ctx.exp_c_pi_inv(-2.0 * t)
    cov = decay @ v.cov.entries @ decay + ctx.c_pi - decay2 @ ctx.c_pi
    mean = ctx.target.mean + decay @ (v.mean - ctx.target.mean)
    return GaussianDist(mean, SpdMatrix(cov))


def fr_step(ctx: WfrContext, v: GaussianDist, t: float) -> GaussianDist:
    """Pure reweighting map over time ``t``: precision interpolation.

    The reweighting semigroup takes a geometric mean of densities, which for
    Gaussians interpolates precisions and precision-weighted means with
    weight ``e^{-t}``.
    """
    from .linalg import spd_inverse

    _check_state(ctx, v)
    _check_time(t)
    if t == 0.0:
        return v
    a = math.exp(-t)
    v_prec = spd_inverse(v.cov).entries
    prec = (1.0 - a) * ctx.c_pi_inv.entries + a * v_prec
    cov = spd_inverse(SpdMatrix(prec))
    rhs = (1.0 - a) * (ctx.c_pi_inv.entries @ ctx.target.mean) + a * (v_prec @ v.mean)
    mean = cov.entries @ rhs
    return GaussianDist(mean, cov)


def split_step(
    ctx: WfrContext, v: GaussianDist, order: SplitOrder, gamma: float
) -> GaussianDist:
    """One alternating step of size ``gamma`` in the given operator order.

    Transport-first and reweight-first steps share the same resolvent
    structure; they differ by a single extra decay factor on the reweighting
    weight.  Must agree with the two-operator composition to 1e-10; the
    composition is kept as an independent test oracle.
    """
    _check_state(ctx, v)
    if not np.isfinite(gamma) or gamma <= 0:
        raise NumericInputError(f"step size must be > 0, got {gamma}")
    if is_degenerate_gap(ctx, v):
        # resolvent form needs an invertible gap; fall back to the exact
        # operator composition, which handles a target-equal covariance
        if order is SplitOrder.W_THEN_FR:
            return fr_step(ctx, w_step(ctx, v, gamma), gamma)
        return w_step(ctx, fr_step(ctx, v, gamma), gamma)
    e0_inv = _gap_inverse(ctx, v)
    decay = ctx.exp_gamma(-gamma)
    if order is SplitOrder.W_THEN_FR:
        weight = (math.exp(gamma) - 1.0) * ctx.exp_gamma(-2.0 * gamma) @ ctx.c_pi_inv.entries
    else:
        weight = (1.0 - math.exp(-gamma)) * ctx.c_pi_inv.entries
    inner = e0_inv + weight
    scale = max(np.max(np.abs(e0_inv)), np.max(np.abs(weight)))
    k_mat = _resolvent_inverse(inner, scale, f"{order.value} split")
    cov = ctx.c_pi + decay @ k_mat @ decay
    mean = _mean_from_gap(ctx, gamma, k_mat, e0_inv, v.mean - ctx.target.mean)
    return GaussianDist(mean, SpdMatrix(cov))


def iterate_split(
    ctx: WfrContext,
    init: GaussianDist,
    order: SplitOrder,
    gamma: float,
    n: int,
) -> list[TrajectoryPoint]:
    """Trajectory of ``n`` alternating steps; point 0 is the initial law."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    points = [_trajectory_point(ctx, 0, 0.0, init)]
    state = init
    for k in range(1, n + 1):
        state = split_step(ctx, state, order, gamma)
        points.append(_trajectory_point(ctx, k, k * gamma, state))
    return points


def _trajectory_point(
    ctx: WfrContext, step: int, time: float, state: GaussianDist
) -> TrajectoryPoint:
    report = divergences.divergence_report(state, ctx.target)
    return TrajectoryPoint(step, time, state, report)


def _zt_eigvals(ctx: WfrContext, spec: MtSpec, t: float) -> np.ndarray:
    """Eigenvalues (in the rate matrix's basis) of the accumulated perturbation.

    The perturbation matrices commute with the rate matrix for every
    supported kind, so the weighted integral reduces to scalar closed-form
    antiderivatives per eigenvalue; no quadrature is involved.
    """
    lam = ctx.gamma_eigvals
    if spec.kind is MtKind.ZERO:
        return np.zeros_like(lam)
    if spec.kind is MtKind.WFR_SPLIT_WFR:
        # perturbation strength (e^s - 1) on the identity
        first = (np.exp((1.0 - 2.0 * lam) * t) - 1.0) / (1.0 - 2.0 * lam)
        second = (1.0 - np.exp(-2.0 * lam * t)) / (2.0 * lam)
        return 2.0 * (first - second)
    if spec.kind is MtKind.WFR_SPLIT_FRW:
        # perturbation -C_target (e^{2 s P} - I)/2; note 2/c - 2 lam = -1
        c = 1.0 / (lam - 0.5)
        return -c * ((1.0 - math.exp(-t)) - (1.0 - np.exp(-2.0 * lam * t)) / (2.0 * lam))
    raise ValueError(f"unsupported kind {spec.kind}")


def general_mt_solution(
    ctx: WfrContext, init: GaussianDist, spec: MtSpec, t: float
) -> GaussianDist:
    """Law of the generalized perturbed flow at time ``t``.

    Covers the exact flow (zero perturbation) and both one-step splittings
    (evaluated at ``t = gamma_step``) with one covariance resolvent; the mean
    evolution is independent of the perturbation.
    """
    _check_state(ctx, init)
    _check_time(t)
    if t == 0.0:
        return init
    if is_degenerate_gap(ctx, init):
        # the target covariance is stationary for every perturbation kind
        return GaussianDist(_degenerate_mean(ctx, init, t), ctx.target.cov)
    e0_inv = _gap_inverse(ctx, init)
    eye = np.eye(ctx.dim)
    decay2 = ctx.exp_gamma(-2.0 * t)
    two_plus_c_inv = _two_plus_c_inverse(ctx)
    z_eig = _zt_eigvals(ctx, spec, t)
    c_eigs = 1.0 / (ctx.gamma_eigvals - 0.5)
    # precision-sandwiched accumulated perturbation, in the shared eigenbasis
    z_term = (ctx.gamma_eigvecs * (z_eig / c_eigs**2)) @ ctx.gamma_eigvecs.T
    weight = two_plus_c_inv @ (eye - decay2) - z_term
    inner = e0_inv + weight
    scale = max(np.max(np.abs(e0_inv)), np.max(np.abs(weight)))
    k_mat = _resolvent_inverse(inner, scale, f"{spec.kind.value} generalized flow")
    decay = ctx.exp_gamma(-t)
    cov = ctx.c_pi + decay @ k_mat @ decay
    mean = _mean_from_gap(ctx, t, k_mat, e0_inv, init.mean - ctx.target.mean)
    return GaussianDist(mean, SpdMatrix(cov))


def perturbation_matrix(ctx: WfrContext, spec: MtSpec, s: float) -> np.ndarray:
    """Quadratic-perturbation matrix of the generalized flow at time ``s``.

    Zero for the exact flow; ``(e^s - 1) I`` for the transport-first step;
    ``-(C_target/2)(e^{2 s P} - I)`` for the reweight-first step.  The RK4
    integrator consumes the vectorized stack below, which must agree with
    this definitional form.
    """
    if spec.kind is MtKind.ZERO:
        return np.zeros((ctx.dim, ctx.dim))
    if spec.kind is MtKind.WFR_SPLIT_WFR:
        return (math.exp(s) - 1.0) * np.eye(ctx.dim)
    exp2 = ctx.exp_c_pi_inv(2.0 * s)
    return -0.5 * ctx.c_pi @ (exp2 - np.eye(ctx.dim))


def _mt_matrices(ctx: WfrContext, spec: MtSpec, times: np.ndarray) -> np.ndarray:
    """Stack of perturbation matrices at the given times, shape (len, d, d)."""
    n = times.shape[0]
    eye = np.eye(ctx.dim)
    if spec.kind is MtKind.ZERO:
        return np.zeros((n, ctx.dim, ctx.dim))
    if spec.kind is MtKind.WFR_SPLIT_WFR:
        return np.expm1(times)[:, None, None] * eye
    # -(C_target/2)(e^{2 s P} - I), evaluated in the shared eigenbasis
    lam_p = ctx.gamma_eigvals - 0.5
    c_eigs = 1.0 / lam_p
    vals = -0.5 * c_eigs[None, :] * np.expm1(2.0 * times[:, None] * lam_p[None, :])
    v = ctx.gamma_eigvecs
    return np.einsum("ij,nj,kj->nik", v, vals, v)


def _moment_rhs(
    ctx: WfrContext, m: np.ndarray, c: np.ndarray, mt: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    p = ctx.c_pi_inv.entries
    eye = np.eye(ctx.dim)
    cp = c @ p
    pc = cp.T
    b = (eye - 0.5 * ctx.c_pi) + 2.0 * mt
    cp_mt = cp @ mt
    term_cov = (
        -(cp @ c - 2.0 * (cp_mt @ pc))
        - b @ pc
        - cp @ b
        + 2.0 * (eye + mt)
    )
    drift = cp - 2.0 * (cp_mt @ p) + p + 2.0 * (mt @ p)
    term_mean = -(drift @ (m - ctx.target.mean))
    return term_mean, term_cov


def moment_ode_integrate(
    ctx: WfrContext,
    init: GaussianDist,
    spec: MtSpec,
    t: float,
    dt: float,
) -> GaussianDist:
    """Fixed-step classical RK4 integration of the coupled moment ODEs.

    This is the independent oracle for every closed form in this module:
    it never touches the resolvent algebra.  The step is fixed (no
    adaptivity) so oracle values are reproducible across platforms.
    """
    _check_state(ctx, init)
    _check_time(t)
    if not dt > 0:
        raise StepSizeError("dt must be > 0")
    n_steps = int(round(t / dt))
    if abs(n_steps * dt - t) > 1e-12 * max(1.0, t):
        n_steps = math.ceil(t / dt)
    if n_steps > 10**7:
        raise StepSizeError("t/dt exceeds the 1e7 step budget")
    if n_steps == 0:
        return init
    h = t / n_steps
    m = init.mean.copy()
    c = init.cov.entries.copy()
    # all perturbation matrices share the rate eigenbasis; precompute the
    # stage values for the whole integration in one vectorized sweep
    grid_s = np.arange(2 * n_steps + 1) * (0.5 * h)
    mts = _mt_matrices(ctx, spec, grid_s)
    for k in range(n_steps):
        mt1 = mts[2 * k]
        mt2 = mts[2 * k + 1]
        mt4 = mts[2 * k + 2]
        k1m, k1c = _moment_rhs(ctx, m, c, mt1)
        k2m, k2c = _moment_rhs(ctx, m + 0.5 * h * k1m, c + 0.5 * h * k1c, mt2)
        k3m, k3c = _moment_rhs(ctx, m + 0.5 * h * k2m, c + 0.5 * h * k2c, mt2)
        k4m, k4c = _moment_rhs(ctx, m + h * k3m, c + h * k3c, mt4)
        m = m + (h / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
        c = c + (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        c = 0.5 * (c + c.T)
        if np.min(np.diagonal(c)) <= 0.0:
            raise StepSizeError(
                f"covariance lost positive-definiteness at step {k + 1}; reduce dt"
            )
    try:
        cov = SpdMatrix(c)
    except Exception as exc:
        raise StepSizeError(f"covariance lost positive-definiteness: {exc}") from exc
    return GaussianDist(m, cov)


def gfrw_series_check(
    ctx: WfrContext, gamma: float, k_max: int
) -> tuple[SymMatrix, SymMatrix]:
    """Partial sum vs closed form of the reweight-first perturbation matrix.

    The nested-commutator expansion of the reweight-first step produces
    quadratic perturbations whose matrix weights sum, term by term, to
    ``(C_target/2)(e^{2 gamma P} - I)``.  Returns (partial sum, closed form).
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if not np.isfinite(gamma) or gamma < 0:
        raise NumericInputError("gamma must be finite and >= 0")
    lam = ctx.gamma_eigvals
    c = 1.0 / (lam - 0.5)
    x = 2.0 * gamma / c
    partial = np.zeros_like(c)
    term = np.ones_like(c)
    for k in range(1, k_max + 1):
        term = term * x / k
        partial += term
    v = ctx.gamma_eigvecs
    partial_mat = SymMatrix((v * (0.5 * c * partial)) @ v.T)
    closed_mat = SymMatrix((v * (0.5 * c * np.expm1(x))) @ v.T)
    return partial_mat, closed_mat
