"""Log-concavity constants along the pure and combined flows.

The reweighting flow interpolates strong-convexity constants exactly; the
transport flow certifies a constant only over a finite horizon governed by a
tangent-curve solution of ``dc/dt = -c^2 - b^2``; the combined flow admits a
uniform-in-time constant from the Riccati ODE
``dc/dt = -c^2 - c - b^2 + alpha_target/2`` whose closed-form solution this
module implements and cross-checks against an RK4 integration.

For Gaussian inputs every Hessian bound is an exact eigenvalue computation.
The two horizon/uniform statements declare slightly different ``b`` values
(with and without the factor 1/2 under the square root); each result here
uses the ``b`` its own statement declares, and neither is "corrected".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AssumptionViolationError,
    NumericInputError,
    TheoremConditionError,
)
from .flows import WfrContext, wfr_exact
from .linalg import GaussianDist, spd_inverse


@dataclass(frozen=True)
class ConvexityConstants:
    """Strong-convexity / smoothness ledger for one (target, init, delta)."""

    alpha_pi: float
    L_pi: float
    alpha_0: float
    L_0: float
    delta: float
    alpha_d: float
    alpha_h: float
    b: float
    c0: float

    @property
    def theorem_admissible(self) -> bool:
        """Admissibility of the uniform-in-time bound: ``b^2 < alpha_pi/2``."""
        return self.b**2 < 0.5 * self.alpha_pi


def gaussian_constants(
    target: GaussianDist, init: GaussianDist, delta: float
) -> ConvexityConstants:
    """Exact constants for Gaussian potentials.

    The target potential Hessian is its precision; the drift remainder
    ``-lap V + |grad V|^2`` of a quadratic potential has Hessian twice the
    squared precision.  ``alpha_d`` must be positive (relative convexity of
    the initial potential against ``(1+delta)/2`` times the target's);
    failing the uniform-bound admissibility is reported by the flag, not
    fatally, since the horizon results remain usable.
    """
    if not 0.0 < delta < 1.0:
        raise NumericInputError("delta must lie in (0, 1)")
    c_pi_inv = spd_inverse(target.cov).entries
    c0_inv = spd_inverse(init.cov).entries
    w_pi = np.linalg.eigvalsh(c_pi_inv)
    w_0 = np.linalg.eigvalsh(c0_inv)
    alpha_pi, l_pi = float(w_pi[0]), float(w_pi[-1])
    alpha_0, l_0 = float(w_0[0]), float(w_0[-1])
    alpha_d = float(
        np.linalg.eigvalsh(c0_inv - 0.5 * (1.0 + delta) * c_pi_inv)[0]
    )
    if alpha_d <= 0.0:
        raise AssumptionViolationError(
            f"relative convexity constant alpha_d = {alpha_d:.6e} is not positive"
        )
    alpha_h = float(np.linalg.eigvalsh(2.0 * c_pi_inv @ c_pi_inv + c_pi_inv)[0])
    b = math.sqrt(abs(alpha_h - l_pi) / 2.0)
    c0 = alpha_d + 0.5 * delta * alpha_pi
    return ConvexityConstants(alpha_pi, l_pi, alpha_0, l_0, delta, alpha_d, alpha_h, b, c0)


def fr_alpha(constants: ConvexityConstants, t: float):
    """Reweighting-flow constant: exact convex interpolation toward the target."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise NumericInputError("t must be >= 0")
    a = np.exp(-t)
    out = (1.0 - a) * constants.alpha_pi + a * constants.alpha_0
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class WHorizon:
    """Transport-flow certificate: curve ``c_t`` and its expiry ``t_star``.

    The flow's log-concavity constant is ``alpha_target/2 + c_t`` for
    ``t < t_star``.  ``boundary_case`` flags the degenerate ``b = 0``
    configuration, where the tangent curve collapses to the hyperbola
    ``c0 / (1 + c0 t)`` and never reaches zero.
    """

    b: float
    c0: float
    t_star: float
    boundary_case: bool

    def c_curve(self, t):
        t = np.asarray(t, dtype=float)
        if self.boundary_case:
            out = self.c0 / (1.0 + self.c0 * t)
        else:
            out = self.b * np.tan(np.arctan(self.c0 / self.b) - self.b * t)
        return float(out) if out.ndim == 0 else out


def w_horizon(constants: ConvexityConstants) -> WHorizon:
    """Finite-horizon certificate for the pure transport flow.

    Uses the horizon statement's own ``b = sqrt(|alpha_h - L_target|)``
    (no half), unlike the uniform-bound ``b`` stored in the constants.
    """
    if constants.c0 <= 0.0:
        raise AssumptionViolationError("c0 must be positive")
    b = math.sqrt(abs(constants.alpha_h - constants.L_pi))
    if b == 0.0:
        return WHorizon(0.0, constants.c0, math.inf, True)
    t_star = math.atan(constants.c0 / b) / b
    return WHorizon(b, constants.c0, t_star, False)


@dataclass(frozen=True)
class WfrAlphaCurve:
    """Uniform-in-time log-concavity constant for the combined flow."""

    constants: ConvexityConstants
    c_inf_1: float
    c_inf_2: float
    l0: float

    @classmethod
    def from_constants(cls, constants: ConvexityConstants) -> "WfrAlphaCurve":
        if not constants.theorem_admissible:
            raise TheoremConditionError(
                f"b^2 = {constants.b**2:.6e} is not < alpha_target/2 = "
                f"{0.5 * constants.alpha_pi:.6e}"
            )
        disc = math.sqrt(1.0 + 4.0 * (0.5 * constants.alpha_pi - constants.b**2))
        c1 = 0.5 * (-1.0 + disc)
        c2 = 0.5 * (-1.0 - disc)
        l0 = (constants.c0 - c1) / (constants.c0 - c2)
        return cls(constants, c1, c2, l0)


def wfr_alpha(curve: WfrAlphaCurve, t):
    """Evaluate the uniform constant ``alpha_target/2 + c_t`` at time(s) ``t``.

    ``c_t`` moves monotonically from ``c0`` to the positive Riccati fixed
    point, so the constant stays strictly positive for all ``t >= 0``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise NumericInputError("t must be >= 0")
    decay = curve.l0 * np.exp(-t * (curve.c_inf_1 - curve.c_inf_2))
    c_t = (curve.c_inf_1 - curve.c_inf_2 * decay) / (1.0 - decay)
    out = 0.5 * curve.constants.alpha_pi + c_t
    return float(out) if out.ndim == 0 else out


def riccati_check(curve: WfrAlphaCurve, t_max: float, dt: float) -> float:
    """Max deviation of the closed-form ``c_t`` from an RK4 integration.

    Integrates ``dc/dt = -c^2 - c - b^2 + alpha_target/2`` from ``c0`` with
    fixed step and returns the largest absolute gap over ``[0, t_max]``.
    """
    if not dt > 0:
        raise NumericInputError("dt must be > 0")
    consts = curve.constants
    drive = 0.5 * consts.alpha_pi - consts.b**2

    def rhs(c: float) -> float:
        return -c * c - c + drive

    n = int(math.ceil(t_max / dt))
    c = consts.c0
    worst = 0.0
    alpha_shift = 0.5 * consts.alpha_pi
    closed_all = wfr_alpha(curve, dt * np.arange(1, n + 1)) - alpha_shift
    for k in range(1, n + 1):
        k1 = rhs(c)
        k2 = rhs(c + 0.5 * dt * k1)
        k3 = rhs(c + 0.5 * dt * k2)
        k4 = rhs(c + dt * k3)
        c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        worst = max(worst, abs(c - closed_all[k - 1]))
    return worst


def true_alpha_gaussian(ctx: WfrContext, init: GaussianDist, t: float) -> float:
    """Exact log-concavity constant of the combined flow's Gaussian law.

    The optimal constant of a Gaussian is the smallest eigenvalue of its
    precision, i.e. the reciprocal largest eigenvalue of its covariance.
    """
    state = wfr_exact(ctx, init, t)
    w = np.linalg.eigvalsh(state.cov.entries)
    return 1.0 / float(w[-1])
