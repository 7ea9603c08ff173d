"""KL-decay machinery: gap weights, n-step gap maps, KL functionals,
definiteness classification, asymptotic speed-up ratios, and upper bounds.

For Gaussian initial/target pairs the KL along each scheme (exact flow,
transport-first split, reweight-first split) is an explicit functional of
the n-step covariance gap, and the three gaps share one resolvent structure
differing only in a scheme-specific weight matrix.  The large-n KL ratio of
a split scheme to the exact flow has a closed form driven by the slowest
mode of the rate matrix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import divergences, logconcavity
from .errors import (
    DegenerateRatioError,
    DimensionError,
    NumericInputError,
    SingularConfigurationError,
    WfrLabError,
)
from .flows import WfrContext, fr_step, w_step, wfr_exact
from .linalg import GaussianDist, SymMatrix, sym_sqrt_inv

DEFINITENESS_RTOL = 1e-10


class SchemeKind(enum.Enum):
    EXACT = "exact"
    SPLIT_WFR = "split-wfr"
    SPLIT_FRW = "split-frw"


@dataclass(frozen=True, eq=False)
class DecaySetup:
    """Initial data for the decay analysis of one (target, init, step) triple."""

    ctx: WfrContext
    e0: SymMatrix
    eps0: np.ndarray
    gamma: float

    def __init__(self, ctx, e0, eps0, gamma):
        if not isinstance(e0, SymMatrix):
            e0 = SymMatrix(e0)
        eps0 = np.atleast_1d(np.asarray(eps0, dtype=float))
        if e0.dim != ctx.dim or eps0.shape != (ctx.dim,):
            raise DimensionError("setup pieces do not match the context dimension")
        if not np.isfinite(gamma) or gamma <= 0:
            raise NumericInputError("gamma must be finite and > 0")
        eps0.setflags(write=False)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "e0", e0)
        object.__setattr__(self, "eps0", eps0)
        object.__setattr__(self, "gamma", float(gamma))

    @classmethod
    def from_init(cls, ctx: WfrContext, init: GaussianDist, gamma: float) -> "DecaySetup":
        return cls(
            ctx,
            SymMatrix(init.cov.entries - ctx.target.cov.entries),
            init.mean - ctx.target.mean,
            gamma,
        )

    @cached_property
    def init(self) -> GaussianDist:
        from .linalg import SpdMatrix

        return GaussianDist(
            self.ctx.target.mean + self.eps0,
            SpdMatrix(self.ctx.target.cov.entries + self.e0.entries),
        )

    @cached_property
    def e0_signature(self) -> str:
        w, _ = self.e0.eig
        tol = DEFINITENESS_RTOL * max(np.max(np.abs(w)), 1e-300)
        if np.all(w > tol):
            return "positive"
        if np.all(w < -tol):
            return "negative"
        return "mixed"

    @cached_property
    def e0_inv(self) -> np.ndarray:
        if self.e0_signature == "mixed":
            raise SingularConfigurationError(
                "initial covariance gap has mixed signature; "
                "the decay functionals require a strictly definite gap"
            )
        w, v = self.e0.eig
        return (v / w) @ v.T


def _guarded_inverse(inner: np.ndarray, *parts: np.ndarray) -> np.ndarray:
    """Invert a symmetric sum, raising when it cancels to round-off of its parts."""
    scale = max(float(np.max(np.abs(p))) for p in parts)
    w, v = np.linalg.eigh(0.5 * (inner + inner.T))
    if scale <= 0.0 or np.any(np.abs(w) <= 1e-13 * scale):
        bad = float(w[np.argmin(np.abs(w))]) if scale > 0.0 else 0.0
        raise SingularConfigurationError("n-step gap resolvent is singular", bad)
    return (v / w) @ v.T


def _omega_eigvals(kind: SchemeKind, lam: np.ndarray, gamma: float) -> np.ndarray:
    if kind is SchemeKind.EXACT:
        return 0.5 / lam
    base = (1.0 - math.exp(gamma)) / (1.0 - np.exp(2.0 * gamma * lam))
    if kind is SchemeKind.SPLIT_WFR:
        return base
    if kind is SchemeKind.SPLIT_FRW:
        # extra factor exp(2 gamma / c) with c the target-covariance eigenvalue
        return base * np.exp(2.0 * gamma * (lam - 0.5))
    raise ValueError(kind)


def omega(kind: SchemeKind, setup: DecaySetup) -> SymMatrix:
    """Scheme-specific SPD weight matrix entering the n-step gap map.

    All three weights share the rate matrix's eigenbasis and coincide in the
    small-step limit.
    """
    ctx = setup.ctx
    vals = _omega_eigvals(kind, ctx.gamma_eigvals, setup.gamma)
    return SymMatrix((ctx.gamma_eigvecs * vals) @ ctx.gamma_eigvecs.T)


def _kn_matrix(kind: SchemeKind, setup: DecaySetup, n: int) -> np.ndarray:
    """Inner resolvent ``(E0^{-1} + W P (I - e^{-2 n g R}))^{-1}``."""
    ctx = setup.ctx
    lam = ctx.gamma_eigvals
    om = _omega_eigvals(kind, lam, setup.gamma)
    # W P (I - e^{-2 n gamma R}) is diagonal in the rate eigenbasis
    diag = om * (lam - 0.5) * (1.0 - np.exp(-2.0 * n * setup.gamma * lam))
    weight = (ctx.gamma_eigvecs * diag) @ ctx.gamma_eigvecs.T
    return _guarded_inverse(setup.e0_inv + weight, setup.e0_inv, weight)


def j_n(b: SymMatrix, n: int, setup: DecaySetup) -> SymMatrix:
    """n-step covariance gap ``e^{-n g R}(E0^{-1} + B P(I - e^{-2 n g R}))^{-1}e^{-n g R}``.

    ``j_n(B, 0)`` returns the initial gap for any ``B``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return setup.e0
    ctx = setup.ctx
    if not isinstance(b, SymMatrix):
        b = SymMatrix(b)
    lam = ctx.gamma_eigvals
    # right factor P (I - e^{-2 n g R}) evaluated in the rate eigenbasis;
    # the product with an arbitrary B needs no commutation assumption
    diag_b = ctx.gamma_eigvecs.T @ b.entries @ ctx.gamma_eigvecs
    weight_diag = diag_b * ((lam - 0.5) * (1.0 - np.exp(-2.0 * n * setup.gamma * lam)))[None, :]
    weight = ctx.gamma_eigvecs @ weight_diag @ ctx.gamma_eigvecs.T
    k_mat = _guarded_inverse(setup.e0_inv + weight, setup.e0_inv, weight)
    decay = setup.ctx.exp_gamma(-n * setup.gamma)
    return SymMatrix(decay @ k_mat @ decay)


def phi_n(a: SymMatrix, n: int, setup: DecaySetup) -> float:
    """KL of a trajectory point expressed as a functional of its gap ``a``.

    ``phi_n(0) = 0``; applied to the n-step gap of a scheme it reproduces the
    Gaussian KL of that scheme's trajectory point.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    ctx = setup.ctx
    if not isinstance(a, SymMatrix):
        a = SymMatrix(a)
    isq = sym_sqrt_inv(ctx.target.cov)
    s = np.linalg.eigvalsh(isq @ a.entries @ isq)
    if np.any(s <= -1.0):
        raise WfrLabError(
            "determinant of (I + P gap) is not positive; KL functional undefined"
        )
    logdet_part = float(np.sum(s - np.log1p(s)))
    grow = ctx.exp_c_pi_inv(n * setup.gamma)
    vec = isq @ (a.entries @ (grow @ (setup.e0_inv @ setup.eps0)))
    return 0.5 * logdet_part + 0.5 * float(vec @ vec)


def scheme_kl(kind: SchemeKind, n: int, setup: DecaySetup) -> float:
    """KL to the target after ``n`` steps of the given scheme.

    Equivalent to ``phi_n(j_n(omega(kind), n), n)`` but factored so that only
    decaying exponentials appear; safe for very large ``n`` where the direct
    functional would overflow intermediates.
    """
    scaled, log_scale = scheme_kl_scaled(kind, n, setup)
    if scaled == 0.0:
        return 0.0
    log_val = math.log(scaled) - log_scale
    if log_val < -745.0:
        return 0.0
    return math.exp(log_val)


def scheme_kl_scaled(kind: SchemeKind, n: int, setup: DecaySetup) -> tuple[float, float]:
    """KL times ``exp(log_scale)`` with ``log_scale = 2 n g (lam_min + 1/2)``.

    The scaled value stays representable for arbitrarily large ``n`` (the
    true KL underflows once ``n g`` is a few hundred), which is what the
    empirical large-n ratios are computed from.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    ctx = setup.ctx
    lam = ctx.gamma_eigvals
    lam1 = lam[0]
    t = n * setup.gamma
    log_scale = 2.0 * t * (lam1 + 0.5)
    if n == 0:
        kl = divergences.kl_gaussian(setup.init, ctx.target)
        return kl * math.exp(min(log_scale, 700.0)), log_scale
    k_mat = _kn_matrix(kind, setup, n)
    isq = sym_sqrt_inv(ctx.target.cov)
    # mean part, rescaled so the slowest mode carries weight one
    shifted = (ctx.gamma_eigvecs * np.exp(-t * (lam - lam1))) @ ctx.gamma_eigvecs.T
    vec = isq @ (shifted @ (k_mat @ (setup.e0_inv @ setup.eps0)))
    mean_scaled = float(vec @ vec)
    # log-det/trace part: compute unscaled, rescale in log space (it decays
    # strictly faster than the mean part, so 0 after underflow is consistent)
    decay = ctx.exp_gamma(-t)
    gap = decay @ k_mat @ decay
    s = np.linalg.eigvalsh(isq @ gap @ isq)
    logdet_part = float(np.sum(s - np.log1p(s)))
    if logdet_part > 0.0:
        log_term = math.log(0.5 * logdet_part) + log_scale
        det_scaled = math.exp(log_term) if log_term < 700.0 else math.inf
    else:
        det_scaled = 0.0
    return det_scaled + 0.5 * mean_scaled, log_scale


def empirical_ratio(kind: SchemeKind, n: int, setup: DecaySetup) -> float:
    """Measured KL ratio (split scheme / exact flow) after ``n`` steps."""
    if kind is SchemeKind.EXACT:
        raise ValueError("ratio is defined for split kinds only")
    num, _ = scheme_kl_scaled(kind, n, setup)
    den, _ = scheme_kl_scaled(SchemeKind.EXACT, n, setup)
    if den == 0.0:
        raise DegenerateRatioError("exact-flow KL underflowed; ratio undefined")
    return num / den


@dataclass(frozen=True)
class DefinitenessReport:
    """Outcome of the sign classification of the initial covariance gap."""

    case: str  # "positive", "negative", or "neither"
    signature: str
    negative_conditions: dict[str, bool]

    @property
    def admits_ratio(self) -> bool:
        return self.case in ("positive", "negative")


def classify_definiteness(setup: DecaySetup) -> DefinitenessReport:
    """Classify the initial gap for the sign-preservation results.

    Case "positive": the gap is strictly positive definite (then every
    scheme's gap stays positive).  Case "negative": the three scheme-wise
    matrix inequalities ``E0^{-1} C_target < -W`` hold (then every gap stays
    negative).  Anything else is "neither" and the asymptotic ratio refuses.
    """
    sig = setup.e0_signature
    conditions: dict[str, bool] = {}
    if sig == "positive":
        return DefinitenessReport("positive", sig, conditions)
    ctx = setup.ctx
    ok_all = sig == "negative"
    if sig == "negative":
        sqrt_c = (ctx.gamma_eigvecs * np.sqrt(1.0 / (ctx.gamma_eigvals - 0.5))) @ ctx.gamma_eigvecs.T
        sym_part = sqrt_c @ setup.e0_inv @ sqrt_c  # similar to E0^{-1} C_target
        for kind in SchemeKind:
            om = omega(kind, setup)
            w = np.linalg.eigvalsh(0.5 * (sym_part + sym_part.T) + om.entries)
            ok = bool(np.all(w < -DEFINITENESS_RTOL * max(np.max(np.abs(w)), 1e-300)))
            conditions[kind.value] = ok
            ok_all = ok_all and ok
    return DefinitenessReport("negative" if ok_all else "neither", sig, conditions)


def asymptotic_ratio(kind: SchemeKind, setup: DecaySetup) -> float:
    """Large-n limit of the split/exact KL ratio.

    Quadratic forms of the resolvent limits against the slowest-mode
    eigenvectors of the rate matrix; with a degenerate slowest eigenvalue the
    forms are summed over the whole eigenspace.  Requires a sign-definite
    classification and a nonzero initial mean gap.
    """
    if kind is SchemeKind.EXACT:
        raise ValueError("ratio is defined for split kinds only")
    report = classify_definiteness(setup)
    if not report.admits_ratio:
        raise DegenerateRatioError(
            f"initial gap classification is '{report.case}'; ratio not available"
        )
    if float(np.max(np.abs(setup.eps0))) == 0.0:
        raise DegenerateRatioError(
            "zero initial mean gap: both quadratic forms vanish (0/0)"
        )
    ctx = setup.ctx
    lam = ctx.gamma_eigvals
    lam1 = lam[0]
    space = lam <= lam1 * (1.0 + DEFINITENESS_RTOL)
    basis = ctx.gamma_eigvecs[:, space]
    e0inv_cpi = setup.e0_inv @ ctx.c_pi
    d0 = np.outer(setup.e0_inv @ setup.eps0, setup.e0_inv @ setup.eps0) @ ctx.c_pi

    def quad(om: SymMatrix) -> float:
        k = np.linalg.inv(e0inv_cpi + om.entries)
        mat = k @ d0 @ k
        return float(np.einsum("ij,jk,ik->", basis.T, mat, basis.T))

    num = quad(omega(kind, setup))
    den = quad(omega(SchemeKind.EXACT, setup))
    if abs(den) < 1e-300:
        raise DegenerateRatioError("exact-flow quadratic form is degenerate")
    return num / den


def bound_min_rule(setup: DecaySetup, t: float) -> float:
    """Upper bound on the combined-flow KL: the better of the two pure flows."""
    ctx = setup.ctx
    kl_fr = divergences.kl_gaussian(fr_step(ctx, setup.init, t), ctx.target)
    kl_w = divergences.kl_gaussian(w_step(ctx, setup.init, t), ctx.target)
    return min(kl_fr, kl_w)


@dataclass(frozen=True)
class SharpBoundParams:
    """Warm-start parameters of the sharper combined-flow decay bound."""

    curvature: float  # smallest eigenvalue of the log-ratio Hessian
    quad_minimum: float  # actual minimum of log(target/init); diagnostic
    t0: float
    rate: float
    kl0: float


def sharp_bound_params(setup: DecaySetup, delta: float) -> SharpBoundParams | None:
    """Parameters of the sharper decay bound, or ``None`` when unavailable.

    The bound needs ``log(target/init)`` bounded below, i.e. the initial
    precision must dominate the target precision.  The onset time is
    ``log(M / delta^3)`` with ``M`` the minimal curvature of that explicit
    log-ratio quadratic; the quadratic's actual minimum is reported alongside
    (it is negative for typical diffuse-target setups, so it cannot feed the
    logarithm itself).
    """
    if not 0.0 < delta < 1.0:
        raise NumericInputError("delta must lie in (0, 1)")
    ctx = setup.ctx
    from .linalg import spd_inverse

    c0_inv = spd_inverse(setup.init.cov).entries
    hess = c0_inv - ctx.c_pi_inv.entries
    w, v = np.linalg.eigh(0.5 * (hess + hess.T))
    curvature = float(w[0])
    if curvature <= DEFINITENESS_RTOL * max(abs(float(w[-1])), 1e-300):
        return None  # log-ratio unbounded below (or flat): no finite onset
    # explicit minimum of log(target/init) over x, for reporting
    lin = c0_inv @ setup.init.mean - ctx.c_pi_inv.entries @ ctx.target.mean
    xstar = np.linalg.solve(hess, lin)
    quad_min = _log_ratio(setup, xstar)
    t0 = math.log(curvature / delta**3)
    lam_pi = float(np.max(np.linalg.eigvalsh(ctx.c_pi)))
    rate = 2.0 / lam_pi + (2.0 - 3.0 * delta)
    kl0 = divergences.kl_gaussian(setup.init, ctx.target)
    return SharpBoundParams(curvature, quad_min, t0, rate, kl0)


def _log_ratio(setup: DecaySetup, x: np.ndarray) -> float:
    """log(target density / initial density) at the point ``x``."""
    ctx = setup.ctx
    from .linalg import logdet, spd_inverse

    c0_inv = spd_inverse(setup.init.cov).entries
    dt = x - ctx.target.mean
    d0 = x - setup.init.mean
    val = 0.5 * float(d0 @ c0_inv @ d0) - 0.5 * float(dt @ ctx.c_pi_inv.entries @ dt)
    val += 0.5 * (logdet(setup.init.cov) - logdet(ctx.target.cov))
    return val


def bound_sharp(setup: DecaySetup, t: float, delta: float) -> float | None:
    """Sharper combined-flow KL bound at time ``t``; ``None`` off its region."""
    params = sharp_bound_params(setup, delta)
    if params is None or t < params.t0:
        return None
    return math.exp(-params.rate * (t - params.t0)) * params.kl0


def jeffreys_bound(
    setup: DecaySetup,
    constants: logconcavity.ConvexityConstants,
    t: float,
    *,
    quad_step: float = 1e-3,
) -> float:
    """Decay bound on the symmetrized KL with the time-varying rate integrated.

    The instantaneous rate is ``2 min(alpha_target, alpha_s) + 1`` with
    ``alpha_s`` the uniform log-concavity curve; integrating it (composite
    Simpson) gives the Gronwall envelope ``J(0) exp(-int_0^t rate)``.
    """
    curve = logconcavity.WfrAlphaCurve.from_constants(constants)
    j0 = divergences.divergence_report(setup.init, setup.ctx.target).jeffreys
    if t == 0.0:
        return j0
    n = max(2, 2 * math.ceil(t / quad_step / 2.0))
    s = np.linspace(0.0, t, n + 1)
    kappa = 2.0 * np.minimum(constants.alpha_pi, logconcavity.wfr_alpha(curve, s)) + 1.0
    weights = np.ones(n + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    integral = float(np.sum(weights * kappa)) * (t / n) / 3.0
    return j0 * math.exp(-integral)


def jeffreys_bound_fixed(
    setup: DecaySetup, constants: logconcavity.ConvexityConstants, t: float
) -> float:
    """Looser variant with the rate frozen at its value at time ``t``."""
    curve = logconcavity.WfrAlphaCurve.from_constants(constants)
    kappa = 2.0 * min(constants.alpha_pi, float(logconcavity.wfr_alpha(curve, t))) + 1.0
    j0 = divergences.divergence_report(setup.init, setup.ctx.target).jeffreys
    return j0 * math.exp(-t * kappa)


def wfr_kl(setup: DecaySetup, t: float) -> float:
    """Exact combined-flow KL at time ``t`` (convenience for bounds tests)."""
    return divergences.kl_gaussian(wfr_exact(setup.ctx, setup.init, t), setup.ctx.target)
