"""Experiment runners producing deterministic CSV/JSON data series."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import config as cfgmod
from . import decay, divergences, logconcavity, pde1d
from .config import Value, as_float, as_float_list, as_int
from .decay import DecaySetup, SchemeKind
from .errors import ConfigError, TheoremConditionError, WfrLabError
from .flows import SplitOrder, WfrContext, split_step, wfr_exact
from .linalg import gaussian


@dataclass(frozen=True)
class ExperimentResult:
    columns: list[str]
    rows: list[list]
    metadata: dict[str, Value]


def _gaussian_pair(cfg) -> tuple:
    """Target and initial Gaussians from (possibly diagonal-list) config keys."""
    c_pi = as_float_list(cfg, "c_pi")
    c_0 = as_float_list(cfg, "c_0")
    dim = max(len(c_pi), len(c_0))

    def vec(key, n):
        v = as_float_list(cfg, key)
        if len(v) == 1:
            return [v[0]] * n
        return v

    c_pi = vec("c_pi", dim)
    c_0 = vec("c_0", dim)
    m_pi = vec("m_pi", dim)
    m_0 = vec("m_0", dim)
    if not (len(c_pi) == len(c_0) == len(m_pi) == len(m_0)):
        raise ConfigError("means/covariances have inconsistent lengths")
    try:
        target = gaussian(m_pi, np.diag(c_pi))
        init = gaussian(m_0, np.diag(c_0))
    except WfrLabError as exc:
        raise ConfigError(f"invalid Gaussian parameters: {exc}") from exc
    return target, init


def _map_rows(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _positive(cfg, key) -> float:
    v = as_float(cfg, key)
    if not v > 0:
        raise ConfigError(f"key {key!r} must be > 0, got {v!r}")
    return v


def _unit_interval(cfg, key) -> float:
    v = as_float(cfg, key)
    if not 0.0 < v < 1.0:
        raise ConfigError(f"key {key!r} must lie in (0, 1), got {v!r}")
    return v


FIGURE1_DEFAULTS: dict[str, Value] = {
    "m_pi": 20.0,
    "c_pi": 100.0,
    "m_0": 0.0,
    "c_0": 1.0,
    "gamma_min": 1e-3,
    "gamma_max": 10.0,
    "n_gamma": 400,
    "seed": 42,
}


def run_figure1(cfg: dict[str, Value], threads: int = 1) -> ExperimentResult:
    """Single-step KL difference of both splittings versus the exact flow."""
    target, init = _gaussian_pair(cfg)
    ctx = WfrContext.from_target(target)
    n_gamma = as_int(cfg, "n_gamma")
    if n_gamma < 1:
        raise ConfigError("n_gamma must be >= 1")
    g_lo = _positive(cfg, "gamma_min")
    g_hi = _positive(cfg, "gamma_max")
    if g_hi < g_lo:
        raise ConfigError("gamma_max must be >= gamma_min")
    gammas = np.geomspace(g_lo, g_hi, n_gamma)

    def row(gamma: float):
        kl_exact = divergences.kl_gaussian(wfr_exact(ctx, init, gamma), target)
        kl_wfr = divergences.kl_gaussian(
            split_step(ctx, init, SplitOrder.W_THEN_FR, gamma), target
        )
        kl_frw = divergences.kl_gaussian(
            split_step(ctx, init, SplitOrder.FR_THEN_W, gamma), target
        )
        return [gamma, kl_exact, kl_wfr, kl_frw, kl_wfr - kl_exact, kl_frw - kl_exact]

    rows = _map_rows(row, [float(g) for g in gammas], threads)
    return ExperimentResult(
        ["gamma", "kl_exact", "kl_wfr_split", "kl_frw_split", "diff_wfr", "diff_frw"],
        rows,
        dict(cfg),
    )


FIGURE2_DEFAULTS: dict[str, Value] = {
    "m_pi": [1.0] * 10,
    "c_pi": [float(k) for k in range(1, 11)],
    "m_0": [0.0] * 10,
    "c_0": [float(k) + 1.0 for k in range(1, 11)],
    "gamma": 0.7,
    "n_max": 400,
    "seed": 42,
}


def run_figure2(cfg: dict[str, Value], threads: int = 1) -> ExperimentResult:
    """n-step split/exact KL ratios against their closed-form limits."""
    target, init = _gaussian_pair(cfg)
    ctx = WfrContext.from_target(target)
    gamma = _positive(cfg, "gamma")
    n_max = as_int(cfg, "n_max")
    if n_max < 1:
        raise ConfigError("n_max must be >= 1")
    setup = DecaySetup.from_init(ctx, init, gamma)
    asym_wfr = decay.asymptotic_ratio(SchemeKind.SPLIT_WFR, setup)
    asym_frw = decay.asymptotic_ratio(SchemeKind.SPLIT_FRW, setup)

    def row(n: int):
        kl_e = decay.scheme_kl(SchemeKind.EXACT, n, setup)
        kl_b = decay.scheme_kl(SchemeKind.SPLIT_WFR, n, setup)
        kl_a = decay.scheme_kl(SchemeKind.SPLIT_FRW, n, setup)
        r_b = decay.empirical_ratio(SchemeKind.SPLIT_WFR, n, setup)
        r_a = decay.empirical_ratio(SchemeKind.SPLIT_FRW, n, setup)
        return [n * gamma, r_b, r_a, asym_wfr, asym_frw, kl_e, kl_b, kl_a]

    rows = _map_rows(row, range(1, n_max + 1), threads)
    return ExperimentResult(
        [
            "t",
            "ratio_wfr",
            "ratio_frw",
            "asymptotic_wfr",
            "asymptotic_frw",
            "kl_exact",
            "kl_wfr_split",
            "kl_frw_split",
        ],
        rows,
        dict(cfg),
    )


FIGURE3_DEFAULTS: dict[str, Value] = {
    "c_pi_list": [100.0, 5.0, 2.1],
    "c_0": 1.0,
    "m_pi": 0.0,
    "m_0": 0.0,
    "delta": 0.5,
    "t_max": 20.0,
    "n_t": 500,
    "seed": 42,
}


def run_figure3(cfg: dict[str, Value], threads: int = 1) -> ExperimentResult:
    """Uniform log-concavity certificate versus the true Gaussian constant."""
    delta = _unit_interval(cfg, "delta")
    n_t = as_int(cfg, "n_t")
    if n_t < 2:
        raise ConfigError("n_t must be >= 2")
    ts = np.linspace(0.0, _positive(cfg, "t_max"), n_t)
    metadata = dict(cfg)
    rows: list[list] = []
    for c_pi in cfgmod.as_float_list(cfg, "c_pi_list"):
        target = gaussian([as_float(cfg, "m_pi")], [[c_pi]])
        init = gaussian([as_float(cfg, "m_0")], [[as_float(cfg, "c_0")]])
        ctx = WfrContext.from_target(target)
        key = f"case_c_pi_{cfgmod.format_scalar(c_pi)}"
        try:
            constants = logconcavity.gaussian_constants(target, init, delta)
            curve = logconcavity.WfrAlphaCurve.from_constants(constants)
        except (TheoremConditionError, WfrLabError) as exc:
            metadata[key] = f"inadmissible: {exc}"
            continue
        metadata[key] = "admissible"
        alphas = logconcavity.wfr_alpha(curve, ts)

        def row(i: int, ctx=ctx, init=init, alphas=alphas, c_pi=c_pi):
            t = float(ts[i])
            return [c_pi, t, float(alphas[i]), logconcavity.true_alpha_gaussian(ctx, init, t)]

        rows.extend(_map_rows(row, range(len(ts)), threads))
    return ExperimentResult(["c_pi", "t", "alpha_theorem", "alpha_true"], rows, metadata)


FIGURE4_DEFAULTS: dict[str, Value] = {
    "m_pi": 20.0,
    "c_pi": 100.0,
    "m_0": 0.0,
    "c_0": 1.0,
    "delta_sharp": 0.1,
    "delta_constants": 0.5,
    "gamma": 0.7,
    "t_max": 20.0,
    "n_t": 401,
    "seed": 42,
}


def run_figure4(cfg: dict[str, Value], threads: int = 1) -> ExperimentResult:
    """Exact KL / symmetrized-KL decay against the three upper bounds."""
    target, init = _gaussian_pair(cfg)
    ctx = WfrContext.from_target(target)
    setup = DecaySetup.from_init(ctx, init, _positive(cfg, "gamma"))
    delta_sharp = _unit_interval(cfg, "delta_sharp")
    constants = logconcavity.gaussian_constants(target, init, _unit_interval(cfg, "delta_constants"))
    metadata = dict(cfg)
    params = decay.sharp_bound_params(setup, delta_sharp)
    if params is None:
        metadata["sharp_bound"] = "absent (log-ratio unbounded below)"
    else:
        metadata["sharp_t0"] = params.t0
        metadata["sharp_curvature"] = params.curvature
        metadata["sharp_rate"] = params.rate
        metadata["sharp_quad_minimum"] = params.quad_minimum
    n_t = as_int(cfg, "n_t")
    if n_t < 2:
        raise ConfigError("n_t must be >= 2")
    ts = np.linspace(0.0, _positive(cfg, "t_max"), n_t)

    def row(t: float):
        state = wfr_exact(ctx, init, t)
        report = divergences.divergence_report(state, target)
        sharp = decay.bound_sharp(setup, t, delta_sharp)
        return [
            t,
            report.kl_forward,
            decay.bound_min_rule(setup, t),
            math.nan if sharp is None else sharp,
            report.jeffreys,
            decay.jeffreys_bound(setup, constants, t),
            decay.jeffreys_bound_fixed(setup, constants, t),
        ]

    rows = _map_rows(row, [float(t) for t in ts], threads)
    return ExperimentResult(
        [
            "t",
            "kl_exact",
            "bound_min_rule",
            "bound_sharp",
            "jeffreys_exact",
            "jeffreys_bound",
            "jeffreys_bound_fixed",
        ],
        rows,
        metadata,
    )


RATIO_DEFAULTS: dict[str, Value] = {
    k: v for k, v in FIGURE2_DEFAULTS.items() if k != "n_max"
}
RATIO_DEFAULTS["n"] = 400


def run_ratio(cfg: dict[str, Value], threads: int = 1) -> ExperimentResult:
    """Empirical vs closed-form asymptotic KL ratios at one step count."""
    target, init = _gaussian_pair(cfg)
    ctx = WfrContext.from_target(target)
    setup = DecaySetup.from_init(ctx, init, _positive(cfg, "gamma"))
    n = as_int(cfg, "n")
    if n < 1:
        raise ConfigError("n must be >= 1")
    rows = []
    for kind, label in ((SchemeKind.SPLIT_WFR, "w-fr"), (SchemeKind.SPLIT_FRW, "fr-w")):
        asym = decay.asymptotic_ratio(kind, setup)
        emp = decay.empirical_ratio(kind, n, setup)
        rows.append([label, setup.gamma, n, emp, asym, abs(emp - asym)])
    return ExperimentResult(
        ["kind", "gamma", "n", "empirical_ratio", "asymptotic_ratio", "abs_error"],
        rows,
        dict(cfg),
    )


GRID_DEMO_DEFAULTS: dict[str, Value] = {
    "gamma": 0.1,
    "t_max": 2.0,
    "n_points": 2001,
    "init_mean": 0.0,
    "init_var": 0.5,
    "dt_ref": 1e-4,
    "seed": 42,
}


def run_grid_demo(cfg: dict[str, Value], threads: int = 1) -> ExperimentResult:
    """Bimodal-mixture demo: split trajectories against the tiny-step reference."""
    gamma = _positive(cfg, "gamma")
    t_max = _positive(cfg, "t_max")
    _positive(cfg, "init_var")
    dt_ref = _positive(cfg, "dt_ref")
    if dt_ref > 1e-3:
        raise ConfigError("dt_ref must be <= 1e-3")
    n_steps = int(round(t_max / gamma))
    target = pde1d.mixture_demo_target()
    grid = pde1d.suggest_grid(
        target, as_float(cfg, "init_mean"), as_float(cfg, "init_var"), as_int(cfg, "n_points")
    )
    mu0 = pde1d.gaussian_field(grid, as_float(cfg, "init_mean"), as_float(cfg, "init_var"))
    pi_h = pde1d.target_field(target, grid)
    weights = pde1d.edge_weights(target, grid)
    state_wfr = state_frw = state_ref = mu0
    rows = [[0, 0.0] + [divergences.kl_grid(mu0, pi_h)] * 3]
    for k in range(1, n_steps + 1):
        state_wfr = pde1d.split_step_grid(target, state_wfr, True, gamma, weights=weights)
        state_frw = pde1d.split_step_grid(target, state_frw, False, gamma, weights=weights)
        state_ref = pde1d.wfr_reference_grid(target, state_ref, gamma, dt_ref)
        rows.append(
            [
                k,
                k * gamma,
                divergences.kl_grid(state_wfr, pi_h),
                divergences.kl_grid(state_frw, pi_h),
                divergences.kl_grid(state_ref, pi_h),
            ]
        )
    return ExperimentResult(
        ["step", "t", "kl_wfr_split", "kl_frw_split", "kl_reference"], rows, dict(cfg)
    )


EXPERIMENTS = {
    "figure1": (FIGURE1_DEFAULTS, run_figure1),
    "figure2": (FIGURE2_DEFAULTS, run_figure2),
    "figure3": (FIGURE3_DEFAULTS, run_figure3),
    "figure4": (FIGURE4_DEFAULTS, run_figure4),
    "ratio": (RATIO_DEFAULTS, run_ratio),
    "grid-demo": (GRID_DEMO_DEFAULTS, run_grid_demo),
}
