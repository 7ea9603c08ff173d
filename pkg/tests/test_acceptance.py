"""Acceptance gate: one test per criterion, at the stated tolerances.

Each test prints a single summary line.  Criterion 6's lower-bound clause is
implemented faithfully and is expected to FAIL: the printed uniform-in-time
log-concavity certificate transiently exceeds the true Gaussian constant (a
half-speed transport clock in its derivation); see the README's "Known
red check" section.
The formula, its fixed points and its companion ODE are pinned by other
criteria, so the check is kept red rather than loosened.
"""

import math
import time

import numpy as np
import pytest

from conftest import state_gap
from wfr_split_lab import decay, divergences, logconcavity, pde1d
from wfr_split_lab.decay import DecaySetup, SchemeKind
from wfr_split_lab.experiments import FIGURE1_DEFAULTS, run_figure1
from wfr_split_lab.flows import (
    MtKind,
    MtSpec,
    SplitOrder,
    WfrContext,
    fr_step,
    gfrw_series_check,
    iterate_split,
    moment_ode_integrate,
    split_step,
    w_step,
    wfr_exact,
)
from wfr_split_lab.linalg import gaussian


def report(number: int, ok: bool, elapsed: float, budget: float, detail: str):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(
        f"ACCEPTANCE {number:2d} {status} ({elapsed:.2f}s / budget {budget:.0f}s): {detail}"
    )
    assert elapsed < budget, f"criterion {number} exceeded its runtime budget"
    assert ok, f"criterion {number} failed: {detail}"


def test_criterion_01_figure1_signs():
    start = time.perf_counter()
    left = run_figure1(dict(FIGURE1_DEFAULTS))
    cfg_right = dict(FIGURE1_DEFAULTS, c_pi=1.0, c_0=100.0)
    right = run_figure1(cfg_right)
    diffs_left = np.array([row[4] for row in left.rows])
    diffs_right = np.array([row[5] for row in right.rows])
    ok = (
        len(left.rows) == 400
        and bool(np.all(diffs_left < 0.0))
        and bool(np.all(diffs_right < 0.0))
    )
    report(
        1,
        ok,
        time.perf_counter() - start,
        1.0,
        f"transport-first speeds up a diffuse target on all 400 steps "
        f"(max diff {np.max(diffs_left):.3e}); reweight-first mirrors it "
        f"(max diff {np.max(diffs_right):.3e})",
    )


def test_criterion_02_kl_functional_exactness(fig1_left, fig1_right):
    start = time.perf_counter()
    worst = 0.0
    for ctx, init in (fig1_left, fig1_right):
        setup = DecaySetup.from_init(ctx, init, 0.7)
        trajs = {
            SchemeKind.EXACT: [wfr_exact(ctx, init, n * 0.7) for n in range(1, 31)],
            SchemeKind.SPLIT_WFR: [
                p.state
                for p in iterate_split(ctx, init, SplitOrder.W_THEN_FR, 0.7, 30)[1:]
            ],
            SchemeKind.SPLIT_FRW: [
                p.state
                for p in iterate_split(ctx, init, SplitOrder.FR_THEN_W, 0.7, 30)[1:]
            ],
        }
        for kind, states in trajs.items():
            om = decay.omega(kind, setup)
            for n, state in enumerate(states, start=1):
                val = decay.phi_n(decay.j_n(om, n, setup), n, setup)
                truth = divergences.kl_gaussian(state, ctx.target)
                worst = max(worst, abs(val - truth))
    report(
        2,
        worst < 1e-9,
        time.perf_counter() - start,
        1.0,
        f"KL functional equals trajectory KL for n=1..30, three schemes, "
        f"two configurations (worst gap {worst:.3e})",
    )


def test_criterion_03_asymptotic_ratios(fig1_left, fig1_right, instance_10d):
    start = time.perf_counter()
    worst = 0.0
    for ctx, init in (fig1_left, fig1_right, instance_10d):
        setup = DecaySetup.from_init(ctx, init, 0.7)
        for kind in (SchemeKind.SPLIT_WFR, SchemeKind.SPLIT_FRW):
            asym = decay.asymptotic_ratio(kind, setup)
            worst = max(worst, abs(decay.empirical_ratio(kind, 400, setup) - asym))
    ctx, _ = fig1_left
    vals = [
        decay.asymptotic_ratio(
            SchemeKind.SPLIT_WFR, DecaySetup(ctx, [[-99.0]], [eps], 0.7)
        )
        for eps in (5.0, 50.0)
    ]
    eps_gap = abs(vals[0] - vals[1])
    report(
        3,
        worst < 1e-4 and eps_gap < 1e-10,
        time.perf_counter() - start,
        5.0,
        f"empirical n=400 ratios meet the closed-form limits "
        f"(worst gap {worst:.3e}); 1D limit mean-gap invariant to {eps_gap:.1e}",
    )


def test_criterion_04_composition_identities():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_comp = 0.0
    worst_gen = 0.0
    count = 0
    dims = [1, 2, 5]
    while count < 50:
        d = dims[count % 3]
        a = rng.normal(size=(d, d))
        b = rng.normal(size=(d, d))
        target = gaussian(rng.normal(size=d), a @ a.T + d * np.eye(d))
        init = gaussian(rng.normal(size=d), b @ b.T + 0.5 * np.eye(d))
        ctx = WfrContext.from_target(target)
        gamma = float(rng.uniform(0.1, 2.0))
        s1 = split_step(ctx, init, SplitOrder.W_THEN_FR, gamma)
        worst_comp = max(
            worst_comp, state_gap(s1, fr_step(ctx, w_step(ctx, init, gamma), gamma))
        )
        s2 = split_step(ctx, init, SplitOrder.FR_THEN_W, gamma)
        worst_comp = max(
            worst_comp, state_gap(s2, w_step(ctx, fr_step(ctx, init, gamma), gamma))
        )
        g1 = general_mt(ctx, init, MtKind.WFR_SPLIT_WFR, gamma)
        g2 = general_mt(ctx, init, MtKind.WFR_SPLIT_FRW, gamma)
        worst_gen = max(worst_gen, state_gap(g1, s1), state_gap(g2, s2))
        count += 1
    report(
        4,
        worst_comp < 1e-10 and worst_gen < 1e-9,
        time.perf_counter() - start,
        2.0,
        f"50 random configurations: split equals composition to {worst_comp:.3e}, "
        f"generalized flow to {worst_gen:.3e}",
    )


def general_mt(ctx, init, kind, gamma):
    from wfr_split_lab.flows import general_mt_solution

    return general_mt_solution(ctx, init, MtSpec(kind, gamma), gamma)


def test_criterion_05_ode_oracle(fig1_left, fig1_right):
    start = time.perf_counter()
    worst = 0.0
    for ctx, init in (fig1_left, fig1_right):
        ode = moment_ode_integrate(ctx, init, MtSpec(MtKind.ZERO), 2.0, 1e-4)
        worst = max(worst, state_gap(ode, wfr_exact(ctx, init, 2.0)))
        for kind, order in (
            (MtKind.WFR_SPLIT_WFR, SplitOrder.W_THEN_FR),
            (MtKind.WFR_SPLIT_FRW, SplitOrder.FR_THEN_W),
        ):
            gamma = 0.7
            ode = moment_ode_integrate(ctx, init, MtSpec(kind, gamma), gamma, 1e-4)
            worst = max(worst, state_gap(ode, split_step(ctx, init, order, gamma)))
    report(
        5,
        worst < 1e-6,
        time.perf_counter() - start,
        10.0,
        f"fixed-step RK4 reproduces every closed form to {worst:.3e}",
    )


def test_criterion_06_logconcavity_bound():
    start = time.perf_counter()
    init = gaussian([0.0], [[1.0]])
    worst = -math.inf
    for c_pi in (100.0, 5.0, 2.1):
        target = gaussian([0.0], [[c_pi]])
        ctx = WfrContext.from_target(target)
        constants = logconcavity.gaussian_constants(target, init, 0.5)
        curve = logconcavity.WfrAlphaCurve.from_constants(constants)
        ts = np.linspace(0.0, 20.0, 500)
        alphas = logconcavity.wfr_alpha(curve, ts)
        for i, t in enumerate(ts):
            gap = float(alphas[i]) - logconcavity.true_alpha_gaussian(ctx, init, float(t))
            worst = max(worst, gap)
    bound_ok = worst <= 1e-10
    bad = gaussian_constants_silent(gaussian([0.0], [[2.0]]), init)
    inadmissible_ok = bad is not None and not bad.theorem_admissible
    constants = logconcavity.gaussian_constants(gaussian([0.0], [[100.0]]), init, 0.5)
    curve = logconcavity.WfrAlphaCurve.from_constants(constants)
    riccati_ok = logconcavity.riccati_check(curve, 10.0, 1e-4) < 1e-8
    report(
        6,
        bound_ok and inadmissible_ok and riccati_ok,
        time.perf_counter() - start,
        1.0,
        f"certificate-vs-truth worst violation {worst:.3e} (EXPECTED RED: "
        f"half-speed transport clock in the printed certificate, see README); "
        f"variance-2 inadmissibility {'ok' if inadmissible_ok else 'BAD'}; "
        f"Riccati self-consistency {'ok' if riccati_ok else 'BAD'}",
    )


def gaussian_constants_silent(target, init):
    try:
        return logconcavity.gaussian_constants(target, init, 0.5)
    except Exception:
        return None


def test_criterion_07_section5_bounds(fig1_left):
    start = time.perf_counter()
    ctx, init = fig1_left
    setup = DecaySetup.from_init(ctx, init, 0.7)
    constants = logconcavity.gaussian_constants(ctx.target, init, 0.5)
    ts = np.linspace(0.0, 20.0, 200)
    worst_min = -math.inf
    worst_jeff = -math.inf
    for t in ts:
        exact = decay.wfr_kl(setup, float(t))
        worst_min = max(worst_min, exact - decay.bound_min_rule(setup, float(t)))
        truth = divergences.divergence_report(
            wfr_exact(ctx, init, float(t)), ctx.target
        ).jeffreys
        worst_jeff = max(
            worst_jeff,
            truth - decay.jeffreys_bound(setup, constants, float(t)),
            truth - decay.jeffreys_bound_fixed(setup, constants, float(t)),
        )
    params = decay.sharp_bound_params(setup, 0.1)
    worst_sharp = -math.inf
    for t in np.linspace(params.t0, 20.0, 100):
        worst_sharp = max(
            worst_sharp,
            decay.wfr_kl(setup, float(t)) - decay.bound_sharp(setup, float(t), 0.1),
        )
    ok = worst_min <= 1e-12 and worst_sharp <= 0.0 and worst_jeff <= 1e-12
    report(
        7,
        ok,
        time.perf_counter() - start,
        1.0,
        f"pure-flow min rule, warm-start bound (onset {params.t0:.3f}), and "
        f"symmetrized-KL envelope all dominate the truth "
        f"(worst slacks {worst_min:.1e}, {worst_sharp:.1e}, {worst_jeff:.1e})",
    )


def test_criterion_08_covariance_signs():
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    worst_sign = -math.inf
    for _ in range(20):
        c_pi = 10.0 ** rng.uniform(-0.5, 1.5)
        q = c_pi * rng.uniform(0.05, 0.95)
        b = rng.uniform(-3.0, 3.0)
        m_pi = rng.uniform(-3.0, 3.0)
        target = pde1d.GaussianTarget(m_pi, c_pi)
        grid = pde1d.suggest_grid(target, b, q, 4001)
        worst_sign = max(
            worst_sign, pde1d.cov_diagnostic(pde1d.gaussian_field(grid, b, q), target)
        )
    target = pde1d.GaussianTarget(0.0, 1.0)
    grid = pde1d.suggest_grid(target, 0.0, 4.0, 2001)
    mu0 = pde1d.gaussian_field(grid, 0.0, 4.0)
    traj = pde1d.frw_split_trajectory(target, mu0, 0.5, 8)
    integral = pde1d.frw_perturbation_grid(traj, target, 0.5, 8)
    target = pde1d.GaussianTarget(20.0, 100.0)
    grid = pde1d.suggest_grid(target, 0.0, 1.0, 4001)
    v0 = pde1d.gaussian_field(grid, 0.0, 1.0)
    pi_h = pde1d.target_field(target, grid)
    gamma = 0.5
    n_sub = pde1d.default_substeps(gamma + 1e-3, grid)

    def one_step(s):
        return pde1d.fr_step_grid(
            target, pde1d.w_step_grid(target, v0, s, n_substeps=n_sub), s
        )

    terms = pde1d.kl_decay_rhs_wfr_split(one_step(gamma), target, gamma)
    h = 1e-3
    fd = (
        divergences.kl_grid(one_step(gamma + h), pi_h)
        - divergences.kl_grid(one_step(gamma - h), pi_h)
    ) / (2.0 * h)
    rel = abs(terms.total - fd) / abs(fd)
    ok = worst_sign < 0.0 and integral > 0.0 and rel < 5e-3
    report(
        8,
        ok,
        time.perf_counter() - start,
        30.0,
        f"20-case negative-covariance sweep (max {worst_sign:.3e}); "
        f"reweight-first integral positive ({integral:.3f}); "
        f"KL-derivative decomposition matches FD to {rel:.1e} relative",
    )


def test_criterion_09_grid_fidelity():
    start = time.perf_counter()
    target = pde1d.GaussianTarget(20.0, 100.0)
    grid = pde1d.suggest_grid(target, 0.0, 1.0, 8001)
    ctx = WfrContext.from_target(gaussian([20.0], [[100.0]]))
    init = gaussian([0.0], [[1.0]])
    v0 = pde1d.gaussian_field(grid, 0.0, 1.0)
    worst_m = 0.0
    out = pde1d.fr_step_grid(target, v0, 0.5)
    ref = fr_step(ctx, init, 0.5)
    worst_m = max(worst_m, abs(out.mean() - ref.mean[0]), abs(out.variance() - ref.cov.entries[0, 0]))
    out = pde1d.w_step_grid(target, v0, 0.3)
    refw = w_step(ctx, init, 0.3)
    worst_m = max(worst_m, abs(out.mean() - refw.mean[0]), abs(out.variance() - refw.cov.entries[0, 0]))
    grid16 = pde1d.suggest_grid(target, 0.0, 1.0, 16001)
    v16 = pde1d.gaussian_field(grid16, 0.0, 1.0)
    out = pde1d.wfr_reference_grid(target, v16, 1.0, 1e-4)
    refe = wfr_exact(ctx, init, 1.0)
    worst_m = max(worst_m, abs(out.mean() - refe.mean[0]), abs(out.variance() - refe.cov.entries[0, 0]))
    # first-order splitting for both targets and both orderings
    worst_ratio_lo, worst_ratio_hi = math.inf, -math.inf
    cases = [
        (target, pde1d.suggest_grid(target, 0.0, 1.0, 4001), 0.0, 1.0),
        (pde1d.mixture_demo_target(), pde1d.suggest_grid(pde1d.mixture_demo_target(), 0.0, 0.5, 2001), 0.0, 0.5),
    ]
    for tgt, g, m0, q0 in cases:
        mu0 = pde1d.gaussian_field(g, m0, q0)
        pi_h = pde1d.target_field(tgt, g)
        ref_kl = divergences.kl_grid(pde1d.wfr_reference_grid(tgt, mu0, 2.0, 1e-4), pi_h)
        weights = pde1d.edge_weights(tgt, g)
        for w_first in (True, False):
            errs = []
            for gam in (0.2, 0.1, 0.05):
                state = mu0
                for _ in range(int(round(2.0 / gam))):
                    state = pde1d.split_step_grid(tgt, state, w_first, gam, weights=weights)
                errs.append(abs(divergences.kl_grid(state, pi_h) - ref_kl))
            for i in range(2):
                r = errs[i] / errs[i + 1]
                worst_ratio_lo = min(worst_ratio_lo, r)
                worst_ratio_hi = max(worst_ratio_hi, r)
    ok = worst_m < 1e-4 and worst_ratio_lo >= 1.6 and worst_ratio_hi <= 2.4
    report(
        9,
        ok,
        time.perf_counter() - start,
        120.0,
        f"grid-vs-closed-form moments agree to {worst_m:.3e}; step-halving "
        f"ratios span [{worst_ratio_lo:.2f}, {worst_ratio_hi:.2f}]",
    )


def test_criterion_10_series_check():
    start = time.perf_counter()
    ctx = WfrContext.from_target(gaussian([0.0] * 3, np.diag([1.0, 2.0, 4.0])))
    partial, closed = gfrw_series_check(ctx, 0.7, 40)
    gap = float(np.max(np.abs(partial.entries - closed.entries)))
    report(
        10,
        gap < 1e-10,
        time.perf_counter() - start,
        0.1,
        f"40-term perturbation series meets its closed form (gap {gap:.3e})",
    )
