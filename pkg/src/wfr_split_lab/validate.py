"""Named cross-check suites runnable via ``wfr-split-lab validate``.

Each suite exercises one block of module invariants and reports measured
residuals against fixed thresholds.  A correct build passes every suite
except ``logconcavity-bounds``, whose lower-bound property is violated by
the uniform-in-time certificate formula itself (see the "Known red
check" section of the README); the check is kept faithful rather than
loosened.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import decay, divergences, logconcavity, pde1d
from .decay import DecaySetup, SchemeKind
from .flows import (
    MtKind,
    MtSpec,
    SplitOrder,
    WfrContext,
    fr_step,
    gfrw_series_check,
    general_mt_solution,
    iterate_split,
    moment_ode_integrate,
    split_step,
    w_step,
    wfr_exact,
)
from .grid import Grid1D
from .linalg import (
    GaussianDist,
    SpdMatrix,
    SymMatrix,
    gaussian,
    logdet,
    min_eig,
    spd_inverse,
    sym_expm,
)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    value: float
    threshold: float
    passed: bool

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.suite}: {self.name} "
            f"(value {self.value:.6e}, threshold {self.threshold:.6e})"
        )


def _below(suite, name, value, threshold) -> CheckResult:
    return CheckResult(suite, name, float(value), float(threshold), bool(value <= threshold))


def _true(suite, name, ok, value=0.0) -> CheckResult:
    return CheckResult(suite, name, float(value), 0.5, bool(ok))


def _max_abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _state_gap(a: GaussianDist, b: GaussianDist) -> float:
    return max(_max_abs(a.mean, b.mean), _max_abs(a.cov.entries, b.cov.entries))


def _fig1_left():
    target = gaussian([20.0], [[100.0]])
    init = gaussian([0.0], [[1.0]])
    return WfrContext.from_target(target), init


def _fig1_right():
    target = gaussian([20.0], [[1.0]])
    init = gaussian([0.0], [[100.0]])
    return WfrContext.from_target(target), init


def _instance_10d():
    c_pi = np.diag(np.arange(1.0, 11.0))
    target = gaussian(np.ones(10), c_pi)
    init = gaussian(np.zeros(10), c_pi + np.eye(10))
    return WfrContext.from_target(target), init


def _random_spd_pair(rng, d):
    a = rng.normal(size=(d, d))
    b = rng.normal(size=(d, d))
    target = gaussian(rng.normal(size=d), a @ a.T + d * np.eye(d))
    init = gaussian(rng.normal(size=d), b @ b.T + 0.5 * np.eye(d))
    return target, init


def suite_linalg_properties() -> list[CheckResult]:
    rng = np.random.default_rng(7)
    out = []
    worst_add = worst_comm = worst_inv = worst_logdet = 0.0
    for _ in range(10):
        d = int(rng.integers(1, 7))
        a = SymMatrix(rng.uniform(-1.0, 1.0, size=(d, d)))
        s, t = rng.uniform(-2.0, 2.0, size=2)
        lhs = sym_expm(a, s).entries @ sym_expm(a, t).entries
        worst_add = max(worst_add, _max_abs(lhs, sym_expm(a, s + t).entries))
        es = sym_expm(a, s).entries
        worst_comm = max(worst_comm, _max_abs(a.entries @ es, es @ a.entries))
        m = rng.normal(size=(d, d))
        spd = SpdMatrix(m @ m.T + d * np.eye(d))
        worst_inv = max(worst_inv, _max_abs(spd_inverse(spd_inverse(spd)).entries, spd.entries))
        worst_logdet = max(worst_logdet, abs(logdet(spd) + logdet(spd_inverse(spd))))
    out.append(_below("linalg-properties", "expm additivity", worst_add, 1e-10))
    out.append(_below("linalg-properties", "expm commutes with argument", worst_comm, 1e-10))
    out.append(_below("linalg-properties", "inverse involution", worst_inv, 1e-10))
    out.append(_below("linalg-properties", "logdet of inverse negates", worst_logdet, 1e-10))
    return out


def suite_gaussian_composition() -> list[CheckResult]:
    rng = np.random.default_rng(11)
    worst_wfr = worst_frw = worst_gen = 0.0
    for d in (1, 2, 5):
        for _ in range(4):
            target, init = _random_spd_pair(rng, d)
            ctx = WfrContext.from_target(target)
            for g in (0.1, 0.7, 2.0):
                s1 = split_step(ctx, init, SplitOrder.W_THEN_FR, g)
                worst_wfr = max(worst_wfr, _state_gap(s1, fr_step(ctx, w_step(ctx, init, g), g)))
                s2 = split_step(ctx, init, SplitOrder.FR_THEN_W, g)
                worst_frw = max(worst_frw, _state_gap(s2, w_step(ctx, fr_step(ctx, init, g), g)))
                g1 = general_mt_solution(ctx, init, MtSpec(MtKind.WFR_SPLIT_WFR, g), g)
                g2 = general_mt_solution(ctx, init, MtSpec(MtKind.WFR_SPLIT_FRW, g), g)
                worst_gen = max(worst_gen, _state_gap(g1, s1), _state_gap(g2, s2))
    return [
        _below("gaussian-composition", "transport-first split equals composition", worst_wfr, 1e-10),
        _below("gaussian-composition", "reweight-first split equals composition", worst_frw, 1e-10),
        _below("gaussian-composition", "generalized flow equals split step", worst_gen, 1e-9),
    ]


def suite_gaussian_invariance() -> list[CheckResult]:
    worst_fix = worst_id = 0.0
    for ctx, init in (_fig1_left(), _fig1_right(), _instance_10d()):
        target = ctx.target
        for op in (
            lambda v: wfr_exact(ctx, v, 3.0),
            lambda v: w_step(ctx, v, 3.0),
            lambda v: fr_step(ctx, v, 3.0),
            lambda v: split_step(ctx, v, SplitOrder.W_THEN_FR, 0.7),
            lambda v: split_step(ctx, v, SplitOrder.FR_THEN_W, 0.7),
            lambda v: general_mt_solution(ctx, v, MtSpec(MtKind.WFR_SPLIT_WFR, 0.7), 0.7),
        ):
            worst_fix = max(worst_fix, _state_gap(op(target), target))
        for op0 in (
            lambda v: wfr_exact(ctx, v, 0.0),
            lambda v: w_step(ctx, v, 0.0),
            lambda v: fr_step(ctx, v, 0.0),
        ):
            worst_id = max(worst_id, _state_gap(op0(init), init))
    return [
        _below("gaussian-invariance", "target is fixed by every map", worst_fix, 1e-12),
        _below("gaussian-invariance", "zero time is the identity", worst_id, 0.0),
    ]


def suite_gaussian_mean_universality() -> list[CheckResult]:
    rng = np.random.default_rng(13)
    worst = 0.0
    for d in (1, 3):
        for _ in range(4):
            target, init = _random_spd_pair(rng, d)
            ctx = WfrContext.from_target(target)
            e0_inv = np.linalg.inv(init.cov.entries - target.cov.entries)
            eps0 = init.mean - target.mean
            for t in (0.3, 1.1):
                grow = ctx.exp_c_pi_inv(t)
                for state in (
                    wfr_exact(ctx, init, t),
                    split_step(ctx, init, SplitOrder.W_THEN_FR, t),
                    split_step(ctx, init, SplitOrder.FR_THEN_W, t),
                ):
                    rhs = (state.cov.entries - target.cov.entries) @ grow @ e0_inv @ eps0
                    worst = max(worst, _max_abs(state.mean - target.mean, rhs))
    return [_below("gaussian-mean-universality", "mean is the gap translate", worst, 1e-9)]


def suite_gaussian_splitting_order() -> list[CheckResult]:
    ctx, init = _fig1_left()
    t_final = 2.0
    out = []
    for order in SplitOrder:
        errs = []
        for g in (0.2, 0.1, 0.05):
            traj = iterate_split(ctx, init, order, g, int(round(t_final / g)))
            errs.append(_state_gap(traj[-1].state, wfr_exact(ctx, init, t_final)))
        ratios = [errs[i] / errs[i + 1] for i in range(2)]
        ok = all(1.6 <= r <= 2.4 for r in ratios)
        out.append(_true("gaussian-splitting-order", f"{order.value} halving ratio", ok, min(ratios)))
    return out


def suite_gaussian_ode_oracle() -> list[CheckResult]:
    out = []
    for label, (ctx, init) in (("left", _fig1_left()), ("right", _fig1_right())):
        worst = 0.0
        ode = moment_ode_integrate(ctx, init, MtSpec(MtKind.ZERO), 2.0, 1e-4)
        worst = max(worst, _state_gap(ode, wfr_exact(ctx, init, 2.0)))
        for kind, order in (
            (MtKind.WFR_SPLIT_WFR, SplitOrder.W_THEN_FR),
            (MtKind.WFR_SPLIT_FRW, SplitOrder.FR_THEN_W),
        ):
            g = 0.5
            ode = moment_ode_integrate(ctx, init, MtSpec(kind, g), g, 1e-4)
            worst = max(worst, _state_gap(ode, split_step(ctx, init, order, g)))
        out.append(_below("gaussian-ode-oracle", f"closed forms vs RK4 ({label})", worst, 1e-6))
    return out


def suite_divergence_properties() -> list[CheckResult]:
    rng = np.random.default_rng(17)
    out = []
    worst_neg = 0.0
    min_distinct = math.inf
    worst_jeff = 0.0
    for d in (1, 2, 4):
        for _ in range(5):
            a_t, b_t = _random_spd_pair(rng, d)
            kl = divergences.kl_gaussian(a_t, b_t)
            worst_neg = min(worst_neg, kl)
            min_distinct = min(min_distinct, kl)
            rep = divergences.divergence_report(a_t, b_t)
            worst_jeff = max(worst_jeff, abs(rep.jeffreys - rep.kl_forward - rep.kl_reverse))
            out_same = divergences.kl_gaussian(a_t, a_t)
            worst_neg = min(worst_neg, out_same)
    out.append(_true("divergence-properties", "KL nonnegative", worst_neg >= 0.0, worst_neg))
    out.append(_true("divergence-properties", "KL positive off-diagonal", min_distinct > 1e-6, min_distinct))
    out.append(_below("divergence-properties", "Jeffreys consistency", worst_jeff, 1e-12))
    a = gaussian([0.0], [[1.0]])
    b = gaussian([0.0], [[math.e]])
    exact = divergences.kl_gaussian(a, b)
    gaps = []
    for n in (1001, 4001, 16001):
        grid = Grid1D(-12.0, 12.0, n)
        fa = pde1d.gaussian_field(grid, 0.0, 1.0)
        fb = pde1d.gaussian_field(grid, 0.0, math.e)
        gaps.append(abs(divergences.kl_grid(fa, fb) - exact))
    out.append(_true(
        "divergence-properties",
        "grid KL refines monotonically to the closed form",
        gaps[0] >= gaps[1] >= gaps[2] and gaps[2] < 1e-6,
        gaps[2],
    ))
    return out


def suite_decay_lemma31() -> list[CheckResult]:
    out = []
    kinds = {
        SchemeKind.EXACT: None,
        SchemeKind.SPLIT_WFR: SplitOrder.W_THEN_FR,
        SchemeKind.SPLIT_FRW: SplitOrder.FR_THEN_W,
    }
    for label, (ctx, init) in (("left", _fig1_left()), ("right", _fig1_right())):
        setup = DecaySetup.from_init(ctx, init, 0.7)
        worst = 0.0
        for kind, order in kinds.items():
            if order is None:
                states = [wfr_exact(ctx, init, n * 0.7) for n in range(1, 31)]
            else:
                states = [p.state for p in iterate_split(ctx, init, order, 0.7, 30)[1:]]
            for n, state in enumerate(states, start=1):
                om = decay.omega(kind, setup)
                val = decay.phi_n(decay.j_n(om, n, setup), n, setup)
                worst = max(worst, abs(val - divergences.kl_gaussian(state, ctx.target)))
        out.append(_below("decay-lemma31", f"KL functional equals trajectory KL ({label})", worst, 1e-9))
    return out


def suite_decay_omega_limit() -> list[CheckResult]:
    ctx, init = _fig1_left()
    out = []
    for kind in (SchemeKind.SPLIT_WFR, SchemeKind.SPLIT_FRW):
        errs = []
        for k in range(2, 7):
            setup = DecaySetup.from_init(ctx, init, 10.0**-k)
            exact = decay.omega(SchemeKind.EXACT, setup)
            errs.append(_max_abs(decay.omega(kind, setup).entries, exact.entries))
        ok = all(errs[i] > errs[i + 1] for i in range(len(errs) - 1)) and errs[-1] < 1e-5
        out.append(_true("decay-omega-limit", f"{kind.value} weight converges monotonically", ok, errs[-1]))
    return out


def suite_decay_ratio() -> list[CheckResult]:
    out = []
    cases = [
        ("fig1-left", *_fig1_left()),
        ("fig1-right", *_fig1_right()),
        ("10d", *_instance_10d()),
    ]
    for label, ctx, init in cases:
        setup = DecaySetup.from_init(ctx, init, 0.7)
        worst = 0.0
        for kind in (SchemeKind.SPLIT_WFR, SchemeKind.SPLIT_FRW):
            asym = decay.asymptotic_ratio(kind, setup)
            worst = max(worst, abs(decay.empirical_ratio(kind, 400, setup) - asym))
        out.append(_below("decay-ratio", f"empirical ratio at n=400 ({label})", worst, 1e-4))
    ctx, _ = _fig1_left()
    s_a = DecaySetup(ctx, np.array([[-99.0]]), [5.0], 0.7)
    s_b = DecaySetup(ctx, np.array([[-99.0]]), [50.0], 0.7)
    gap = abs(
        decay.asymptotic_ratio(SchemeKind.SPLIT_WFR, s_a)
        - decay.asymptotic_ratio(SchemeKind.SPLIT_WFR, s_b)
    )
    out.append(_below("decay-ratio", "1D limit independent of the mean gap", gap, 1e-10))
    return out


def suite_decay_definiteness() -> list[CheckResult]:
    out = []
    ctx, init = _fig1_right()
    setup = DecaySetup.from_init(ctx, init, 0.7)
    report = decay.classify_definiteness(setup)
    worst = math.inf
    for kind in SchemeKind:
        om = decay.omega(kind, setup)
        for n in range(1, 101):
            worst = min(worst, min_eig(decay.j_n(om, n, setup)))
    out.append(_true(
        "decay-definiteness",
        "positive gap stays positive for 100 steps",
        report.case == "positive" and worst > 0.0,
        worst,
    ))
    ctx, init = _fig1_left()
    setup = DecaySetup.from_init(ctx, init, 0.7)
    report = decay.classify_definiteness(setup)
    worst = -math.inf
    for kind in SchemeKind:
        om = decay.omega(kind, setup)
        for n in range(1, 101):
            w = np.linalg.eigvalsh(decay.j_n(om, n, setup).entries)
            worst = max(worst, float(w[-1]))
    out.append(_true(
        "decay-definiteness",
        "negative case stays negative for 100 steps",
        report.case == "negative" and worst < 0.0,
        worst,
    ))
    ctx2 = WfrContext.from_target(gaussian([0.0, 0.0], np.diag([1.0, 2.0])))
    mixed = DecaySetup(ctx2, np.diag([1.0, -0.5]), np.ones(2), 0.7)
    out.append(_true(
        "decay-definiteness",
        "mixed signature classifies as neither",
        decay.classify_definiteness(mixed).case == "neither",
    ))
    return out


def suite_decay_bounds() -> list[CheckResult]:
    out = []
    ctx, init = _fig1_left()
    setup = DecaySetup.from_init(ctx, init, 0.7)
    ts = np.linspace(0.0, 20.0, 200)
    worst = -math.inf
    for t in ts:
        worst = max(worst, decay.wfr_kl(setup, float(t)) - decay.bound_min_rule(setup, float(t)))
    out.append(_true("decay-bounds", "pure-flow min rule dominates", worst <= 1e-12, worst))
    params = decay.sharp_bound_params(setup, 0.1)
    ok_t0 = params is not None and abs(params.t0 - math.log(0.99 * 1000.0)) < 1e-12
    out.append(_true("decay-bounds", "sharp-bound onset matches the curvature rule", ok_t0,
                     0.0 if params is None else params.t0))
    worst = -math.inf
    if params is not None:
        for t in np.linspace(params.t0, 20.0, 100):
            bound = decay.bound_sharp(setup, float(t), 0.1)
            worst = max(worst, decay.wfr_kl(setup, float(t)) - bound)
    out.append(_true("decay-bounds", "sharp bound dominates on its region", worst <= 0.0, worst))
    constants = logconcavity.gaussian_constants(ctx.target, init, 0.5)
    worst = -math.inf
    for t in np.linspace(0.0, 20.0, 100):
        truth = divergences.divergence_report(wfr_exact(ctx, init, float(t)), ctx.target).jeffreys
        worst = max(
            worst,
            truth - decay.jeffreys_bound(setup, constants, float(t)),
            truth - decay.jeffreys_bound_fixed(setup, constants, float(t)),
        )
    out.append(_true("decay-bounds", "symmetrized-KL bounds dominate", worst <= 0.0, worst))
    return out


def suite_logconcavity_bounds() -> list[CheckResult]:
    out = []
    init = gaussian([0.0], [[1.0]])
    for c_pi in (100.0, 5.0, 2.1):
        target = gaussian([0.0], [[c_pi]])
        ctx = WfrContext.from_target(target)
        constants = logconcavity.gaussian_constants(target, init, 0.5)
        curve = logconcavity.WfrAlphaCurve.from_constants(constants)
        ts = np.linspace(0.0, 20.0, 500)
        alphas = logconcavity.wfr_alpha(curve, ts)
        worst = -math.inf
        for t, alpha in zip(ts, alphas):
            worst = max(worst, float(alpha) - logconcavity.true_alpha_gaussian(ctx, init, float(t)))
        # faithful check; known to fail by design of the printed certificate
        out.append(_below(
            "logconcavity-bounds",
            f"uniform certificate lower-bounds the truth (c_pi={c_pi:g})",
            worst,
            1e-10,
        ))
    constants = logconcavity.gaussian_constants(gaussian([0.0], [[100.0]]), init, 0.5)
    ts = np.linspace(0.0, 50.0, 400)
    fr_vals = logconcavity.fr_alpha(constants, ts)
    lo = min(constants.alpha_0, constants.alpha_pi) - 1e-15
    hi = max(constants.alpha_0, constants.alpha_pi) + 1e-15
    mono = np.all(np.diff(fr_vals) <= 0) or np.all(np.diff(fr_vals) >= 0)
    out.append(_true(
        "logconcavity-bounds",
        "reweighting constant interpolates monotonically",
        mono and np.all(fr_vals >= lo) and np.all(fr_vals <= hi),
    ))
    curve = logconcavity.WfrAlphaCurve.from_constants(constants)
    uni = logconcavity.wfr_alpha(curve, ts)
    limit = 0.5 * constants.alpha_pi + curve.c_inf_1
    mono = np.all(np.diff(uni) <= 1e-15)
    out.append(_true(
        "logconcavity-bounds",
        "uniform certificate is monotone and never crosses its limit",
        mono and np.all(uni >= limit - 1e-12),
        float(np.min(uni) - limit),
    ))
    horizon = logconcavity.w_horizon(constants)
    dt = 1e-4
    n = int(horizon.t_star / dt * 0.95)
    c = constants.c0
    b2 = horizon.b**2
    worst = 0.0
    for k in range(1, n + 1):
        k1 = -c * c - b2
        k2 = -((c + 0.5 * dt * k1) ** 2) - b2
        k3 = -((c + 0.5 * dt * k2) ** 2) - b2
        k4 = -((c + dt * k3) ** 2) - b2
        c += (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        worst = max(worst, abs(c - float(horizon.c_curve(k * dt))))
    out.append(_below("logconcavity-bounds", "horizon curve matches its RK4 twin", worst, 1e-8))
    return out


def suite_riccati() -> list[CheckResult]:
    init = gaussian([0.0], [[1.0]])
    target = gaussian([0.0], [[100.0]])
    constants = logconcavity.gaussian_constants(target, init, 0.5)
    curve = logconcavity.WfrAlphaCurve.from_constants(constants)
    out = [_below("riccati", "closed form matches RK4 at dt=1e-4",
                  logconcavity.riccati_check(curve, 10.0, 1e-4), 1e-8)]
    # order measurement needs steps coarse enough that truncation beats round-off
    dev1 = logconcavity.riccati_check(curve, 10.0, 0.05)
    dev2 = logconcavity.riccati_check(curve, 10.0, 0.025)
    ratio = dev1 / dev2 if dev2 > 0 else math.inf
    out.append(_true("riccati", "fourth-order step halving", 10.0 <= ratio <= 25.0, ratio))
    fixed = logconcavity.WfrAlphaCurve(
        constants=logconcavity.ConvexityConstants(
            constants.alpha_pi, constants.L_pi, constants.alpha_0, constants.L_0,
            constants.delta, constants.alpha_d, constants.alpha_h, constants.b,
            curve.c_inf_1,
        ),
        c_inf_1=curve.c_inf_1,
        c_inf_2=curve.c_inf_2,
        l0=0.0,
    )
    dev0 = logconcavity.riccati_check(fixed, 5.0, 1e-3)
    out.append(_below("riccati", "fixed point stays fixed", dev0, 1e-10))
    return out


def suite_series_check() -> list[CheckResult]:
    ctx1 = WfrContext.from_target(gaussian([0.0], [[1.0]]))
    p, c = gfrw_series_check(ctx1, 0.5, 30)
    gap1 = _max_abs(p.entries, c.entries)
    ctx3 = WfrContext.from_target(gaussian([0.0] * 3, np.diag([1.0, 2.0, 4.0])))
    p, c = gfrw_series_check(ctx3, 0.7, 40)
    gap3 = _max_abs(p.entries, c.entries)
    p0, c0 = gfrw_series_check(ctx3, 0.0, 10)
    return [
        _below("series-check", "1D partial sum converges", gap1, 1e-12),
        _below("series-check", "3D partial sum converges", gap3, 1e-10),
        _below("series-check", "zero step gives zero matrices",
               max(_max_abs(p0.entries, 0.0), _max_abs(c0.entries, 0.0)), 0.0),
    ]


def _grid_gaussian_case(n_points: int):
    target = pde1d.GaussianTarget(20.0, 100.0)
    grid = pde1d.suggest_grid(target, 0.0, 1.0, n_points)
    ctx, init = _fig1_left()
    return target, grid, ctx, init


def suite_grid_mass() -> list[CheckResult]:
    target, grid, _, _ = _grid_gaussian_case(2001)
    v = pde1d.gaussian_field(grid, 0.0, 1.0)
    worst_norm = 0.0
    worst_drift = 0.0
    state = v
    for _ in range(5):
        state = pde1d.w_step_grid(target, state, 0.1)
        worst_norm = max(worst_norm, abs(state.normalization() - 1.0))
        worst_drift = max(worst_drift, state.renorm_drift)
        state = pde1d.fr_step_grid(target, state, 0.1)
        worst_norm = max(worst_norm, abs(state.normalization() - 1.0))
    return [
        _below("grid-mass", "mass stays unit through the steps", worst_norm, 1e-8),
        _below("grid-mass", "transport renormalization drift per step", worst_drift, 1e-10),
        _below("grid-mass", "boundary mass is negligible", state.boundary_mass(), 1e-9),
    ]


def suite_grid_gaussian() -> list[CheckResult]:
    out = []
    target, grid, ctx, init = _grid_gaussian_case(8001)
    v0 = pde1d.gaussian_field(grid, 0.0, 1.0)
    f = pde1d.fr_step_grid(target, v0, 0.5)
    ref = fr_step(ctx, init, 0.5)
    err_fr = max(abs(f.mean() - ref.mean[0]), abs(f.variance() - ref.cov.entries[0, 0]))
    out.append(_below("grid-gaussian", "reweighting step moments (8001 pts)", err_fr, 1e-4))
    w = pde1d.w_step_grid(target, v0, 0.3)
    refw = w_step(ctx, init, 0.3)
    err_w = max(abs(w.mean() - refw.mean[0]), abs(w.variance() - refw.cov.entries[0, 0]))
    out.append(_below("grid-gaussian", "transport step moments (8001 pts)", err_w, 1e-4))
    pi_h = pde1d.target_field(target, grid)
    drift = float(np.max(np.abs(pde1d.w_step_grid(target, pi_h, 0.5).values - pi_h.values)))
    out.append(_below("grid-gaussian", "discretized target is stationary", drift, 1e-6))
    target16, grid16, _, _ = _grid_gaussian_case(16001)
    v16 = pde1d.gaussian_field(grid16, 0.0, 1.0)
    r = pde1d.wfr_reference_grid(target16, v16, 1.0, 1e-3)
    refe = wfr_exact(ctx, init, 1.0)
    err_ref = max(abs(r.mean() - refe.mean[0]), abs(r.variance() - refe.cov.entries[0, 0]))
    out.append(_below("grid-gaussian", "reference composition moments (16001 pts)", err_ref, 1e-4))
    r8 = pde1d.wfr_reference_grid(target, v0, 1.0, 1e-3)
    err8 = abs(r8.variance() - refe.cov.entries[0, 0])
    ratio = err8 / err_ref if err_ref > 0 else math.inf
    out.append(_true("grid-gaussian", "reference error refines at second order",
                     2.5 <= ratio <= 6.0, ratio))
    return out


def suite_grid_splitting_order() -> list[CheckResult]:
    out = []
    cases = []
    target_g, grid_g, _, _ = _grid_gaussian_case(4001)
    cases.append(("gaussian", target_g, grid_g, pde1d.gaussian_field(grid_g, 0.0, 1.0)))
    target_m = pde1d.mixture_demo_target()
    grid_m = pde1d.suggest_grid(target_m, 0.0, 0.5, 2001)
    cases.append(("mixture", target_m, grid_m, pde1d.gaussian_field(grid_m, 0.0, 0.5)))
    for label, target, grid, mu0 in cases:
        pi_h = pde1d.target_field(target, grid)
        ref_kl = divergences.kl_grid(pde1d.wfr_reference_grid(target, mu0, 2.0, 1e-3), pi_h)
        weights = pde1d.edge_weights(target, grid)
        for w_first in (True, False):
            errs = []
            for g in (0.2, 0.1, 0.05):
                state = mu0
                for _ in range(int(round(2.0 / g))):
                    state = pde1d.split_step_grid(target, state, w_first, g, weights=weights)
                errs.append(abs(divergences.kl_grid(state, pi_h) - ref_kl))
            ratios = [errs[i] / errs[i + 1] for i in range(2)]
            ok = all(1.6 <= r <= 2.4 for r in ratios)
            name = f"{label} {'transport-first' if w_first else 'reweight-first'} halving"
            out.append(_true("grid-splitting-order", name, ok, min(ratios)))
    return out


def suite_grid_covariance_signs() -> list[CheckResult]:
    out = []
    rng = np.random.default_rng(42)
    worst = -math.inf
    for _ in range(20):
        c_pi = 10.0 ** rng.uniform(-0.5, 1.5)
        q = c_pi * rng.uniform(0.05, 0.95)
        b = rng.uniform(-3.0, 3.0)
        m_pi = rng.uniform(-3.0, 3.0)
        target = pde1d.GaussianTarget(m_pi, c_pi)
        grid = pde1d.suggest_grid(target, b, q, 4001)
        worst = max(worst, pde1d.cov_diagnostic(pde1d.gaussian_field(grid, b, q), target))
    out.append(_true("grid-covariance-signs", "narrower Gaussian gives negative covariance",
                     worst < 0.0, worst))
    worst = -math.inf
    target = pde1d.GaussianTarget(0.0, 4.0)
    grid = pde1d.suggest_grid(target, 0.0, 4.0, 4001)
    x = grid.nodes
    logpi = target.log_density(x)
    for a in (0.2, 0.5, 1.0):
        for b4 in (0.05, 0.2):
            # even, strongly convex exponent h => log(nu/pi) = -h + const
            h = 0.5 * a * x**2 + b4 * x**4 / 12.0
            nu = pde1d.DensityField.from_raw(grid, np.exp(logpi - h - np.max(logpi - h)))
            worst = max(worst, pde1d.cov_diagnostic(nu, target))
    out.append(_true("grid-covariance-signs", "even convex log ratio gives negative covariance",
                     worst < 0.0, worst))
    target = pde1d.GaussianTarget(0.0, 1.0)
    grid = pde1d.suggest_grid(target, 0.0, 4.0, 2001)
    mu0 = pde1d.gaussian_field(grid, 0.0, 4.0)
    traj = pde1d.frw_split_trajectory(target, mu0, 0.5, 8)
    val = pde1d.frw_perturbation_grid(traj, target, 0.5, 8)
    out.append(_true("grid-covariance-signs", "reweight-first covariance integral is positive",
                     val > 0.0, val))
    target, grid, _, _ = _grid_gaussian_case(4001)
    v0 = pde1d.gaussian_field(grid, 0.0, 1.0)
    pi_h = pde1d.target_field(target, grid)
    gam = 0.5
    n_sub = pde1d.default_substeps(gam + 1e-3, grid)

    def one_step(s: float):
        return pde1d.fr_step_grid(target, pde1d.w_step_grid(target, v0, s, n_substeps=n_sub), s)

    terms = pde1d.kl_decay_rhs_wfr_split(one_step(gam), target, gam)
    h = 1e-3
    fd = (divergences.kl_grid(one_step(gam + h), pi_h)
          - divergences.kl_grid(one_step(gam - h), pi_h)) / (2.0 * h)
    rel = abs(terms.total - fd) / abs(fd)
    out.append(_below("grid-covariance-signs", "KL derivative decomposition matches FD", rel, 5e-3))
    return out


SUITES = {
    "linalg-properties": suite_linalg_properties,
    "gaussian-composition": suite_gaussian_composition,
    "gaussian-invariance": suite_gaussian_invariance,
    "gaussian-mean-universality": suite_gaussian_mean_universality,
    "gaussian-splitting-order": suite_gaussian_splitting_order,
    "gaussian-ode-oracle": suite_gaussian_ode_oracle,
    "divergence-properties": suite_divergence_properties,
    "decay-lemma31": suite_decay_lemma31,
    "decay-omega-limit": suite_decay_omega_limit,
    "decay-ratio": suite_decay_ratio,
    "decay-definiteness": suite_decay_definiteness,
    "decay-bounds": suite_decay_bounds,
    "logconcavity-bounds": suite_logconcavity_bounds,
    "riccati": suite_riccati,
    "series-check": suite_series_check,
    "grid-mass": suite_grid_mass,
    "grid-gaussian": suite_grid_gaussian,
    "grid-splitting-order": suite_grid_splitting_order,
    "grid-covariance-signs": suite_grid_covariance_signs,
}


def run_suites(names: list[str] | None = None) -> list[CheckResult]:
    if names is None:
        names = list(SUITES)
    results: list[CheckResult] = []
    for name in names:
        if name not in SUITES:
            raise KeyError(name)
        results.extend(SUITES[name]())
    return results
