"""Numerical laboratory for Wasserstein-Fisher-Rao flow splittings.

Closed-form Gaussian dynamics of the combined transport/reweighting flow
and its two alternating-operator splittings, their KL-decay analysis and
log-concavity constants, and a 1D grid solver for non-Gaussian targets.
"""

from .decay import (
    DecaySetup,
    DefinitenessReport,
    SchemeKind,
    asymptotic_ratio,
    bound_min_rule,
    bound_sharp,
    classify_definiteness,
    empirical_ratio,
    j_n,
    jeffreys_bound,
    jeffreys_bound_fixed,
    omega,
    phi_n,
    scheme_kl,
)
from .divergences import (
    DivergenceReport,
    divergence_report,
    fisher_info_gaussian,
    kl_gaussian,
    kl_grid,
)
from .flows import (
    MtKind,
    MtSpec,
    SplitOrder,
    TrajectoryPoint,
    WfrContext,
    fr_step,
    general_mt_solution,
    gfrw_series_check,
    iterate_split,
    make_context,
    moment_ode_integrate,
    split_step,
    w_step,
    wfr_exact,
)
from .grid import DensityField, Grid1D
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
from .logconcavity import (
    ConvexityConstants,
    WfrAlphaCurve,
    WHorizon,
    fr_alpha,
    gaussian_constants,
    riccati_check,
    true_alpha_gaussian,
    w_horizon,
    wfr_alpha,
)

__version__ = "0.1.0"

__all__ = [
    "ConvexityConstants",
    "DecaySetup",
    "DefinitenessReport",
    "DensityField",
    "DivergenceReport",
    "GaussianDist",
    "Grid1D",
    "MtKind",
    "MtSpec",
    "SchemeKind",
    "SpdMatrix",
    "SplitOrder",
    "SymMatrix",
    "TrajectoryPoint",
    "WHorizon",
    "WfrAlphaCurve",
    "WfrContext",
    "asymptotic_ratio",
    "bound_min_rule",
    "bound_sharp",
    "classify_definiteness",
    "divergence_report",
    "empirical_ratio",
    "fisher_info_gaussian",
    "fr_alpha",
    "fr_step",
    "gaussian",
    "gaussian_constants",
    "general_mt_solution",
    "gfrw_series_check",
    "iterate_split",
    "j_n",
    "jeffreys_bound",
    "jeffreys_bound_fixed",
    "kl_gaussian",
    "kl_grid",
    "logdet",
    "make_context",
    "min_eig",
    "moment_ode_integrate",
    "omega",
    "phi_n",
    "riccati_check",
    "scheme_kl",
    "spd_inverse",
    "split_step",
    "sym_expm",
    "true_alpha_gaussian",
    "w_horizon",
    "w_step",
    "wfr_alpha",
    "wfr_exact",
]
