"""Spectral filter regularization for discrete ill-posed problems.

Solvers for five regularization methods sharing one spectral-filter
interface, classical test problems, a-priori/a-posteriori/heuristic
parameter-choice rules, a seeded Monte-Carlo benchmark harness, and numeric
verifiers for the analytic bounds the nrm filter satisfies.
"""

from .core import (Problem, SpectralConstraint, Svd, compute_svd, load_problem,
                   problem_from_json, problem_to_json, reconstructed_condition,
                   save_problem, scale_problem)
from .filters import (FILTER_KINDS, KINDS, METHODS, MethodSpec, cgls_iterates,
                      filter_solve, g_value, r_value, showalter_ode_solve)
from .mc import (McConfig, McReport, NoiseModel, add_noise, best_error_oracle,
                 conditioning_error_curve, curve_dominance, default_grid,
                 median_error_curve, run_monte_carlo)
from .problems import (SpectrumDecay, SyntheticSource, gen_baart,
                       gen_diag_synthetic, gen_heat, gen_shaw)
from .rules import (HEURISTICS, RuleOutcome, apriori_delta, apriori_theta_eps,
                    apriori_theta_p, heuristic_select, morozov_like)

__all__ = [
    "FILTER_KINDS", "HEURISTICS", "KINDS", "METHODS",
    "McConfig", "McReport", "MethodSpec", "NoiseModel", "Problem",
    "RuleOutcome", "SpectralConstraint", "SpectrumDecay", "Svd",
    "SyntheticSource", "add_noise", "apriori_delta", "apriori_theta_eps",
    "apriori_theta_p", "best_error_oracle", "cgls_iterates", "compute_svd",
    "conditioning_error_curve", "curve_dominance", "default_grid",
    "filter_solve", "g_value", "gen_baart", "gen_diag_synthetic", "gen_heat",
    "gen_shaw", "heuristic_select", "load_problem", "median_error_curve",
    "morozov_like", "problem_from_json", "problem_to_json", "r_value",
    "reconstructed_condition", "run_monte_carlo", "save_problem",
    "scale_problem", "showalter_ode_solve",
]

__version__ = "0.1.0"
