"""Numerical laboratory for the degenerate parabolic problem

    u_t = rho_lam(x) * u * u_xx + rho_lam(x) * g0(x) * u   on (0, inf),

with rho_lam(x) = x^(1/2) (x + lam) (x + 2 lam)^(1/2).
"""

from .weight import WeightContext, rho, nu_interval, nu_quadrature_weights
from .grid import Grid, Field, FieldSeries, make_graded_grid
from .solver import ProblemSpec, RegularizedInstance, GridParams, solve, truncation_schedule
from .special import SeparatedSolution
from .benilan_crandall import BCContext, K_of_t, bc_residual, audit_bc
from .estimates import EstimateReport, InteriorWindow
from .hardy import EmbeddingQuery, verdict
from .config import ExperimentConfig, load_config
from .experiment import RunReport, run_experiment, convergence_study, emit

__all__ = [
    "WeightContext",
    "rho",
    "nu_interval",
    "nu_quadrature_weights",
    "Grid",
    "Field",
    "FieldSeries",
    "make_graded_grid",
    "ProblemSpec",
    "RegularizedInstance",
    "GridParams",
    "solve",
    "truncation_schedule",
    "SeparatedSolution",
    "BCContext",
    "K_of_t",
    "bc_residual",
    "audit_bc",
    "EstimateReport",
    "InteriorWindow",
    "EmbeddingQuery",
    "verdict",
    "ExperimentConfig",
    "load_config",
    "RunReport",
    "run_experiment",
    "convergence_study",
    "emit",
]

__version__ = "0.1.0"
