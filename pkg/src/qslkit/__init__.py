"""Explicit quantum speed limits for Markovian open quantum systems."""

from .bounds import (
    QslReport,
    amplitude,
    bound_ratio,
    excess,
    gamma_sweep,
    lambda_from_theta,
    qsl_report,
    rank_states,
    t_dc,
    t_star,
    theta_from_lambda,
)
from .dynamics import EscapeResult, Trajectory, escape_time, evolve, rk4_step
from .engineering import (
    EngineeringProblem,
    EngineeringSolution,
    brute_force_minimize,
    cost,
    cost_gradient,
    solve_optimal,
    stationarity_residual,
)
from .errors import DimensionError, DomainError, IntegrationError, ModelError, ParseError, QslError
from .model import SystemModel
from .operators import PureState

__version__ = "0.1.0"

__all__ = [
    "DimensionError",
    "DomainError",
    "EngineeringProblem",
    "EngineeringSolution",
    "EscapeResult",
    "IntegrationError",
    "ModelError",
    "ParseError",
    "PureState",
    "QslError",
    "QslReport",
    "SystemModel",
    "Trajectory",
    "amplitude",
    "bound_ratio",
    "brute_force_minimize",
    "cost",
    "cost_gradient",
    "escape_time",
    "evolve",
    "excess",
    "gamma_sweep",
    "lambda_from_theta",
    "qsl_report",
    "rank_states",
    "rk4_step",
    "solve_optimal",
    "stationarity_residual",
    "t_dc",
    "t_star",
    "theta_from_lambda",
]
