"""Conformable-derivative Dirichlet problems of order 1 < alpha < 2.

Green's-function solver, lower/upper-solution fixed-point iteration and a
Lyapunov-inequality certifier for T_alpha u + f(t, u) = 0, u(a) = u(b) = 0.
"""

from .calculus import (
    CheckResult,
    SmoothProbe,
    Verdict,
    conformable_derivative,
    conformable_derivative_sub1,
    conformable_integral,
    extremum_sign_check,
    inversion_check,
)
from .core import (
    DomainError,
    GridFunction,
    Interval,
    Order,
    QuadratureEvaluationError,
    WeightedQuadrature,
    build_weighted_quadrature,
    weighted_integral,
)
from .linear import GreenKernel, LinearProblem, check_green_bounds, green_eval, residual_linear, solve_linear
from .nonlinear import (
    Bracket,
    BracketError,
    ModifiedRHS,
    NonlinearProblem,
    SolveConfig,
    SolveReport,
    apply_A,
    modify_rhs,
    solve_nonlinear,
    verify_lower,
    verify_upper,
)
from .spectral import (
    EigenResult,
    LyapunovReport,
    borg_ratio,
    lyapunov_check,
    principal_eigenvalue,
    sharpness_probe,
    weighted_q_norm,
)

__all__ = [
    "apply_A",
    "borg_ratio",
    "Bracket",
    "BracketError",
    "build_weighted_quadrature",
    "check_green_bounds",
    "CheckResult",
    "conformable_derivative",
    "conformable_derivative_sub1",
    "conformable_integral",
    "DomainError",
    "EigenResult",
    "extremum_sign_check",
    "green_eval",
    "GreenKernel",
    "GridFunction",
    "Interval",
    "inversion_check",
    "LinearProblem",
    "lyapunov_check",
    "LyapunovReport",
    "ModifiedRHS",
    "modify_rhs",
    "NonlinearProblem",
    "Order",
    "principal_eigenvalue",
    "QuadratureEvaluationError",
    "residual_linear",
    "sharpness_probe",
    "SmoothProbe",
    "solve_linear",
    "solve_nonlinear",
    "SolveConfig",
    "SolveReport",
    "Verdict",
    "verify_lower",
    "verify_upper",
    "weighted_integral",
    "weighted_q_norm",
    "WeightedQuadrature",
]

__version__ = "0.1.0"
