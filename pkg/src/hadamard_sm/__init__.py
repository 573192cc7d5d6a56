"""Radial Schrodinger-Maxwell systems on constant-curvature model spaces."""
from .errors import (ConfigError, DomainError, GridMismatchError, HadamardSMError,
                     RingConditionError, UnsupportedError)
from .geometry import (SpaceFormParams, ball_volume_ratio, cotangent_coeff, metric_coeff,
                       model_volume, static_profile_w, unit_ball_volume)
from .grid import (RadialField, RadialGrid, TridiagonalSystem, apply_operator, assemble_system,
                   build_grid, h1_inner, h1_norm, integrate)
from .maxwell import ComparisonReport, check_comparison, schrodinger_apply, solve_phi
from .model import (Nonlinearity, ProblemConfig, RadialWeight, compute_cf, eval_f, eval_F,
                    lambda0_upper, lambda_tilde, oscillation_levels)
from .energy import eval_energy, eval_Ffun, eval_gradient, eval_H
from .solvers import SolveReport, minimize, minimize_box, mountain_pass

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "GridMismatchError",
    "HadamardSMError",
    "RingConditionError",
    "UnsupportedError",
    "SpaceFormParams",
    "ball_volume_ratio",
    "cotangent_coeff",
    "metric_coeff",
    "model_volume",
    "static_profile_w",
    "unit_ball_volume",
    "RadialField",
    "RadialGrid",
    "TridiagonalSystem",
    "apply_operator",
    "assemble_system",
    "build_grid",
    "h1_inner",
    "h1_norm",
    "integrate",
    "ComparisonReport",
    "check_comparison",
    "schrodinger_apply",
    "solve_phi",
    "Nonlinearity",
    "ProblemConfig",
    "RadialWeight",
    "compute_cf",
    "eval_f",
    "eval_F",
    "lambda0_upper",
    "lambda_tilde",
    "oscillation_levels",
    "eval_energy",
    "eval_Ffun",
    "eval_gradient",
    "eval_H",
    "SolveReport",
    "minimize",
    "minimize_box",
    "mountain_pass",
]
