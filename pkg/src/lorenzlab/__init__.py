"""Numerical laboratory for a stochastically forced Lorenz system.

The package simulates the three-dimensional Lorenz system with white noise
on the third component, in the original variables and in the transformed
charts where the invariant axis becomes tractable; estimates the stability
exponent that decides whether noise keeps trajectories away from the axis;
locates the noise strength at which that exponent changes sign; and builds
and verifies the two Lyapunov functions behind the stability argument.
"""

from .core import (DerivedConsts, Params, alpha_from_alpha_hat,
                   alpha_hat_from_alpha, derive_constants, validate_params)
from .errors import (BlowUpError, BracketError, ChartMismatchError,
                     DegenerateDiffusionError, DegenerateLambdaError,
                     DomainError, EmptyTrajectoryError, InvalidParameterError,
                     LorenzLabError, NoCrossingError, PreconditionError,
                     SingularSolveError, StepRejectedError,
                     TooFewExcursionsError)
from .estimators import (EstimateWithCI, LambdaMethod, Regime,
                         asymptotic_lambda, default_burn_in,
                         estimate_lambda_growth, estimate_lambda_mc,
                         heuristic_lambda)
from .excursions import (Excursion, Zone, decompose,
                         estimate_lambda_excursion, growth_observable,
                         lift_functional, simulate_first_exits,
                         stop_time_stats, zone)
from .fokker_planck import (DiscreteMeasure, Grid2D, GridFunction,
                            SparseOperator, build_operator, default_grid,
                            lambda_from_measure, lambda_pde, solve_poisson,
                            stationary_measure)
from .lyapunov import (CorrectorInterpolant, DriftReport, LyapConstants,
                       eval_V0, make_g_interpolator, select_constants,
                       v1_and_drift, verify_drift_full, verify_drift_V0)
from .sde import SimConfig, SimResult, SystemKind, simulate
from .theory_checks import (check_crossing_diff, check_exp_growth,
                            check_stable_tracking)
from .threshold import ThresholdResult, find_threshold
from .transforms import (Chart, GeneratorOp, Partials, State, apply_generator,
                         from_polar, from_transformed, polar_to_xy,
                         reduce_angle, stable_angle, to_polar, to_transformed,
                         unstable_angle, xy_to_polar)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # parameters and constants
    "Params", "DerivedConsts", "derive_constants", "validate_params",
    "alpha_from_alpha_hat", "alpha_hat_from_alpha",
    # charts and generators
    "Chart", "State", "Partials", "GeneratorOp", "reduce_angle",
    "to_transformed", "from_transformed", "to_polar", "from_polar",
    "xy_to_polar", "polar_to_xy", "stable_angle", "unstable_angle",
    "apply_generator",
    # simulation
    "SystemKind", "SimConfig", "SimResult", "simulate",
    # exponent estimation
    "LambdaMethod", "Regime", "EstimateWithCI", "estimate_lambda_mc",
    "estimate_lambda_growth", "heuristic_lambda", "asymptotic_lambda",
    "default_burn_in",
    # stationary PDE machinery
    "Grid2D", "SparseOperator", "DiscreteMeasure", "GridFunction",
    "default_grid", "build_operator", "stationary_measure",
    "lambda_from_measure", "lambda_pde", "solve_poisson",
    # Lyapunov construction and verification
    "LyapConstants", "DriftReport", "CorrectorInterpolant",
    "make_g_interpolator", "select_constants", "eval_V0", "v1_and_drift",
    "verify_drift_V0", "verify_drift_full",
    # excursion decomposition
    "Zone", "Excursion", "zone", "decompose", "growth_observable",
    "lift_functional", "estimate_lambda_excursion", "stop_time_stats",
    "simulate_first_exits",
    # threshold search
    "ThresholdResult", "find_threshold",
    # lemma validators
    "check_exp_growth", "check_stable_tracking", "check_crossing_diff",
    # errors
    "LorenzLabError", "InvalidParameterError", "ChartMismatchError",
    "DomainError", "StepRejectedError", "BlowUpError", "SingularSolveError",
    "TooFewExcursionsError", "BracketError", "DegenerateLambdaError",
    "DegenerateDiffusionError", "EmptyTrajectoryError", "PreconditionError",
    "NoCrossingError",
]
