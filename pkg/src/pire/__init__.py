"""Proximal iteratively reweighted solvers for nonconvex sparse problems.

Solves objectives of the form ``lambda * f(g(x)) + h(x)`` where ``f`` is a
concave increasing penalty applied to a nonnegative structure map ``g``
with a cheap weighted prox, and ``h`` is a smooth loss. Ships the PIRE
solver, its parallel (Jacobi) and alternating (Gauss-Seidel) splitting
variants, the FISTA / IRL1 / IRLS baselines, and a synthetic benchmark
harness with a CLI.
"""

from .backend import USING_COMPILED, backend_name
from .penalties import (
    CappedL1,
    EpsilonSchedule,
    Identity,
    Logarithm,
    LpPower,
    epsilon_step,
    penalty_from_config,
)
from .regularizers import (
    AbsoluteValue,
    GroupL2,
    RowL1,
    Square,
    regularizer_from_config,
)
from .losses import (
    BlockStructure,
    LeastSquares,
    Logistic,
    MultiTaskLeastSquares,
    spectral_norm_sq,
)
from .solvers import (
    IterationTrace,
    Problem,
    SolveResult,
    SolverConfig,
    objective_value,
    solve,
    solve_pire,
    solve_pire_au,
    solve_pire_ps,
    stationarity_residual,
)
from .baselines import BaselineConfig, solve_fista_l1, solve_irl1, solve_irls
from .errors import ConfigError, NumericError

__version__ = "0.1.0"

__all__ = [
    "AbsoluteValue",
    "BaselineConfig",
    "BlockStructure",
    "CappedL1",
    "ConfigError",
    "EpsilonSchedule",
    "GroupL2",
    "Identity",
    "IterationTrace",
    "LeastSquares",
    "Logarithm",
    "Logistic",
    "LpPower",
    "MultiTaskLeastSquares",
    "NumericError",
    "Problem",
    "RowL1",
    "SolveResult",
    "SolverConfig",
    "Square",
    "USING_COMPILED",
    "backend_name",
    "epsilon_step",
    "objective_value",
    "penalty_from_config",
    "regularizer_from_config",
    "solve",
    "solve_fista_l1",
    "solve_irl1",
    "solve_irls",
    "solve_pire",
    "solve_pire_au",
    "solve_pire_ps",
    "spectral_norm_sq",
    "stationarity_residual",
]
