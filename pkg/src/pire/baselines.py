"""Comparison solvers for the lp-regularized least squares problem.

* ``solve_fista_l1``: accelerated proximal gradient for the convex
  weighted-l1 problem ``min lam * sum w_i |x_i| + 0.5 ||Ax - b||^2``.
* ``solve_irl1``: outer reweighting of the smoothed lp penalty, each
  outer step solved by FISTA warm-started at the previous iterate.
* ``solve_irls``: outer reweighting of the squared-variable smoothing,
  each outer step a dense symmetric positive-definite linear solve.

The right-hand side ``b`` may be a matrix, in which case the penalty is
applied entrywise to the flattened coefficient matrix (IRLS then solves
one system per column, each with its own weights).
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .backend import kernels
from .errors import ConfigError
from .losses import LeastSquares
from .penalties import EpsilonSchedule, LpPower
from .solvers import IterationTrace, SolveResult

__all__ = ["BaselineConfig", "solve_fista_l1", "solve_irl1", "solve_irls"]


@dataclass(frozen=True)
class BaselineConfig:
    tol: float = 1e-6
    max_outer: int = 10000
    inner_tol: float = 1e-8
    inner_max_iter: int = 1000
    epsilon: float = 0.01
    epsilon_schedule: EpsilonSchedule | None = None
    epsilon_floor: float = 1e-10
    p: float = 0.5

    def __post_init__(self):
        if self.tol <= 0.0 or self.inner_tol <= 0.0:
            raise ConfigError("tolerances must be positive")
        if not 0.0 < self.p < 1.0:
            raise ConfigError("p must lie in (0, 1)")
        if self.epsilon <= 0.0:
            raise ConfigError("epsilon must be positive")


def _fista_core(loss, lam, weights, x0, tol, max_iter, trace=None):
    """Weighted-l1 FISTA; returns (best iterate, iterations, converged).

    ``weights`` of None means unit weights. The returned iterate is the
    one with the lowest recorded objective (for a converged run this is
    the last one up to noise in the momentum tail).
    """
    L = loss.lipschitz()
    if L <= 0.0:
        raise ValueError("least-squares matrix must be nonzero")
    thresh = np.full(loss.dim, lam / L) if weights is None else (lam * weights) / L
    thresh = np.ascontiguousarray(thresh, dtype=np.float64)

    def l1_part(v):
        return float(np.sum(np.abs(v))) if weights is None else float(weights @ np.abs(v))

    x = np.zeros(loss.dim) if x0 is None else np.ascontiguousarray(x0, dtype=np.float64).copy()
    y = x.copy()
    t_k = 1.0
    best_x = x.copy()
    best_f = lam * l1_part(x) + loss.value(x)
    if trace is not None:
        trace.append(best_f, float("nan"), float("nan"), float("nan"), 0.0)
    iterations = 0
    converged = False
    for _ in range(max_iter):
        _, grad = loss.value_and_gradient(y)
        b = y - grad / L
        x_new = np.empty_like(b)
        kernels.soft_threshold(b, thresh, x_new)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k)) / 2.0
        y = x_new + ((t_k - 1.0) / t_next) * (x_new - x)
        t_k = t_next

        f_new = lam * l1_part(x_new) + loss.value(x_new)
        step = float(np.linalg.norm(x_new - x))
        x_norm = float(np.linalg.norm(x))
        rel = step / x_norm if x_norm > 0.0 else step
        if trace is not None:
            trace.append(f_new, step, rel, float("nan"), 0.0)
        if f_new < best_f:
            best_f = f_new
            best_x = x_new.copy()
        x = x_new
        iterations += 1
        if rel <= tol:
            converged = True
            break
    return best_x, best_f, iterations, converged


def solve_fista_l1(A, b, lam, cfg=None, weights=None, x0=None):
    """min lam * sum w_i |x_i| + 0.5 ||Ax - b||^2 by FISTA."""
    cfg = cfg or BaselineConfig()
    if lam < 0.0:
        raise ValueError("lambda must be nonnegative")
    t0 = time.perf_counter()
    loss = LeastSquares(A, b)
    trace = IterationTrace()
    x, f, iterations, converged = _fista_core(
        loss, lam, weights, x0, cfg.tol, cfg.max_outer, trace=trace
    )
    L = loss.lipschitz()
    w = np.ones(loss.dim) if weights is None else np.asarray(weights, dtype=np.float64)
    probe = np.empty_like(x)
    kernels.soft_threshold(x - loss.gradient(x) / L, (lam * w) / L, probe)
    residual = float(np.max(np.abs(x - probe))) if x.size else 0.0
    return SolveResult(
        x_star=x,
        objective=f,
        iterations=iterations,
        termination="tolerance" if converged else "max_iter",
        trace=trace,
        stationarity_residual=residual,
        elapsed=time.perf_counter() - t0,
        mu=np.array([L]),
        lipschitz=L,
    )


def _epsilon_next(eps, cfg):
    if cfg.epsilon_schedule is None:
        return eps
    return max(cfg.epsilon_schedule.step(eps), cfg.epsilon_floor)


def solve_irl1(A, b, lam, cfg, x0=None):
    """Iteratively reweighted l1: weights p/(|x_i|+eps)^(1-p), inner
    weighted-l1 subproblems solved by warm-started FISTA."""
    t0 = time.perf_counter()
    loss = LeastSquares(A, b)
    eps = cfg.epsilon_schedule.epsilon0 if cfg.epsilon_schedule is not None else cfg.epsilon
    pen = LpPower(cfg.p, eps)
    x = np.zeros(loss.dim) if x0 is None else np.ascontiguousarray(x0, dtype=np.float64).copy()

    warnings = []
    trace = IterationTrace()
    F = lam * pen.value(np.abs(x)) + loss.value(x)
    trace.append(F, float("nan"), float("nan"), pen.epsilon, (time.perf_counter() - t0) * 1e3)
    inner_total = 0
    iterations = 0
    termination = "max_iter"
    for k in range(cfg.max_outer):
        w = pen.weight(np.abs(x))
        x_new, _, inner_iters, inner_ok = _fista_core(
            loss, lam, w, x, cfg.inner_tol, cfg.inner_max_iter
        )
        inner_total += inner_iters
        if not inner_ok:
            warnings.append(
                f"inner FISTA hit {cfg.inner_max_iter} iterations at outer step {k + 1}"
            )
        pen = pen.with_epsilon(_epsilon_next(pen.epsilon, cfg))
        F = lam * pen.value(np.abs(x_new)) + loss.value(x_new)
        step = float(np.linalg.norm(x_new - x))
        x_norm = float(np.linalg.norm(x))
        rel = step / x_norm if x_norm > 0.0 else step
        trace.append(F, step, rel, pen.epsilon, (time.perf_counter() - t0) * 1e3)
        x = x_new
        iterations += 1
        if rel <= cfg.tol:
            termination = "tolerance"
            break

    return SolveResult(
        x_star=x,
        objective=F,
        iterations=iterations,
        termination=termination,
        trace=trace,
        stationarity_residual=float("nan"),
        elapsed=time.perf_counter() - t0,
        epsilon_final=pen.epsilon,
        inner_iterations=inner_total,
        warnings=warnings,
    )


def solve_irls(A, b, lam, cfg, x0=None):
    """Iteratively reweighted least squares: each outer step solves
    (lam * Diag(w) + A^T A) x = A^T b by dense Cholesky factorization,
    one system per column of the variable."""
    t0 = time.perf_counter()
    loss = LeastSquares(A, b)
    n = loss.n
    t = loss.t
    AtA = A.T @ A
    Atb = (A.T @ loss.b).reshape(n, t)
    eps = cfg.epsilon_schedule.epsilon0 if cfg.epsilon_schedule is not None else cfg.epsilon
    # objective of the smoothed problem: lam * sum (x^2 + eps)^(p/2) + 0.5||Ax-b||^2
    pen = LpPower(cfg.p / 2.0, eps)
    x = np.zeros(loss.dim) if x0 is None else np.ascontiguousarray(x0, dtype=np.float64).copy()

    warnings = []
    trace = IterationTrace()
    F = lam * pen.value(x * x) + loss.value(x)
    trace.append(F, float("nan"), float("nan"), pen.epsilon, (time.perf_counter() - t0) * 1e3)
    iterations = 0
    termination = "max_iter"
    for k in range(cfg.max_outer):
        X = x.reshape(n, t)
        W = cfg.p * np.power(X * X + pen.epsilon, cfg.p / 2.0 - 1.0)
        X_new = np.empty_like(X)
        for j in range(t):
            M = AtA + np.diag(lam * W[:, j])
            try:
                factor = scipy.linalg.cho_factor(M, check_finite=False)
            except scipy.linalg.LinAlgError:
                warnings.append(f"singular system at outer step {k + 1}; added 1e-12 jitter")
                M[np.diag_indices_from(M)] += 1e-12
                factor = scipy.linalg.cho_factor(M, check_finite=False)
            X_new[:, j] = scipy.linalg.cho_solve(factor, Atb[:, j], check_finite=False)
        x_new = np.ascontiguousarray(X_new.reshape(-1))
        pen = pen.with_epsilon(_epsilon_next(pen.epsilon, cfg))
        F = lam * pen.value(x_new * x_new) + loss.value(x_new)
        step = float(np.linalg.norm(x_new - x))
        x_norm = float(np.linalg.norm(x))
        rel = step / x_norm if x_norm > 0.0 else step
        trace.append(F, step, rel, pen.epsilon, (time.perf_counter() - t0) * 1e3)
        x = x_new
        iterations += 1
        if rel <= cfg.tol:
            termination = "tolerance"
            break

    return SolveResult(
        x_star=x,
        objective=F,
        iterations=iterations,
        termination=termination,
        trace=trace,
        stationarity_residual=float("nan"),
        elapsed=time.perf_counter() - t0,
        epsilon_final=pen.epsilon,
        warnings=warnings,
    )
