"""Reweighted proximal solvers: single-block, Jacobi and Gauss-Seidel.

Every variant repeats the same two moves: minimize the current surrogate
(a weighted prox of the regularizer around a gradient step of the loss),
then refresh the penalty weights at the new point. The variants differ
only in how the variable is partitioned and which step sizes drive each
block:

* ``pire``     -- one block, step ``mu = margin * L/2`` from the global
  Lipschitz constant of the loss gradient.
* ``pire_ps``  -- all blocks updated from the previous iterate's
  snapshot (Jacobi); with ``use_block_lipschitz`` each block uses its
  own, typically much smaller, constant. Block updates are independent
  and may run on concurrent workers without changing the result.
* ``pire_au``  -- blocks updated in ascending order, each seeing the
  freshest values of its predecessors (Gauss-Seidel); per-block
  constants are mandatory.

Monotone objective descent holds at fixed smoothing offset by
construction; when an epsilon schedule is active the recorded objective
uses the offset current at each iteration.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, NumericError
from .losses import BlockStructure
from .penalties import EpsilonSchedule

__all__ = [
    "IterationTrace",
    "Problem",
    "SolveResult",
    "SolverConfig",
    "objective_value",
    "solve",
    "solve_pire",
    "solve_pire_au",
    "solve_pire_ps",
    "stationarity_residual",
]

VARIANTS = ("pire", "pire_ps", "pire_au")

_BACKTRACK_CAP = 60


@dataclass(frozen=True)
class Problem:
    """One objective: lam * penalty(g(x)) + loss(x)."""

    penalty: object
    regularizer: object
    loss: object
    lam: float

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("lambda must be nonnegative")
        # raises if the regularizer cannot wrap the loss variable
        self.regularizer.output_dim(self.loss.dim)


def objective_value(problem, x):
    """lam * f(g(x)) + h(x) at a point."""
    gx = problem.regularizer.g_value(x)
    return problem.lam * problem.penalty.value(gx) + problem.loss.value(x)


@dataclass(frozen=True)
class SolverConfig:
    variant: str = "pire"
    mu_margin: float = 1.01
    tol: float = 1e-6
    max_iter: int = 10000
    epsilon_schedule: EpsilonSchedule | None = None
    epsilon_floor: float = 1e-10
    blocks: BlockStructure | None = None
    use_block_lipschitz: bool = True
    init: object = "zeros"  # "zeros" | "l1_warm" | explicit array
    backtracking: bool = False
    backtracking_growth: float = 2.0
    mu0: float | None = None
    workers: int = 1
    record_iterates: bool = False
    time_budget_s: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.mu_margin <= 1.0:
            raise ConfigError("mu_margin must exceed 1")
        if self.tol <= 0.0 or self.max_iter < 1:
            raise ConfigError("tol must be positive and max_iter >= 1")
        if self.backtracking_growth <= 1.0:
            raise ConfigError("backtracking growth factor must exceed 1")
        if self.epsilon_floor < 0.0:
            raise ConfigError("epsilon_floor must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


class IterationTrace:
    """Per-iteration record; row 0 describes the initial point."""

    COLUMNS = ("iter", "objective", "step_norm", "relative_step", "epsilon", "elapsed_ms")

    def __init__(self):
        self._objective = []
        self._step_norm = []
        self._relative_step = []
        self._epsilon = []
        self._elapsed_ms = []

    def append(self, objective, step_norm, relative_step, epsilon, elapsed_ms):
        self._objective.append(float(objective))
        self._step_norm.append(float(step_norm))
        self._relative_step.append(float(relative_step))
        self._epsilon.append(float(epsilon))
        self._elapsed_ms.append(float(elapsed_ms))

    def __len__(self):
        return len(self._objective)

    @property
    def objective(self):
        return np.asarray(self._objective)

    @property
    def step_norm(self):
        return np.asarray(self._step_norm)

    @property
    def relative_step(self):
        return np.asarray(self._relative_step)

    @property
    def epsilon(self):
        return np.asarray(self._epsilon)

    @property
    def elapsed_ms(self):
        return np.asarray(self._elapsed_ms)

    def rows(self):
        for k in range(len(self)):
            yield (
                k,
                self._objective[k],
                self._step_norm[k],
                self._relative_step[k],
                self._epsilon[k],
                self._elapsed_ms[k],
            )

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(self.COLUMNS) + "\n")
            for row in self.rows():
                fh.write(",".join(repr(v) if i else str(v) for i, v in enumerate(row)) + "\n")


@dataclass
class SolveResult:
    x_star: np.ndarray
    objective: float
    iterations: int
    termination: str  # "tolerance" | "max_iter" | "time_budget"
    trace: IterationTrace
    stationarity_residual: float
    elapsed: float
    mu: np.ndarray = None
    lipschitz: float | None = None
    block_lipschitz: np.ndarray | None = None
    blocks: BlockStructure | None = None
    epsilon_final: float | None = None
    iterates: list | None = None
    inner_iterations: int | None = None
    warnings: list = field(default_factory=list)


def _initial_point(problem, cfg):
    n = problem.loss.dim
    init = cfg.init
    if isinstance(init, str):
        if init == "zeros":
            return np.zeros(n)
        if init == "l1_warm":
            from .baselines import BaselineConfig, solve_fista_l1
            from .losses import LeastSquares

            if not isinstance(problem.loss, LeastSquares):
                raise ConfigError("l1_warm initialization requires a least-squares loss")
            warm = solve_fista_l1(
                problem.loss.A,
                problem.loss.b,
                problem.lam,
                BaselineConfig(tol=cfg.tol, max_outer=cfg.max_iter),
            )
            return warm.x_star
        raise ConfigError(f"unknown init {init!r}")
    x0 = np.ascontiguousarray(init, dtype=np.float64).reshape(-1)
    if x0.shape[0] != n:
        raise ConfigError(f"init has length {x0.shape[0]}, expected {n}")
    return x0.copy()


def _resolve_steps(problem, cfg, variant, blocks):
    """Per-block step sizes plus whichever Lipschitz data was computed."""
    loss = problem.loss
    L_global = None
    L_blocks = None
    if variant == "pire":
        if cfg.backtracking and cfg.mu0 is not None:
            mus = np.array([float(cfg.mu0)])
        else:
            L_global = loss.lipschitz()
            mus = np.array([cfg.mu_margin * L_global / 2.0])
    elif variant == "pire_ps":
        if cfg.use_block_lipschitz:
            L_blocks = np.asarray(loss.block_lipschitz(blocks), dtype=np.float64)
            mus = cfg.mu_margin * L_blocks / 2.0
        else:
            L_global = loss.lipschitz()
            mus = np.full(len(blocks), cfg.mu_margin * L_global / 2.0)
    else:  # pire_au
        L_blocks = np.asarray(loss.block_lipschitz(blocks), dtype=np.float64)
        mus = cfg.mu_margin * L_blocks / 2.0
    if np.any(mus <= 0.0):
        raise ConfigError("step size mu must be positive; is the loss identically zero?")
    return mus, L_global, L_blocks


def _jacobi_update(problem, x, grad, w, mus, blocks, aux, pool):
    reg, lam = problem.regularizer, problem.lam
    x_new = np.empty_like(x)
    indexers = blocks.indexers

    def one(s):
        sl = indexers[s]
        x_new[sl] = reg.prox_step_block(w, lam, float(mus[s]), x[sl], grad[sl], aux[s])

    if pool is None:
        for s in range(len(indexers)):
            one(s)
    else:
        list(pool.map(one, range(len(indexers))))
    return x_new


def _gauss_seidel_update(problem, x, w, mus, blocks, aux, state):
    """One sweep; ``state`` must describe the residual at ``x`` and is
    mutated to track the mixed point as blocks are updated."""
    reg, lam, loss = problem.regularizer, problem.lam, problem.loss
    x_new = x.copy()
    for s, sl in enumerate(blocks.indexers):
        g_s = loss.state_block_gradient(state, sl)
        old = np.ascontiguousarray(x[sl])
        new = reg.prox_step_block(w, lam, float(mus[s]), old, g_s, aux[s])
        loss.state_apply_delta(state, sl, new - old)
        x_new[sl] = new
    return x_new


def _backtracking_update(problem, cfg, x, grad, h_x, w, mus, blocks, aux):
    """Grow mu until the quadratic upper bound certifies the step."""
    loss = problem.loss
    slack = 1e-12 * max(1.0, abs(h_x))
    for _ in range(_BACKTRACK_CAP + 1):
        x_new = _jacobi_update(problem, x, grad, w, mus, blocks, aux, None)
        d = x_new - x
        h_new = loss.value(x_new)
        if h_new <= h_x + float(grad @ d) + float(mus[0]) * float(d @ d) + slack:
            return x_new
        mus[0] *= cfg.backtracking_growth
    raise ConfigError("backtracking exhausted: no admissible step size found")


def _solve(problem, cfg, variant):
    t0 = time.perf_counter()
    loss = problem.loss
    reg = problem.regularizer
    lam = problem.lam
    n = loss.dim

    if variant == "pire":
        blocks = BlockStructure.single(n)
    else:
        if cfg.blocks is None:
            raise ConfigError(f"{variant} requires a block structure")
        if cfg.blocks.n != n:
            raise ConfigError("block structure does not match the variable size")
        blocks = cfg.blocks
        if cfg.backtracking:
            raise ConfigError("backtracking is only supported for the single-block solver")
    mus, L_global, L_blocks = _resolve_steps(problem, cfg, variant, blocks)
    mus = np.array(mus, dtype=np.float64)
    aux = reg.block_aux(blocks)

    pen = problem.penalty
    sched = cfg.epsilon_schedule
    if sched is not None and pen.uses_epsilon:
        pen = pen.with_epsilon(sched.epsilon0)

    x = np.ascontiguousarray(_initial_point(problem, cfg), dtype=np.float64)
    gx = reg.g_value(x)
    w = pen.weight(gx)
    if variant == "pire_au":
        state = loss.residual_state(x)
        h_val = loss.state_value(state)
        grad = None
    else:
        state = None
        h_val, grad = loss.value_and_gradient(x)
    F = lam * pen.value(gx) + h_val

    trace = IterationTrace()
    eps_now = pen.epsilon if pen.uses_epsilon else float("nan")
    trace.append(F, float("nan"), float("nan"), eps_now, (time.perf_counter() - t0) * 1e3)
    iterates = [x.copy()] if cfg.record_iterates else None

    pool = None
    if variant == "pire_ps" and cfg.workers > 1:
        pool = ThreadPoolExecutor(max_workers=cfg.workers)

    termination = "max_iter"
    iterations = 0
    try:
        for _ in range(cfg.max_iter):
            if variant == "pire_au":
                x_new = _gauss_seidel_update(problem, x, w, mus, blocks, aux, state)
            elif cfg.backtracking:
                x_new = _backtracking_update(problem, cfg, x, grad, h_val, w, mus, blocks, aux)
            else:
                x_new = _jacobi_update(problem, x, grad, w, mus, blocks, aux, pool)

            if sched is not None and pen.uses_epsilon:
                pen = pen.with_epsilon(max(sched.step(pen.epsilon), cfg.epsilon_floor))
            gx = reg.g_value(x_new)
            w = pen.weight(gx)
            if variant == "pire_au":
                state = loss.residual_state(x_new)
                h_val = loss.state_value(state)
            else:
                h_val, grad = loss.value_and_gradient(x_new)
            F = lam * pen.value(gx) + h_val

            step = float(np.linalg.norm(x_new - x))
            x_norm = float(np.linalg.norm(x))
            rel = step / x_norm if x_norm > 0.0 else step
            eps_now = pen.epsilon if pen.uses_epsilon else float("nan")
            trace.append(F, step, rel, eps_now, (time.perf_counter() - t0) * 1e3)
            if iterates is not None:
                iterates.append(x_new.copy())
            iterations += 1

            if not np.isfinite(F) or not np.all(np.isfinite(x_new)):
                raise NumericError(
                    f"non-finite objective at iteration {iterations}",
                    trace=trace,
                    iterations=iterations,
                )
            x = x_new
            if rel <= cfg.tol:
                termination = "tolerance"
                break
            if cfg.time_budget_s is not None and time.perf_counter() - t0 > cfg.time_budget_s:
                termination = "time_budget"
                break

        # Fixed-point residual of this variant's own update map at the
        # final point and smoothing offset (diagnostic only).
        if variant == "pire_au":
            probe_state = loss.residual_state(x)
            x_probe = _gauss_seidel_update(problem, x, w, mus, blocks, aux, probe_state)
        else:
            probe_grad = grad
            x_probe = _jacobi_update(problem, x, probe_grad, w, mus, blocks, aux, pool)
        residual = float(np.max(np.abs(x - x_probe))) if n else 0.0
    finally:
        if pool is not None:
            pool.shutdown()

    return SolveResult(
        x_star=x,
        objective=F,
        iterations=iterations,
        termination=termination,
        trace=trace,
        stationarity_residual=residual,
        elapsed=time.perf_counter() - t0,
        mu=mus,
        lipschitz=L_global,
        block_lipschitz=L_blocks,
        blocks=blocks,
        epsilon_final=pen.epsilon if pen.uses_epsilon else None,
        iterates=iterates,
    )


def solve_pire(problem, cfg=None):
    cfg = cfg or SolverConfig()
    return _solve(problem, replace(cfg, variant="pire"), "pire")


def solve_pire_ps(problem, cfg):
    return _solve(problem, replace(cfg, variant="pire_ps"), "pire_ps")


def solve_pire_au(problem, cfg):
    return _solve(problem, replace(cfg, variant="pire_au"), "pire_au")


def solve(problem, cfg):
    """Dispatch on ``cfg.variant``."""
    if cfg.variant not in VARIANTS:
        raise ConfigError(f"unknown variant {cfg.variant!r}")
    return _solve(problem, cfg, cfg.variant)


def stationarity_residual(problem, x, mu):
    """Inf-norm distance between ``x`` and one prox-gradient update of it.

    Zero exactly at fixed points of the reweighted update map with step
    ``mu``, evaluated at the penalty's current smoothing offset.
    """
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    x = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    w = problem.penalty.weight(problem.regularizer.g_value(x))
    g = problem.loss.gradient(x)
    x_next = problem.regularizer.prox(w, problem.lam, mu, x - g / mu)
    return float(np.max(np.abs(x - x_next))) if x.size else 0.0
