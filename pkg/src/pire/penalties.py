"""Concave penalty functions and their reweighting rules.

Each penalty is a separable function ``f(y) = sum_i phi(y_i)`` defined on
the nonnegative orthant, with ``phi`` nonnegative, concave and
nondecreasing. The ``weight`` method returns an element of ``-d(-f)``,
i.e. the per-coordinate slope used to linearize the penalty from above::

    f(y) <= f(y_k) + <weight(y_k), y - y_k>

which is the majorization every reweighted solver in this package builds
on. Weights are always nonnegative because ``phi`` is increasing.

Smoothed penalties carry an offset ``epsilon`` that is typically shrunk
geometrically over the outer iterations via :class:`EpsilonSchedule`.
"""

from dataclasses import dataclass, replace

import numpy as np

from .backend import kernels

__all__ = [
    "CappedL1",
    "ConcavePenalty",
    "EpsilonSchedule",
    "Identity",
    "Logarithm",
    "LpPower",
    "epsilon_step",
    "penalty_from_config",
]


def _as_nonneg_vector(y):
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim != 1:
        y = y.reshape(-1)
    if y.size and y.min() < 0.0:
        raise ValueError("penalty input must be nonnegative")
    return y


class ConcavePenalty:
    """Base class; subclasses implement ``value`` and ``weight``."""

    uses_epsilon = False
    epsilon = None

    def value(self, y):
        raise NotImplementedError

    def weight(self, y):
        raise NotImplementedError

    def with_epsilon(self, epsilon):
        """Return a copy with a new smoothing offset (self if unused)."""
        return self

    def to_config(self):
        raise NotImplementedError


@dataclass(frozen=True)
class LpPower(ConcavePenalty):
    """phi(y) = (y + epsilon)**p with 0 < p <= 1.

    The smoothing offset keeps the slope finite at zero; it must be
    strictly positive whenever p < 1.
    """

    p: float
    epsilon: float = 0.0

    uses_epsilon = True

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must be in (0, 1], got {self.p}")
        if self.epsilon < 0.0 or (self.p < 1.0 and self.epsilon == 0.0):
            raise ValueError("LpPower with p < 1 requires epsilon > 0")

    def value(self, y):
        return kernels.lp_value(_as_nonneg_vector(y), self.p, self.epsilon)

    def weight(self, y):
        y = _as_nonneg_vector(y)
        out = np.empty_like(y)
        kernels.lp_weight(y, self.p, self.epsilon, out)
        return out

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=epsilon)

    def to_config(self):
        return {"kind": "lp", "p": self.p, "epsilon": self.epsilon}


@dataclass(frozen=True)
class Logarithm(ConcavePenalty):
    """phi(y) = log(y + epsilon) - log(epsilon).

    The constant shift pins phi(0) = 0 so the penalty stays nonnegative;
    weights are unaffected by it.
    """

    epsilon: float

    uses_epsilon = True

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("Logarithm requires epsilon > 0")

    def value(self, y):
        return kernels.log_value(_as_nonneg_vector(y), self.epsilon)

    def weight(self, y):
        y = _as_nonneg_vector(y)
        out = np.empty_like(y)
        kernels.log_weight(y, self.epsilon, out)
        return out

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=epsilon)

    def to_config(self):
        return {"kind": "log", "epsilon": self.epsilon}


@dataclass(frozen=True)
class CappedL1(ConcavePenalty):
    """phi(y) = min(y, theta).

    The slope at the kink y = theta is taken as 0, so coordinates that
    reached the cap stop being penalized; this makes the weight rule
    deterministic.
    """

    theta: float

    def __post_init__(self):
        if self.theta <= 0.0:
            raise ValueError("CappedL1 requires theta > 0")

    def value(self, y):
        return kernels.capped_value(_as_nonneg_vector(y), self.theta)

    def weight(self, y):
        y = _as_nonneg_vector(y)
        out = np.empty_like(y)
        kernels.capped_weight(y, self.theta, out)
        return out

    def to_config(self):
        return {"kind": "capped_l1", "theta": self.theta}


@dataclass(frozen=True)
class Identity(ConcavePenalty):
    """phi(y) = y; recovers the convex case (``f(g(x)) = sum g(x)``)."""

    def value(self, y):
        return float(np.sum(_as_nonneg_vector(y)))

    def weight(self, y):
        return np.ones_like(_as_nonneg_vector(y))

    def to_config(self):
        return {"kind": "identity"}


@dataclass(frozen=True)
class EpsilonSchedule:
    """Geometric decrease of the smoothing offset: eps_k = epsilon0 / rho**k."""

    epsilon0: float
    rho: float

    def __post_init__(self):
        if self.epsilon0 <= 0.0:
            raise ValueError("epsilon0 must be positive")
        if self.rho <= 1.0:
            raise ValueError("rho must exceed 1")

    def value_after(self, k):
        return self.epsilon0 / self.rho**k

    def step(self, epsilon):
        return epsilon / self.rho


def epsilon_step(pen, schedule, floor=0.0):
    """One schedule step applied to a penalty; no-op for penalties
    without a smoothing offset. ``floor`` clamps the decrease from below."""
    if not pen.uses_epsilon:
        return pen
    return pen.with_epsilon(max(schedule.step(pen.epsilon), floor))


def penalty_from_config(cfg):
    """Build a penalty from its config-file form, e.g. {"kind": "lp", ...}."""
    kind = cfg.get("kind")
    if kind == "lp":
        return LpPower(p=float(cfg["p"]), epsilon=float(cfg.get("epsilon", 0.0)))
    if kind == "log":
        return Logarithm(epsilon=float(cfg["epsilon"]))
    if kind == "capped_l1":
        return CappedL1(theta=float(cfg["theta"]))
    if kind == "identity":
        return Identity()
    raise ValueError(f"unknown penalty kind: {kind!r}")
