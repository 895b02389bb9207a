"""Smooth losses with gradients, Lipschitz constants and block access.

Three losses are provided: squared error (vector or matrix right-hand
side), logistic, and a multi-task squared error whose variable is a
features-by-tasks coefficient matrix. Matrix variables are handled as
row-major flattened vectors throughout.

Splitting solvers view the variable through a :class:`BlockStructure`.
Blocks are contiguous ranges in the common case; index-array blocks are
supported for variables whose natural blocks interleave in the flat
layout (the per-task columns of the multi-task loss).

Losses that are quadratic in the variable additionally expose a residual
"state" so a sequential (Gauss-Seidel) sweep can refresh gradients after
each block update at the cost of one small product per block instead of
a full gradient recomputation.
"""

import numpy as np
from scipy.special import expit

__all__ = [
    "BlockStructure",
    "LeastSquares",
    "Logistic",
    "MultiTaskLeastSquares",
    "SmoothLoss",
    "spectral_norm_sq",
]

# Fixed seed for the power-iteration start vector, so estimated Lipschitz
# constants are identical run to run (and hence so are solver traces).
POWER_ITERATION_SEED = 0x51CA7

_SAFETY = 1.0 + 1e-3


def spectral_norm_sq(M, tol=1e-6, max_iter=500):
    """Estimate ||M||_2^2 by power iteration on M^T M.

    Runs until the Rayleigh quotient changes by less than ``tol``
    relative or ``max_iter`` sweeps, whichever comes first, starting
    from a seeded random unit vector. Power iteration approaches the
    largest singular value from below, so the estimate is inflated by a
    factor 1 + 1e-3 to be usable as an upper bound. The zero matrix maps
    to 0.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("spectral_norm_sq expects a matrix")
    if not M.any():
        return 0.0
    rng = np.random.default_rng(POWER_ITERATION_SEED)
    v = rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    theta_prev = 0.0
    theta = 0.0
    for _ in range(max_iter):
        u = M @ v
        theta = float(u @ u)
        z = M.T @ u
        nz = np.linalg.norm(z)
        if nz == 0.0:
            v = rng.standard_normal(M.shape[1])
            v /= np.linalg.norm(v)
            continue
        v = z / nz
        if abs(theta - theta_prev) <= tol * theta:
            break
        theta_prev = theta
    return theta * _SAFETY


class BlockStructure:
    """A partition of {0..n-1} into variable blocks.

    ``indexers`` holds one slice (contiguous block) or index array per
    block. Constructors validate that the blocks are disjoint, nonempty
    and cover the whole range.
    """

    def __init__(self, indexers, n):
        self.n = int(n)
        self.indexers = list(indexers)
        if not self.indexers:
            raise ValueError("at least one block required")
        cover = np.zeros(self.n, dtype=np.int64)
        for idx in self.indexers:
            chunk = self._materialize(idx)
            if chunk.size == 0:
                raise ValueError("empty block")
            if chunk.min() < 0 or chunk.max() >= self.n:
                raise ValueError("block index out of range")
            cover[chunk] += 1
        if not (cover == 1).all():
            raise ValueError("blocks must be disjoint and cover the variable")

    def _materialize(self, idx):
        if isinstance(idx, slice):
            return np.arange(*idx.indices(self.n))
        return np.asarray(idx, dtype=np.intp)

    @classmethod
    def single(cls, n):
        return cls([slice(0, n)], n)

    @classmethod
    def from_ranges(cls, ranges, n):
        """Contiguous blocks from ascending (lo, hi) half-open pairs."""
        prev = 0
        indexers = []
        for lo, hi in ranges:
            if lo != prev or hi <= lo:
                raise ValueError("ranges must be ascending, disjoint and covering")
            indexers.append(slice(int(lo), int(hi)))
            prev = hi
        if prev != n:
            raise ValueError("ranges must cover the variable exactly")
        return cls(indexers, n)

    @classmethod
    def from_index_lists(cls, lists, n):
        return cls([np.asarray(g, dtype=np.intp) for g in lists], n)

    @classmethod
    def uniform(cls, n, count, align=1):
        """``count`` contiguous blocks of near-equal size; block
        boundaries are multiples of ``align`` (row size for flattened
        matrix variables)."""
        if n % align != 0:
            raise ValueError("n must be a multiple of align")
        units = n // align
        if not 1 <= count <= units:
            raise ValueError(f"block count must be in [1, {units}]")
        q, r = divmod(units, count)
        ranges = []
        lo = 0
        for s in range(count):
            hi = lo + (q + 1 if s < r else q) * align
            ranges.append((lo, hi))
            lo = hi
        return cls.from_ranges(ranges, n)

    @property
    def sizes(self):
        return [self._materialize(idx).size for idx in self.indexers]

    def __len__(self):
        return len(self.indexers)


def _aligned_column_range(indexer, t, n):
    """Map a flat slice over an (n_rows x t) row-major variable to its
    row range; errors if the block does not align to row boundaries."""
    if not isinstance(indexer, slice):
        raise ValueError("this loss requires contiguous blocks")
    lo, hi, step = indexer.indices(n)
    if step != 1 or lo % t or hi % t:
        raise ValueError("blocks must align to whole rows of the variable")
    return lo // t, hi // t


class SmoothLoss:
    """Base class: value, gradient and Lipschitz information."""

    dim = None
    supports_incremental = False

    def value(self, x):
        return self.value_and_gradient(x)[0]

    def gradient(self, x):
        return self.value_and_gradient(x)[1]

    def value_and_gradient(self, x):
        raise NotImplementedError

    def lipschitz(self):
        raise NotImplementedError

    def block_lipschitz(self, blocks):
        raise ValueError("per-block Lipschitz constants unavailable for this loss")

    def block_gradient(self, x, s, blocks):
        """Restriction of the full gradient to block ``s``."""
        if not 0 <= s < len(blocks):
            raise IndexError(f"block index {s} out of range")
        return self.gradient(x)[blocks.indexers[s]]

    # Residual-state protocol (quadratic losses only).

    def residual_state(self, x):
        raise NotImplementedError

    def state_value(self, state):
        raise NotImplementedError

    def state_full_gradient(self, state):
        raise NotImplementedError

    def state_block_gradient(self, state, indexer):
        raise NotImplementedError

    def state_apply_delta(self, state, indexer, delta):
        raise NotImplementedError


def _as_flat(x, dim):
    x = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != dim:
        raise ValueError(f"variable has length {x.shape[0]}, expected {dim}")
    return x


class LeastSquares(SmoothLoss):
    """h(x) = 0.5 * ||A x - b||^2.

    ``b`` may be a vector or an (m x t) matrix; in the matrix case the
    variable is the row-major flattening of an (n x t) coefficient
    matrix and the norm is Frobenius.
    """

    supports_incremental = True

    def __init__(self, A, b):
        self.A = np.ascontiguousarray(A, dtype=np.float64)
        self.b = np.ascontiguousarray(b, dtype=np.float64)
        if self.A.ndim != 2:
            raise ValueError("A must be a matrix")
        if self.b.ndim not in (1, 2) or self.b.shape[0] != self.A.shape[0]:
            raise ValueError("b must have one row per row of A")
        self.m, self.n = self.A.shape
        self.t = 1 if self.b.ndim == 1 else self.b.shape[1]
        self.dim = self.n * self.t

    def _unflatten(self, x):
        x = _as_flat(x, self.dim)
        return x if self.b.ndim == 1 else x.reshape(self.n, self.t)

    def residual_state(self, x):
        return self.A @ self._unflatten(x) - self.b

    def state_value(self, r):
        return 0.5 * float(np.vdot(r, r))

    def state_full_gradient(self, r):
        return (self.A.T @ r).reshape(-1)

    def value_and_gradient(self, x):
        r = self.residual_state(x)
        return self.state_value(r), self.state_full_gradient(r)

    def lipschitz(self):
        return spectral_norm_sq(self.A)

    def block_lipschitz(self, blocks):
        out = []
        for indexer in blocks.indexers:
            c0, c1 = _aligned_column_range(indexer, self.t, self.dim)
            out.append(spectral_norm_sq(self.A[:, c0:c1]))
        return np.array(out)

    def state_block_gradient(self, r, indexer):
        c0, c1 = _aligned_column_range(indexer, self.t, self.dim)
        return (self.A[:, c0:c1].T @ r).reshape(-1)

    def state_apply_delta(self, r, indexer, delta):
        c0, c1 = _aligned_column_range(indexer, self.t, self.dim)
        if self.b.ndim == 1:
            r += self.A[:, c0:c1] @ delta
        else:
            r += self.A[:, c0:c1] @ delta.reshape(c1 - c0, self.t)


class Logistic(SmoothLoss):
    """h(x) = mean_i log(1 + exp(-y_i * a_i^T x)) with labels y in {-1, +1}."""

    def __init__(self, A, labels):
        self.A = np.ascontiguousarray(A, dtype=np.float64)
        self.labels = np.ascontiguousarray(labels, dtype=np.float64)
        if self.A.ndim != 2 or self.labels.shape != (self.A.shape[0],):
            raise ValueError("need one label per sample row")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        self.n_samples, self.dim = self.A.shape

    def value_and_gradient(self, x):
        x = _as_flat(x, self.dim)
        margins = self.labels * (self.A @ x)
        value = float(np.mean(np.logaddexp(0.0, -margins)))
        grad = -(self.A.T @ (self.labels * expit(-margins))) / self.n_samples
        return value, grad

    def lipschitz(self):
        return spectral_norm_sq(self.A) / (4.0 * self.n_samples)


class MultiTaskLeastSquares(SmoothLoss):
    """h(Z) = sum_i ||X_i z_i - y_i||^2 / (m * n_i).

    ``tasks`` is a list of (X_i, y_i) pairs sharing a feature dimension
    d; the variable is the row-major flattening of the d-by-m matrix Z
    whose column z_i belongs to task i. The gradient separates across
    tasks, so the natural block structure is one (index-array) block per
    task.
    """

    supports_incremental = True

    def __init__(self, tasks):
        if not tasks:
            raise ValueError("at least one task required")
        self.X = []
        self.y = []
        d = None
        for Xi, yi in tasks:
            Xi = np.ascontiguousarray(Xi, dtype=np.float64)
            yi = np.ascontiguousarray(yi, dtype=np.float64)
            if Xi.ndim != 2 or Xi.shape[0] == 0:
                raise ValueError("task data must be nonempty matrices")
            if yi.shape != (Xi.shape[0],):
                raise ValueError("task labels must match sample count")
            if d is None:
                d = Xi.shape[1]
            elif Xi.shape[1] != d:
                raise ValueError("tasks must share the feature dimension")
            self.X.append(Xi)
            self.y.append(yi)
        self.d = d
        self.m = len(tasks)
        self.dim = self.d * self.m
        self._scales = np.array([2.0 / (self.m * Xi.shape[0]) for Xi in self.X])

    def natural_blocks(self):
        cols = [np.arange(self.d) * self.m + i for i in range(self.m)]
        return BlockStructure.from_index_lists(cols, self.dim)

    def _columns(self, x):
        return _as_flat(x, self.dim).reshape(self.d, self.m)

    def residual_state(self, x):
        Z = self._columns(x)
        return [self.X[i] @ np.ascontiguousarray(Z[:, i]) - self.y[i] for i in range(self.m)]

    def state_value(self, rs):
        return float(sum(0.5 * sc * (r @ r) for sc, r in zip(self._scales, rs)))

    def state_full_gradient(self, rs):
        G = np.empty((self.d, self.m))
        for i, r in enumerate(rs):
            G[:, i] = self._scales[i] * (self.X[i].T @ r)
        return G.reshape(-1)

    def value_and_gradient(self, x):
        rs = self.residual_state(x)
        return self.state_value(rs), self.state_full_gradient(rs)

    def lipschitz(self):
        return max(
            sc * spectral_norm_sq(Xi) for sc, Xi in zip(self._scales, self.X)
        )

    def _task_of(self, indexer):
        idx = np.asarray(indexer)
        if isinstance(indexer, slice) or idx.ndim != 1 or idx.size != self.d:
            raise ValueError("blocks must be the per-task columns of the variable")
        i = int(idx[0])
        if not 0 <= i < self.m or not np.array_equal(idx, np.arange(self.d) * self.m + i):
            raise ValueError("blocks must be the per-task columns of the variable")
        return i

    def block_lipschitz(self, blocks):
        return np.array(
            [
                self._scales[self._task_of(idx)]
                * spectral_norm_sq(self.X[self._task_of(idx)])
                for idx in blocks.indexers
            ]
        )

    def state_block_gradient(self, rs, indexer):
        i = self._task_of(indexer)
        return self._scales[i] * (self.X[i].T @ rs[i])

    def state_apply_delta(self, rs, indexer, delta):
        i = self._task_of(indexer)
        rs[i] += self.X[i] @ delta
