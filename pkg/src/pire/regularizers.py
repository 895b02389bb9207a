"""Structure maps g and their weighted proximal operators.

A regularizer maps the variable ``x`` (length n, matrices flattened
row-major) to a nonnegative vector ``g(x)`` of dimension d, and solves

    argmin_x  lam * <w, g(x)> + (mu/2) * ||x - b||^2

in closed form for any nonnegative weight vector ``w``. No iterative
inner solver is allowed here: every prox is O(n) plus at most one norm
per group.

The ``block_aux`` / ``prox_step_block`` pair is the solver-facing
interface: it applies the fused update ``prox(w, lam, mu, x - g/mu)``
restricted to one block of the variable, which is what the splitting
variants iterate over. A single block covering everything recovers the
plain prox step.
"""

import numpy as np

from .backend import kernels

__all__ = [
    "AbsoluteValue",
    "GroupL2",
    "Regularizer",
    "RowL1",
    "Square",
    "regularizer_from_config",
]


def _check_prox_args(w, lam, mu, d):
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.shape != (d,):
        raise ValueError(f"weight vector must have shape ({d},), got {w.shape}")
    if w.size and w.min() < 0.0:
        raise ValueError("prox weights must be nonnegative")
    if lam < 0.0:
        raise ValueError("lambda must be nonnegative")
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    return w


def _as_vector(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return x.reshape(-1) if x.ndim != 1 else x


def _block_indices(indexer, n):
    if isinstance(indexer, slice):
        return np.arange(*indexer.indices(n))
    return np.asarray(indexer)


class Regularizer:
    """Base class for structure maps with closed-form weighted prox."""

    def output_dim(self, n):
        raise NotImplementedError

    def g_value(self, x):
        raise NotImplementedError

    def prox(self, w, lam, mu, b):
        raise NotImplementedError

    def block_aux(self, blocks):
        """Precompute per-block data for ``prox_step_block``."""
        raise NotImplementedError

    def prox_step_block(self, w, lam, mu, x_blk, g_blk, aux):
        """Fused update of one block: prox restricted to the block at
        center ``x_blk - g_blk/mu``. ``w`` is the full weight vector."""
        raise NotImplementedError

    def to_config(self):
        raise NotImplementedError


class AbsoluteValue(Regularizer):
    """g(x) = |x| elementwise; prox is the weighted soft threshold."""

    def output_dim(self, n):
        return n

    def g_value(self, x):
        return np.abs(_as_vector(x))

    def prox(self, w, lam, mu, b):
        b = _as_vector(b)
        w = _check_prox_args(w, lam, mu, b.shape[0])
        out = np.empty_like(b)
        kernels.soft_threshold(b, (lam * w) / mu, out)
        return out

    def block_aux(self, blocks):
        return list(blocks.indexers)

    def prox_step_block(self, w, lam, mu, x_blk, g_blk, aux):
        out = np.empty_like(x_blk)
        kernels.prox_abs_step(x_blk, g_blk, np.ascontiguousarray(w[aux]), lam, mu, out)
        return out

    def to_config(self):
        return {"kind": "abs"}


class Square(Regularizer):
    """g(x) = x**2 elementwise; prox shrinks toward zero multiplicatively."""

    def output_dim(self, n):
        return n

    def g_value(self, x):
        x = _as_vector(x)
        return x * x

    def prox(self, w, lam, mu, b):
        b = _as_vector(b)
        w = _check_prox_args(w, lam, mu, b.shape[0])
        return (mu * b) / (mu + 2.0 * lam * w)

    def block_aux(self, blocks):
        return list(blocks.indexers)

    def prox_step_block(self, w, lam, mu, x_blk, g_blk, aux):
        out = np.empty_like(x_blk)
        kernels.prox_square_step(x_blk, g_blk, np.ascontiguousarray(w[aux]), lam, mu, out)
        return out

    def to_config(self):
        return {"kind": "square"}


class GroupL2(Regularizer):
    """g(x) = per-group Euclidean norms; prox is the block soft threshold.

    ``groups`` must partition {0..n-1}: disjoint, nonempty, covering.
    A group whose center has zero norm maps to the zero block for any
    weight (no division by zero).
    """

    def __init__(self, groups):
        arrays = [np.asarray(g, dtype=np.intp) for g in groups]
        if not arrays or any(a.size == 0 for a in arrays):
            raise ValueError("groups must be nonempty")
        flat = np.concatenate(arrays)
        n = flat.size
        cover = np.zeros(n, dtype=bool)
        if flat.min() < 0 or flat.max() >= n:
            raise ValueError("group indices must partition {0..n-1}")
        cover[flat] = True
        if not cover.all() or np.unique(flat).size != n:
            raise ValueError("groups must be disjoint and cover {0..n-1}")
        self.groups = arrays
        self.n = n

    def output_dim(self, n):
        if n != self.n:
            raise ValueError(f"partition covers {self.n} entries, variable has {n}")
        return len(self.groups)

    def g_value(self, x):
        x = _as_vector(x)
        self.output_dim(x.shape[0])
        return np.array([np.linalg.norm(x[g]) for g in self.groups])

    def prox(self, w, lam, mu, b):
        b = _as_vector(b)
        w = _check_prox_args(w, lam, mu, self.output_dim(b.shape[0]))
        out = np.empty_like(b)
        for j, g in enumerate(self.groups):
            bj = b[g]
            nb = np.linalg.norm(bj)
            if nb == 0.0:
                out[g] = 0.0
            else:
                out[g] = max(1.0 - (lam * w[j]) / (mu * nb), 0.0) * bj
        return out

    def block_aux(self, blocks):
        if blocks.n != self.n:
            raise ValueError("block structure and partition disagree on n")
        gid = np.empty(self.n, dtype=np.intp)
        for j, g in enumerate(self.groups):
            gid[g] = j
        aux = []
        for indexer in blocks.indexers:
            bidx = _block_indices(indexer, self.n)
            local_of = {int(gi): li for li, gi in enumerate(bidx)}
            members = {}
            for li, gi in enumerate(bidx):
                members.setdefault(int(gid[gi]), []).append(li)
            per_block = []
            for j, local in sorted(members.items()):
                if len(local) != self.groups[j].size:
                    raise ValueError(
                        "blocks must align with group boundaries; "
                        f"group {j} is split across blocks"
                    )
                per_block.append((j, np.asarray(local, dtype=np.intp)))
            aux.append(per_block)
        return aux

    def prox_step_block(self, w, lam, mu, x_blk, g_blk, aux):
        b = x_blk - g_blk / mu
        out = np.empty_like(b)
        for j, local in aux:
            bj = b[local]
            nb = np.linalg.norm(bj)
            if nb == 0.0:
                out[local] = 0.0
            else:
                out[local] = max(1.0 - (lam * w[j]) / (mu * nb), 0.0) * bj
        return out

    def to_config(self):
        return {"kind": "group_l2", "groups": [g.tolist() for g in self.groups]}


class RowL1(Regularizer):
    """g(X) = row-wise l1 norms of a rows-by-cols matrix.

    The variable is the row-major flattening of the matrix, so entry
    (r, c) sits at index r*cols + c and belongs to row group r. The prox
    is an elementwise soft threshold with one threshold per row.
    """

    def __init__(self, rows, cols):
        if rows <= 0 or cols <= 0:
            raise ValueError("rows and cols must be positive")
        self.rows = int(rows)
        self.cols = int(cols)

    def output_dim(self, n):
        if n != self.rows * self.cols:
            raise ValueError(f"variable length {n} != rows*cols = {self.rows * self.cols}")
        return self.rows

    def g_value(self, x):
        x = _as_vector(x)
        self.output_dim(x.shape[0])
        return np.abs(x).reshape(self.rows, self.cols).sum(axis=1)

    def prox(self, w, lam, mu, b):
        b = _as_vector(b)
        w = _check_prox_args(w, lam, mu, self.output_dim(b.shape[0]))
        out = np.empty_like(b)
        kernels.soft_threshold(b, (lam * np.repeat(w, self.cols)) / mu, out)
        return out

    def block_aux(self, blocks):
        return [
            _block_indices(indexer, self.rows * self.cols) // self.cols
            for indexer in blocks.indexers
        ]

    def prox_step_block(self, w, lam, mu, x_blk, g_blk, aux):
        out = np.empty_like(x_blk)
        kernels.prox_abs_step(x_blk, g_blk, np.ascontiguousarray(w[aux]), lam, mu, out)
        return out

    def to_config(self):
        return {"kind": "row_l1", "rows": self.rows, "cols": self.cols}


def regularizer_from_config(cfg):
    """Build a regularizer from its config-file form (zero-based indices)."""
    kind = cfg.get("kind")
    if kind == "abs":
        return AbsoluteValue()
    if kind == "square":
        return Square()
    if kind == "group_l2":
        return GroupL2(cfg["groups"])
    if kind == "row_l1":
        return RowL1(int(cfg["rows"]), int(cfg["cols"]))
    raise ValueError(f"unknown regularizer kind: {kind!r}")
