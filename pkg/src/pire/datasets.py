"""Synthetic instance generators and CSV input/output.

Randomness policy: every generator takes an integer seed and derives
independent PCG64 substreams for each generated object through
``numpy.random.SeedSequence(seed).spawn(...)`` in a fixed documented
order, so regenerating any instance is bitwise reproducible and the
noise stream never shifts when, say, the sparsity changes.

File formats: matrices are CSV with one row per line and comma-separated
decimal fields; vectors are single-column CSV. Floats are written with
17 significant digits, which round-trips float64 exactly.
"""

import csv

import numpy as np

__all__ = [
    "GENERATOR_INFO",
    "gen_matrix_instance",
    "gen_multitask_instance",
    "gen_sparse_instance",
    "load_csv_dataset",
    "load_matrix_csv",
    "load_vector_csv",
    "relative_recovery_error",
    "save_csv_dataset",
    "save_matrix_csv",
    "save_vector_csv",
]

GENERATOR_INFO = {
    "generator": "PCG64",
    "stream_split": "SeedSequence(seed).spawn per object, order documented per generator",
}

_FMT = "%.17g"


def gen_sparse_instance(m, n, sparsity, noise_sigma, seed):
    """Gaussian design A (m x n), sparse standard-normal signal with
    ``sparsity`` nonzeros at uniform positions, and b = A x + sigma * e.

    Substream order: A, signal (positions then values), noise.
    """
    if not 0 <= sparsity <= n:
        raise ValueError("sparsity must lie in [0, n]")
    ss_a, ss_x, ss_e = np.random.SeedSequence(seed).spawn(3)
    A = np.random.default_rng(ss_a).standard_normal((m, n))
    rng_x = np.random.default_rng(ss_x)
    x = np.zeros(n)
    support = rng_x.choice(n, size=sparsity, replace=False)
    x[support] = rng_x.standard_normal(sparsity)
    e = np.random.default_rng(ss_e).standard_normal(m)
    b = A @ x + noise_sigma * e
    return A, x, b


def gen_matrix_instance(m, n, t, col_sparsity, noise_sigma, seed):
    """Matrix-variable analogue: A (m x n), X (n x t) with
    ``col_sparsity`` nonzeros per column, B = A X + sigma * E.

    Substream order: A, signal (per column: positions then values),
    noise.
    """
    if not 0 <= col_sparsity <= n:
        raise ValueError("column sparsity must lie in [0, n]")
    ss_a, ss_x, ss_e = np.random.SeedSequence(seed).spawn(3)
    A = np.random.default_rng(ss_a).standard_normal((m, n))
    rng_x = np.random.default_rng(ss_x)
    X = np.zeros((n, t))
    for j in range(t):
        support = rng_x.choice(n, size=col_sparsity, replace=False)
        X[support, j] = rng_x.standard_normal(col_sparsity)
    E = np.random.default_rng(ss_e).standard_normal((m, t))
    B = A @ X + noise_sigma * E
    return A, X, B


def gen_multitask_instance(tasks, n_train, n_test, d, true_rows, noise_sigma, seed):
    """Planted shared-support multi-task regression.

    Z (d x tasks) has ``true_rows`` nonzero rows shared by all tasks,
    with standard normal entries. Each task gets Gaussian design
    matrices and responses y = X z + sigma * e for both a train and a
    test split. Substream order: Z (rows then values), then per task:
    train X, train noise, test X, test noise.

    Returns (train_tasks, test_tasks, Z_true, row_support).
    """
    if not 0 <= true_rows <= d:
        raise ValueError("true_rows must lie in [0, d]")
    ss = np.random.SeedSequence(seed).spawn(1 + tasks)
    rng_z = np.random.default_rng(ss[0])
    rows = np.sort(rng_z.choice(d, size=true_rows, replace=False))
    Z = np.zeros((d, tasks))
    Z[rows, :] = rng_z.standard_normal((true_rows, tasks))
    train, test = [], []
    for i in range(tasks):
        rng = np.random.default_rng(ss[1 + i])
        Xtr = rng.standard_normal((n_train, d))
        ytr = Xtr @ Z[:, i] + noise_sigma * rng.standard_normal(n_train)
        Xte = rng.standard_normal((n_test, d))
        yte = Xte @ Z[:, i] + noise_sigma * rng.standard_normal(n_test)
        train.append((Xtr, ytr))
        test.append((Xte, yte))
    return train, test, Z, rows


def relative_recovery_error(x_hat, x_true):
    """||x_hat - x_true|| / ||x_true||; falls back to the absolute norm
    of ``x_hat`` (with a warning) when the reference is zero."""
    x_hat = np.asarray(x_hat, dtype=np.float64).reshape(-1)
    x_true = np.asarray(x_true, dtype=np.float64).reshape(-1)
    if x_hat.shape != x_true.shape:
        raise ValueError("shape mismatch")
    denom = np.linalg.norm(x_true)
    if denom == 0.0:
        import warnings

        warnings.warn("reference signal is zero; reporting absolute error")
        return float(np.linalg.norm(x_hat))
    return float(np.linalg.norm(x_hat - x_true) / denom)


def save_matrix_csv(path, M):
    np.savetxt(path, np.atleast_2d(np.asarray(M, dtype=np.float64)), fmt=_FMT, delimiter=",")


def load_matrix_csv(path):
    M = np.loadtxt(path, delimiter=",", ndmin=2)
    return np.ascontiguousarray(M, dtype=np.float64)


def save_vector_csv(path, v):
    np.savetxt(path, np.asarray(v, dtype=np.float64).reshape(-1, 1), fmt=_FMT, delimiter=",")


def load_vector_csv(path):
    v = np.loadtxt(path, delimiter=",", ndmin=2)
    if v.shape[1] != 1:
        raise ValueError(f"{path} is not a single-column vector file")
    return np.ascontiguousarray(v[:, 0], dtype=np.float64)


def load_csv_dataset(path, schema):
    """Load per-task regression data from one CSV file.

    ``schema`` declares column names: {"features": [...], "label": ...,
    "task": ..., "task_ids": optional explicit id list}. Returns
    (tasks, task_ids) where tasks is a list of (X_i, y_i) in task-id
    order. Malformed rows raise with their line number.
    """
    feature_cols = list(schema["features"])
    label_col = schema["label"]
    task_col = schema["task"]
    allowed = schema.get("task_ids")
    buckets = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file")
        missing = [c for c in feature_cols + [label_col, task_col] if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        n_rows = 0
        for line_no, row in enumerate(reader, start=2):
            try:
                feats = [float(row[c]) for c in feature_cols]
                label = float(row[label_col])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: malformed row ({exc})") from None
            task_id = row[task_col]
            if task_id is None:
                raise ValueError(f"{path}:{line_no}: malformed row (missing task id)")
            if allowed is not None and task_id not in {str(t) for t in allowed}:
                raise ValueError(f"{path}:{line_no}: unknown task id {task_id!r}")
            buckets.setdefault(task_id, []).append(feats + [label])
            n_rows += 1
        if n_rows == 0:
            raise ValueError(f"{path}: no data rows")
    task_ids = sorted(buckets)
    tasks = []
    for tid in task_ids:
        block = np.asarray(buckets[tid], dtype=np.float64)
        tasks.append((block[:, :-1], block[:, -1]))
    return tasks, task_ids


def save_csv_dataset(path, tasks, task_ids=None, feature_names=None):
    """Inverse of :func:`load_csv_dataset` (same schema conventions)."""
    d = tasks[0][0].shape[1]
    feature_names = feature_names or [f"f{j}" for j in range(d)]
    task_ids = task_ids or [str(i) for i in range(len(tasks))]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(feature_names) + ["label", "task"])
        for tid, (X, y) in zip(task_ids, tasks):
            for row, label in zip(np.asarray(X), np.asarray(y)):
                writer.writerow([_FMT % v for v in row] + [_FMT % label, tid])
    return {"features": list(feature_names), "label": "label", "task": "task"}
