# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled elementwise kernels for the solver inner loops.

Each function has a numpy twin in ``_kernels_py`` with the same signature;
``pire.backend`` picks one of the two at import time. Kernels fuse the
per-element arithmetic of the weight and prox updates into single passes,
which is where a pure numpy implementation spends most of its time in
temporaries at small problem sizes.

All buffers must be contiguous float64. ``out`` may alias an input only
for the purely elementwise kernels below (every write happens after the
reads of the same index).
"""

from libc.math cimport fabs, log, pow


def lp_value(const double[::1] y, double p, double eps):
    """Sum of (y_i + eps)**p."""
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(y.shape[0]):
        acc += pow(y[i] + eps, p)
    return acc


def lp_weight(const double[::1] y, double p, double eps, double[::1] out):
    """out_i = p * (y_i + eps)**(p - 1)."""
    cdef Py_ssize_t i
    for i in range(y.shape[0]):
        out[i] = p * pow(y[i] + eps, p - 1.0)


def log_value(const double[::1] y, double eps):
    """Sum of log(y_i + eps) - log(eps)."""
    cdef double acc = 0.0
    cdef double log_eps = log(eps)
    cdef Py_ssize_t i
    for i in range(y.shape[0]):
        acc += log(y[i] + eps) - log_eps
    return acc


def log_weight(const double[::1] y, double eps, double[::1] out):
    """out_i = 1 / (y_i + eps)."""
    cdef Py_ssize_t i
    for i in range(y.shape[0]):
        out[i] = 1.0 / (y[i] + eps)


def capped_value(const double[::1] y, double theta):
    """Sum of min(y_i, theta)."""
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(y.shape[0]):
        acc += y[i] if y[i] < theta else theta
    return acc


def capped_weight(const double[::1] y, double theta, double[::1] out):
    """out_i = 1 if y_i < theta else 0 (the tie at theta maps to 0)."""
    cdef Py_ssize_t i
    for i in range(y.shape[0]):
        out[i] = 1.0 if y[i] < theta else 0.0


def soft_threshold(const double[::1] b, const double[::1] t, double[::1] out):
    """out_i = sign(b_i) * max(|b_i| - t_i, 0)."""
    cdef Py_ssize_t i
    cdef double bi, m
    for i in range(b.shape[0]):
        bi = b[i]
        m = fabs(bi) - t[i]
        if m <= 0.0:
            out[i] = 0.0
        else:
            out[i] = m if bi > 0.0 else -m


def soft_threshold_scalar(const double[::1] b, double t, double[::1] out):
    """out_i = sign(b_i) * max(|b_i| - t, 0)."""
    cdef Py_ssize_t i
    cdef double bi, m
    for i in range(b.shape[0]):
        bi = b[i]
        m = fabs(bi) - t
        if m <= 0.0:
            out[i] = 0.0
        else:
            out[i] = m if bi > 0.0 else -m


def prox_abs_step(const double[::1] x, const double[::1] g,
                  const double[::1] w, double lam, double mu,
                  double[::1] out):
    """Fused gradient step plus weighted soft threshold.

    out_i = sign(b_i) * max(|b_i| - lam*w_i/mu, 0) with b_i = x_i - g_i/mu.
    """
    cdef Py_ssize_t i
    cdef double bi, m
    for i in range(x.shape[0]):
        bi = x[i] - g[i] / mu
        m = fabs(bi) - lam * w[i] / mu
        if m <= 0.0:
            out[i] = 0.0
        else:
            out[i] = m if bi > 0.0 else -m


def prox_square_step(const double[::1] x, const double[::1] g,
                     const double[::1] w, double lam, double mu,
                     double[::1] out):
    """Fused gradient step plus weighted squared-penalty shrink.

    out_i = mu * b_i / (mu + 2*lam*w_i) with b_i = x_i - g_i/mu.
    """
    cdef Py_ssize_t i
    cdef double bi
    for i in range(x.shape[0]):
        bi = x[i] - g[i] / mu
        out[i] = mu * bi / (mu + 2.0 * lam * w[i])
