"""Numpy fallback for the compiled kernels in ``_kernels.pyx``.

Signatures and semantics match the compiled module exactly; the solver
never needs to know which backend it is running on. ``out`` buffers are
written in place so call sites can hand in array views.
"""

import numpy as np


def lp_value(y, p, eps):
    return float(np.sum((y + eps) ** p))


def lp_weight(y, p, eps, out):
    np.power(y + eps, p - 1.0, out=out)
    out *= p


def log_value(y, eps):
    return float(np.sum(np.log(y + eps)) - y.shape[0] * np.log(eps))


def log_weight(y, eps, out):
    np.divide(1.0, y + eps, out=out)


def capped_value(y, theta):
    return float(np.sum(np.minimum(y, theta)))


def capped_weight(y, theta, out):
    out[:] = (y < theta).astype(np.float64)


def soft_threshold(b, t, out):
    mag = np.abs(b) - t
    np.maximum(mag, 0.0, out=mag)
    np.multiply(np.sign(b), mag, out=out)


def soft_threshold_scalar(b, t, out):
    mag = np.abs(b) - t
    np.maximum(mag, 0.0, out=mag)
    np.multiply(np.sign(b), mag, out=out)


def prox_abs_step(x, g, w, lam, mu, out):
    b = x - g / mu
    mag = np.abs(b)
    mag -= (lam * w) / mu
    np.maximum(mag, 0.0, out=mag)
    np.multiply(np.sign(b), mag, out=out)


def prox_square_step(x, g, w, lam, mu, out):
    b = x - g / mu
    np.divide(mu * b, mu + (2.0 * lam) * w, out=out)
