"""Pure-numpy implementations of the hot kernels.

Every function here has a twin with an identical signature in
``_kernels_numba``. Activation kinds are passed as integer codes
(see ``activations.ActivationKind.code``).
"""

import numpy as np
from scipy.special import erfc

IDENTITY, RELU, SIGMOID, TANH, SILU, GELU = range(6)

_INV_SQRT2 = 0.7071067811865476
_INV_SQRT_2PI = 0.3989422804014327


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _norm_cdf(z):
    return 0.5 * erfc(-z * _INV_SQRT2)


def _norm_pdf(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def act_value(code, z):
    z = np.asarray(z, dtype=np.float64)
    if code == IDENTITY:
        return z.copy()
    if code == RELU:
        return np.where(z > 0.0, z, 0.0)
    if code == SIGMOID:
        return _sigmoid(z)
    if code == TANH:
        return np.tanh(z)
    if code == SILU:
        return z * _sigmoid(z)
    if code == GELU:
        return z * _norm_cdf(z)
    raise ValueError(f"unknown activation code {code}")


def act_deriv(code, z):
    z = np.asarray(z, dtype=np.float64)
    if code == IDENTITY:
        return np.ones_like(z)
    if code == RELU:
        return np.where(z > 0.0, 1.0, 0.0)
    if code == SIGMOID:
        s = _sigmoid(z)
        return s * (1.0 - s)
    if code == TANH:
        t = np.tanh(z)
        return 1.0 - t * t
    if code == SILU:
        s = _sigmoid(z)
        return s * (1.0 + z * (1.0 - s))
    if code == GELU:
        return _norm_cdf(z) + z * _norm_pdf(z)
    raise ValueError(f"unknown activation code {code}")


def row_scale(d, w):
    """Return ``diag(d) @ w`` without forming the diagonal matrix."""
    return d[:, None] * w


def matmul(a, b):
    return a @ b


def gram_rows(x):
    """Symmetrized ``x @ x.T``."""
    g = x @ x.T
    return 0.5 * (g + g.T)


def gram_cols(x):
    """Symmetrized ``x.T @ x``."""
    g = x.T @ x
    return 0.5 * (g + g.T)
