"""numba-compiled kernels, loop-for-loop twins of ``_kernels_numpy``."""

import math

import numpy as np
from numba import njit

IDENTITY, RELU, SIGMOID, TANH, SILU, GELU = range(6)

_INV_SQRT2 = 0.7071067811865476
_INV_SQRT_2PI = 0.3989422804014327

_jit = njit(cache=True, nogil=True)


@_jit
def _sigmoid(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@_jit
def _value(code, z):
    if code == IDENTITY:
        return z
    if code == RELU:
        return z if z > 0.0 else 0.0
    if code == SIGMOID:
        return _sigmoid(z)
    if code == TANH:
        return math.tanh(z)
    if code == SILU:
        return z * _sigmoid(z)
    # GELU
    return z * (0.5 * math.erfc(-z * _INV_SQRT2))


@_jit
def _deriv(code, z):
    if code == IDENTITY:
        return 1.0
    if code == RELU:
        return 1.0 if z > 0.0 else 0.0
    if code == SIGMOID:
        s = _sigmoid(z)
        return s * (1.0 - s)
    if code == TANH:
        t = math.tanh(z)
        return 1.0 - t * t
    if code == SILU:
        s = _sigmoid(z)
        return s * (1.0 + z * (1.0 - s))
    return 0.5 * math.erfc(-z * _INV_SQRT2) + z * (_INV_SQRT_2PI * math.exp(-0.5 * z * z))


@_jit
def _act_value(code, z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        out[i] = _value(code, z[i])
    return out


@_jit
def _act_deriv(code, z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        out[i] = _deriv(code, z[i])
    return out


def act_value(code, z):
    if not 0 <= code <= GELU:
        raise ValueError(f"unknown activation code {code}")
    return _act_value(code, np.ascontiguousarray(z, dtype=np.float64))


def act_deriv(code, z):
    if not 0 <= code <= GELU:
        raise ValueError(f"unknown activation code {code}")
    return _act_deriv(code, np.ascontiguousarray(z, dtype=np.float64))


@_jit
def row_scale(d, w):
    n, m = w.shape
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            out[i, j] = d[i] * w[i, j]
    return out


@_jit
def matmul(a, b):
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m))
    for i in range(n):
        for p in range(k):
            aip = a[i, p]
            for j in range(m):
                out[i, j] += aip * b[p, j]
    return out


@_jit
def gram_rows(x):
    n, k = x.shape
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            s = 0.0
            for p in range(k):
                s += x[i, p] * x[j, p]
            out[i, j] = s
            out[j, i] = s
    return out


@_jit
def gram_cols(x):
    k, n = x.shape
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            s = 0.0
            for p in range(k):
                s += x[p, i] * x[p, j]
            out[i, j] = s
            out[j, i] = s
    return out
