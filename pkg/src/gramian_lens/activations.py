"""Elementwise activation functions and their analytic first derivatives.

``silu`` is ``z * sigmoid(z)``; the tag ``swiglu`` is accepted as an alias
for it because that name is commonly used for the same elementwise map in
small examples. ``gelu`` uses the exact normal CDF, not the tanh
approximation. The ReLU derivative at 0 is taken to be 0.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from ._backend import kernels
from .errors import DomainError

ALIASES = {"swiglu": "silu", "swish": "silu"}


class ActivationKind(str, enum.Enum):
    IDENTITY = "identity"
    RELU = "relu"
    SIGMOID = "sigmoid"
    TANH = "tanh"
    SILU = "silu"
    GELU = "gelu"

    @property
    def code(self) -> int:
        """Integer code used by the compiled kernels."""
        return _CODES[self]

    @classmethod
    def parse(cls, tag: str) -> "ActivationKind":
        """Look up a kind by its lowercase tag, resolving aliases.

        Raises
        ------
        ValueError
            If the tag names no known activation.
        """
        key = str(tag).strip().lower()
        key = ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            known = sorted([k.value for k in cls] + list(ALIASES))
            raise ValueError(f"unknown activation {tag!r}; expected one of {known}") from None


_CODES = {kind: i for i, kind in enumerate(ActivationKind)}


def _as_kind(kind) -> ActivationKind:
    return kind if isinstance(kind, ActivationKind) else ActivationKind.parse(kind)


def _check_finite_scalar(z: float) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"activation input must be finite, got {z}")
    return z


def act_value(kind, z: float) -> float:
    """Evaluate the activation ``kind`` at a scalar ``z``."""
    z = _check_finite_scalar(z)
    return float(kernels.act_value(_as_kind(kind).code, np.array([z]))[0])


def act_deriv(kind, z: float) -> float:
    """Evaluate the analytic derivative of ``kind`` at a scalar ``z``."""
    z = _check_finite_scalar(z)
    return float(kernels.act_deriv(_as_kind(kind).code, np.array([z]))[0])


def act_value_array(kind, z) -> np.ndarray:
    z = np.ascontiguousarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise DomainError("activation input contains non-finite values")
    return kernels.act_value(_as_kind(kind).code, z)


def act_deriv_array(kind, z) -> np.ndarray:
    z = np.ascontiguousarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise DomainError("activation input contains non-finite values")
    return kernels.act_deriv(_as_kind(kind).code, z)
