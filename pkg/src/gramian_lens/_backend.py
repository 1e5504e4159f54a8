"""Kernel backend selection.

Set ``GRAMIAN_LENS_BACKEND=numpy`` to force the pure-numpy path; the
default is ``numba`` when it imports cleanly. The choice is made once,
at import time.
"""

import logging
import os

import numpy as np

ENV_FLAG = "GRAMIAN_LENS_BACKEND"
BACKENDS = ("numba", "numpy")

log = logging.getLogger(__name__)


def _select():
    requested = os.environ.get(ENV_FLAG, "numba").strip().lower() or "numba"
    if requested not in BACKENDS:
        raise ValueError(f"{ENV_FLAG} must be one of {BACKENDS}, got {requested!r}")
    if requested == "numba":
        try:
            from . import _kernels_numba as mod
        except ImportError as exc:  # pragma: no cover - numba is a declared dependency
            log.warning("numba unavailable (%s); using numpy kernels", exc)
        else:
            return "numba", mod
    from . import _kernels_numpy as mod

    return "numpy", mod


BACKEND, kernels = _select()


def contiguous(a):
    """Kernels expect C-contiguous float64 arrays."""
    return np.ascontiguousarray(a, dtype=np.float64)


def warmup() -> float:
    """Trigger JIT compilation of every kernel; returns the seconds spent."""
    import time

    t0 = time.perf_counter()
    z = np.linspace(-1.0, 1.0, 3)
    m = np.ones((2, 2))
    for code in range(6):
        kernels.act_value(code, z)
        kernels.act_deriv(code, z)
    kernels.row_scale(z[:2], m)
    ro = m.copy()
    ro.setflags(write=False)
    kernels.row_scale(z[:2], ro)
    kernels.matmul(m, m)
    kernels.gram_rows(m)
    kernels.gram_cols(m)
    return time.perf_counter() - t0
