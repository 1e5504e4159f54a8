"""Gramians, Hankel singular values, internal modes and neuron importance.

For the static local model (no recurrence between hidden states) the
controllability Gramian is ``W_C = B B^T`` and the observability Gramian
is ``W_O = C^T C``. The Hankel singular values are the square roots of
the nonzero eigenvalues of ``M = W_C W_O``.

``M`` is not symmetric, so instead of eigendecomposing it directly the
modes come from the SVD of ``H = C B``: if ``H w = s u`` then
``M (B w) = B (H^T H) w = s^2 (B w)``, so ``v = B w / |B w|`` is an
eigenvector of ``M`` with eigenvalue ``s^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._backend import contiguous, kernels
from .errors import NumericError, ShapeError
from .linearization import LocalLinearization, activation_derivative_matrices, linearize_from_derivatives
from .network import ForwardTrace, NetworkSpec

DEFAULT_RANK_TOL = 1e-10
ABS_SIGMA_FLOOR = 1e-14
# relative gap below which two Hankel values are treated as a tie
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModeAnalysis:
    wc: np.ndarray
    wo: np.ndarray
    hankel_values: np.ndarray  # shape (r,), descending
    modes: np.ndarray  # shape (r, n_h), one unit-norm mode per row
    alpha: float
    importance: np.ndarray  # shape (n_h,)
    rank_tol: float = DEFAULT_RANK_TOL

    @property
    def rank(self) -> int:
        return int(self.hankel_values.shape[0])

    @property
    def n_h(self) -> int:
        return int(self.wc.shape[0])

    @property
    def M(self) -> np.ndarray:
        return self.wc @ self.wo


def _require_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{name} contains non-finite values")


def controllability_gramian(B) -> np.ndarray:
    B = contiguous(B)
    _require_finite(B, "B")
    return kernels.gram_rows(B)


def observability_gramian(C) -> np.ndarray:
    C = contiguous(C)
    _require_finite(C, "C")
    return kernels.gram_cols(C)


def _orient(v: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive; first index wins among equal magnitudes
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def _order_ties(sigma: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """Within runs of equal Hankel values, sort modes lexicographically descending."""
    if len(sigma) < 2:
        return modes
    modes = modes.copy()
    scale = sigma[0]
    start = 0
    for i in range(1, len(sigma) + 1):
        if i == len(sigma) or sigma[start] - sigma[i] > TIE_TOL * scale:
            if i - start > 1:
                group = modes[start:i]
                # np.lexsort keys: last key is primary
                order = np.lexsort(tuple(-group[:, c] for c in range(group.shape[1] - 1, -1, -1)))
                modes[start:i] = group[order]
            start = i
    return modes


def hankel_modes(B, C, rank_tol: float = DEFAULT_RANK_TOL, alpha: float = 1.0) -> ModeAnalysis:
    """Hankel singular values and internal modes of the pair ``(B, C)``.

    Parameters
    ----------
    B : (n_h, n_x) array
        Input-to-state Jacobian.
    C : (n_y, n_h) array
        State-to-output Jacobian.
    rank_tol : float
        A singular value is kept iff it exceeds ``rank_tol * sigma_1``
        (and ``sigma_1`` itself exceeds an absolute floor of 1e-14).
    alpha : float
        Importance exponent, see :func:`neuron_importance`.

    Returns
    -------
    ModeAnalysis
        With ``modes[i]`` satisfying ``W_C W_O v = sigma_i**2 v``.
    """
    B = contiguous(B)
    C = contiguous(C)
    if B.ndim != 2 or C.ndim != 2 or C.shape[1] != B.shape[0]:
        raise ShapeError(f"incompatible shapes B {B.shape}, C {C.shape}")
    if not rank_tol >= 0:
        raise ValueError(f"rank_tol must be non-negative, got {rank_tol}")
    wc = controllability_gramian(B)
    wo = observability_gramian(C)
    n_h = B.shape[0]

    H = kernels.matmul(C, B)
    if H.size == 0:
        s = np.zeros(0)
        Wt = np.zeros((0, B.shape[1]))
    else:
        try:
            _, s, Wt = np.linalg.svd(H, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"SVD of C B failed: {exc}") from None

    if s.size == 0 or not s[0] > ABS_SIGMA_FLOOR:
        r = 0
    else:
        r = int(np.count_nonzero(s > rank_tol * s[0]))
    sigma = s[:r].copy()
    modes = np.empty((r, n_h))
    for i in range(r):
        v = B @ Wt[i]
        modes[i] = _orient(v / np.linalg.norm(v))
    modes = _order_ties(sigma, modes)
    _require_finite(modes, "modes")

    base = ModeAnalysis(
        wc=wc, wo=wo, hankel_values=sigma, modes=modes, alpha=1.0,
        importance=np.zeros(n_h), rank_tol=float(rank_tol),
    )
    return replace(base, alpha=float(alpha), importance=neuron_importance(base, alpha))


def neuron_importance(analysis: ModeAnalysis, alpha: float = 1.0) -> np.ndarray:
    """``Imp[j] = sum_i sigma_i**alpha * modes[i, j]**2``; requires ``alpha >= 1``."""
    if not alpha >= 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if analysis.rank == 0:
        return np.zeros(analysis.n_h)
    weights = analysis.hankel_values ** alpha
    return weights @ (analysis.modes ** 2)


def mode_coordinates(analysis: ModeAnalysis, h) -> np.ndarray:
    """Project a stacked hidden state onto each retained mode."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (analysis.n_h,):
        raise ShapeError(f"hidden state has shape {h.shape}, expected ({analysis.n_h},)")
    return analysis.modes @ h


def linearized_ablation(net: NetworkSpec, trace: ForwardTrace, neuron: int, lin: LocalLinearization | None = None) -> float:
    """Frobenius change of ``C B`` when one hidden neuron is frozen.

    ``neuron`` is a 1-based index into the stacked hidden state. Freezing
    means zeroing that neuron's activation derivative, which removes every
    linear path through it.
    """
    n_h = net.n_h
    if isinstance(neuron, bool) or int(neuron) != neuron or not 1 <= neuron <= n_h:
        raise IndexError(f"neuron index must be in 1..{n_h}, got {neuron}")
    D = activation_derivative_matrices(net, trace) if lin is None else list(lin.D)
    base = lin if lin is not None else linearize_from_derivatives(net, D)

    offset = int(neuron) - 1
    layer = 0
    for layer, width in enumerate(net.hidden_widths):
        if offset < width:
            break
        offset -= width
    D_ablated = [d.copy() for d in D]
    D_ablated[layer][offset] = 0.0
    ablated = linearize_from_derivatives(net, D_ablated)
    return float(np.linalg.norm(base.end_to_end - ablated.end_to_end))
