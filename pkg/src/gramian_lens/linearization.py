"""Local linear model of a network around a forward trace.

Around an operating point the stacked hidden state and the output respond
to small input perturbations as ``dh = B dx`` and ``dy = C dh``. ``B`` is
assembled block by block from ordered products of layer Jacobians, ``C``
is nonzero only on the columns of the last hidden layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import contiguous, kernels
from .activations import act_deriv_array
from .errors import ShapeError
from .network import ForwardTrace, NetworkSpec, check_point, hidden_state

DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class LocalLinearization:
    D: tuple[np.ndarray, ...]  # activation-derivative diagonals, output layer last
    J: tuple[np.ndarray, ...]  # hidden-layer Jacobians D_l W_l
    B_blocks: tuple[np.ndarray, ...]
    B: np.ndarray
    C_local: np.ndarray
    C: np.ndarray

    @property
    def end_to_end(self) -> np.ndarray:
        """``C @ B``, the Jacobian of the output with respect to the input."""
        return kernels.matmul(self.C, self.B)


def _check_trace(net: NetworkSpec, trace: ForwardTrace) -> None:
    if len(trace.z_star) != net.depth:
        raise ShapeError(f"trace has {len(trace.z_star)} layers, network has {net.depth}")
    for i, (z, layer) in enumerate(zip(trace.z_star, net.layers)):
        if z.shape != (layer.n_out,):
            raise ShapeError(f"layer {i + 1}: trace width {z.shape[0]} != network width {layer.n_out}")


def activation_derivative_matrices(net: NetworkSpec, trace: ForwardTrace) -> list[np.ndarray]:
    """Diagonals of ``D_l = diag(act'(z_l))`` for every layer including the output."""
    _check_trace(net, trace)
    return [act_deriv_array(layer.activation, z) for layer, z in zip(net.layers, trace.z_star)]


def layer_jacobians(net: NetworkSpec, D: Sequence[np.ndarray]) -> tuple[list[np.ndarray], np.ndarray]:
    """Return the hidden-layer Jacobians ``D_l W_l`` and ``C_local = D_L W_L``."""
    if len(D) != net.depth:
        raise ShapeError(f"got {len(D)} derivative vectors for {net.depth} layers")
    mats = []
    for i, (d, layer) in enumerate(zip(D, net.layers)):
        d = contiguous(d)
        if d.shape != (layer.n_out,):
            raise ShapeError(f"layer {i + 1}: derivative vector has shape {d.shape}, expected ({layer.n_out},)")
        mats.append(kernels.row_scale(d, layer.weights))
    return mats[:-1], mats[-1]


def input_state_jacobian(J: Sequence[np.ndarray], n_x: int | None = None) -> tuple[list[np.ndarray], np.ndarray]:
    """Accumulate ``B_l = J_l B_{l-1}`` and stack the blocks into ``B``.

    Each block is formed by left-multiplying the previous one; the product
    is never re-associated. ``n_x`` is only needed when ``J`` is empty.
    """
    if not J:
        if n_x is None:
            raise ShapeError("empty Jacobian chain needs an explicit input width")
        return [], np.zeros((0, n_x))
    blocks = [contiguous(J[0])]
    for i in range(1, len(J)):
        Ji = contiguous(J[i])
        if Ji.shape[1] != blocks[-1].shape[0]:
            raise ShapeError(f"J[{i}] has {Ji.shape[1]} columns, previous block has {blocks[-1].shape[0]} rows")
        blocks.append(kernels.matmul(Ji, blocks[-1]))
    return blocks, np.vstack(blocks)


def hidden_output_jacobian(C_local: np.ndarray, widths: Sequence[int]) -> np.ndarray:
    """Embed ``C_local`` in the columns of the last hidden layer, zeros elsewhere."""
    C_local = contiguous(C_local)
    widths = [int(w) for w in widths]
    if not widths:
        if C_local.shape[1] != 0:
            raise ShapeError("network without hidden layers cannot have a nonempty C_local")
        return C_local.copy()
    if C_local.shape[1] != widths[-1]:
        raise ShapeError(f"C_local has {C_local.shape[1]} columns, last hidden width is {widths[-1]}")
    n_h = sum(widths)
    C = np.zeros((C_local.shape[0], n_h))
    C[:, n_h - widths[-1]:] = C_local
    return C


def linearize_from_derivatives(net: NetworkSpec, D: Sequence[np.ndarray]) -> LocalLinearization:
    J, C_local = layer_jacobians(net, D)
    blocks, B = input_state_jacobian(J, net.n_x)
    C = hidden_output_jacobian(C_local, net.hidden_widths)
    return LocalLinearization(
        D=tuple(contiguous(d) for d in D),
        J=tuple(J),
        B_blocks=tuple(blocks),
        B=B,
        C_local=C_local,
        C=C,
    )


def linearize(net: NetworkSpec, trace: ForwardTrace) -> LocalLinearization:
    return linearize_from_derivatives(net, activation_derivative_matrices(net, trace))


def finite_difference_jacobians(net: NetworkSpec, x, step: float = DEFAULT_FD_STEP) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Jacobians of the stacked hidden state and the output.

    Returns ``(B_fd, H_fd)`` with shapes ``(n_h, n_x)`` and ``(n_y, n_x)``.
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    x = check_point(net, x)
    B_fd = np.empty((net.n_h, net.n_x))
    H_fd = np.empty((net.n_y, net.n_x))
    for j in range(net.n_x):
        xp = x.copy()
        xm = x.copy()
        xp[j] += step
        xm[j] -= step
        hp, yp = hidden_state(net, xp)
        hm, ym = hidden_state(net, xm)
        # actual spacing after rounding of x +- step
        span = xp[j] - xm[j]
        B_fd[:, j] = (hp - hm) / span
        H_fd[:, j] = (yp - ym) / span
    return B_fd, H_fd
