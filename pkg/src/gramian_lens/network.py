"""Feedforward network model, model-file loading and traced forward pass.

Model files are JSON documents::

    {
      "n_x": 1,
      "layers": [
        {"weights": [[1.0], [-0.5]], "bias": [0.0, 0.2], "activation": "silu"},
        ...
      ]
    }

``weights`` is a list of rows, so a layer mapping ``n_in -> n_out`` has
``n_out`` rows of ``n_in`` entries each.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .activations import ActivationKind, act_value_array
from .errors import DomainError, ModelError, ShapeError


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, order="C")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LayerSpec:
    weights: np.ndarray
    bias: np.ndarray
    activation: ActivationKind
    # tag as written in the model file, before alias resolution
    declared: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "bias", _frozen(self.bias))
        if not isinstance(self.activation, ActivationKind):
            object.__setattr__(self, "activation", ActivationKind.parse(self.activation))
        if self.weights.ndim != 2:
            raise ShapeError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.bias.ndim != 1 or self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError(
                f"bias length {self.bias.shape} does not match {self.weights.shape[0]} weight rows"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ModelError("weights and biases must be finite")

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """Immutable feedforward network; the last layer is the output layer."""

    layers: tuple[LayerSpec, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if len(layers) < 1:
            raise ShapeError("a network needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].n_in != layers[i - 1].n_out:
                raise ShapeError(
                    f"layer {i}: weights expect input width {layers[i].n_in}, "
                    f"previous layer produces {layers[i - 1].n_out}"
                )

    @classmethod
    def from_arrays(cls, weights: Sequence, biases: Sequence, activations: Sequence) -> "NetworkSpec":
        if not len(weights) == len(biases) == len(activations):
            raise ShapeError("weights, biases and activations must have equal length")
        return cls(tuple(LayerSpec(w, b, a) for w, b, a in zip(weights, biases, activations)))

    @property
    def n_x(self) -> int:
        return self.layers[0].n_in

    @property
    def n_y(self) -> int:
        return self.layers[-1].n_out

    @property
    def depth(self) -> int:
        """Number of weight layers, hidden plus output."""
        return len(self.layers)

    @property
    def widths(self) -> list[int]:
        """``[n_x, n_1, ..., n_y]``."""
        return [self.n_x] + [layer.n_out for layer in self.layers]

    @property
    def hidden_widths(self) -> list[int]:
        return [layer.n_out for layer in self.layers[:-1]]

    @property
    def n_h(self) -> int:
        return sum(self.hidden_widths)

    @property
    def activations(self) -> list[str]:
        return [layer.activation.value for layer in self.layers]

    def normalizations(self) -> list[dict]:
        """Layers whose declared activation tag was an alias."""
        out = []
        for i, layer in enumerate(self.layers):
            if layer.declared is not None and layer.declared != layer.activation.value:
                out.append({"layer": i + 1, "declared": layer.declared, "normalized": layer.activation.value})
        return out

    def to_dict(self) -> dict:
        return {
            "n_x": self.n_x,
            "layers": [
                {"weights": l.weights.tolist(), "bias": l.bias.tolist(), "activation": l.activation.value}
                for l in self.layers
            ],
        }

    def content_hash(self) -> str:
        """SHA-256 over widths, activations and exact weight values."""
        h = hashlib.sha256()
        h.update(json.dumps({"widths": self.widths, "activations": self.activations}).encode())
        for layer in self.layers:
            h.update(layer.weights.tobytes())
            h.update(layer.bias.tobytes())
        return h.hexdigest()

    def with_layer(self, index: int, layer: LayerSpec) -> "NetworkSpec":
        layers = list(self.layers)
        layers[index] = layer
        return NetworkSpec(tuple(layers))


def _field(obj, key, where):
    if not isinstance(obj, dict):
        raise ModelError(f"{where}: expected an object")
    if key not in obj:
        raise ModelError(f"{where}: missing field {key!r}")
    return obj[key]


def _real_array(value, where, ndim):
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise ModelError(f"{where}: expected a {'matrix' if ndim == 2 else 'vector'} of reals") from None
    if arr.ndim != ndim:
        if ndim == 2 and arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        else:
            raise ShapeError(f"{where}: expected {ndim}-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{where}: non-finite value")
    return arr


def load_network(text: str) -> NetworkSpec:
    """Parse and validate model-file content.

    Raises
    ------
    ModelError
        On malformed JSON (with line/column), missing fields or unknown
        activation tags.
    ShapeError
        When a layer's weights, bias or input width are inconsistent.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    n_x = _field(doc, "n_x", "model")
    if isinstance(n_x, bool) or not isinstance(n_x, int) or n_x < 1:
        raise ModelError("model.n_x: expected a positive integer")
    raw_layers = _field(doc, "layers", "model")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ModelError("model.layers: expected a non-empty list")

    layers = []
    prev = n_x
    for i, raw in enumerate(raw_layers):
        where = f"layers[{i}]"
        w = _real_array(_field(raw, "weights", where), f"{where}.weights", 2)
        b = _real_array(_field(raw, "bias", where), f"{where}.bias", 1)
        tag = _field(raw, "activation", where)
        if not isinstance(tag, str):
            raise ModelError(f"{where}.activation: expected a string tag")
        try:
            kind = ActivationKind.parse(tag)
        except ValueError as exc:
            raise ModelError(f"{where}.activation: {exc}") from None
        if w.shape[1] != prev:
            raise ShapeError(f"{where}.weights: has {w.shape[1]} columns, expected input width {prev}")
        if b.shape[0] != w.shape[0]:
            raise ShapeError(f"{where}.bias: length {b.shape[0]} does not match {w.shape[0]} weight rows")
        layers.append(LayerSpec(w, b, kind, declared=tag.strip().lower()))
        prev = w.shape[0]
    return NetworkSpec(tuple(layers))


def load_network_file(path) -> NetworkSpec:
    return load_network(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    x_star: np.ndarray
    z_star: tuple[np.ndarray, ...]  # one per layer, output layer last
    h_star: tuple[np.ndarray, ...]  # hidden layers only
    y_star: np.ndarray

    @property
    def h_stacked(self) -> np.ndarray:
        if not self.h_star:
            return np.zeros(0)
        return np.concatenate(self.h_star)

    @property
    def n_h(self) -> int:
        return sum(len(h) for h in self.h_star)


def check_point(net: NetworkSpec, x) -> np.ndarray:
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    if x.ndim != 1 or x.shape[0] != net.n_x:
        raise ShapeError(f"input has shape {x.shape}, network expects ({net.n_x},)")
    if not np.all(np.isfinite(x)):
        raise DomainError("input contains non-finite values")
    return x


def forward(net: NetworkSpec, x) -> ForwardTrace:
    """Run the network at ``x`` recording every pre-activation and activation."""
    x = check_point(net, x)
    h = x
    zs, hs = [], []
    for layer in net.layers:
        z = layer.weights @ h + layer.bias
        zs.append(z)
        h = act_value_array(layer.activation, z)
        hs.append(h)
    return ForwardTrace(x_star=x, z_star=tuple(zs), h_star=tuple(hs[:-1]), y_star=hs[-1])


def hidden_state(net: NetworkSpec, x) -> tuple[np.ndarray, np.ndarray]:
    """Stacked hidden state and output at ``x``."""
    tr = forward(net, x)
    return tr.h_stacked, tr.y_star
