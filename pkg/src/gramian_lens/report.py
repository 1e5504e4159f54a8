"""Per-point analysis pipeline, sweeps over operating points, and comparisons.

Reports serialize to JSON with every float written to 17 significant
digits, so a report read back from disk reproduces the in-memory values
exactly.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import ModelError, ShapeError
from .gramians import DEFAULT_RANK_TOL, ModeAnalysis, hankel_modes, mode_coordinates
from .linearization import LocalLinearization, linearize
from .network import ForwardTrace, NetworkSpec, forward

THREADS_ENV = "GRAMIAN_LENS_THREADS"
FULL_GRAMIAN_MAX_NH = 64
INF_SENTINEL = "inf"


@dataclass(frozen=True)
class AnalysisOptions:
    alpha: float = 1.0
    rank_tol: float = DEFAULT_RANK_TOL
    # None: include full Gramians only when n_h <= 64
    include_full_gramians: bool | None = None

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if not self.rank_tol >= 0:
            raise ValueError(f"rank_tol must be non-negative, got {self.rank_tol}")


@dataclass(frozen=True, eq=False)
class OperatingPointReport:
    network_hash: str
    point: np.ndarray
    output: np.ndarray
    diag_wc: np.ndarray
    diag_wo: np.ndarray
    hankel_values: np.ndarray
    modes: np.ndarray
    importance: np.ndarray
    mode_coordinates: np.ndarray
    alpha: float
    rank_tol: float
    hidden_widths: tuple[int, ...]
    activations: tuple[str, ...] = ()
    normalizations: tuple[dict, ...] = ()
    wc: np.ndarray | None = None
    wo: np.ndarray | None = None

    @property
    def n_h(self) -> int:
        return int(self.diag_wc.shape[0])

    @property
    def rank(self) -> int:
        return int(self.hankel_values.shape[0])

    @property
    def sigma1(self) -> float:
        return float(self.hankel_values[0]) if self.rank else 0.0

    @property
    def importance_argmax(self) -> int | None:
        """1-based stacked index of the most important neuron, None if rank is 0."""
        if self.rank == 0:
            return None
        return int(np.argmax(self.importance)) + 1

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {
            "network_hash": self.network_hash,
            "point": self.point.tolist(),
            "output": self.output.tolist(),
            "n_h": self.n_h,
            "hidden_widths": list(self.hidden_widths),
            "activations": list(self.activations),
            "activation_normalization": [dict(n) for n in self.normalizations],
            "alpha": self.alpha,
            "rank_tol": self.rank_tol,
            "rank": self.rank,
            "diag_wc": self.diag_wc.tolist(),
            "diag_wo": self.diag_wo.tolist(),
            "hankel_values": self.hankel_values.tolist(),
            "modes": self.modes.tolist(),
            "importance": self.importance.tolist(),
            "mode_coordinates": self.mode_coordinates.tolist(),
        }
        if self.wc is not None:
            doc["wc"] = self.wc.tolist()
            doc["wo"] = self.wo.tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "OperatingPointReport":
        try:
            n_h = len(doc["diag_wc"])
            modes = np.array(doc["modes"], dtype=np.float64).reshape(len(doc["modes"]), n_h)
            wc = doc.get("wc")
            wo = doc.get("wo")
            return cls(
                network_hash=str(doc["network_hash"]),
                point=np.array(doc["point"], dtype=np.float64),
                output=np.array(doc["output"], dtype=np.float64),
                diag_wc=np.array(doc["diag_wc"], dtype=np.float64),
                diag_wo=np.array(doc["diag_wo"], dtype=np.float64),
                hankel_values=np.array(doc["hankel_values"], dtype=np.float64),
                modes=modes,
                importance=np.array(doc["importance"], dtype=np.float64),
                mode_coordinates=np.array(doc.get("mode_coordinates", []), dtype=np.float64),
                alpha=float(doc["alpha"]),
                rank_tol=float(doc["rank_tol"]),
                hidden_widths=tuple(int(w) for w in doc.get("hidden_widths", [n_h])),
                activations=tuple(doc.get("activations", ())),
                normalizations=tuple(doc.get("activation_normalization", ())),
                wc=None if wc is None else np.array(wc, dtype=np.float64),
                wo=None if wo is None else np.array(wo, dtype=np.float64),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed report document: {exc}") from None


@dataclass(frozen=True, eq=False)
class PointAnalysis:
    """Everything computed at one operating point, for callers that need more than the report."""

    trace: ForwardTrace
    linearization: LocalLinearization
    modes: ModeAnalysis
    report: OperatingPointReport


def assemble_report(
    net: NetworkSpec,
    trace: ForwardTrace,
    analysis: ModeAnalysis,
    options: AnalysisOptions,
) -> OperatingPointReport:
    full = options.include_full_gramians
    if full is None:
        full = net.n_h <= FULL_GRAMIAN_MAX_NH
    return OperatingPointReport(
        network_hash=net.content_hash(),
        point=trace.x_star.copy(),
        output=trace.y_star.copy(),
        diag_wc=np.diag(analysis.wc).copy(),
        diag_wo=np.diag(analysis.wo).copy(),
        hankel_values=analysis.hankel_values,
        modes=analysis.modes,
        importance=analysis.importance,
        mode_coordinates=mode_coordinates(analysis, trace.h_stacked),
        alpha=analysis.alpha,
        rank_tol=analysis.rank_tol,
        hidden_widths=tuple(net.hidden_widths),
        activations=tuple(net.activations),
        normalizations=tuple(net.normalizations()),
        wc=analysis.wc if full else None,
        wo=analysis.wo if full else None,
    )


def analyze_point_full(net: NetworkSpec, x, options: AnalysisOptions | None = None) -> PointAnalysis:
    options = options or AnalysisOptions()
    trace = forward(net, x)
    lin = linearize(net, trace)
    modes = hankel_modes(lin.B, lin.C, rank_tol=options.rank_tol, alpha=options.alpha)
    return PointAnalysis(trace, lin, modes, assemble_report(net, trace, modes, options))


def analyze_point(net: NetworkSpec, x, options: AnalysisOptions | None = None) -> OperatingPointReport:
    """Forward pass, linearization, Gramians, Hankel modes and importance at ``x``."""
    return analyze_point_full(net, x, options).report


# -- sweeps -----------------------------------------------------------------


def grid_points(grid: Sequence[tuple[float, float, int]]) -> np.ndarray:
    """Cartesian grid from per-dimension ``(min, max, count)``; last dimension varies fastest."""
    if not grid:
        raise ValueError("grid needs at least one dimension")
    axes = []
    for d, (lo, hi, count) in enumerate(grid):
        count = int(count)
        if count < 1:
            raise ValueError(f"grid dimension {d}: count must be >= 1, got {count}")
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"grid dimension {d}: bounds must be finite")
        axes.append(np.linspace(lo, hi, count) if count > 1 else np.array([float(lo)]))
    return np.array(list(itertools.product(*axes)), dtype=np.float64)


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else ``GRAMIAN_LENS_THREADS``, 0 meaning auto."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if threads < 0:
        raise ValueError(f"thread count must be >= 0, got {threads}")
    if threads == 0:
        threads = min(32, os.cpu_count() or 1)
    return threads


@dataclass(frozen=True, eq=False)
class SweepReport:
    network_hash: str
    reports: tuple[OperatingPointReport, ...]
    alpha: float
    rank_tol: float

    @property
    def sigma1_series(self) -> list[float]:
        return [r.sigma1 for r in self.reports]

    @property
    def imp_argmax_series(self) -> list[int | None]:
        return [r.importance_argmax for r in self.reports]

    def to_dict(self) -> dict:
        return {
            "network_hash": self.network_hash,
            "alpha": self.alpha,
            "rank_tol": self.rank_tol,
            "points": [r.to_dict() for r in self.reports],
            "sigma1_series": self.sigma1_series,
            "imp_argmax_series": self.imp_argmax_series,
        }

    def to_csv(self) -> str:
        n_x = len(self.reports[0].point)
        lines = [",".join([f"x{i + 1}" for i in range(n_x)] + ["sigma1", "imp_argmax"])]
        for r in self.reports:
            arg = r.importance_argmax
            cells = [format_float(v) for v in r.point] + [format_float(r.sigma1), "" if arg is None else str(arg)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def sweep(
    net: NetworkSpec,
    points=None,
    *,
    grid: Sequence[tuple[float, float, int]] | None = None,
    options: AnalysisOptions | None = None,
    threads: int | None = None,
) -> SweepReport:
    """Analyze every point of an explicit list or a grid, preserving input order."""
    if (points is None) == (grid is None):
        raise ValueError("give exactly one of points or grid")
    if grid is not None:
        if len(grid) != net.n_x:
            raise ShapeError(f"grid has {len(grid)} dimensions, network input width is {net.n_x}")
        pts = grid_points(grid)
    else:
        pts = [np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in points]
    if len(pts) == 0:
        raise ValueError("sweep needs at least one point")
    options = options or AnalysisOptions()

    workers = min(resolve_threads(threads), len(pts))
    if workers <= 1:
        reports = [analyze_point(net, p, options) for p in pts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda p: analyze_point(net, p, options), pts))
    return SweepReport(net.content_hash(), tuple(reports), options.alpha, options.rank_tol)


# -- comparison -------------------------------------------------------------


def safe_ratio(num: float, den: float) -> float:
    """``num/den`` with ``0/0 -> 1`` and ``x/0 -> inf``."""
    if den == 0.0:
        return 1.0 if num == 0.0 else math.inf
    return num / den


def importance_order(importance: np.ndarray) -> np.ndarray:
    # descending; ties keep index order
    return np.argsort(-np.asarray(importance), kind="stable")


def kendall_distance(order_a: np.ndarray, order_b: np.ndarray) -> int:
    """Number of item pairs ranked in opposite order by two permutations."""
    pos_b = np.empty(len(order_b), dtype=int)
    pos_b[order_b] = np.arange(len(order_b))
    seq = pos_b[order_a]
    return int(sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j]))


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    point_a: np.ndarray
    point_b: np.ndarray
    network_hash: str
    wc_contraction: np.ndarray
    wo_contraction: np.ndarray
    sigma_ratio: float
    mode_overlap: float | None
    importance_rank_shift: int
    sigma1_a: float = 0.0
    sigma1_b: float = 0.0

    def to_dict(self) -> dict:
        return {
            "network_hash": self.network_hash,
            "point_a": self.point_a.tolist(),
            "point_b": self.point_b.tolist(),
            "sigma1_a": self.sigma1_a,
            "sigma1_b": self.sigma1_b,
            "sigma_ratio": self.sigma_ratio,
            "mode_overlap": self.mode_overlap,
            "wc_contraction": self.wc_contraction.tolist(),
            "wo_contraction": self.wo_contraction.tolist(),
            "importance_rank_shift": self.importance_rank_shift,
        }


def compare_points(a: OperatingPointReport, b: OperatingPointReport) -> ComparisonReport:
    """How Gramians, the leading Hankel value and the dominant mode change from ``a`` to ``b``."""
    if a.n_h != b.n_h:
        raise ShapeError(f"reports have different hidden sizes ({a.n_h} vs {b.n_h})")
    if a.network_hash != b.network_hash:
        raise ModelError("reports come from different networks")
    wc = np.array([safe_ratio(nb, na) for na, nb in zip(a.diag_wc, b.diag_wc)])
    wo = np.array([safe_ratio(nb, na) for na, nb in zip(a.diag_wo, b.diag_wo)])
    overlap = None
    if a.rank and b.rank:
        overlap = float(abs(a.modes[0] @ b.modes[0]))
    return ComparisonReport(
        point_a=a.point,
        point_b=b.point,
        network_hash=a.network_hash,
        wc_contraction=wc,
        wo_contraction=wo,
        sigma_ratio=safe_ratio(b.sigma1, a.sigma1),
        mode_overlap=overlap,
        importance_rank_shift=kendall_distance(importance_order(a.importance), importance_order(b.importance)),
        sigma1_a=a.sigma1,
        sigma1_b=b.sigma1,
    )


# -- serialization ----------------------------------------------------------


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        raise ValueError("NaN cannot be serialized")
    if math.isinf(x):
        return INF_SENTINEL if x > 0 else "-" + INF_SENTINEL
    return format(x, ".17g")


def _is_flat(seq) -> bool:
    return all(not isinstance(v, (list, tuple, dict)) for v in seq)


def _encode(obj, indent: int) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        text = format_float(obj)
        # non-finite values become string sentinels
        return f'"{text}"' if "inf" in text else text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(f'{pad}  {_encode(str(k), 0)}: {_encode(v, indent + 1)}' for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if _is_flat(obj):
            return "[" + ", ".join(_encode(v, 0) for v in obj) + "]"
        inner = ",\n".join(f"{pad}  {_encode(v, indent + 1)}" for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc) -> str:
    """Deterministic JSON with 17-significant-digit floats; inf values become ``"inf"``."""
    return _encode(doc, 0) + "\n"
