"""Command-line interface: analyze, sweep, compare, check-jacobian, ablate.

Exit codes: 0 success, 1 check failure, 2 usage or parse error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, ModelError, NumericError
from .gramians import DEFAULT_RANK_TOL, linearized_ablation
from .linearization import DEFAULT_FD_STEP, finite_difference_jacobians, linearize
from .network import NetworkSpec, forward, load_network
from .report import (
    AnalysisOptions,
    OperatingPointReport,
    analyze_point,
    compare_points,
    dumps,
    sweep,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
JACOBIAN_TOL = 1e-4
# options whose values may start with '-'
_VALUE_OPTS = ("--point", "--grid")


class UsageError(Exception):
    pass


def bundled_models() -> dict[str, Path]:
    root = resources.files("gramian_lens") / "data"
    return {Path(p.name).stem: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


def resolve_model(arg: str) -> Path:
    """A path on disk, or the name of a bundled model such as ``gelu_2332``."""
    path = Path(arg)
    if path.is_file():
        return path
    models = bundled_models()
    name = path.name[:-5] if path.name.endswith(".json") else path.name
    if name in models:
        return models[name]
    raise UsageError(f"model file not found: {arg} (bundled models: {', '.join(sorted(models))})")


def read_model(arg: str) -> NetworkSpec:
    path = resolve_model(arg)
    try:
        return load_network(path.read_text(encoding="utf-8"))
    except ModelError as exc:
        raise ModelError(f"{path}: {exc}") from None


def parse_point(text: str, n_x: int | None = None) -> np.ndarray:
    try:
        values = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed point {text!r}: expected comma-separated reals") from None
    if not np.all(np.isfinite(values)):
        raise UsageError(f"point {text!r} has non-finite entries")
    if n_x is not None and len(values) != n_x:
        raise UsageError(f"point {text!r} has {len(values)} entries, model input width is {n_x}")
    return np.array(values)


def parse_grid(text: str, n_x: int) -> list[tuple[float, float, int]]:
    """``dim:min:max:count`` items separated by commas, each dimension exactly once (0-based dim)."""
    dims: dict[int, tuple[float, float, int]] = {}
    for item in text.split(","):
        parts = item.split(":")
        if len(parts) != 4:
            raise UsageError(f"malformed grid item {item!r}: expected dim:min:max:count")
        try:
            dim, lo, hi, count = int(parts[0]), float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError:
            raise UsageError(f"malformed grid item {item!r}") from None
        if not 0 <= dim < n_x:
            raise UsageError(f"grid dimension {dim} out of range 0..{n_x - 1}")
        if dim in dims:
            raise UsageError(f"grid dimension {dim} given twice")
        if count < 1:
            raise UsageError(f"grid item {item!r}: count must be >= 1")
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise UsageError(f"grid item {item!r}: bounds must be finite")
        dims[dim] = (lo, hi, count)
    if len(dims) != n_x:
        missing = sorted(set(range(n_x)) - set(dims))
        raise UsageError(f"grid is missing dimension(s) {missing}")
    return [dims[d] for d in range(n_x)]


def read_points_file(path: str, n_x: int) -> list[np.ndarray]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read points file: {exc}") from None
    points = []
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            points.append(parse_point(line, n_x))
        except UsageError as exc:
            raise UsageError(f"{path}, line {lineno}: {exc}") from None
    if not points:
        raise UsageError(f"{path}: no points")
    return points


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def neuron_labels(hidden_widths) -> list[str]:
    return [f"h{layer}_{i}" for layer, w in enumerate(hidden_widths, 1) for i in range(1, w + 1)]


def _fmt(values) -> str:
    return "[" + ", ".join(f"{v:.3f}" for v in values) + "]"


def print_summary(rep: OperatingPointReport, out=None) -> None:
    out = out or sys.stdout
    print(f"point          {_fmt(rep.point)}", file=out)
    print(f"output         {_fmt(rep.output)}", file=out)
    print(f"hankel values  {_fmt(rep.hankel_values)}  (rank {rep.rank})", file=out)
    print(f"{'neuron':<8} {'diag_wc':>8} {'diag_wo':>8} {'imp':>8}", file=out)
    for label, wc, wo, imp in zip(neuron_labels(rep.hidden_widths), rep.diag_wc, rep.diag_wo, rep.importance):
        print(f"{label:<8} {wc:8.3f} {wo:8.3f} {imp:8.3f}", file=out)
    arg = rep.importance_argmax
    if arg is not None:
        print(f"most important neuron: {neuron_labels(rep.hidden_widths)[arg - 1]} (index {arg})", file=out)


def _options(args) -> AnalysisOptions:
    try:
        return AnalysisOptions(alpha=args.alpha, rank_tol=args.rank_tol, include_full_gramians=args.full_gramians or None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_analyze(args) -> int:
    net = read_model(args.model)
    x = parse_point(args.point, net.n_x)
    rep = analyze_point(net, x, _options(args))
    if args.out:
        write_atomic(args.out, dumps(rep.to_dict()))
    print_summary(rep)
    return EXIT_OK


def cmd_sweep(args) -> int:
    net = read_model(args.model)
    if args.grid is not None:
        result = sweep(net, grid=parse_grid(args.grid, net.n_x), options=_options(args), threads=args.threads)
    else:
        result = sweep(net, read_points_file(args.points_file, net.n_x), options=_options(args), threads=args.threads)
    csv = result.to_csv()
    if args.out:
        write_atomic(args.out, dumps(result.to_dict()))
        write_atomic(args.csv or Path(args.out).with_suffix(".csv"), csv)
    elif args.csv:
        write_atomic(args.csv, csv)
    if not args.out and not args.csv:
        sys.stdout.write(csv)
    return EXIT_OK


def _read_report(path: str) -> OperatingPointReport:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read report: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict) and "points" in doc and "diag_wc" not in doc:
        raise UsageError(f"{path} is a sweep report; compare expects single-point reports")
    return OperatingPointReport.from_dict(doc)


def cmd_compare(args) -> int:
    a = _read_report(args.report_a)
    b = _read_report(args.report_b)
    cmp = compare_points(a, b)
    if args.out:
        write_atomic(args.out, dumps(cmp.to_dict()))
    overlap = "n/a" if cmp.mode_overlap is None else f"{cmp.mode_overlap:.3f}"
    print(f"sigma1         {a.sigma1:.3f} -> {b.sigma1:.3f}")
    print(f"sigma_ratio    {cmp.sigma_ratio:.3f}")
    print(f"mode_overlap   {overlap}")
    print(f"rank_shift     {cmp.importance_rank_shift}")
    return EXIT_OK


def cmd_check_jacobian(args) -> int:
    net = read_model(args.model)
    x = parse_point(args.point, net.n_x)
    if not args.step > 0:
        raise UsageError("--step must be positive")
    lin = linearize(net, forward(net, x))
    B_fd, H_fd = finite_difference_jacobians(net, x, args.step)
    dev_b = float(np.max(np.abs(lin.B - B_fd))) if B_fd.size else 0.0
    dev_h = float(np.max(np.abs(lin.end_to_end - H_fd))) if H_fd.size else 0.0
    ok = dev_b <= JACOBIAN_TOL and dev_h <= JACOBIAN_TOL
    print(f"max |B - B_fd|     {dev_b:.3e}")
    print(f"max |C B - H_fd|   {dev_h:.3e}")
    print(f"tolerance          {JACOBIAN_TOL:.0e}  {'ok' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_ablate(args) -> int:
    net = read_model(args.model)
    x = parse_point(args.point, net.n_x)
    if args.neuron == "all":
        indices = list(range(1, net.n_h + 1))
    else:
        try:
            indices = [int(args.neuron)]
        except ValueError:
            raise UsageError(f"--neuron must be an integer or 'all', got {args.neuron!r}") from None
        if not 1 <= indices[0] <= net.n_h:
            raise UsageError(f"--neuron {indices[0]} out of range 1..{net.n_h}")
    rep = analyze_point(net, x, _options(args))
    trace = forward(net, x)
    lin = linearize(net, trace)
    labels = neuron_labels(net.hidden_widths)
    print(f"{'index':>5} {'neuron':<8} {'imp':>8} {'effect':>8}")
    for j in indices:
        effect = linearized_ablation(net, trace, j, lin)
        print(f"{j:>5} {labels[j - 1]:<8} {rep.importance[j - 1]:8.3f} {effect:8.3f}")
    return EXIT_OK


def _add_analysis_flags(p) -> None:
    p.add_argument("--alpha", type=float, default=1.0, help="importance exponent (>= 1)")
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL, help="relative rank tolerance")
    p.add_argument("--full-gramians", action="store_true", help="always include full W_C and W_O")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gramian-lens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze one operating point")
    p.add_argument("model")
    p.add_argument("--point", required=True, help="comma-separated input, e.g. 0.3,-0.2")
    _add_analysis_flags(p)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="analyze a family of operating points")
    p.add_argument("model")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--grid", help="dim:min:max:count[,...], dims 0-based")
    src.add_argument("--points-file", help="one comma-separated point per line")
    _add_analysis_flags(p)
    p.add_argument("--threads", type=int, default=None, help="worker threads (0 = auto)")
    p.add_argument("--out", help="write the JSON sweep report here")
    p.add_argument("--csv", help="CSV path (default: --out with .csv suffix, else stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="compare two single-point reports")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check-jacobian", help="compare analytic Jacobians with finite differences")
    p.add_argument("model")
    p.add_argument("--point", required=True)
    p.add_argument("--step", type=float, default=DEFAULT_FD_STEP)
    p.set_defaults(func=cmd_check_jacobian)

    p = sub.add_parser("ablate", help="linearized single-neuron ablation effects")
    p.add_argument("model")
    p.add_argument("--point", required=True)
    p.add_argument("--neuron", required=True, help="1-based stacked index or 'all'")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_ablate)
    return parser


def _join_values(argv: list[str]) -> list[str]:
    out = []
    it = iter(range(len(argv)))
    for i in it:
        if argv[i] in _VALUE_OPTS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            next(it, None)
        else:
            out.append(argv[i])
    return out


def main(argv: list[str] | None = None) -> int:
    argv = _join_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ModelError, DomainError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
