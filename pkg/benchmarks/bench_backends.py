"""Compare the numba and pure-numpy kernel backends.

Kernel timings run in-process against both kernel modules; the end-to-end
sweep runs once per backend in a subprocess, because the backend is fixed
at import time by GRAMIAN_LENS_BACKEND.

    python benchmarks/bench_backends.py [--points 2000] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from gramian_lens import _kernels_numba as nb
from gramian_lens import _kernels_numpy as npk

SWEEP_SNIPPET = r"""
import json, sys, time
import numpy as np
import gramian_lens as g
from gramian_lens._backend import BACKEND, warmup
warmup()
rng = np.random.default_rng(0)
widths = [4, 16, 16, 16, 3]
kinds = ["gelu", "silu", "tanh", "identity"]
net = g.NetworkSpec.from_arrays(
    [rng.uniform(-1, 1, size=(widths[i + 1], widths[i])) / np.sqrt(widths[i]) for i in range(4)],
    [rng.uniform(-0.5, 0.5, size=widths[i + 1]) for i in range(4)],
    kinds,
)
pts = rng.uniform(-2, 2, size=(int(sys.argv[1]), 4))
best = float("inf")
for _ in range(int(sys.argv[2])):
    t0 = time.perf_counter()
    rep = g.sweep(net, list(pts), threads=1)
    best = min(best, time.perf_counter() - t0)
print(json.dumps({"backend": BACKEND, "seconds": best, "sigma1": rep.sigma1_series}))
"""


def _best(fn, repeat, number):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn()
        times.append(time.perf_counter() - t0)
    return min(times) / number


def kernel_table(repeat):
    rng = np.random.default_rng(1)
    z = rng.uniform(-4, 4, size=64)
    d = rng.uniform(size=16)
    w = rng.normal(size=(16, 16))
    acc = rng.normal(size=(16, 4))
    cases = {
        "gelu deriv (64)": lambda k: k.act_deriv(5, z),
        "silu value (64)": lambda k: k.act_value(4, z),
        "row_scale 16x16": lambda k: k.row_scale(d, w),
        "matmul 16x16 @ 16x4": lambda k: k.matmul(w, acc),
        "gram_rows 16x4": lambda k: k.gram_rows(acc),
    }
    for fn in cases.values():
        fn(nb)  # compile
    print(f"{'kernel':<22} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for name, fn in cases.items():
        t_np = _best(lambda: fn(npk), repeat, 2000) * 1e6
        t_nb = _best(lambda: fn(nb), repeat, 2000) * 1e6
        print(f"{name:<22} {t_np:10.2f} {t_nb:10.2f} {t_np / t_nb:8.2f}")


def sweep_table(points, repeat):
    results = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, GRAMIAN_LENS_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, "-c", SWEEP_SNIPPET, str(points), str(repeat)],
            check=True, capture_output=True, text=True, env=env,
        )
        results[backend] = json.loads(out.stdout)
    dev = np.max(np.abs(np.subtract(results["numpy"]["sigma1"], results["numba"]["sigma1"])))
    t_np, t_nb = results["numpy"]["seconds"], results["numba"]["seconds"]
    print(f"\nsweep of {points} points, 4-16-16-16-3 network (best of {repeat})")
    print(f"  numpy  {t_np:8.3f} s")
    print(f"  numba  {t_nb:8.3f} s   speedup {t_np / t_nb:.2f}x")
    print(f"  max |sigma1 numpy - sigma1 numba| = {dev:.2e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    kernel_table(args.repeat)
    sweep_table(args.points, args.repeat)


if __name__ == "__main__":
    main()
