from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from gramian_lens import ActivationKind, NetworkSpec, load_network

DATA = Path(str(resources.files("gramian_lens") / "data"))
GOLDEN_DIR = Path(__file__).parent / "golden"
KINDS = list(ActivationKind)

X_STAR_1 = np.array([0.5])
X_STAR_2 = np.array([0.3, -0.2])
X_DAGGER_2 = np.array([-2.0, -2.0])


def bundled(name: str) -> NetworkSpec:
    return load_network((DATA / f"{name}.json").read_text())


def random_network(rng, max_width=6, max_depth=4, kinds=None, output_kind=None) -> NetworkSpec:
    """Random network with widths <= max_width and 2..max_depth weight layers."""
    kinds = KINDS if kinds is None else kinds
    depth = int(rng.integers(2, max_depth + 1))
    widths = [int(w) for w in rng.integers(1, max_width + 1, size=depth + 1)]
    weights = [rng.uniform(-1, 1, size=(widths[i + 1], widths[i])) for i in range(depth)]
    biases = [rng.uniform(-1, 1, size=widths[i + 1]) for i in range(depth)]
    acts = [kinds[int(rng.integers(len(kinds)))] for _ in range(depth)]
    if output_kind is not None:
        acts[-1] = output_kind
    return NetworkSpec.from_arrays(weights, biases, acts)


@pytest.fixture(scope="session")
def net1():
    return bundled("swiglu_1221")


@pytest.fixture(scope="session")
def net2():
    return bundled("gelu_2332")


CRITERIA = {
    "1": "Example-1 golden reproduction",
    "2": "Example-2 golden reproduction",
    "3": "Saturation study at x_dagger",
    "4": "Jacobian finite-difference oracle suite",
    "5": "Hankel SVD/eigen equivalence suite",
    "6": "Gramian property suite",
    "7": "CLI integration",
}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key, title in CRITERIA.items():
        if key not in RESULTS:
            terminalreporter.write_line(f"[SKIP] {key}. {title}: not run")
            continue
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}. {title}: {detail}")
