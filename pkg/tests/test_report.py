import json

import numpy as np
import pytest

from gramian_lens import (
    AnalysisOptions,
    ModelError,
    NetworkSpec,
    ShapeError,
    analyze_point,
    compare_points,
    dumps,
    forward,
    hankel_modes,
    linearize,
    sweep,
)
from gramian_lens.gramians import mode_coordinates
from gramian_lens.report import (
    OperatingPointReport,
    assemble_report,
    grid_points,
    kendall_distance,
    resolve_threads,
    safe_ratio,
)

from conftest import X_DAGGER_2, X_STAR_1, X_STAR_2, random_network

# Example-1 sigma_1 at x = -1, 0, 1 from a standalone oracle script
SIGMA1_GRID_1 = [0.0882181051187219, 0.16411238772507075, 0.4788053216109641]


def test_analyze_example_1(net1):
    rep = analyze_point(net1, X_STAR_1)
    assert rep.hankel_values[0] == pytest.approx(0.288, abs=1e-3)
    np.testing.assert_allclose(rep.importance, [0.191, 0.020, 0.075, 0.002], atol=1e-3)
    assert rep.wc is not None and rep.wc.shape == (4, 4)
    assert rep.normalizations[0]["declared"] == "swiglu"


def test_analyze_example_2_both_points(net2):
    rep = analyze_point(net2, X_STAR_2)
    assert rep.hankel_values[0] == pytest.approx(0.198, abs=1e-3)
    assert rep.hankel_values[1] == pytest.approx(3.08e-3, abs=1e-5)
    assert rep.importance_argmax == 1


def test_pipeline_matches_manual_composition(net2):
    opts = AnalysisOptions(alpha=2.0)
    tr = forward(net2, X_STAR_2)
    lin = linearize(net2, tr)
    ma = hankel_modes(lin.B, lin.C, rank_tol=opts.rank_tol, alpha=opts.alpha)
    manual = assemble_report(net2, tr, ma, opts)
    assert dumps(manual.to_dict()) == dumps(analyze_point(net2, X_STAR_2, opts).to_dict())
    np.testing.assert_array_equal(manual.mode_coordinates, mode_coordinates(ma, tr.h_stacked))


def test_full_gramians_size_gate():
    rng = np.random.default_rng(0)
    big = NetworkSpec.from_arrays(
        [rng.normal(size=(40, 2)) * 0.3, rng.normal(size=(30, 40)) * 0.3, rng.normal(size=(1, 30))],
        [np.zeros(40), np.zeros(30), np.zeros(1)],
        ["tanh", "tanh", "identity"],
    )
    assert analyze_point(big, [0.1, 0.2]).wc is None
    assert analyze_point(big, [0.1, 0.2], AnalysisOptions(include_full_gramians=True)).wc.shape == (70, 70)
    assert analyze_point(big, [0.1, 0.2]).to_dict().get("wc") is None


def test_options_validation():
    with pytest.raises(ValueError):
        AnalysisOptions(alpha=0.5)
    with pytest.raises(ValueError):
        AnalysisOptions(rank_tol=-1)


def test_report_round_trip_is_exact(net2):
    rep = analyze_point(net2, X_STAR_2)
    text = dumps(rep.to_dict())
    back = OperatingPointReport.from_dict(json.loads(text))
    assert dumps(back.to_dict()) == text
    np.testing.assert_array_equal(back.modes, rep.modes)


def test_report_fields(net1):
    doc = json.loads(dumps(analyze_point(net1, X_STAR_1).to_dict()))
    for key in ("network_hash", "point", "output", "diag_wc", "diag_wo", "hankel_values", "modes",
                "importance", "alpha", "rank_tol", "wc", "wo"):
        assert key in doc


def test_floats_use_17_significant_digits():
    assert dumps({"a": 0.1}) == '{\n  "a": 0.10000000000000001\n}\n'
    assert dumps([float("inf")]) == '["inf"]\n'
    with pytest.raises(ValueError):
        dumps([float("nan")])


def test_sweep_grid_example_1(net1):
    res = sweep(net1, grid=[(-1.0, 1.0, 3)])
    assert len(res.reports) == 3
    np.testing.assert_allclose(res.sigma1_series, SIGMA1_GRID_1, rtol=1e-12)


def test_sweep_single_point_equals_analyze(net2):
    res = sweep(net2, [X_STAR_2])
    assert dumps(res.reports[0].to_dict()) == dumps(analyze_point(net2, X_STAR_2).to_dict())


def test_sweep_two_reference_points(net2):
    res = sweep(net2, [X_STAR_2, X_DAGGER_2])
    assert res.sigma1_series[0] == pytest.approx(0.198, abs=1e-3)
    assert res.imp_argmax_series[0] == 1


def test_sweep_errors(net2):
    with pytest.raises(ValueError):
        sweep(net2, [])
    with pytest.raises(ValueError):
        sweep(net2)
    with pytest.raises(ShapeError):
        sweep(net2, grid=[(0, 1, 2)])


def test_grid_order_last_dimension_fastest():
    pts = grid_points([(0.0, 1.0, 2), (10.0, 20.0, 3)])
    np.testing.assert_array_equal(pts[:3, 0], 0.0)
    np.testing.assert_array_equal(pts[:3, 1], [10.0, 15.0, 20.0])
    assert grid_points([(2.0, 5.0, 1)]).tolist() == [[2.0]]


@pytest.mark.parametrize("threads", [1, 2, 8])
def test_sweep_is_thread_count_invariant(net2, threads):
    ref = dumps(sweep(net2, grid=[(-2, 2, 5), (-2, 2, 5)], threads=1).to_dict())
    assert dumps(sweep(net2, grid=[(-2, 2, 5), (-2, 2, 5)], threads=threads).to_dict()) == ref


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("GRAMIAN_LENS_THREADS", "3")
    assert resolve_threads() == 3
    monkeypatch.setenv("GRAMIAN_LENS_THREADS", "0")
    assert resolve_threads() >= 1
    assert resolve_threads(5) == 5
    monkeypatch.setenv("GRAMIAN_LENS_THREADS", "many")
    with pytest.raises(ValueError):
        resolve_threads()


def test_safe_ratio():
    assert safe_ratio(0.0, 0.0) == 1.0
    assert safe_ratio(1.0, 0.0) == float("inf")
    assert safe_ratio(1.0, 4.0) == 0.25


def test_kendall_distance():
    assert kendall_distance(np.array([0, 1, 2]), np.array([0, 1, 2])) == 0
    assert kendall_distance(np.array([0, 1, 2]), np.array([2, 1, 0])) == 3
    assert kendall_distance(np.array([0, 1, 2, 3]), np.array([1, 0, 2, 3])) == 1


def test_compare_with_self(net2):
    rep = analyze_point(net2, X_STAR_2)
    cmp = compare_points(rep, rep)
    assert cmp.sigma_ratio == 1.0
    assert cmp.mode_overlap == pytest.approx(1.0, abs=1e-12)
    # zero observability diagonals give 0/0 -> 1
    np.testing.assert_array_equal(cmp.wc_contraction, 1.0)
    np.testing.assert_array_equal(cmp.wo_contraction, 1.0)
    assert cmp.importance_rank_shift == 0


def test_compare_saturated_point_contracts_controllability(net2):
    a = analyze_point(net2, X_STAR_2)
    b = analyze_point(net2, X_DAGGER_2)
    cmp = compare_points(a, b)
    assert np.all(cmp.wc_contraction < 1)
    assert 0 <= cmp.mode_overlap <= 1 + 1e-12
    assert cmp.sigma_ratio == pytest.approx(b.sigma1 / a.sigma1, rel=1e-15)
    json.loads(dumps(cmp.to_dict()))


def test_compare_mismatched_networks(net1, net2):
    with pytest.raises(ShapeError):
        compare_points(analyze_point(net1, X_STAR_1), analyze_point(net2, X_STAR_2))
    rng = np.random.default_rng(1)
    other = random_network(rng)
    while other.n_h != net2.n_h:
        other = random_network(rng)
    with pytest.raises(ModelError):
        compare_points(analyze_point(other, np.zeros(other.n_x)), analyze_point(net2, X_STAR_2))
