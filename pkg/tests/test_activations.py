import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gramian_lens import ActivationKind, DomainError, act_deriv, act_value
from gramian_lens.activations import act_deriv_array, act_value_array

from conftest import KINDS


def _sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def _phi_cdf(z):
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def test_identity_and_relu_values():
    assert act_value("identity", 3.7) == 3.7
    assert act_value("relu", -1.0) == 0.0
    assert act_value("relu", 2.5) == 2.5


def test_silu_value_matches_oracle():
    expected = 0.5 * _sigmoid(0.5)
    assert expected == pytest.approx(0.3112297, abs=1e-7)
    assert act_value("silu", 0.5) == pytest.approx(expected, rel=1e-15)


def test_gelu_value_is_exact_erf_form():
    expected = 0.4 * _phi_cdf(0.4)
    assert _phi_cdf(0.4) == pytest.approx(0.655422, abs=1e-6)
    assert expected == pytest.approx(0.2621687, abs=1e-7)
    assert act_value("gelu", 0.4) == pytest.approx(expected, rel=1e-14)


def test_derivative_examples():
    assert act_deriv("identity", -5.0) == 1.0
    assert act_deriv("relu", 0.0) == 0.0
    assert act_deriv("relu", 1e-12) == 1.0

    s = _sigmoid(0.5)
    assert act_deriv("silu", 0.5) == pytest.approx(s * (1 + 0.5 * (1 - s)), rel=1e-14)
    assert act_deriv("silu", 0.5) == pytest.approx(0.73996, abs=1e-5)

    pdf = math.exp(-0.08) / math.sqrt(2 * math.pi)
    assert act_deriv("gelu", 0.4) == pytest.approx(_phi_cdf(0.4) + 0.4 * pdf, rel=1e-14)
    assert act_deriv("gelu", 0.4) == pytest.approx(0.8027298, abs=1e-7)
    # first entries of the worked-example input Jacobians
    assert act_deriv("silu", 0.5) * 1.0 == pytest.approx(0.740, abs=5e-4)
    assert act_deriv("gelu", 0.4) * 0.8 == pytest.approx(0.642, abs=5e-4)


@pytest.mark.parametrize("tag", ["swiglu", "SwiGLU", " silu "])
def test_swiglu_alias(tag):
    assert ActivationKind.parse(tag) is ActivationKind.SILU


def test_unknown_tag():
    with pytest.raises(ValueError, match="unknown activation"):
        ActivationKind.parse("softplus")


@pytest.mark.parametrize("z", [math.nan, math.inf, -math.inf])
@pytest.mark.parametrize("kind", KINDS)
def test_non_finite_input_is_a_domain_error(kind, z):
    with pytest.raises(DomainError):
        act_value(kind, z)
    with pytest.raises(DomainError):
        act_deriv(kind, z)
    with pytest.raises(DomainError):
        act_value_array(kind, np.array([0.0, z]))


@pytest.mark.parametrize("kind", KINDS)
def test_derivative_matches_central_difference(kind):
    rng = np.random.default_rng(1234 + kind.code)
    z = rng.uniform(-6, 6, size=1000)
    if kind is ActivationKind.RELU:
        z = z[np.abs(z) >= 1e-4]
    step = 1e-5
    fd = (act_value_array(kind, z + step) - act_value_array(kind, z - step)) / (2 * step)
    d = act_deriv_array(kind, z)
    assert np.all(np.abs(d - fd) <= 1e-6 * np.maximum(1.0, np.abs(d)))


@pytest.mark.parametrize("kind", [ActivationKind.SILU, ActivationKind.GELU])
def test_smooth_gates_have_bounded_slope(kind):
    z = np.linspace(-6, 6, 5001)
    assert np.max(np.abs(act_deriv_array(kind, z))) <= 1.2


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-700, max_value=700, allow_nan=False))
def test_squashing_ranges(z):
    s = act_value("sigmoid", z)
    t = act_value("tanh", z)
    assert 0.0 <= s <= 1.0
    assert -1.0 <= t <= 1.0
    if abs(z) < 30:
        assert 0.0 < s < 1.0
    if abs(z) < 15:
        assert -1.0 < t < 1.0


def test_extreme_inputs_stay_finite():
    z = np.array([-1e4, -50.0, 50.0, 1e4])
    for kind in KINDS:
        assert np.all(np.isfinite(act_value_array(kind, z)))
        assert np.all(np.isfinite(act_deriv_array(kind, z)))
