"""The numba and numpy kernel backends agree."""

import numpy as np
import pytest

from gramian_lens import _kernels_numba as nb
from gramian_lens import _kernels_numpy as npk

CODES = range(6)


@pytest.mark.parametrize("code", CODES)
def test_activation_kernels_agree(code):
    z = np.concatenate([np.linspace(-40, 40, 2001), [0.0, -0.0, 1e-300, -1e-300]])
    np.testing.assert_allclose(nb.act_value(code, z), npk.act_value(code, z), rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(nb.act_deriv(code, z), npk.act_deriv(code, z), rtol=1e-13, atol=1e-15)


def test_unknown_code():
    for mod in (nb, npk):
        with pytest.raises(ValueError):
            mod.act_value(17, np.zeros(2))


def test_linear_algebra_kernels_agree():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n, k, m = (int(v) for v in rng.integers(1, 9, size=3))
        a = rng.normal(size=(n, k))
        b = rng.normal(size=(k, m))
        d = rng.normal(size=n)
        np.testing.assert_allclose(nb.matmul(a, b), npk.matmul(a, b), rtol=1e-12, atol=1e-14)
        np.testing.assert_array_equal(nb.row_scale(d, a), npk.row_scale(d, a))
        np.testing.assert_allclose(nb.gram_rows(a), npk.gram_rows(a), rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(nb.gram_cols(a), npk.gram_cols(a), rtol=1e-12, atol=1e-14)
        g = nb.gram_rows(a)
        assert np.array_equal(g, g.T)


def test_kernels_accept_empty_and_readonly():
    w = np.ones((2, 3))
    w.setflags(write=False)
    np.testing.assert_array_equal(nb.row_scale(np.array([1.0, 2.0]), w), [[1, 1, 1], [2, 2, 2]])
    assert nb.matmul(np.zeros((0, 2)), np.zeros((2, 3))).shape == (0, 3)
    assert nb.gram_rows(np.zeros((0, 2))).shape == (0, 0)
