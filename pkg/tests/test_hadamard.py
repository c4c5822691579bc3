import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import hadamard

from lenscs.errors import InvalidArgumentError
from lenscs.hadamard import fwht, hadamard_entries, next_power_of_two


def test_small_examples():
    np.testing.assert_array_equal(fwht([1, 1]), [2, 0])
    np.testing.assert_array_equal(fwht([1, 0, 0, 0]), [1, 1, 1, 1])


@pytest.mark.parametrize("n", [1, 2, 4, 8, 64, 256])
def test_matches_scipy_sylvester(n, rng):
    v = rng.standard_normal(n)
    np.testing.assert_allclose(fwht(v), hadamard(n) @ v, atol=1e-12 * n)


def test_involution_up_to_scale(rng):
    v = rng.standard_normal(1024)
    out = fwht(fwht(v))
    assert np.linalg.norm(out - 1024 * v) <= 1e-12 * np.linalg.norm(1024 * v)


def test_batched_last_axis(rng):
    v = rng.standard_normal((3, 16))
    np.testing.assert_allclose(fwht(v), v @ hadamard(16).T, atol=1e-12)


def test_input_not_modified(rng):
    v = rng.standard_normal(8)
    before = v.copy()
    fwht(v)
    np.testing.assert_array_equal(v, before)


@pytest.mark.parametrize("n", [0, 3, 6, 100])
def test_rejects_non_power_of_two(n):
    with pytest.raises(InvalidArgumentError):
        fwht(np.ones(n))


def test_entries_match_matrix():
    h = hadamard(32)
    r, c = np.meshgrid(np.arange(32), np.arange(32), indexing="ij")
    np.testing.assert_array_equal(hadamard_entries(r, c), h)


@pytest.mark.parametrize("n, expected", [(1, 1), (2, 2), (3, 4), (65534, 65536), (65536, 65536)])
def test_next_power_of_two(n, expected):
    assert next_power_of_two(n) == expected


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 9), st.integers(0, 2**32 - 1))
def test_linearity(log_n, seed):
    r = np.random.default_rng(seed)
    n = 2**log_n
    a, b = r.standard_normal(2)
    x, z = r.standard_normal((2, n))
    lhs = fwht(a * x + b * z)
    rhs = a * fwht(x) + b * fwht(z)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * n)
