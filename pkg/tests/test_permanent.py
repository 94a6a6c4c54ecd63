import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonkit import SizeError, expanded_submatrix, permanent, permanent_naive
from bosonkit.errors import ShapeError
from bosonkit.permanent import SIZE_CAP_ENV, size_cap


def random_complex(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def test_empty_matrix_has_unit_permanent():
    assert permanent(np.zeros((0, 0))) == 1


def test_small_closed_forms():
    assert permanent([[3.0]]) == 3
    assert permanent([[1, 2], [3, 4]]) == 1 * 4 + 2 * 3
    assert permanent(np.ones((4, 4))) == pytest.approx(math.factorial(4))


def test_identity_and_permutation_matrices():
    for d in range(1, 7):
        assert permanent(np.eye(d)) == pytest.approx(1)
        perm = np.eye(d)[np.random.default_rng(d).permutation(d)]
        assert permanent(perm) == pytest.approx(1)


def test_all_ones_counts_permutations():
    for d in range(1, 9):
        assert permanent(np.ones((d, d))).real == pytest.approx(math.factorial(d), rel=1e-12)


def test_matches_naive_sum(rng):
    for d in range(1, 8):
        a = random_complex(rng, d)
        assert abs(permanent(a) - permanent_naive(a)) <= 1e-10 * max(1.0, abs(permanent_naive(a)))


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
def test_invariant_under_row_and_column_permutations(d, seed):
    rng = np.random.default_rng(seed)
    a = random_complex(rng, d)
    p, q = rng.permutation(d), rng.permutation(d)
    ref = permanent(a)
    assert abs(permanent(a[p][:, q]) - ref) <= 1e-9 * max(1.0, abs(ref))
    assert abs(permanent(a.T) - ref) <= 1e-9 * max(1.0, abs(ref))


@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 5), seed=st.integers(0, 2**32 - 1), row=st.integers(0, 4))
def test_linear_in_each_row(d, seed, row):
    rng = np.random.default_rng(seed)
    a, b = random_complex(rng, d), random_complex(rng, d)
    row %= d
    c = 0.7 - 1.3j
    mixed = a.copy()
    mixed[row] = a[row] + c * b[row]
    other = a.copy()
    other[row] = b[row]
    lhs = permanent(mixed)
    rhs = permanent(a) + c * permanent(other)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_rejects_non_square():
    with pytest.raises(ShapeError):
        permanent(np.zeros((2, 3)))
    with pytest.raises(ShapeError):
        permanent(np.zeros(3))


def test_size_cap_default_and_override(monkeypatch):
    monkeypatch.delenv(SIZE_CAP_ENV, raising=False)
    assert size_cap() == 20
    monkeypatch.setenv(SIZE_CAP_ENV, "3")
    assert size_cap() == 3
    with pytest.raises(SizeError, match="3"):
        permanent(np.ones((4, 4)))
    assert permanent(np.ones((4, 4)), cap=4) == pytest.approx(24)
    monkeypatch.setenv(SIZE_CAP_ENV, "lots")
    with pytest.raises(SizeError):
        size_cap()


def test_explicit_cap_rejects_large():
    with pytest.raises(SizeError):
        permanent(np.ones((6, 6)), cap=5)


def test_expanded_submatrix_repeats_rows_and_columns():
    u = np.arange(9).reshape(3, 3)
    sub = expanded_submatrix(u, (2, 0, 1), (1, 1, 1))
    assert sub.shape == (3, 3)
    np.testing.assert_array_equal(sub, u[[0, 0, 2]][:, [0, 1, 2]])
    sub = expanded_submatrix(u, (0, 3, 0), (0, 0, 3))
    np.testing.assert_array_equal(sub, np.full((3, 3), u[1, 2]))


def test_repeated_rows_scale_by_factorial():
    # permanent of a rank-one block is d! times the product of entries
    v = np.array([1.0 + 1j, 2.0, -0.5j])
    block = np.outer(v, np.ones(3))
    expected = math.factorial(3) * np.prod(v)
    assert permanent(block) == pytest.approx(expected)
    assert permanent_naive(block) == pytest.approx(expected)


def test_naive_matches_definition():
    a = np.arange(1, 10, dtype=float).reshape(3, 3)
    direct = sum(
        math.prod(a[i, s[i]] for i in range(3)) for s in itertools.permutations(range(3))
    )
    assert permanent_naive(a) == pytest.approx(direct)
