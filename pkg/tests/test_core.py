import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from drsub.core import DimensionError, as_point, harmonic_number, join, meet, norms

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_join_meet_small():
    x, y = np.array([0.2, 0.9]), np.array([0.5, 0.1])
    assert np.array_equal(join(x, y), [0.5, 0.9])
    assert np.array_equal(meet(x, y), [0.2, 0.1])


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        join(np.zeros(2), np.zeros(3))
    with pytest.raises(DimensionError):
        as_point(np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        as_point([1.0, 2.0], n=3)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        as_point([1.0, np.nan])


def test_norms():
    e, i = norms([3.0, -4.0])
    assert e == 5.0 and i == 4.0
    assert norms(np.zeros(0)) == (0.0, 0.0)


def test_harmonic_number():
    assert harmonic_number(1) == 1.0
    assert harmonic_number(3) == pytest.approx(11 / 6, abs=1e-15)
    with pytest.raises(ValueError):
        harmonic_number(0)


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(arrays(np.float64, n, elements=finite),
                                                     arrays(np.float64, n, elements=finite))))
def test_join_plus_meet_is_sum(pair):
    x, y = pair
    assert np.array_equal(join(x, y) + meet(x, y), x + y)


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(*[arrays(np.float64, n, elements=st.floats(0, 10))] * 3)))
def test_lattice_identity(triple):
    x, y, z = triple
    zs = join(x, y) - x
    lhs = join(x, y) - zs
    rhs = join(x + z, y) - join(z, zs)
    assert np.max(np.abs(lhs - rhs), initial=0.0) <= 1e-12 * max(1.0, np.max(np.abs(x + y + z)))
