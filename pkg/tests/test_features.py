import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fpetpf.errors import InvalidInput
from fpetpf.euler import FlowState, GasConstants, Grid
from fpetpf.features import density_features, extract, extract_1d, extract_2d, extract_weighted


def test_constant_1d():
    assert np.array_equal(extract_1d([2.0, 2.0, 2.0, 2.0]).values, np.zeros(4))


def test_step_1d():
    assert np.allclose(extract_1d([1, 1, 0.125, 0.125]).values, [0, 0, -0.875, 0])


def test_ramp_1d():
    assert np.array_equal(extract_1d([0.0, 1.0, 2.0, 3.0]).values, [0, 1, 1, 1])


def test_short_field_rejected():
    with pytest.raises(InvalidInput):
        extract_1d([1.0])
    with pytest.raises(InvalidInput):
        extract_2d(np.ones((1, 4)))


def test_constant_2d():
    assert not extract_2d(np.full((5, 6), 3.0)).values.any()


def test_separable_field_has_zero_interior():
    f = np.array([0.0, 1.0, 4.0, 9.0, 2.0])
    g = np.array([3.0, -1.0, 0.5, 7.0])
    assert np.allclose(extract_2d(f[:, None] + g[None, :]).values, 0.0)


def test_quadrant_indicator():
    field = np.zeros((4, 4))
    field[2:, 2:] = 1.0  # indices >= 3 in one-based counting
    expected = np.zeros((4, 4))
    expected[2, 2] = 1.0
    assert np.array_equal(extract_2d(field).values, expected)


def test_padding_is_zero():
    rng = np.random.default_rng(3)
    z = extract_2d(rng.normal(size=(6, 7))).values
    assert not z[0].any() and not z[:, 0].any()
    assert extract_1d(rng.normal(size=9)).values[0] == 0.0


def test_unit_step_gives_one_entry():
    f = np.zeros(20)
    f[7:] = 1.0
    z = extract_1d(f).values
    assert np.flatnonzero(z).tolist() == [7]


def test_weighted_matches_single():
    rng = np.random.default_rng(0)
    f = rng.normal(size=12)
    assert np.array_equal(extract_weighted([(f, 1.0)]).values, extract_1d(f).values)


def test_weighted_density_only():
    rng = np.random.default_rng(1)
    rho, p = rng.normal(size=(2, 10))
    out = extract_weighted([(rho, 1.0, "rho"), (p, 0.0, "p")])
    assert np.array_equal(out.values, extract_1d(rho).values)
    assert out.provenance == (("rho", 1.0), ("p", 0.0))


def test_weighted_halves():
    rng = np.random.default_rng(2)
    f = rng.normal(size=(6, 5))
    two = extract_weighted([(f, 0.5), (f, 0.5)]).values
    assert np.allclose(two, extract_2d(f).values, rtol=0, atol=1e-15)


def test_weighted_errors():
    with pytest.raises(InvalidInput):
        extract_weighted([(np.ones(4), 1.0), (np.ones(5), 1.0)])
    with pytest.raises(InvalidInput):
        extract_weighted([(np.ones(4), 0.0)])
    with pytest.raises(InvalidInput):
        extract_weighted([])


def test_extract_rejects_3d():
    with pytest.raises(InvalidInput):
        extract(np.ones((3, 3, 3)))


def test_density_features_of_state():
    grid = Grid.uniform_1d(9)
    s = FlowState.from_primitive(grid, np.linspace(1, 2, 9), 0.0, 1.0, GasConstants())
    z = density_features(s)
    assert z.provenance == (("rho", 1.0),)
    assert np.allclose(z.values[1:], 0.125)


@settings(max_examples=50, deadline=None)
@given(arrays(float, 12, elements=st.floats(-10, 10)), arrays(float, 12, elements=st.floats(-10, 10)),
       st.floats(-3, 3), st.floats(-3, 3))
def test_linearity_1d(f, g, a, b):
    lhs = extract_1d(a * f + b * g).values
    rhs = a * extract_1d(f).values + b * extract_1d(g).values
    assert np.allclose(lhs, rhs, atol=1e-9)
