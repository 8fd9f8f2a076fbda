import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from obstaclelab.errors import DomainError, PreconditionError
from obstaclelab.geometry import (CircleRule, Grid2, GridSampler, Paraboloid, Point2, ScalarField,
                                  bilinear_sample, circle_rule, distance_to_paraboloid,
                                  halfspace_poly, paraboloid_contains)

finite = st.floats(-50, 50, allow_nan=False)


def test_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        Point2(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Point2(0.0, float("inf"))


@pytest.mark.parametrize("x, want", [((1, 0), 0.5), ((0, 7), 0.0), ((2, 3), 2.0)])
def test_halfspace_poly(x, want):
    assert halfspace_poly(x) == want


@pytest.mark.parametrize("gamma, x, inside", [
    (1.0, (0, 0), True), (1.0, (0, -1), False), (2.0, (1.4, 1), True), (1.0, (1.01, 1), False)])
def test_paraboloid_membership(gamma, x, inside):
    assert paraboloid_contains(Paraboloid(gamma), x) is inside


def test_paraboloid_shift_moves_tip():
    P = Paraboloid(1.0, 0.5)
    assert paraboloid_contains(P, (-0.5, 0.0))
    assert not paraboloid_contains(P, (0.0, 0.0))


def test_paraboloid_requires_positive_gamma():
    with pytest.raises(PreconditionError):
        Paraboloid(0.0)


def test_grid_isotropy_is_enforced():
    with pytest.raises(PreconditionError):
        Grid2(0, 1, 0, 2, 11, 11)
    g = Grid2(0, 1, 0, 2, 11, 21)
    assert g.h == pytest.approx(0.1)


@given(st.floats(-5, 5), st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.1, 5),
       st.sampled_from([0.05, 0.1, 0.25]))
def test_from_spacing_places_axes_on_nodes(x0, wx, y0, wy, h):
    g = Grid2.from_spacing(x0, x0 + wx, y0, y0 + wy, h)
    # extents snap outward, up to a 1e-9 h allowance for rounding
    assert g.xmin <= x0 + 1e-9 * h and g.xmax >= x0 + wx - 1e-9 * h
    assert abs((g.x[1] - g.x[0]) - (g.y[1] - g.y[0])) < 1e-12
    if g.xmin < 0 < g.xmax:
        assert np.min(np.abs(g.x)) < 1e-12
    if g.ymin < 0 < g.ymax:
        assert np.min(np.abs(g.y)) < 1e-12


def test_row_major_layout_starts_at_lower_left():
    g = Grid2(0, 2, 0, 1, 3, 2)
    X, Y = g.mesh()
    f = ScalarField.from_array(g, X + 10 * Y)
    assert f.values[0] == 0 and f.values[1] == 1 and f.values[3] == 10


def test_field_rejects_nonfinite():
    g = Grid2(0, 1, 0, 1, 2, 2)
    with pytest.raises(ValueError):
        ScalarField(g, np.array([0, 1, np.nan, 2.0]))


def test_csv_round_trip_is_bit_exact(tmp_path, rng):
    g = Grid2.from_spacing(-1, 1, -0.5, 0.5, 0.25)
    f = ScalarField(g, rng.normal(size=g.size) * 10.0 ** rng.integers(-20, 20, g.size))
    f.to_csv(tmp_path / "f.csv")
    back = ScalarField.from_csv(tmp_path / "f.csv")
    assert back.grid == g
    assert np.array_equal(back.values, f.values)


def test_bilinear_reproduces_nodes_and_constants(rng):
    g = Grid2.from_spacing(-1, 1, -1, 1, 0.1)
    f = ScalarField(g, rng.normal(size=g.size))
    X, Y = g.mesh()
    assert np.array_equal(GridSampler(f)(X, Y), f.array)
    c = ScalarField(g, np.full(g.size, 3.25))
    assert bilinear_sample(c, (0.123, -0.456)) == pytest.approx(3.25, abs=1e-15)


def test_bilinear_exact_on_affine_fields(rng):
    g = Grid2.from_spacing(-2, 2, -1, 3, 0.2)
    X, Y = g.mesh()
    for _ in range(100):
        a, b, c = rng.normal(size=3) * 5
        f = ScalarField.from_array(g, a + b * X + c * Y)
        p = rng.uniform([g.xmin, g.ymin], [g.xmax, g.ymax], size=(20, 2))
        got = bilinear_sample(f, p)
        assert np.max(np.abs(got - (a + b * p[:, 0] + c * p[:, 1]))) <= 1e-12


def test_bilinear_outside_box():
    g = Grid2(0, 1, 0, 1, 3, 3)
    f = ScalarField(g, np.zeros(9))
    with pytest.raises(DomainError):
        bilinear_sample(f, (1.5, 0.5))


def test_grid_sampler_gradient_on_affine(rng):
    g = Grid2.from_spacing(-1, 1, -1, 1, 0.1)
    X, Y = g.mesh()
    s = GridSampler(ScalarField.from_array(g, 2 * X - 3 * Y))
    g1, g2 = s.grad(rng.uniform(-0.9, 0.9, 50), rng.uniform(-0.9, 0.9, 50))
    assert np.allclose(g1, 2) and np.allclose(g2, -3)


def test_circle_rule_basics():
    c = circle_rule(2.0, 64)
    assert isinstance(c, CircleRule)
    assert c.integrate(np.ones(64)) == pytest.approx(4 * math.pi, abs=1e-12)
    c1 = circle_rule(1.0, 64)
    assert c1.integrate(np.cos(c1.theta) ** 2) == pytest.approx(math.pi, abs=1e-12)
    assert abs(c1.integrate(np.cos(c1.theta))) <= 1e-12
    assert np.allclose(np.hypot(c.x1, c.x2), 2.0)


@given(st.floats(1e-3, 1e3), st.integers(8, 4096))
def test_circle_rule_weight_sum(r, n):
    c = circle_rule(r, n)
    assert abs(c.weights.sum() - 2 * math.pi * r) <= 1e-10 * 2 * math.pi * r


def test_circle_rule_preconditions():
    with pytest.raises(PreconditionError):
        circle_rule(0.0, 16)
    with pytest.raises(PreconditionError):
        circle_rule(1.0, 7)


@given(finite, finite)
def test_distance_zero_inside_positive_outside(a, b):
    P = Paraboloid(1.0)
    d = float(distance_to_paraboloid(P, np.array([a]), np.array([b]))[0])
    if paraboloid_contains(P, (a, b)):
        assert d == 0
    else:
        assert d > 0


def test_distance_known_values():
    P = Paraboloid(1.0)
    d = distance_to_paraboloid(P, np.array([0.0, 3.0]), np.array([-2.0, 0.0]))
    assert d[0] == pytest.approx(2.0, abs=1e-10)
    # nearest boundary point to (3, 0) solves 2t^3 + t - 3 = 0, i.e. t = 1
    assert d[1] == pytest.approx(math.hypot(2.0, 1.0), abs=1e-10)
