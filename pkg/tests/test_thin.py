import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from obstaclelab.errors import DomainError, PreconditionError
from obstaclelab.geometry import circle_rule
from obstaclelab.thin import (ThinKind, ThinProfile, ThinSampler, VhatSampler, thin_homogeneous,
                              vhat32, vhat32_grad)

coord = st.floats(-10, 10, allow_nan=False)
kinds = st.sampled_from(list(ThinKind))


def test_profile_degrees():
    assert ThinProfile(ThinKind.EVEN_POLYNOMIAL, 2).kappa == 4
    assert ThinProfile("re_halfinteger_2m_minus_half", 1).kappa == 1.5
    assert ThinProfile(ThinKind.IM_ODD, 1).kappa == 3
    with pytest.raises(PreconditionError):
        ThinProfile(ThinKind.IM_ODD, 0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_halfinteger_vanishes_on_slit(m):
    p = ThinProfile(ThinKind.RE_HALFINTEGER, m)
    xs = -np.linspace(0.1, 5, 20)
    assert np.all(thin_homogeneous(p, np.column_stack([xs, 0 * xs])) == 0)


@given(kinds, st.integers(1, 3), coord, coord, st.floats(0.01, 4))
def test_homogeneity(kind, m, a, b, lam):
    p = ThinProfile(kind, m)
    v = thin_homogeneous(p, (a, b))
    lv = thin_homogeneous(p, (lam * a, lam * b))
    assert abs(lv - lam ** p.kappa * v) <= 1e-12 * max(1.0, abs(lv), (lam * math.hypot(a, b)) ** p.kappa)


@pytest.mark.parametrize("kind", list(ThinKind))
def test_laplacian_decays_quadratically(kind):
    p = ThinProfile(kind, 1)
    x0 = np.array([0.7, 0.6])
    res = []
    for h in [0.02, 0.01, 0.005]:
        f = lambda a, b: thin_homogeneous(p, np.stack([a, b], -1))
        lap = (f(x0[0] + h, x0[1]) + f(x0[0] - h, x0[1]) + f(x0[0], x0[1] + h)
               + f(x0[0], x0[1] - h) - 4 * f(*x0)) / h ** 2
        res.append(abs(lap))
    assert res[2] < 1e-6 or (res[0] / res[1] > 3.5 and res[1] / res[2] > 3.5)


@pytest.mark.parametrize("kind", list(ThinKind))
def test_thin_gradients(kind, rng):
    s = ThinSampler(ThinProfile(kind, 2, 0.7))
    a, b = rng.uniform(-3, 3, (2, 100))
    g1, g2 = s.grad(a, b)
    h = 1e-6
    assert np.allclose(g1, (s(a + h, b) - s(a - h, b)) / (2 * h), atol=1e-6, rtol=1e-6)
    assert np.allclose(g2, (s(a, b + h) - s(a, b - h)) / (2 * h), atol=1e-6, rtol=1e-6)


# -- the 3/2 profile --------------------------------------------------------------

def test_vhat_zero_on_slit():
    t = np.linspace(0, 10, 50)
    assert np.all(vhat32(np.column_stack([0 * t, t])) == 0)


def test_vhat_unit_norm():
    c = circle_rule(1.0, 4096)
    assert c.integrate(VhatSampler()(c.x1, c.x2) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_vhat_value_below_tip():
    assert vhat32((0, -1)) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-15)
    # oracle for the normalisation: int cos^2(3 phi / 2) over a full turn is pi
    c = circle_rule(1.0, 512)
    assert c.integrate(np.cos(1.5 * c.theta) ** 2) == pytest.approx(math.pi, abs=1e-12)


@given(coord, coord)
def test_vhat_even_in_x1(a, b):
    assert vhat32((a, b)) == vhat32((-a, b))


@given(coord, st.floats(0, 10))
def test_vhat_nonpositive_in_upper_half(a, b):
    assert vhat32((a, b)) <= 0


@given(coord, coord, st.floats(0.01, 4))
def test_vhat_homogeneity(a, b, lam):
    v = vhat32((a, b))
    assert abs(vhat32((lam * a, lam * b)) - lam ** 1.5 * v) <= 1e-12 * max(1, (lam * math.hypot(a, b)) ** 1.5)


def test_vhat_gradient_matches_differences(rng):
    p = rng.uniform(-3, 3, (100, 2))
    p = p[np.abs(p[:, 0]) > 1e-3]
    g = vhat32_grad(p)
    h = 1e-6
    e1, e2 = np.array([h, 0]), np.array([0, h])
    fd = np.stack([(vhat32(p + e1) - vhat32(p - e1)) / (2 * h),
                   (vhat32(p + e2) - vhat32(p - e2)) / (2 * h)], -1)
    assert np.max(np.abs(g - fd)) <= 1e-8


def test_vhat_gradient_homogeneity(rng):
    p = rng.uniform(-3, 3, (50, 2))
    for lam in [0.3, 2.0, 7.0]:
        assert np.allclose(vhat32_grad(lam * p), lam ** 0.5 * vhat32_grad(p), rtol=0, atol=1e-12 * lam ** 0.5 * 10)


def test_vhat_decreasing_in_x2(rng):
    p = rng.uniform(-5, 5, (1000, 2))
    p = p[p[:, 0] != 0]
    assert np.all(vhat32_grad(p)[:, 1] <= 0)


def test_vhat_gradient_undefined_on_slit():
    with pytest.raises(DomainError):
        vhat32_grad((0.0, 1.0))
    # continuous across the lower axis
    assert np.allclose(vhat32_grad((0.0, -1.0)), [0.0, -1.5 / math.sqrt(math.pi)])
