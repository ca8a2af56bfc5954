import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quadvar.windows import (
    MOLLIFIER_MASS,
    PlateauWindow,
    bump_transform,
    mollifier_derivative,
    profile_transform,
    smooth_step,
)

# integral of exp(-1/(1 - s^2)) over [-1, 1], mpmath quad at 30 digits
MASS = 0.443993816168079437823048921171

# integral_{-1}^{1} exp(-1/(1-s^2)) cos(2 pi kappa s) ds, mpmath quad at 30 digits
BUMP = {
    0.1: 0.430288488943408986287476533393,
    1.0: -0.0428575388855629280891940245872,
    10.0: -3.63607776245851449240205249488e-05,
    50.0: 6.2739559220625276925594189556e-10,
    200.0: 2.13812526721305850101761029383e-18,
}


def test_mass():
    assert MOLLIFIER_MASS == pytest.approx(MASS, rel=1e-14)


@pytest.mark.parametrize("kappa", sorted(BUMP))
def test_bump_transform_against_frozen_quadrature(kappa):
    # error measured on the decay scale of the transform
    scale = np.exp(-np.sqrt(2 * np.pi * kappa))
    assert abs(float(bump_transform(kappa)) - BUMP[kappa]) < 1e-13 * scale


def test_bump_transform_live_oracle():
    f = lambda s: mpmath.exp(-1 / (1 - s * s)) * mpmath.cos(2 * mpmath.pi * 3.7 * s)  # noqa: E731
    ref = float(mpmath.quad(f, mpmath.linspace(-1, 1, 41)))
    assert abs(float(bump_transform(3.7)) - ref) < 1e-14


def test_bump_transform_even_and_continuous_across_routes():
    k = np.array([0.499999, 0.5, 0.500001])
    vals = bump_transform(k)
    # a jump between the two routes would show up in the second difference
    assert abs(vals[0] - 2 * vals[1] + vals[2]) < 1e-12
    assert np.allclose(bump_transform(-k), vals, rtol=0, atol=0)


@given(st.floats(-1.5, 1.5))
def test_smooth_step_shape(t):
    h = float(smooth_step(t))
    assert 0.0 <= h <= 1.0
    assert h + float(smooth_step(-t)) == pytest.approx(1.0, abs=1e-14)


def test_smooth_step_monotone_and_endpoints():
    t = np.linspace(-1, 1, 2001)
    h = smooth_step(t)
    assert h[0] == 0.0 and h[-1] == 1.0 and np.all(np.diff(h) >= 0)


@pytest.mark.parametrize("j", [1, 2, 5, 8])
def test_mollifier_derivative_finite_difference(j):
    t = np.linspace(-0.8, 0.8, 9)
    step = 1e-5
    fd = (mollifier_derivative(t + step, j - 1) - mollifier_derivative(t - step, j - 1)) / (2 * step)
    exact = mollifier_derivative(t, j)
    assert np.allclose(fd, exact, rtol=1e-5, atol=1e-6 * np.max(np.abs(exact)))


def test_plateau_values():
    g = PlateauWindow(2.0, 13.0)
    assert g.center == 7.5 and g.width == pytest.approx(5.0)
    assert np.all(g(np.array([2.5 + 0.5, 7.5, 12.0])) == 1.0)
    assert np.all(g(np.array([1.0, 2.0, 13.0, 20.0])) == 0.0)
    inside = g(np.linspace(2.0, 2.5, 50))
    assert np.all((0 <= inside) & (inside <= 1))


def test_plateau_validation():
    with pytest.raises(ValueError):
        PlateauWindow(3.0, 3.0)
    with pytest.raises(ValueError):
        PlateauWindow(0.0, 1.0, flat=1.1)
    with pytest.raises(ValueError):
        PlateauWindow(0.0, 1.0).derivative(0.5, 41)


def test_family_and_scaled():
    g = PlateauWindow.family(16.0, 5.0)
    assert (g.lo, g.hi) == pytest.approx((16 - 5.5, 16 + 5.5))
    assert g(np.array([16 - 5.0, 16 + 5.0])).tolist() == [1.0, 1.0]
    s = PlateauWindow(1.0, 2.0).scaled(3.0)
    assert (s.lo, s.hi) == (3.0, 6.0)


@pytest.mark.parametrize("flat", [0.0, 0.4, 1.0])
@pytest.mark.parametrize("j", [1, 3])
def test_plateau_derivative_finite_difference(flat, j):
    g = PlateauWindow(-1.0, 4.0, flat=flat)
    x = np.linspace(-0.9, 3.9, 23)
    step = 1e-5
    fd = (g.derivative(x + step, j - 1) - g.derivative(x - step, j - 1)) / (2 * step)
    assert np.allclose(fd, g.derivative(x, j), rtol=1e-5, atol=1e-6 * np.max(np.abs(g.derivative(x, j))))


@pytest.mark.parametrize("flat", [0.0, 1.0])
def test_profile_transform_matches_quadrature(flat):
    u = PlateauWindow(-1.1, 1.1, flat=flat)
    for s in [0.0, 0.3, 2.0, 7.5]:
        ref = mpmath.quad(lambda z: float(u(float(z))) * mpmath.cos(2 * mpmath.pi * s * z),
                          mpmath.linspace(-1.1, 1.1, 23))
        assert float(profile_transform(s, flat)) == pytest.approx(float(ref), abs=1e-12)
