import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from fdprofiles.errors import PositivityLoss, StepUnderflow
from fdprofiles.rk import CubicHermite, QuinticHermite, integrate_2d


def test_exponential_growth():
    path = integrate_2d(lambda t, y, z: (y, z), 0.0, 1.0, 1.0, 5.0, 1e-10, 1e-12)
    assert path.t[-1] == 5.0
    assert path.y[-1] == pytest.approx(math.e**5, rel=1e-8)
    assert path.z[-1] == pytest.approx(math.e**5, rel=1e-8)


def test_harmonic_oscillator_period():
    path = integrate_2d(lambda t, y, z: (z, -y), 0.0, 1.0, 0.0, 2.0 * math.pi, 1e-11, 1e-13)
    assert path.y[-1] == pytest.approx(1.0, abs=1e-8)
    assert path.z[-1] == pytest.approx(0.0, abs=1e-8)


def test_tightening_tolerance_reduces_error():
    errs = []
    for rtol in (1e-5, 1e-7, 1e-9):
        path = integrate_2d(lambda t, y, z: (y, 0.0), 0.0, 1.0, 0.0, 3.0, rtol, rtol * 1e-2)
        errs.append(abs(path.y[-1] - math.e**3) / math.e**3)
    assert errs[0] > errs[1] > errs[2]


def test_agrees_with_scipy_on_nonlinear_system():
    def f(t, y, z):
        return z, -math.sin(y) - 0.1 * z

    path = integrate_2d(f, 0.0, 2.5, 0.0, 10.0, 1e-11, 1e-13)
    ref = solve_ivp(
        lambda t, y: [y[1], -math.sin(y[0]) - 0.1 * y[1]],
        (0.0, 10.0),
        [2.5, 0.0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
    )
    assert path.y[-1] == pytest.approx(ref.y[0][-1], abs=1e-8)
    assert path.z[-1] == pytest.approx(ref.y[1][-1], abs=1e-8)


def test_max_step_respected():
    path = integrate_2d(lambda t, y, z: (0.0, 0.0), 0.0, 1.0, 0.0, 1.0, 1e-8, 1e-10, max_step=0.01)
    assert np.max(np.diff(path.t)) <= 0.01 + 1e-12


def test_positivity_loss_located():
    with pytest.raises(PositivityLoss) as exc:
        integrate_2d(lambda t, y, z: (-1.0, 0.0), 0.0, 1.0, 0.0, 10.0, 1e-9, 1e-12, positive_y=True)
    assert exc.value.location == pytest.approx(1.0, abs=1e-2)


def test_step_underflow_at_unreachable_point():
    def f(t, y, z):
        if t > 0.5:
            return math.nan, math.nan
        return 1.0, 0.0

    with pytest.raises(StepUnderflow) as exc:
        integrate_2d(f, 0.0, 1.0, 0.0, 1.0, 1e-9, 1e-12)
    assert exc.value.location == pytest.approx(0.5, abs=1e-2)


def test_early_stop_threshold():
    path = integrate_2d(
        lambda t, y, z: (y, 0.0), 0.0, 1.0, 0.0, 20.0, 1e-9, 1e-12, stop_when_y_above=100.0
    )
    assert path.y[-1] >= 100.0
    assert path.t[-1] < 20.0


def test_nodes_store_derivatives():
    path = integrate_2d(lambda t, y, z: (z, -y), 0.0, 1.0, 0.0, 1.0, 1e-9, 1e-11)
    assert np.allclose(path.fy, path.z)
    assert np.allclose(path.fz, -path.y)


coeffs = st.lists(st.floats(-2.0, 2.0), min_size=6, max_size=6)


@settings(max_examples=100)
@given(c=coeffs, xq=st.floats(0.0, 2.0))
def test_quintic_hermite_reproduces_quintics(c, xq):
    poly = np.polynomial.Polynomial(c)
    dpoly = poly.deriv()
    ddpoly = dpoly.deriv()
    x = np.array([0.0, 0.6, 1.1, 2.0])
    interp = QuinticHermite(x, poly(x), dpoly(x), ddpoly(x))
    scale = 1.0 + float(np.max(np.abs(poly(x))))
    assert interp.value(xq) == pytest.approx(float(poly(xq)), abs=1e-10 * scale)
    assert interp.derivative(xq) == pytest.approx(float(dpoly(xq)), abs=1e-9 * scale)


@settings(max_examples=100)
@given(c=st.lists(st.floats(-2.0, 2.0), min_size=4, max_size=4), xq=st.floats(0.0, 2.0))
def test_cubic_hermite_reproduces_cubics(c, xq):
    poly = np.polynomial.Polynomial(c)
    dpoly = poly.deriv()
    x = np.array([0.0, 0.7, 1.4, 2.0])
    interp = CubicHermite(x, poly(x), dpoly(x))
    scale = 1.0 + float(np.max(np.abs(poly(x))))
    assert interp.value(xq) == pytest.approx(float(poly(xq)), abs=1e-10 * scale)
    assert interp.derivative(xq) == pytest.approx(float(dpoly(xq)), abs=1e-9 * scale)


def test_dense_output_between_integration_nodes():
    path = integrate_2d(lambda t, y, z: (z, -y), 0.0, 0.0, 1.0, 6.0, 1e-10, 1e-12)
    interp = QuinticHermite(path.t, path.y, path.z, -path.y)
    xs = np.linspace(0.0, 6.0, 777)
    assert np.max(np.abs(interp.value(xs) - np.sin(xs))) < 1e-8
    assert np.max(np.abs(interp.derivative(xs) - np.cos(xs))) < 1e-7
