import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from heatsplit import checks as K
from heatsplit import specfun as sf


def test_erfc_values():
    assert sf.erfc(0.0) == 1.0
    assert sf.erfc(30.0) < 1e-300
    ref = 2 / math.sqrt(math.pi) * integrate.quad(lambda t: math.exp(-t * t), 1, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert sf.erfc(1.0) == pytest.approx(0.15729920705028513, rel=1e-14)
    assert sf.erfc(1.0) == pytest.approx(ref, rel=1e-13)


def test_erfc_rejects_nan():
    with pytest.raises(sf.DomainError):
        sf.erfc(float("nan"))


def test_e1_values():
    ref = integrate.quad(lambda t: math.exp(-t) / t, 1, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert sf.exp_integral_e1(1.0) == pytest.approx(0.21938393439552029, rel=1e-14)
    assert sf.exp_integral_e1(1.0) == pytest.approx(ref, rel=1e-13)
    x = 1e-8
    # E1(x) + ln x = -gamma + x - x^2/4 + ...; the linear term is 1e-8 here
    assert sf.exp_integral_e1(x) + math.log(x) + sf.EULER_GAMMA == pytest.approx(x - x * x / 4, abs=1e-15)
    assert sf.exp_integral_e1(x) + math.log(x) == pytest.approx(-sf.EULER_GAMMA, abs=2e-8)
    v = sf.exp_integral_e1(50.0)
    assert math.exp(-50) / 51 < v < math.exp(-50) / 50


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_e1_domain(x):
    with pytest.raises(sf.DomainError):
        sf.exp_integral_e1(x)


def test_hermite():
    assert sf.hermite_phys(0, 3.7) == 1.0
    assert sf.hermite_phys(3, 1.0) == -4.0
    x = 0.7
    assert sf.hermite_phys(5, x) == pytest.approx(32 * x ** 5 - 160 * x ** 3 + 120 * x, rel=1e-14)
    with pytest.raises(sf.UnsupportedOrderError):
        sf.hermite_phys(sf.HERMITE_MAX + 1, 0.0)


@pytest.mark.parametrize("n, want", [(0, 2 * math.pi), (1, 0.0), (2, 4 * math.pi), (3, 0.0)])
def test_w_moment_values(n, want):
    assert sf.gaussian_moment_w(n) == pytest.approx(want, rel=1e-15)


@pytest.mark.parametrize("n", range(7))
def test_w_moment_quadrature(n):
    assert sf.gaussian_moment_w(n) == pytest.approx(K.w_n_quadrature(n), rel=1e-8, abs=1e-10)


def test_fourier_moment_values():
    assert sf.fourier_gaussian_moment(0, 2.0) == pytest.approx(math.sqrt(math.pi) * math.exp(-1), rel=1e-15)
    assert sf.fourier_gaussian_moment(1, 0.0) == 0
    assert abs(sf.fourier_gaussian_moment(2, 1.0) - K.i_n_quadrature(2, 1.0)) <= 1e-12


@given(st.integers(0, 8), st.floats(-6, 6))
@settings(max_examples=60, deadline=None)
def test_fourier_moment_parity(n, c):
    v = complex(sf.fourier_gaussian_moment(n, c))
    if n % 2:
        assert abs(v.real) <= 1e-15 * max(abs(v), 1)
    else:
        assert abs(v.imag) <= 1e-15 * max(abs(v), 1)
    assert complex(sf.fourier_gaussian_moment(n, -c)) == pytest.approx(v.conjugate(), rel=1e-13, abs=1e-15)


def test_q_moment_examples():
    # the gap to sqrt(pi)/2 is int_0^c exp(-x^2) dx ~ c, i.e. 1.13e-4 relative at c = 1e-4
    c = 1e-4
    assert math.sqrt(math.pi) / 2 - sf.q_moment(0, c) == pytest.approx(c - c ** 3 / 3, rel=1e-8)
    assert sf.q_moment(0, c) == pytest.approx(math.sqrt(math.pi) / 2, rel=1.2e-4)
    assert sf.q_moment(-1, 1.0) == pytest.approx(math.exp(-1) / 2, rel=1e-15)
    assert sf.q_moment(2, 1.0) == pytest.approx(0.0890739, rel=1e-6)
    assert sf.q_moment(2, 1.0) == pytest.approx(math.exp(-1) - math.sqrt(math.pi) * math.erfc(1), rel=1e-14)


@pytest.mark.parametrize("p", range(-2, 11))
@pytest.mark.parametrize("c", K.Q_GRID_C)
def test_q_moment_quadrature(p, c):
    assert sf.q_moment(p, c) == pytest.approx(K.q_moment_quadrature(p, c), rel=1e-11)


@pytest.mark.parametrize("p", range(-2, 11))
@pytest.mark.parametrize("c", K.Q_GRID_C)
def test_q_recursion(p, c):
    assert sf.q_recursion_residual(p, c) <= 1e-12


@pytest.mark.parametrize("p, c", [(13, 1.0), (-13, 1.0), (2, 0.0), (2, -1.0)])
def test_q_moment_domain(p, c):
    with pytest.raises((sf.UnsupportedOrderError, sf.DomainError)):
        sf.q_moment(p, c)


@pytest.mark.parametrize("a", [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 2.5])
@pytest.mark.parametrize("c", [0.3, 1.0, 3.0])
def test_time_moment(a, c):
    ref = integrate.quad(lambda t: t ** a * math.exp(-c * c / (4 * t)), 0, 1, epsabs=0, epsrel=1e-13)[0]
    assert sf.time_moment_gauss(a, c) == pytest.approx(ref, rel=1e-11)
