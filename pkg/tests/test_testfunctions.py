import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from levyqft.testfunctions import GaussTerm, TestFunction, UnsupportedTestFunction


def numeric_fourier_1d(f, k):
    def part(fn):
        return integrate.quad(lambda x: fn(complex(f(np.array([x]))) * np.exp(-1j * k * x)),
                              -30, 30, limit=400, epsabs=1e-11, epsrel=1e-10)[0]
    return complex(part(np.real), part(np.imag)) / math.sqrt(2 * math.pi)


@given(st.floats(-2, 2), st.floats(0.3, 2.5), st.integers(0, 4), st.floats(-2, 2),
       st.floats(-3, 3))
def test_fourier_matches_quadrature(center, width, degree, freq, k):
    f = TestFunction.gaussian([center], [width], [degree], coef=0.7 - 0.2j, freq=[freq])
    assert complex(f.fourier()(np.array([k]))) == pytest.approx(numeric_fourier_1d(f, k),
                                                                abs=1e-9)


@given(st.integers(0, 3), st.integers(0, 2**31))
def test_derivative_matches_finite_difference(deg, seed):
    rng = np.random.default_rng(seed)
    f = TestFunction.gaussian(rng.normal(size=2), rng.uniform(0.5, 2, 2), [deg, 1],
                              freq=rng.normal(size=2))
    df = f.derivative([1, 0])
    x = rng.normal(size=2)
    h = 1e-5
    e = np.array([h, 0.0])
    fd = (f(x + e) - f(x - e)) / (2 * h)
    assert complex(df(x)) == pytest.approx(complex(fd), abs=1e-6)


def test_fourier_is_unitary_on_a_grid():
    f = TestFunction.gaussian([0.3, -0.2], [0.8, 1.4], [2, 1], freq=[0.5, 0.0])
    xs = np.linspace(-15, 15, 601)
    grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), -1)
    h = xs[1] - xs[0]
    n1 = np.sum(np.abs(f(grid)) ** 2) * h * h
    n2 = np.sum(np.abs(f.fourier()(grid)) ** 2) * h * h
    assert n1 == pytest.approx(n2, rel=1e-8)


def test_translation_is_a_phase_in_momentum_space():
    f = TestFunction.gaussian([0.0, 1.0], [1.0, 0.5], [1, 0], freq=[0.3, -0.7])
    a = np.array([2.0, -1.5])
    k = np.random.default_rng(0).normal(size=(20, 2))
    moved = f.translate(a)
    x = np.random.default_rng(1).normal(size=(5, 2))
    np.testing.assert_allclose(moved(x + a), f(x), atol=1e-13)
    np.testing.assert_allclose(np.abs(moved.fourier()(k)), np.abs(f.fourier()(k)), atol=1e-13)


def test_sums_and_scalars():
    f = TestFunction.gaussian([0.0], [1.0])
    g = TestFunction.gaussian([1.0], [0.5], [2])
    x = np.linspace(-2, 2, 9)[:, None]
    np.testing.assert_allclose((f + 2.0 * g)(x), f(x) + 2 * g(x))
    np.testing.assert_allclose((-f)(x), -f(x))
    np.testing.assert_allclose((f + g).fourier()(x), f.fourier()(x) + g.fourier()(x))


def test_validation():
    with pytest.raises(ValueError):
        TestFunction([])
    with pytest.raises(ValueError):
        TestFunction.gaussian([0.0, 0.0], [0.0, 1.0])
    with pytest.raises(UnsupportedTestFunction):
        TestFunction.gaussian([0.0], [1.0], [7])
    with pytest.raises(ValueError):
        TestFunction.gaussian([0.0], [1.0])(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        GaussTerm(1.0, np.zeros(2), np.ones(3), np.zeros(2), (np.ones(1), np.ones(1)))


def test_support_box_contains_mass():
    f = TestFunction.gaussian([1.0, -2.0], [0.5, 2.0], [2, 0])
    lo, hi = f.support_box()
    assert np.all(lo < [1.0, -2.0]) and np.all(hi > [1.0, -2.0])
    assert abs(complex(f(lo))) < 1e-9
    assert f.min_width == 0.5
