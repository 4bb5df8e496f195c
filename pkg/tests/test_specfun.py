import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from inhomsus.specfun import gaussian_lorentzian_average, wofz

mpmath.mp.dps = 40


def w_oracle(z: complex) -> complex:
    # exp(-z^2) erfc(-iz) at 40 digits; independent of the rational kernel
    zz = mpmath.mpc(z.real, z.imag)
    return complex(mpmath.exp(-zz * zz) * mpmath.erfc(-1j * zz))


def _sample_points(n=300, seed=7):
    rng = np.random.default_rng(seed)
    r = 10 ** rng.uniform(-3, np.log10(500), n)
    a = rng.uniform(0, np.pi, n)
    pts = list(r * np.exp(1j * a))
    # near the real axis, where the real part is exp(-x^2)
    pts += [x + 1e-8j for x in (0.5, 3.9, 4.1, 5.5, 8.0, 26.0)] + [4.0 + 0j, -6.0 + 0j, 0j]
    return pts


def test_wofz_against_mpmath():
    worst = max(abs(wofz(z) - w_oracle(z)) / abs(w_oracle(z)) for z in _sample_points())
    assert worst < 1e-13


def test_wofz_matches_scipy():
    z = np.array(_sample_points(200, seed=3))
    assert np.max(np.abs(wofz(z) - special.wofz(z)) / np.abs(special.wofz(z))) < 1e-13


def test_wofz_shapes_and_known_values():
    assert wofz(0) == pytest.approx(1.0)
    assert wofz(1j) == pytest.approx(float(mpmath.exp(1) * mpmath.erfc(1)), rel=1e-14)
    assert wofz(np.zeros((2, 3))).shape == (2, 3)
    assert isinstance(wofz(0.5j), complex)


def test_wofz_domain_errors():
    with pytest.raises(ValueError):
        wofz(1 - 1e-3j)
    with pytest.raises(ValueError):
        wofz(np.array([0, np.nan]))


upper = st.complex_numbers(max_magnitude=200, allow_nan=False, allow_infinity=False).map(
    lambda z: complex(z.real, abs(z.imag)))


@settings(max_examples=300, deadline=None)
@given(upper)
def test_wofz_reflection(z):
    # w(-conj z) = conj w(z) on the closed upper half-plane
    assert abs(wofz(-z.conjugate()) - np.conj(wofz(z))) <= 1e-13 * abs(wofz(z)) + 1e-300


@settings(max_examples=300, deadline=None)
@given(upper)
def test_wofz_bounded(z):
    assert abs(wofz(z)) <= 1 + 1e-14


def _gla_quad(omega, mean, sigma, gamma):
    def part(fn):
        f = lambda d: fn(1.0 / (omega - d + 1j * gamma)) * np.exp(-0.5 * ((d - mean) / sigma) ** 2)
        val, _ = integrate.quad(f, mean - 14 * sigma, mean + 14 * sigma, points=[omega],
                                limit=400, epsabs=1e-14, epsrel=1e-11)
        return val / (np.sqrt(2 * np.pi) * sigma)
    return part(np.real) + 1j * part(np.imag)


@pytest.mark.parametrize("omega,mean,sigma,gamma", [
    (0.0, 0.0, 10.0, 1.0), (3.0, -2.0, 0.7, 1.0), (20.0, 17.0, 3.5, 2.5), (-40.0, 0.0, 14.0, 0.3)])
def test_gla_against_quadrature(omega, mean, sigma, gamma):
    got = gaussian_lorentzian_average(omega, mean, sigma, gamma)
    assert got == pytest.approx(_gla_quad(omega, mean, sigma, gamma), rel=1e-9)


def test_gla_reference_value():
    # the centre of a sigma = 10 Voigt line; verified independently by quadrature above
    got = gaussian_lorentzian_average(0.0, 0.0, 10.0, 1.0)
    assert abs(got.real) < 1e-15
    assert got.imag == pytest.approx(-0.1159262, abs=5e-8)


def test_gla_narrow_limit():
    omega = np.linspace(-50, 50, 2001)
    got = gaussian_lorentzian_average(omega, 1.5, 1e-4, 1.0)
    assert np.max(np.abs(got - 1 / (omega - 1.5 + 1j))) < 1e-3


def test_gla_rejects_bad_width():
    with pytest.raises(ValueError):
        gaussian_lorentzian_average(0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        gaussian_lorentzian_average(0.0, 0.0, 1.0, gamma=0.0)
