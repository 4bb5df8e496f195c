import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inhomsus.analysis import (curve_metrics, doublet_denominator, doublet_matrix, doublet_modes,
                               doublet_poles, integrate_imag, minima_within, peak_metrics,
                               sum_rule_target)
from inhomsus.core import CollectiveCoupling, EnsembleSpec, FrequencyGrid, ScenarioConfig
from inhomsus.presets import paper_preset
from inhomsus.response import Spectrum, sweep, sweep_variants


def test_pole_examples():
    pp = doublet_poles(0, 5, 3)
    assert pp.omega_plus == pytest.approx(-2j, abs=1e-14)
    assert pp.omega_minus == pytest.approx(-10j, abs=1e-14)
    pp = doublet_poles(5, 3, 0)
    assert pp.omega_plus == pytest.approx(-1j, abs=1e-14)
    assert pp.omega_minus == pytest.approx(-10 - 7j, abs=1e-14)
    pp = doublet_poles(0, 5, 17)
    root = np.sqrt(264.0)
    assert pp.omega_plus == pytest.approx(root - 6j, abs=1e-13)
    assert pp.omega_minus == pytest.approx(-root - 6j, abs=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 20), st.floats(0, 20), st.floats(0, 20))
def test_poles_are_roots_and_passive(J, Gamma, phi):
    pp = doublet_poles(J, Gamma, phi)
    for w in (pp.omega_plus, pp.omega_minus):
        assert abs(doublet_denominator(w, J, Gamma, phi)) <= 1e-9
        assert w.imag <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 20), st.floats(0.01, 20), st.floats(0, 1))
def test_imaginary_poles_below_gamma(J, Gamma, frac):
    pp = doublet_poles(0.0, Gamma, frac * Gamma * 0.999)
    assert abs(pp.omega_plus.real) <= 1e-10 and abs(pp.omega_minus.real) <= 1e-10


def test_poles_need_positive_gamma():
    with pytest.raises(ValueError):
        doublet_poles(1, 1, 1, gamma=0)


def test_modes_degenerate_and_uncoupled():
    J, Gamma = 5.0, 3.0
    mp = doublet_modes(J, Gamma, 0.0)
    assert mp.lambda_plus == pytest.approx(2 * complex(J, Gamma) + 1j)
    assert mp.lambda_minus == pytest.approx(1j)
    assert np.allclose(mp.e_plus, np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(np.abs(mp.e_minus), np.array([1, 1]) / np.sqrt(2))
    assert mp.e_minus[0] * mp.e_minus[1] < 0
    mp = doublet_modes(0.0, 0.0, 2.0)
    assert {mp.lambda_plus, mp.lambda_minus} == {2 + 1j, -2 + 1j}


def test_modes_selectivity_bound():
    mp = doublet_modes(50, 5, 1)
    sym = np.array([1, 1]) / np.sqrt(2)
    assert abs(np.vdot(mp.e_minus, sym)) <= 0.011


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(0, 20), st.floats(0, 20), st.floats(0.1, 3))
def test_mode_residuals_and_trace(J, Gamma, phi, gamma):
    try:
        mp = doublet_modes(J, Gamma, phi, gamma)
    except ArithmeticError:
        return  # exceptional (defective) point
    m = doublet_matrix(J, Gamma, phi, gamma)
    for lam, v in ((mp.lambda_plus, mp.e_plus), (mp.lambda_minus, mp.e_minus)):
        assert np.linalg.norm(m @ v - lam * v) <= 1e-12 * max(1, abs(lam))
        assert np.linalg.norm(v) == pytest.approx(1.0)
    assert abs(mp.lambda_plus + mp.lambda_minus - np.trace(m)) <= 1e-12 * max(1, abs(np.trace(m)))


def test_lorentzian_metrics():
    cfg = ScenarioConfig(CollectiveCoupling(0, 0), EnsembleSpec.single_line(),
                         FrequencyGrid(-10, 10, 2001))
    m = peak_metrics(sweep(cfg))
    assert m.argmax == pytest.approx(0.0, abs=1e-12)
    assert m.peak == pytest.approx(1.0)
    assert m.fwhm == pytest.approx(2.0, abs=1e-4)
    assert abs(m.asymmetry) < 1e-6
    assert m.minima == ()


def test_parabolic_refinement_off_grid():
    x = np.linspace(-3, 3, 61)
    y = 1 - (x - 0.037) ** 2
    m = curve_metrics(x, y)
    assert m.argmax == pytest.approx(0.037, abs=1e-12)
    assert m.peak == pytest.approx(1.0, abs=1e-12)


def test_fwhm_unavailable_on_narrow_grid():
    x = np.linspace(-0.5, 0.5, 11)
    m = curve_metrics(x, 1 / (1 + x ** 2))
    assert m.fwhm is None and m.asymmetry is None


def test_fig7_dip_small_sigma():
    specs = {s.label: s for s in sweep_variants(paper_preset("fig7"))}
    mins = minima_within(peak_metrics(specs["sigma=3.5"]), 0.5)
    assert len(mins) == 1


def test_sum_rule_single_line():
    omega = np.linspace(-500, 500, 100001)
    f = 1 / (omega + 1j)
    assert integrate_imag(omega, f) == pytest.approx(sum_rule_target(1.0), rel=2e-3)


def test_matrix_spectrum_metrics_use_frobenius():
    omega = np.linspace(-5, 5, 101)
    chi = np.zeros((101, 2, 2), dtype=complex)
    chi[:, 0, 0] = 1 / (omega + 1j)
    chi[:, 1, 1] = 1 / (omega + 1j)
    m = peak_metrics(Spectrum(omega, chi))
    assert m.peak == pytest.approx(2.0)
