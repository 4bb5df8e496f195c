"""Pole and eigenmode analysis of the magnetic doublet; line-shape metrics."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .response import Spectrum


@dataclass(frozen=True)
class PolePair:
    omega_plus: complex
    omega_minus: complex


@dataclass(frozen=True)
class ModePair:
    lambda_plus: complex
    lambda_minus: complex
    e_plus: np.ndarray
    e_minus: np.ndarray

    @property
    def vectors(self) -> np.ndarray:
        """Eigenvectors as columns, ordered (+, -)."""
        return np.column_stack([self.e_plus, self.e_minus])


@dataclass(frozen=True)
class PeakMetrics:
    argmax: float
    peak: float
    fwhm: float | None
    asymmetry: float | None
    minima: tuple[tuple[float, float], ...]


def _csqrt(z: complex) -> complex:
    # principal branch; a real negative radicand must not pick up a -0j
    z = complex(z)
    if z.imag == 0:
        z = complex(z.real, 0.0)
    return cmath.sqrt(z)


def doublet_denominator(omega, J: float, Gamma: float, phi: float, gamma: float = 1.0):
    w = np.asarray(omega, dtype=complex) + 1j * gamma
    return w * w + 2 * complex(J, Gamma) * w - phi * phi


def doublet_poles(J: float, Gamma: float, phi: float, gamma: float = 1.0) -> PolePair:
    """Poles of the uniform-doublet susceptibility.

    omega_pm = -i gamma - G +- sqrt(G^2 + phi^2) with G = J + i Gamma;
    omega_plus tends to -i gamma as phi -> 0 (for J >= 0).
    """
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    G = complex(J, Gamma)
    root = _csqrt(G * G + phi * phi)
    base = -1j * gamma - G
    return PolePair(base + root, base - root)


def doublet_matrix(J: float, Gamma: float, phi: float, gamma: float = 1.0) -> np.ndarray:
    G = complex(J, Gamma)
    return G * np.ones((2, 2), dtype=complex) + np.diag([phi + 1j * gamma, -phi + 1j * gamma])


def _eigvec(m: np.ndarray, lam: complex, fallback: np.ndarray) -> np.ndarray:
    # two candidate null vectors of m - lam; keep the better conditioned one
    a, b = m[0, 0] - lam, m[0, 1]
    c, d = m[1, 0], m[1, 1] - lam
    v1 = np.array([b, -a])
    v2 = np.array([-d, c])
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    if np.linalg.norm(v) <= 1e-14 * max(1.0, np.linalg.norm(m)):
        return fallback  # m = lam * I: every vector is an eigenvector
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])  # largest component real positive


def doublet_modes(J: float, Gamma: float, phi: float, gamma: float = 1.0) -> ModePair:
    """Eigen-decomposition of M = G [[1, 1], [1, 1]] + diag(phi + i gamma, -phi + i gamma).

    lambda_pm = G + i gamma +- s with s^2 = G^2 + phi^2; the branch of s is
    the one continuous with s = G at phi = 0, so lambda_plus is the
    superradiant (symmetric) mode 2G + i gamma of the degenerate limit.
    """
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    G = complex(J, Gamma)
    m = doublet_matrix(J, Gamma, phi, gamma)
    s = _csqrt(G * G + phi * phi)
    if (s * G.conjugate()).real < 0:
        s = -s
    lp, lm = G + 1j * gamma + s, G + 1j * gamma - s
    r = 1 / np.sqrt(2)
    ep = _eigvec(m, lp, np.array([r, r], dtype=complex))
    em = _eigvec(m, lm, np.array([r, -r], dtype=complex))
    for lam, v in ((lp, ep), (lm, em)):
        if np.linalg.norm(m @ v - lam * v) > 1e-12 * max(1.0, abs(lam)):
            raise ArithmeticError("doublet matrix is defective at these parameters")
    return ModePair(lp, lm, ep, em)


# ---------------------------------------------------------------- line shape


def _parabola(y0: float, y1: float, y2: float) -> float:
    den = y0 - 2 * y1 + y2
    return 0.0 if den == 0 else 0.5 * (y0 - y2) / den


def _crossing(x, y, i: int, j: int, level: float) -> float:
    # linear interpolation between samples i and j, which bracket `level`
    return x[i] + (level - y[i]) * (x[j] - x[i]) / (y[j] - y[i])


def curve_metrics(omega, y) -> PeakMetrics:
    """Peak position, FWHM, asymmetry and interior minima of a sampled curve.

    The maximum and minima are refined by a parabola through three grid
    points; half-maximum crossings are linearly interpolated.  ``fwhm`` and
    ``asymmetry`` are None when a crossing falls outside the grid.
    Asymmetry is (right half-width - left half-width) / fwhm.
    """
    x = np.asarray(omega, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("need at least three samples")
    h = x[1] - x[0]
    i = int(np.argmax(y))
    xpk, ypk = x[i], y[i]
    if 0 < i < x.size - 1:
        t = _parabola(y[i - 1], y[i], y[i + 1])
        xpk = x[i] + t * h
        ypk = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * t
    half = 0.5 * ypk
    fwhm = asym = None
    left = np.flatnonzero(y[:i] < half)
    right = np.flatnonzero(y[i:] < half)
    if left.size and right.size:
        l = left[-1]
        r = i + right[0]
        xl = _crossing(x, y, l, l + 1, half)
        xr = _crossing(x, y, r - 1, r, half)
        fwhm = xr - xl
        asym = ((xr - xpk) - (xpk - xl)) / fwhm
    mins = []
    idx = np.flatnonzero((y[1:-1] < y[:-2]) & (y[1:-1] < y[2:])) + 1
    for k in idx:
        t = _parabola(y[k - 1], y[k], y[k + 1])
        mins.append((float(x[k] + t * h), float(y[k] - 0.25 * (y[k - 1] - y[k + 1]) * t)))
    return PeakMetrics(float(xpk), float(ypk),
                       None if fwhm is None else float(fwhm),
                       None if asym is None else float(asym),
                       tuple(mins))


def peak_metrics(spectrum: Spectrum) -> PeakMetrics:
    """Metrics of |chi/chi0|^2, the quantity every spectrum plot shows."""
    return curve_metrics(spectrum.omega, spectrum.abs2)


def minima_within(metrics: PeakMetrics, half_width: float) -> list[tuple[float, float]]:
    return [m for m in metrics.minima if abs(m[0]) <= half_width]


def integrate_imag(omega, f) -> float:
    """Trapezoidal integral of Im f over the sampled grid."""
    return float(np.trapezoid(np.imag(f), omega))


def sum_rule_target(strength: float) -> float:
    return -math.pi * strength
