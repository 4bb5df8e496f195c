"""Faddeeva function and the Gaussian-averaged Lorentzian built on it."""

from __future__ import annotations

import numpy as np
from scipy import special

_SQRT_PI = np.sqrt(np.pi)


def wofz(z):
    """Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0.

    Accepts scalars or arrays; returns complex of the same shape.
    """
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("wofz: argument must be finite")
    if np.any(z.imag < 0):
        raise ValueError("wofz: argument must lie in the closed upper half-plane")
    out = special.wofz(z)
    return out[()] if out.ndim == 0 else out


def gaussian_lorentzian_average(omega, mean: float, sigma: float, gamma: float = 1.0):
    """Average of gamma0 / (omega - delta + i*gamma) over delta ~ N(mean, sigma^2).

    The numerator is the reference width gamma0 = 1, as in the layer
    response; ``gamma`` only sets the homogeneous width in the denominator.
    The result is a Voigt-type profile, -i sqrt(pi)/(sqrt(2) sigma) w(z).
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    s2 = np.sqrt(2.0) * sigma
    z = (np.asarray(omega, dtype=float) - mean + 1j * gamma) / s2
    return -1j * _SQRT_PI / s2 * wofz(z)
