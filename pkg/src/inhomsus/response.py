"""Layer response matrix, collective susceptibility and frequency sweeps.

Matrices live in the transverse polarization plane and are stored as
arrays of shape (..., 2, 2); scalar responses are plain complex arrays.
All quantities are chi / chi0 in units where gamma0 = 1.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import CollectiveCoupling, DistributionSpec, EnsembleSpec, ScenarioConfig
from .distributions import distribution_response

SINGULAR_TOL = 1e-12
CHUNK = 512
_X_AXIS = np.array([1.0 + 0j, 0j])


class PoleOnGridError(ArithmeticError):
    """1 + G F is singular at a grid frequency."""

    def __init__(self, index: int, omega: float | None = None):
        self.index = index
        self.omega = omega
        where = f"omega[{index}]" + (f" = {omega!r}" if omega is not None else "")
        super().__init__(f"I + G F is singular at {where}")


def _coefficients(ensemble: EnsembleSpec):
    p, det, lw, dip = ensemble.arrays()
    # outer products d* (x) d, one per transition, weighted by p_n
    outer = p[:, None, None] * np.conj(dip)[:, :, None] * dip[:, None, :]
    return det + 1j * lw, outer, p * np.sum(np.abs(dip) ** 2, axis=1)


def layer_response(ensemble: EnsembleSpec, omega) -> np.ndarray:
    """F(omega) = sum_n p_n sum_mu (d* (x) d) / (omega + Delta_mu + i gamma_mu).

    Returns shape ``np.shape(omega) + (2, 2)``.
    """
    w = np.asarray(omega, dtype=float)
    pole, outer, _ = _coefficients(ensemble)
    lor = 1.0 / (w[..., None] + pole)  # (..., M)
    return np.einsum("...m,mij->...ij", lor, outer)


def layer_response_scalar(ensemble: EnsembleSpec, omega) -> np.ndarray:
    """F along the common dipole axis; only valid when ``scalar_axis()`` exists.

    With all d_mu = c_mu u the matrix is f u* (x) u with f = sum p |c|^2 / (...).
    """
    w = np.asarray(omega, dtype=float)
    pole, _, strength = _coefficients(ensemble)
    return (strength / (w[..., None] + pole)).sum(axis=-1)


def _singular_index(det: np.ndarray, scale: np.ndarray) -> int | None:
    bad = np.abs(det) <= SINGULAR_TOL * scale
    if np.any(bad):
        return int(np.flatnonzero(bad.ravel())[0])
    return None


def _raise_pole(idx, omega):
    om = None
    if omega is not None:
        om = float(np.ravel(np.asarray(omega, dtype=float))[idx])
    raise PoleOnGridError(idx, om)


def collective_chi(f, g: CollectiveCoupling | complex, omega=None) -> np.ndarray:
    """chi / chi0 = (I + G F)^-1 F.

    ``f`` is either a matrix stack (..., 2, 2) or a scalar array, in which
    case this is F / (1 + G F).  The 2x2 inverse is the adjugate formula;
    ``omega`` only labels the error raised at a singular point.
    """
    G = g.g if isinstance(g, CollectiveCoupling) else complex(g)
    f = np.asarray(f, dtype=complex)
    if f.ndim >= 2 and f.shape[-2:] == (2, 2):
        a = 1 + G * f[..., 0, 0]
        b = G * f[..., 0, 1]
        c = G * f[..., 1, 0]
        d = 1 + G * f[..., 1, 1]
        det = a * d - b * c
        scale = np.maximum(1.0, np.abs(a) ** 2 + np.abs(b) ** 2 + np.abs(c) ** 2 + np.abs(d) ** 2)
        idx = _singular_index(det, scale)
        if idx is not None:
            _raise_pole(idx, omega)
        inv = np.stack([np.stack([d, -b], -1), np.stack([-c, a], -1)], -2) / det[..., None, None]
        return inv @ f
    den = 1 + G * f
    idx = _singular_index(den, np.ones(den.shape))
    if idx is not None:
        _raise_pole(idx, omega)
    return f / den


def naive_lamb_chi(ensemble: EnsembleSpec, g: CollectiveCoupling | complex, omega) -> np.ndarray:
    """Comparator that treats J + i Gamma as a per-line shift and broadening.

    sum_n p_n sum_mu (d* (x) d) / (omega + Delta_mu + i gamma_mu + G |d_mu|^2):
    every line of F is translated by the full G, with no cross-coupling
    between transitions.
    """
    G = g.g if isinstance(g, CollectiveCoupling) else complex(g)
    w = np.asarray(omega, dtype=float)
    p, det, lw, dip = ensemble.arrays()
    outer = p[:, None, None] * np.conj(dip)[:, :, None] * dip[:, None, :]
    pole = det + 1j * lw + G * np.sum(np.abs(dip) ** 2, axis=1)
    return np.einsum("...m,mij->...ij", 1.0 / (w[..., None] + pole), outer)


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class Spectrum:
    """chi / chi0 sampled on a frequency grid.

    ``chi`` has shape (n,) for scalar runs (component along ``axis``) and
    (n, 2, 2) otherwise.
    """

    omega: np.ndarray
    chi: np.ndarray
    label: str = ""
    axis: np.ndarray | None = field(default=None, compare=False)

    @property
    def is_scalar(self) -> bool:
        return self.chi.ndim == 1

    @property
    def abs2(self) -> np.ndarray:
        """|chi/chi0|^2; for matrix runs the squared Frobenius norm."""
        sq = self.chi.real ** 2 + self.chi.imag ** 2
        return sq if self.is_scalar else sq.sum(axis=(-2, -1))

    def component(self, i: int, j: int) -> np.ndarray:
        if self.is_scalar:
            return self.chi * np.conj(self.axis[i]) * self.axis[j]
        return self.chi[:, i, j]

    def matrix(self) -> np.ndarray:
        if not self.is_scalar:
            return self.chi
        proj = np.conj(self.axis)[:, None] * self.axis[None, :]
        return self.chi[:, None, None] * proj


def model_response(model, omega, scalar: bool | None = None):
    """F(omega) for an ensemble or distribution model.

    Returns ``(F, axis)``; ``axis`` is None when F is a (..., 2, 2) matrix.
    Distribution models are always scalar along x.
    """
    if isinstance(model, DistributionSpec):
        return distribution_response(model, omega), _X_AXIS
    axis = model.scalar_axis()
    if scalar is False or axis is None:
        return layer_response(model, omega), None
    return layer_response_scalar(model, omega), axis


def _chunk_chi(model, g, omega, scalar):
    f, _ = model_response(model, omega, scalar)
    return collective_chi(f, g, omega)


def sweep(config: ScenarioConfig, workers: int = 1, scalar: bool | None = None) -> Spectrum:
    """Evaluate chi / chi0 over ``config.grid``.

    The grid is cut into fixed-size chunks independent of ``workers``, so
    the output is bit-identical for any worker count (0 means one per CPU).
    """
    if config.variants:
        raise ValueError("config has variants; use sweep_variants")
    omega = config.grid.omegas()
    g = config.resolved_coupling
    _, axis = model_response(config.model, omega[:1], scalar)
    chunks = [omega[i:i + CHUNK] for i in range(0, omega.size, CHUNK)]
    n = workers if workers > 0 else (os.cpu_count() or 1)
    parts = []
    offset = 0
    try:
        if n == 1 or len(chunks) == 1:
            for ch in chunks:
                parts.append(_chunk_chi(config.model, g, ch, scalar))
                offset += ch.size
        else:
            with ThreadPoolExecutor(max_workers=n) as pool:
                parts = list(pool.map(lambda ch: _chunk_chi(config.model, g, ch, scalar), chunks))
    except PoleOnGridError as exc:
        # re-index from the chunk to the full grid
        if n == 1 or len(chunks) == 1:
            idx = offset + exc.index
        else:
            idx = int(np.flatnonzero(omega == exc.omega)[0])
        raise PoleOnGridError(idx, float(omega[idx])) from None
    return Spectrum(omega, np.concatenate(parts), label=config.name, axis=axis)


def sweep_variants(config: ScenarioConfig, workers: int = 1) -> list[Spectrum]:
    out = []
    for label, cfg in config.expand():
        spec = sweep(cfg, workers)
        out.append(Spectrum(spec.omega, spec.chi, label=label, axis=spec.axis))
    return out
