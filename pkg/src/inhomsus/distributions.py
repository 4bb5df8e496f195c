"""Inhomogeneous (distribution-averaged) layer responses.

Closed forms for Gaussian isomer shifts and Gaussian magnetic splittings,
Gauss-Hermite discretization into sub-ensembles, and an adaptive
Gauss-Kronrod integrator of the defining integrals that serves as an
independent check on the closed forms.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import DistributionSpec, EnsembleSpec, SubEnsemble, Transition
from .specfun import gaussian_lorentzian_average

MAX_POINTS = 512


class OracleError(RuntimeError):
    """Adaptive quadrature failed to converge."""


# ---------------------------------------------------------------- closed forms


def gaussian_isomer_response(mean: float, sigma: float, omega):
    """F(omega) for a single line whose position is N(mean, sigma^2)."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0; use the pure Lorentzian for sigma = 0")
    return gaussian_lorentzian_average(omega, mean, sigma, 1.0)


def magnetic_doublet_response(phi: float, omega):
    """F(omega; phi) = 2 (omega + i) / ((omega + i)^2 - phi^2) for a sharp doublet."""
    w = np.asarray(omega, dtype=float) + 1j
    return 2 * w / (w * w - phi * phi)


def gaussian_magnetic_response(mean: float, sigma: float, omega):
    """Doublet response averaged over phi ~ N(mean, sigma^2).

    Both lines of the doublet average independently: the +phi line is a
    Gaussian of positions centred on ``mean``, the -phi line one centred on
    ``-mean``.  Negative phi in the tail is kept; only phi^2 matters.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0; use magnetic_doublet_response for sigma = 0")
    return (gaussian_lorentzian_average(omega, mean, sigma, 1.0)
            + gaussian_lorentzian_average(omega, -mean, sigma, 1.0))


def lorentzian_response(position: float, omega):
    w = np.asarray(omega, dtype=float)
    return 1.0 / (w - position + 1j)


def distribution_response(dist: DistributionSpec, omega):
    """Scalar F(omega) for any distribution, routing sigma = 0 to exact forms."""
    if dist.kind == "discrete_list":
        w = np.asarray(omega, dtype=float)
        out = np.zeros(w.shape, dtype=complex)
        for v, p in zip(dist.values, dist.weights):
            out = out + p * (magnetic_doublet_response(v, w) if dist.doublet
                             else lorentzian_response(v, w))
        return out
    if dist.kind == "gaussian_isomer":
        if dist.sigma == 0:
            return lorentzian_response(dist.mean, omega)
        return gaussian_isomer_response(dist.mean, dist.sigma, omega)
    if dist.sigma == 0:
        return magnetic_doublet_response(dist.mean, omega)
    return gaussian_magnetic_response(dist.mean, dist.sigma, omega)


# ---------------------------------------------------------------- discretization


def _hermite_tail(x: np.ndarray, n: int):
    """(p_n, p_{n-1}, log scale) of the orthonormal Hermite polynomials at x.

    p_k is normalized against exp(-x^2); the pair is rescaled every step so
    the true values are exp(log scale) times the returned ones.
    """
    prev = np.zeros_like(x)
    cur = np.full_like(x, math.pi ** -0.25)
    logs = np.zeros_like(x)
    for k in range(1, n + 1):
        prev, cur = cur, (x * cur - math.sqrt((k - 1) / 2.0) * prev) / math.sqrt(k / 2.0)
        s = np.maximum(np.abs(cur), np.abs(prev))
        prev, cur = prev / s, cur / s
        logs += np.log(s)
    return cur, prev, logs


@lru_cache(maxsize=None)
def hermite_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and weights for the weight exp(-x^2).

    Golub-Welsch eigenvalues as starting nodes, Newton polishing with
    p_n' = sqrt(2n) p_{n-1}, then weights from the Christoffel formula
    w_i = 1 / (n p_{n-1}(x_i)^2), evaluated in logarithms so the far-tail
    weights keep full relative accuracy (they underflow only below 1e-308).
    """
    if not 1 <= n <= MAX_POINTS:
        raise ValueError(f"quadrature order must be in [1, {MAX_POINTS}], got {n}")
    if n == 1:
        return np.array([0.0]), np.array([math.sqrt(math.pi)])
    off = np.sqrt(np.arange(1, n) / 2.0)
    x = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)
    for _ in range(3):
        pn, pn1, _ = _hermite_tail(x, n)
        x = x - pn / (math.sqrt(2.0 * n) * pn1)
    x = 0.5 * (x - x[::-1])  # exact symmetry
    _, pn1, logs = _hermite_tail(x, n)
    w = np.exp(-math.log(n) - 2 * (np.log(np.abs(pn1)) + logs))
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _normalized(weights: np.ndarray) -> list[float]:
    p = [float(v) for v in weights / math.fsum(weights)]
    # push the rounding residual into the largest weight so fsum is exactly 1
    i = int(np.argmax(p))
    p[i] += 1.0 - math.fsum(p)
    return p


def discretize_distribution(dist: DistributionSpec) -> EnsembleSpec:
    """Sub-ensembles approximating ``dist``.

    Gaussian kinds use a ``dist.points``-node Gauss-Hermite rule.  Each node
    becomes one sub-ensemble: a single line at the node position (isomer)
    or a doublet at +-node (magnetic).  A line at position x has detuning
    -x, since the layer response peaks at omega = -detuning.
    """
    if dist.kind == "discrete_list":
        positions, probs = list(dist.values), list(dist.weights)
    else:
        if dist.points > MAX_POINTS:
            raise ValueError(f"points={dist.points} exceeds {MAX_POINTS}")
        x, w = hermite_rule(dist.points)
        keep = w > 0  # nodes beyond ~37 sigma for P near 512 carry no weight in doubles
        positions = list(dist.mean + math.sqrt(2.0) * dist.sigma * x[keep])
        probs = _normalized(w[keep])
    subs = []
    for pos, p in zip(positions, probs):
        if dist.doublet:
            trs = (Transition(pos), Transition(-pos))
        else:
            trs = (Transition(-pos),)
        subs.append(SubEnsemble(p, trs))
    return EnsembleSpec(tuple(subs))


# ---------------------------------------------------------------- oracle

# Gauss-Kronrod 7/15 (QUADPACK qk15 abscissae and weights)
_XK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                0.207784955007898467600689403773245, 0.0])
_WK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KW = np.concatenate([_WK[:-1], _WK[::-1]])
_GW = np.zeros(15)
_GW[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _integrand(dist: DistributionSpec, x: np.ndarray, omega: np.ndarray) -> np.ndarray:
    s = dist.sigma
    pdf = np.exp(-0.5 * ((x - dist.mean) / s) ** 2) / (math.sqrt(2 * math.pi) * s)
    w = omega.reshape(-1, *([1] * x.ndim)) + 1j
    if dist.doublet:
        kernel = 2 * w / (w * w - x * x)
    else:
        kernel = 1 / (w - x)
    return pdf * kernel


def quadrature_response_oracle(dist: DistributionSpec, omega, tol: float = 1e-10,
                               max_depth: int = 30, initial_panels: int = 24):
    """Integrate F(omega) = int p(x) F(omega; x) dx over mean +- 12 sigma.

    Globally adaptive G7/K15 on a panel partition shared by all requested
    omegas: a panel is bisected while the Kronrod-Gauss difference of any
    omega exceeds its share of ``tol``.  Independent of the Faddeeva route.
    """
    if not dist.continuous:
        raise ValueError("the quadrature oracle applies to continuous distributions only")
    if not dist.sigma > 0:
        raise ValueError("the quadrature oracle needs sigma > 0")
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    a, b = dist.mean - 12 * dist.sigma, dist.mean + 12 * dist.sigma
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    depth = np.zeros(lo.size, dtype=int)
    total = np.zeros(w.size, dtype=complex)
    while lo.size:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        f = _integrand(dist, x, w)  # (n_omega, n_panels, 15)
        kron = (f * _KW).sum(-1) * half
        gauss = (f * _GW).sum(-1) * half
        err = np.abs(kron - gauss).max(axis=0)
        ok = err <= tol * (hi - lo) / (b - a)
        total += kron[:, ok].sum(axis=1)
        if np.any(~ok & (depth >= max_depth)):
            raise OracleError(f"no convergence after depth {max_depth}")
        lo, hi, depth = lo[~ok], hi[~ok], depth[~ok]
        m = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, m]), np.concatenate([m, hi])
        depth = np.concatenate([depth, depth]) + 1
    return total if np.ndim(omega) else total[0]


def oracle_max_error(dist: DistributionSpec, omega) -> float:
    """Largest relative deviation of the closed form from the quadrature oracle."""
    ref = quadrature_response_oracle(dist, omega)
    got = distribution_response(dist, omega)
    return float(np.max(np.abs(got - ref) / np.abs(ref)))
