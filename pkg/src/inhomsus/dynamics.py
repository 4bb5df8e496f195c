"""Time-domain integration of the linearized mode equations.

For every transition mu (in sub-ensemble n) the classical amplitude obeys

    d/dt b_mu = (i Delta_mu - gamma_mu) b_mu
                + (iJ - Gamma) c_mu . sum_nu c*_nu b_nu - i c_mu . E(t),

with c_mu = sqrt(p_n) d_mu.  The transverse polarization is
P = sum_mu c*_mu b_mu, so an impulse E = delta(t) e gives
P(omega) = chi(omega)/chi0 . e with the transform int P(t) e^{i omega t} dt.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import CollectiveCoupling, EnsembleSpec, SubEnsemble
from .response import Spectrum

DRIVE_KINDS = ("impulse", "rectangular", "gaussian_pulse", "custom_samples")
BLOCK = 256


class StepSizeError(ValueError):
    def __init__(self, dt: float, suggested: float):
        self.dt = dt
        self.suggested = suggested
        super().__init__(f"dt={dt:g} exceeds the stability bound; use dt <= {suggested:.6g}")


class InstabilityError(ArithmeticError):
    def __init__(self, t: float):
        self.t = t
        super().__init__(f"non-finite state at t={t:g}")


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DriveEnvelope:
    """Probe envelope E(t) = amplitude * s(t), in 1/gamma0 time units.

    impulse: unit-area kick at ``start``; rectangular: s = 1 on
    [start, start + duration); gaussian_pulse: exp(-(t-start)^2 / (2 width^2));
    custom_samples: linear interpolation of ``samples`` spaced ``sample_dt``
    from ``start``, zero outside.
    """

    kind: str = "impulse"
    amplitude: tuple[complex, complex] = (1 + 0j, 0j)
    start: float = 0.0
    duration: float = 0.0
    width: float = 1.0
    samples: tuple[complex, ...] = ()
    sample_dt: float = 0.0

    def __post_init__(self):
        if self.kind not in DRIVE_KINDS:
            raise ValueError(f"unknown drive kind {self.kind!r}")
        object.__setattr__(self, "amplitude", tuple(complex(a) for a in self.amplitude))
        object.__setattr__(self, "samples", tuple(complex(s) for s in self.samples))
        if self.kind == "rectangular" and not self.duration > 0:
            raise ValueError("rectangular drive needs duration > 0")
        if self.kind == "gaussian_pulse" and not self.width > 0:
            raise ValueError("gaussian_pulse needs width > 0")
        if self.kind == "custom_samples" and (len(self.samples) < 2 or not self.sample_dt > 0):
            raise ValueError("custom_samples needs >= 2 samples on a uniform grid")
        if not all(np.isfinite(complex(x)) for x in (*self.amplitude, *self.samples)):
            raise ValueError("drive must be finite")

    @property
    def active_until(self) -> float:
        """Time after which the drive is (numerically) zero."""
        if self.kind == "impulse":
            return self.start
        if self.kind == "rectangular":
            return self.start + self.duration
        if self.kind == "gaussian_pulse":
            return self.start + 9 * self.width
        return self.start + (len(self.samples) - 1) * self.sample_dt

    def shape(self, t: float) -> complex:
        if self.kind == "rectangular":
            return 1.0 + 0j if self.start <= t < self.start + self.duration else 0j
        if self.kind == "gaussian_pulse":
            return complex(np.exp(-0.5 * ((t - self.start) / self.width) ** 2))
        if self.kind == "custom_samples":
            x = (t - self.start) / self.sample_dt
            if x < 0 or x > len(self.samples) - 1:
                return 0j
            k = min(int(x), len(self.samples) - 2)
            f = x - k
            return (1 - f) * self.samples[k] + f * self.samples[k + 1]
        return 0j

    def stage_shapes(self, t: float, dt: float) -> tuple[complex, complex, complex]:
        """Shape at the start, middle and end of the step [t, t + dt].

        Ends are one-sided limits from inside the step, so a rectangular
        edge on the time grid is integrated exactly instead of smeared.
        """
        if self.kind == "rectangular":
            eps = 1e-9 * dt
            return self.shape(t + eps), self.shape(t + dt / 2), self.shape(t + dt - eps)
        return self.shape(t), self.shape(t + dt / 2), self.shape(t + dt)

    def scaled(self, factor: complex) -> "DriveEnvelope":
        return DriveEnvelope(self.kind, tuple(factor * a for a in self.amplitude), self.start,
                             self.duration, self.width, self.samples, self.sample_dt)


@dataclass(frozen=True)
class ModeTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (n_t, M)
    polarization: np.ndarray  # (n_t, 2)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_csv(self) -> str:
        m = self.amplitudes.shape[1]
        cols = ["t"]
        for k in range(m):
            cols += [f"re_b_{k}", f"im_b_{k}"]
        cols += ["re_Px", "im_Px", "re_Py", "im_Py"]
        lines = [",".join(cols)]
        for i, t in enumerate(self.times):
            row = [t]
            for v in (*self.amplitudes[i], *self.polarization[i]):
                row += [v.real, v.imag]
            lines.append(",".join(format(float(x), ".17g") for x in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LinearSystem:
    """Generator A = iK and couplings of the mode equations."""

    c: np.ndarray  # (M, 2), sqrt(p_n) d_mu
    k: np.ndarray  # (M, M), omega-domain matrix: (omega + K) b = Omega
    detuning: np.ndarray
    linewidth: np.ndarray
    g: complex
    strength: float = field(default=0.0)

    @property
    def generator(self) -> np.ndarray:
        return 1j * self.k


def linear_system(ensemble: EnsembleSpec, coupling: CollectiveCoupling) -> LinearSystem:
    p, det, lw, dip = ensemble.arrays()
    c = np.sqrt(p)[:, None] * dip
    g = coupling.g
    k = np.diag(det + 1j * lw) + g * (c @ np.conj(c).T)
    return LinearSystem(c, k, det, lw, g, float(np.sum(np.abs(c) ** 2)))


def stability_bound(ensemble: EnsembleSpec, coupling: CollectiveCoupling) -> float:
    """Largest admissible fixed step, 0.01 over the fastest rate in the system."""
    _, det, lw, _ = ensemble.arrays()
    rate = max(1.0, float(np.max(np.abs(det))),
               float(np.max(lw)) + abs(coupling.g) * ensemble.total_strength())
    return 0.01 / rate


def slowest_decay(ensemble: EnsembleSpec, coupling: CollectiveCoupling) -> float:
    """Smallest amplitude decay rate among the collective eigenmodes."""
    ev = np.linalg.eigvals(linear_system(ensemble, coupling).k)
    return float(np.min(ev.imag))


def _rk4_matrix(a: np.ndarray, dt: float) -> np.ndarray:
    # RK4 applied to a homogeneous linear system is multiplication by this
    z = a * dt
    eye = np.eye(a.shape[0], dtype=complex)
    z2 = z @ z
    return eye + z + z2 / 2 + z2 @ z / 6 + z2 @ z2 / 24


def _propagate(sys: LinearSystem, drive: DriveEnvelope, t_max: float, dt: float,
               b0: np.ndarray | None):
    """Fixed-step RK4; returns (times, amplitudes)."""
    n = int(round(t_max / dt)) + 1
    times = np.arange(n) * dt
    a = sys.generator
    m = a.shape[0]
    out = np.empty((n, m), dtype=complex)
    b = np.zeros(m, dtype=complex) if b0 is None else np.array(b0, dtype=complex)
    amp = np.array(drive.amplitude)
    force = -1j * (sys.c @ amp)  # per unit drive shape
    if drive.kind == "impulse":
        if abs(drive.start) > 0.5 * dt:
            raise ValueError("impulse drives are applied at t = 0")
        b = b + force  # integral of -i c.E over the unit-area kick
    out[0] = b
    i = 0
    while i + 1 < n and drive.kind != "impulse" and times[i] < drive.active_until:
        t = times[i]
        s0, sh, s1 = drive.stage_shapes(t, dt)
        f0, fh, f1 = force * s0, force * sh, force * s1
        k1 = a @ b + f0
        k2 = a @ (b + dt / 2 * k1) + fh
        k3 = a @ (b + dt / 2 * k2) + fh
        k4 = a @ (b + dt * k3) + f1
        b = b + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        i += 1
        out[i] = b
        if not np.all(np.isfinite(b)):
            raise InstabilityError(times[i])
    # drive off: b_{k+1} = R b_k; blocks of BLOCK steps via powers of R
    if i + 1 < n:
        r = _rk4_matrix(a, dt)
        powers = np.empty((BLOCK, m, m), dtype=complex)
        powers[0] = r
        # an unstable step matrix overflows here; caught below as non-finite state
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(1, BLOCK):
                powers[j] = r @ powers[j - 1]
        while i + 1 < n:
            cnt = min(BLOCK, n - 1 - i)
            with np.errstate(over="ignore", invalid="ignore"):
                out[i + 1:i + 1 + cnt] = powers[:cnt] @ out[i]
            i += cnt
            if not np.all(np.isfinite(out[i])):
                bad = i - cnt + 1 + int(np.argmax(~np.all(np.isfinite(out[i - cnt + 1:i + 1]), axis=1)))
                raise InstabilityError(times[bad])
    return times, out


def integrate_eom(ensemble: EnsembleSpec, coupling: CollectiveCoupling, drive: DriveEnvelope,
                  t_max: float, dt: float, initial=None, check_step: bool = True) -> ModeTrajectory:
    """Integrate the mode amplitudes from t = 0 to ``t_max`` with step ``dt``."""
    if not t_max > 0:
        raise ValueError("t_max must be > 0")
    bound = stability_bound(ensemble, coupling)
    if check_step and dt > bound * (1 + 1e-12):
        raise StepSizeError(dt, bound)
    sys = linear_system(ensemble, coupling)
    times, amps = _propagate(sys, drive, t_max, dt, initial)
    pol = amps @ np.conj(sys.c)
    return ModeTrajectory(times, amps, pol)


def impulse_response_spectrum(ensemble: EnsembleSpec, coupling: CollectiveCoupling,
                              t_max: float | None = None, dt: float | None = None,
                              omega_max: float = 30.0, pad: int = 4) -> Spectrum:
    """chi / chi0 from the Fourier transform of impulse-driven polarizations.

    One impulse per transverse axis gives the two columns of chi.  The
    transform is the trapezoid rule plus the first Euler-Maclaurin endpoint
    correction (the integrand jumps at t = 0), evaluated by zero-padded FFT;
    returned frequencies are the FFT bins with |omega| <= omega_max.
    """
    if dt is None:
        dt = stability_bound(ensemble, coupling)
    decay = slowest_decay(ensemble, coupling)
    if t_max is None:
        t_max = 50.0 / decay
    elif t_max * decay < 50:
        tail = float(np.exp(-decay * t_max))
        warnings.warn(f"t_max={t_max:g} truncates the response; tail amplitude ~ {tail:.3g}",
                      TruncationWarning, stacklevel=2)
    sys = linear_system(ensemble, coupling)
    a = sys.generator
    n = int(round(t_max / dt)) + 1
    nfft = 1 << int(np.ceil(np.log2(pad * n)))
    freqs = 2 * np.pi * np.fft.fftfreq(nfft, dt)
    keep = np.abs(freqs) <= omega_max
    order = np.argsort(freqs[keep])
    omega = freqs[keep][order]
    chi = np.empty((omega.size, 2, 2), dtype=complex)
    for col, e in enumerate(np.eye(2, dtype=complex)):
        drive = DriveEnvelope("impulse", tuple(e))
        _, amps = _propagate(sys, drive, t_max, dt, None)
        pol = amps @ np.conj(sys.c)  # (n, 2)
        dpol0 = (a @ amps[0]) @ np.conj(sys.c)
        buf = np.zeros((nfft, 2), dtype=complex)
        buf[:n] = pol
        # sum_k P_k e^{i omega t_k} = nfft * ifft
        s = nfft * np.fft.ifft(buf, axis=0)[keep][order]
        trap = dt * (s - 0.5 * pol[0])
        corr = dt * dt / 12 * (dpol0[None, :] + 1j * omega[:, None] * pol[0][None, :])
        chi[:, :, col] = trap + corr
    axis = ensemble.scalar_axis()
    if axis is not None:
        # project onto the common axis: chi = f u* (x) u  =>  f = u . chi . u*
        f = np.einsum("i,nij,j->n", axis, chi, np.conj(axis))
        return Spectrum(omega, f, label="impulse", axis=axis)
    return Spectrum(omega, chi, label="impulse")


def mode_populations(traj: ModeTrajectory, vectors: np.ndarray) -> np.ndarray:
    """|alpha_k(t)|^2 for the expansion b(t) = sum_k alpha_k(t) v_k."""
    alpha = np.linalg.solve(vectors, traj.amplitudes.T).T
    return np.abs(alpha) ** 2


def split_replicas(ensemble: EnsembleSpec, k: int) -> EnsembleSpec:
    """Each sub-ensemble split into ``k`` identical copies of weight p_n / k.

    Integrating the split ensemble tracks every copy's decay separately;
    at linear order it must reproduce the unsplit (collective) dynamics.
    """
    subs = []
    for s in ensemble.sub_ensembles:
        subs += [SubEnsemble(s.weight / k, s.transitions)] * k
    return EnsembleSpec(tuple(subs))
