"""Domain types, unit conversion and the JSON scenario format.

Every frequency held by these types is dimensionless, in units of the
reference linewidth gamma0.  Physical units only appear when a config is
parsed (``{"value": 9.2, "unit": "neV"}``) and are converted immediately.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence, Union

import numpy as np

GAMMA0_NEV = 4.6
WEIGHT_TOL = 1e-9

DISTRIBUTION_KINDS = ("gaussian_isomer", "gaussian_magnetic", "discrete_list")
OUTPUT_KINDS = ("spectrum", "metrics", "svg", "naive")
VARIANT_KEYS = ("J", "Gamma", "sigma", "mean")


class ConfigError(ValueError):
    """Invalid scenario: syntax, schema or invariant violation."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# ---------------------------------------------------------------- units


def convert_units(value: float, unit: str, gamma0_neV: float = GAMMA0_NEV,
                  moment_neV_per_T: float | None = None) -> float:
    """Express ``value`` in units of gamma0.

    ``unit`` is one of ``"gamma0"``, ``"neV"`` or ``"T"``; a field in tesla
    needs the sublevel moment (neV/T) to become an energy.
    """
    if not gamma0_neV > 0:
        raise ConfigError(f"gamma0_neV must be positive, got {gamma0_neV}")
    if unit in ("gamma0", "γ0"):
        return float(value)
    if unit == "neV":
        return value / gamma0_neV
    if unit in ("T", "tesla"):
        if moment_neV_per_T is None:
            raise ConfigError("tesla values need a moment factor in neV/T")
        return value * moment_neV_per_T / gamma0_neV
    raise ConfigError(f"unknown unit {unit!r}")


# ---------------------------------------------------------------- types


def _finite(x: complex) -> bool:
    return math.isfinite(x.real) and math.isfinite(x.imag)


@dataclass(frozen=True)
class Transition:
    detuning: float
    linewidth: float = 1.0
    dipole: tuple[complex, complex] = (1 + 0j, 0j)

    def __post_init__(self):
        d = tuple(complex(c) for c in self.dipole)
        if len(d) != 2:
            raise ConfigError("dipole must have two transverse components")
        object.__setattr__(self, "dipole", d)
        object.__setattr__(self, "detuning", float(self.detuning))
        object.__setattr__(self, "linewidth", float(self.linewidth))
        if not math.isfinite(self.detuning):
            raise ConfigError("detuning must be finite")
        if not (self.linewidth > 0 and math.isfinite(self.linewidth)):
            raise ConfigError(f"linewidth must be > 0, got {self.linewidth}")
        if not all(_finite(c) for c in d):
            raise ConfigError("dipole components must be finite")
        if d[0] == 0 and d[1] == 0:
            raise ConfigError("dipole must have a nonzero component")

    @classmethod
    def from_channels(cls, detuning: float, channels: Sequence[float],
                      dipole=(1 + 0j, 0j)) -> "Transition":
        """Transition whose linewidth is the sum of its decay channels.

        Population leaking to other ground states is not tracked; only the
        total decay of the transition amplitude matters at linear order.
        """
        if len(channels) == 0 or any(c < 0 for c in channels):
            raise ConfigError("decay channels must be a non-empty list of rates >= 0")
        return cls(detuning, math.fsum(channels), dipole)

    @property
    def strength(self) -> float:
        """|d|^2, the squared norm of the transverse dipole."""
        return sum(abs(c) ** 2 for c in self.dipole)


@dataclass(frozen=True)
class SubEnsemble:
    weight: float
    transitions: tuple[Transition, ...]

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "weight", float(self.weight))
        if not (0 < self.weight <= 1 + WEIGHT_TOL):
            raise ConfigError(f"sub-ensemble weight must be in (0, 1], got {self.weight}")
        if not self.transitions:
            raise ConfigError("sub-ensemble needs at least one transition")


@dataclass(frozen=True)
class EnsembleSpec:
    sub_ensembles: tuple[SubEnsemble, ...]

    def __post_init__(self):
        object.__setattr__(self, "sub_ensembles", tuple(self.sub_ensembles))
        if not self.sub_ensembles:
            raise ConfigError("ensemble needs at least one sub-ensemble")
        total = math.fsum(s.weight for s in self.sub_ensembles)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ConfigError(f"weights sum to {total:.10g}")

    @classmethod
    def single_line(cls, detuning: float = 0.0, linewidth: float = 1.0,
                    dipole=(1 + 0j, 0j)) -> "EnsembleSpec":
        return cls((SubEnsemble(1.0, (Transition(detuning, linewidth, dipole),)),))

    def arrays(self):
        """Flattened per-transition arrays ``(weight, detuning, linewidth, dipole)``.

        ``weight`` repeats the owning sub-ensemble's p_n; ``dipole`` is (M, 2).
        """
        w, det, lw, dip = [], [], [], []
        for sub in self.sub_ensembles:
            for t in sub.transitions:
                w.append(sub.weight)
                det.append(t.detuning)
                lw.append(t.linewidth)
                dip.append(t.dipole)
        return (np.array(w), np.array(det), np.array(lw),
                np.array(dip, dtype=complex).reshape(-1, 2))

    @property
    def n_transitions(self) -> int:
        return sum(len(s.transitions) for s in self.sub_ensembles)

    def scalar_axis(self) -> np.ndarray | None:
        """Unit vector shared by all dipoles, or None if they span the plane."""
        _, _, _, dip = self.arrays()
        norms = np.linalg.norm(dip, axis=1)
        axis = dip[np.argmax(norms)] / norms.max()
        # d is parallel to axis iff the 2x2 "cross product" vanishes
        cross = np.abs(dip[:, 0] * axis[1] - dip[:, 1] * axis[0])
        if np.all(cross <= 1e-14 * norms):
            return axis
        return None

    def total_strength(self) -> float:
        """Sum over sub-ensembles of p_n * sum_mu |d_mu|^2."""
        return math.fsum(s.weight * t.strength
                         for s in self.sub_ensembles for t in s.transitions)

    def shifted(self, delta0: float) -> "EnsembleSpec":
        """Copy with ``delta0`` added to every detuning."""
        return EnsembleSpec(tuple(
            SubEnsemble(s.weight, tuple(replace(t, detuning=t.detuning + delta0)
                                        for t in s.transitions))
            for s in self.sub_ensembles))


@dataclass(frozen=True)
class CollectiveCoupling:
    j: float = 0.0
    gamma_big: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "j", float(self.j))
        object.__setattr__(self, "gamma_big", float(self.gamma_big))
        if not (math.isfinite(self.j) and math.isfinite(self.gamma_big)):
            raise ConfigError("J and Gamma must be finite")
        if self.gamma_big < 0:
            raise ConfigError(f"Gamma must be >= 0, got {self.gamma_big}")

    @property
    def g(self) -> complex:
        return complex(self.j, self.gamma_big)


@dataclass(frozen=True)
class CavityParams:
    """Cavity detuning, loss and the (unfixed) proportionality constant."""

    delta_c: float
    kappa: float
    amplitude: float

    def __post_init__(self):
        for name in ("delta_c", "kappa", "amplitude"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.kappa <= 0:
            raise ConfigError(f"kappa must be > 0, got {self.kappa}")
        if self.amplitude <= 0:
            raise ConfigError(f"amplitude must be > 0, got {self.amplitude}")


@dataclass(frozen=True)
class FrequencyGrid:
    min: float
    max: float
    steps: int

    def __post_init__(self):
        object.__setattr__(self, "min", float(self.min))
        object.__setattr__(self, "max", float(self.max))
        if isinstance(self.steps, bool) or int(self.steps) != self.steps:
            raise ConfigError(f"steps must be an integer, got {self.steps!r}")
        object.__setattr__(self, "steps", int(self.steps))
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ConfigError("grid bounds must be finite")
        if not self.min < self.max:
            raise ConfigError(f"grid min ({self.min}) must be < max ({self.max})")
        if self.steps < 2:
            raise ConfigError(f"grid needs at least 2 steps, got {self.steps}")

    def omegas(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)

    @classmethod
    def parse(cls, text: str) -> "FrequencyGrid":
        """Parse ``MIN:MAX:STEPS``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must look like MIN:MAX:STEPS, got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}: {exc}") from None


@dataclass(frozen=True)
class DistributionSpec:
    """Continuous (Gaussian) or discrete distribution of a hyperfine parameter.

    ``mean``/``values`` are line positions: for the isomer kind the value at
    which a single line peaks, for the magnetic kind the splitting phi of a
    doublet at +-phi.  ``doublet`` selects the magnetic reading for
    ``discrete_list``.
    """

    kind: str
    mean: float = 0.0
    sigma: float = 0.0
    points: int = 64
    values: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    doublet: bool = False

    def __post_init__(self):
        if self.kind not in DISTRIBUTION_KINDS:
            raise ConfigError(f"unknown distribution type {self.kind!r}")
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not (math.isfinite(self.mean) and math.isfinite(self.sigma)):
            raise ConfigError("mean and sigma must be finite")
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if isinstance(self.points, bool) or int(self.points) != self.points or self.points < 1:
            raise ConfigError(f"points must be an integer >= 1, got {self.points!r}")
        object.__setattr__(self, "points", int(self.points))
        if self.kind == "gaussian_magnetic":
            object.__setattr__(self, "doublet", True)
        elif self.kind == "gaussian_isomer":
            object.__setattr__(self, "doublet", False)
        if self.kind == "discrete_list":
            if not self.values or len(self.values) != len(self.weights):
                raise ConfigError("discrete_list needs equally long values and weights")
            if any(w <= 0 for w in self.weights):
                raise ConfigError("discrete weights must be > 0")
            total = math.fsum(self.weights)
            if abs(total - 1) > WEIGHT_TOL:
                raise ConfigError(f"weights sum to {total:.10g}")

    @property
    def continuous(self) -> bool:
        return self.kind != "discrete_list"


Coupling = Union[CollectiveCoupling, CavityParams]
Model = Union[EnsembleSpec, DistributionSpec]


@dataclass(frozen=True)
class Variant:
    """One labelled member of a parameter family (e.g. one sigma of a figure)."""

    label: str
    overrides: tuple[tuple[str, float], ...]

    def __post_init__(self):
        ov = tuple((str(k), float(v)) for k, v in dict(self.overrides).items())
        for k, _ in ov:
            if k not in VARIANT_KEYS:
                raise ConfigError(f"variant key must be one of {VARIANT_KEYS}, got {k!r}")
        object.__setattr__(self, "overrides", ov)


@dataclass(frozen=True)
class ScenarioConfig:
    coupling: Coupling
    model: Model
    grid: FrequencyGrid
    gamma0_neV: float = GAMMA0_NEV
    outputs: tuple[str, ...] = ("spectrum",)
    variants: tuple[Variant, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "variants", tuple(self.variants))
        if not (self.gamma0_neV > 0 and math.isfinite(self.gamma0_neV)):
            raise ConfigError(f"gamma0_neV must be > 0, got {self.gamma0_neV}")
        if not isinstance(self.coupling, (CollectiveCoupling, CavityParams)):
            raise ConfigError("coupling must be direct (J, Gamma) or cavity parameters")
        if not isinstance(self.model, (EnsembleSpec, DistributionSpec)):
            raise ConfigError("model must be an ensemble or a distribution")
        for o in self.outputs:
            if o not in OUTPUT_KINDS:
                raise ConfigError(f"unknown output {o!r}")
        labels = [v.label for v in self.variants]
        if len(set(labels)) != len(labels):
            raise ConfigError("variant labels must be unique")
        for v in self.variants:
            keys = dict(v.overrides)
            if ("sigma" in keys or "mean" in keys) and not isinstance(self.model, DistributionSpec):
                raise ConfigError("sigma/mean variants need a distribution model")
            if ("J" in keys or "Gamma" in keys) and isinstance(self.coupling, CavityParams):
                raise ConfigError("J/Gamma variants need a direct coupling")
            # surfaces invariant violations (negative Gamma/sigma) at load time
            self._apply(v)

    @property
    def resolved_coupling(self) -> CollectiveCoupling:
        if isinstance(self.coupling, CavityParams):
            from .presets import cavity_coupling
            return cavity_coupling(self.coupling)
        return self.coupling

    def _apply(self, variant: Variant) -> "ScenarioConfig":
        ov = dict(variant.overrides)
        coupling, model = self.coupling, self.model
        if "J" in ov or "Gamma" in ov:
            coupling = CollectiveCoupling(ov.get("J", coupling.j), ov.get("Gamma", coupling.gamma_big))
        if "sigma" in ov or "mean" in ov:
            model = replace(model, sigma=ov.get("sigma", model.sigma), mean=ov.get("mean", model.mean))
        return replace(self, coupling=coupling, model=model, variants=(),
                       name=f"{self.name}:{variant.label}" if self.name else variant.label)

    def expand(self) -> list[tuple[str, "ScenarioConfig"]]:
        """``(label, config)`` per variant; a config without variants is its own."""
        if not self.variants:
            return [(self.name or "spectrum", self)]
        return [(v.label, self._apply(v)) for v in self.variants]

    def with_grid(self, grid: FrequencyGrid) -> "ScenarioConfig":
        return replace(self, grid=grid)


# ---------------------------------------------------------------- parsing


def _need(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", path)
    if key not in obj:
        raise ConfigError(f"missing required field {key!r}", path)
    return obj[key]


def _number(raw: Any, path: str, gamma0_neV: float | None = None) -> float:
    """A plain number, or ``{"value": x, "unit": u}`` when a gamma0 scale is known."""
    if isinstance(raw, dict) and gamma0_neV is not None:
        val = _number(_need(raw, "value", path), path + ".value")
        unit = _need(raw, "unit", path)
        try:
            return convert_units(val, unit, gamma0_neV, raw.get("moment_neV_per_T"))
        except ConfigError as exc:
            raise ConfigError(str(exc), path) from None
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"expected a number, got {raw!r}", path)
    if not math.isfinite(raw):
        raise ConfigError("value must be finite", path)
    return float(raw)


def _complex(raw: Any, path: str) -> complex:
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise ConfigError("complex numbers are [re, im]", path)
        return complex(_number(raw[0], path + "[0]"), _number(raw[1], path + "[1]"))
    return complex(_number(raw, path))


def _wrap(path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError as exc:
        if exc.path:
            raise
        raise ConfigError(str(exc), path) from None


def _parse_coupling(raw, path, g0) -> Coupling:
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", path)
    if "cavity" in raw:
        cav = raw["cavity"]
        p = path + ".cavity"
        return _wrap(p, CavityParams,
                     _number(_need(cav, "delta_c", p), p + ".delta_c", g0),
                     _number(_need(cav, "kappa", p), p + ".kappa", g0),
                     _number(_need(cav, "amplitude", p), p + ".amplitude"))
    return _wrap(path, CollectiveCoupling,
                 _number(_need(raw, "J", path), path + ".J", g0),
                 _number(_need(raw, "Gamma", path), path + ".Gamma", g0))


def _parse_transition(raw, path, g0) -> Transition:
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", path)
    det = _number(_need(raw, "detuning", path), path + ".detuning", g0)
    dip_raw = raw.get("dipole", [[1, 0], [0, 0]])
    if not isinstance(dip_raw, list) or len(dip_raw) != 2:
        raise ConfigError("dipole must be a list of two complex components", path + ".dipole")
    dip = tuple(_complex(c, f"{path}.dipole[{i}]") for i, c in enumerate(dip_raw))
    if "channels" in raw:
        ch = raw["channels"]
        if not isinstance(ch, list):
            raise ConfigError("channels must be a list", path + ".channels")
        rates = [_number(c, f"{path}.channels[{i}]", g0) for i, c in enumerate(ch)]
        return _wrap(path, Transition.from_channels, det, rates, dip)
    gamma = _number(raw.get("gamma", 1.0), path + ".gamma", g0)
    return _wrap(path, Transition, det, gamma, dip)


def _parse_model(raw, path, g0) -> Model:
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", path)
    present = [k for k in ("ensemble", "distribution") if k in raw]
    if len(present) != 1:
        raise ConfigError("model needs exactly one of 'ensemble' or 'distribution'", path)
    if present[0] == "ensemble":
        subs_raw = raw["ensemble"]
        p = path + ".ensemble"
        if not isinstance(subs_raw, list):
            raise ConfigError("expected a list of sub-ensembles", p)
        subs = []
        for i, s in enumerate(subs_raw):
            sp = f"{p}[{i}]"
            weight = _number(_need(s, "weight", sp), sp + ".weight")
            tr_raw = _need(s, "transitions", sp)
            if not isinstance(tr_raw, list):
                raise ConfigError("expected a list", sp + ".transitions")
            trs = tuple(_parse_transition(t, f"{sp}.transitions[{k}]", g0)
                        for k, t in enumerate(tr_raw))
            subs.append(_wrap(sp, SubEnsemble, weight, trs))
        return _wrap(p, EnsembleSpec, tuple(subs))
    d = raw["distribution"]
    p = path + ".distribution"
    kind = _need(d, "type", p)
    values = d.get("values", [])
    weights = d.get("weights", [])
    if not isinstance(values, list) or not isinstance(weights, list):
        raise ConfigError("values and weights must be lists", p)
    points = d.get("points", 64)
    if isinstance(points, bool) or not isinstance(points, int):
        raise ConfigError(f"points must be an integer, got {points!r}", p + ".points")
    return _wrap(p, DistributionSpec, kind,
                 _number(d.get("mean", 0.0), p + ".mean", g0),
                 _number(d.get("sigma", 0.0), p + ".sigma", g0),
                 points,
                 tuple(_number(v, f"{p}.values[{i}]", g0) for i, v in enumerate(values)),
                 tuple(_number(w, f"{p}.weights[{i}]") for i, w in enumerate(weights)),
                 bool(d.get("doublet", False)))


def config_from_dict(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object")
    g0 = _number(doc.get("gamma0_neV", GAMMA0_NEV), "gamma0_neV")
    if g0 <= 0:
        raise ConfigError("must be > 0", "gamma0_neV")
    coupling = _parse_coupling(_need(doc, "coupling", ""), "coupling", g0)
    model = _parse_model(_need(doc, "model", ""), "model", g0)
    graw = _need(doc, "grid", "")
    steps = _need(graw, "steps", "grid")
    if isinstance(steps, bool) or not isinstance(steps, int):
        raise ConfigError(f"steps must be an integer, got {steps!r}", "grid.steps")
    grid = _wrap("grid", FrequencyGrid,
                 _number(_need(graw, "min", "grid"), "grid.min", g0),
                 _number(_need(graw, "max", "grid"), "grid.max", g0), steps)
    outputs = doc.get("outputs", ["spectrum"])
    if not isinstance(outputs, list) or not all(isinstance(o, str) for o in outputs):
        raise ConfigError("expected a list of strings", "outputs")
    variants = []
    for i, v in enumerate(doc.get("variants", [])):
        vp = f"variants[{i}]"
        label = _need(v, "label", vp)
        ov = tuple((k, _number(x, f"{vp}.{k}", g0)) for k, x in v.items() if k != "label")
        variants.append(_wrap(vp, Variant, str(label), ov))
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ConfigError("expected a string", "name")
    return _wrap("", ScenarioConfig, coupling, model, grid, g0, tuple(outputs),
                 tuple(variants), name)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc)


def _cplx(c: complex) -> list[float]:
    return [c.real, c.imag]


def config_to_dict(cfg: ScenarioConfig) -> dict:
    doc: dict[str, Any] = {}
    if cfg.name:
        doc["name"] = cfg.name
    doc["gamma0_neV"] = cfg.gamma0_neV
    c = cfg.coupling
    if isinstance(c, CavityParams):
        doc["coupling"] = {"cavity": {"delta_c": c.delta_c, "kappa": c.kappa,
                                      "amplitude": c.amplitude}}
    else:
        doc["coupling"] = {"J": c.j, "Gamma": c.gamma_big}
    m = cfg.model
    if isinstance(m, EnsembleSpec):
        doc["model"] = {"ensemble": [
            {"weight": s.weight,
             "transitions": [{"detuning": t.detuning, "gamma": t.linewidth,
                              "dipole": [_cplx(t.dipole[0]), _cplx(t.dipole[1])]}
                             for t in s.transitions]}
            for s in m.sub_ensembles]}
    else:
        dist: dict[str, Any] = {"type": m.kind, "mean": m.mean, "sigma": m.sigma,
                                "points": m.points}
        if m.kind == "discrete_list":
            dist.update(values=list(m.values), weights=list(m.weights), doublet=m.doublet)
        doc["model"] = {"distribution": dist}
    doc["grid"] = {"min": cfg.grid.min, "max": cfg.grid.max, "steps": cfg.grid.steps}
    doc["outputs"] = list(cfg.outputs)
    if cfg.variants:
        doc["variants"] = [{"label": v.label, **dict(v.overrides)} for v in cfg.variants]
    return doc


def dump_config(cfg: ScenarioConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2)
