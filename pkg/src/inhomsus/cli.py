"""Command-line front end.

Exit status: 0 success, 1 oracle tolerance exceeded, 2 invalid request or
config, 3 numerical failure (pole on the grid, unstable integration, ...).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import doublet_modes, doublet_poles, peak_metrics
from .core import (ConfigError, DistributionSpec, EnsembleSpec, FrequencyGrid, ScenarioConfig,
                   config_to_dict, parse_config)
from .distributions import OracleError, discretize_distribution, oracle_max_error
from .dynamics import DriveEnvelope, StepSizeError, integrate_eom, stability_bound
from .presets import PRESET_NAMES, paper_preset
from .response import Spectrum, naive_lamb_chi, sweep
from .svg import line_chart

ORACLE_TOL = 1e-8


def _g(x: float) -> str:
    return format(float(x), ".17g")


def _cplx(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _safe(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label).strip("_") or "run"


def spectrum_csv(spec: Spectrum) -> str:
    """omega, then re/im per tensor component, then abs2 for scalar runs."""
    if spec.is_scalar:
        cols = [spec.omega, spec.chi.real, spec.chi.imag, spec.abs2]
        head = "omega,re_chi,im_chi,abs2"
    else:
        cols = [spec.omega]
        names = ["omega"]
        for i, a in enumerate("xy"):
            for j, b in enumerate("xy"):
                cols += [spec.chi[:, i, j].real, spec.chi[:, i, j].imag]
                names += [f"re_chi_{a}{b}", f"im_chi_{a}{b}"]
        head = ",".join(names)
    rows = (",".join(_g(v) for v in row) for row in zip(*cols))
    return head + "\n" + "\n".join(rows) + "\n"


def metrics_dict(spec: Spectrum) -> dict:
    m = peak_metrics(spec)
    return {"argmax": m.argmax, "peak": m.peak, "fwhm": m.fwhm, "asymmetry": m.asymmetry,
            "minima": [list(x) for x in m.minima]}


def load_request(args) -> ScenarioConfig:
    if bool(args.preset) == bool(args.config):
        raise ConfigError("give exactly one of --preset or --config")
    if args.preset:
        cfg = paper_preset(args.preset)
    else:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", str(args.config)) from None
        cfg = parse_config(text)
    if getattr(args, "grid", None):
        cfg = cfg.with_grid(FrequencyGrid.parse(args.grid))
    return cfg


def _outdir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory: {exc.strerror}", str(out)) from None
    return out


def _envelope(command: str, cfg: ScenarioConfig | None, started: float, **extra) -> dict:
    doc = {"tool": "inhomsus", "version": __version__, "command": command}
    if cfg is not None:
        doc["config"] = config_to_dict(cfg)
    doc.update(extra)
    doc["wall_clock_s"] = round(time.perf_counter() - started, 6)
    return doc


def _write_json(path: Path, doc: dict):
    path.write_text(json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------- commands


def cmd_spectrum(args) -> int:
    t0 = time.perf_counter()
    cfg = load_request(args)
    out = _outdir(args)
    runs = cfg.expand()
    files, metrics, series = {}, {}, []
    for label, sub in runs:
        spec = sweep(sub, workers=args.threads)
        fname = "spectrum.csv" if not cfg.variants else f"spectrum_{_safe(label)}.csv"
        (out / fname).write_text(spectrum_csv(spec))
        files[label] = fname
        metrics[label] = metrics_dict(spec)
        series.append((label, spec.omega, spec.abs2))
        if "naive" in cfg.outputs and isinstance(sub.model, EnsembleSpec):
            nv = naive_lamb_chi(sub.model, sub.resolved_coupling, spec.omega)
            nspec = Spectrum(spec.omega, nv[:, 0, 0], label, np.array([1 + 0j, 0j]))
            nname = "naive.csv" if not cfg.variants else f"naive_{_safe(label)}.csv"
            (out / nname).write_text(spectrum_csv(nspec))
    extra = {"data": files, "metrics": metrics}
    if args.svg or "svg" in cfg.outputs:
        (out / "spectrum.svg").write_text(line_chart(series, title=cfg.name))
        extra["svg"] = "spectrum.svg"
    _write_json(out / "result.json", _envelope("spectrum", cfg, t0, **extra))
    print(f"wrote {len(files)} spectrum file(s) to {out}")
    return 0


def cmd_poles(args) -> int:
    t0 = time.perf_counter()
    pp = doublet_poles(args.J, args.Gamma, args.phi, args.gamma)
    doc = {"J": args.J, "Gamma": args.Gamma, "phi": args.phi, "gamma": args.gamma,
           "omega_plus": _cplx(pp.omega_plus), "omega_minus": _cplx(pp.omega_minus)}
    print(json.dumps(doc))
    if args.out:
        _write_json(_outdir(args) / "result.json", _envelope("poles", None, t0, poles=doc))
    return 0


def cmd_modes(args) -> int:
    t0 = time.perf_counter()
    mp = doublet_modes(args.J, args.Gamma, args.phi, args.gamma)
    doc = {"J": args.J, "Gamma": args.Gamma, "phi": args.phi, "gamma": args.gamma,
           "lambda_plus": _cplx(mp.lambda_plus), "lambda_minus": _cplx(mp.lambda_minus),
           "e_plus": [_cplx(c) for c in mp.e_plus], "e_minus": [_cplx(c) for c in mp.e_minus],
           "overlap_plus_minus": float(abs(np.vdot(mp.e_plus, mp.e_minus))),
           "minus_on_symmetric": float(abs(np.vdot(mp.e_minus, np.ones(2) / np.sqrt(2))))}
    print(json.dumps(doc))
    if args.out:
        _write_json(_outdir(args) / "result.json", _envelope("modes", None, t0, modes=doc))
    return 0


def cmd_timedomain(args) -> int:
    t0 = time.perf_counter()
    cfg = load_request(args)
    out = _outdir(args)
    runs = cfg.expand()
    files = {}
    for label, sub in runs:
        model = sub.model
        if isinstance(model, DistributionSpec):
            if model.continuous and model.sigma == 0:
                model = discretize_distribution(DistributionSpec(
                    "discrete_list", values=(model.mean,), weights=(1.0,), doublet=model.doublet))
            else:
                model = discretize_distribution(model)
        coupling = sub.resolved_coupling
        dt = args.dt if args.dt else stability_bound(model, coupling)
        amp = (complex(args.amplitude), 0j)
        if args.drive == "impulse":
            drive = DriveEnvelope("impulse", amp)
        elif args.drive == "rectangular":
            drive = DriveEnvelope("rectangular", amp, duration=args.duration)
        else:
            drive = DriveEnvelope("gaussian_pulse", amp, start=4 * args.width, width=args.width)
        traj = integrate_eom(model, coupling, drive, args.t_max, dt)
        step = max(1, args.stride)
        thin = type(traj)(traj.times[::step], traj.amplitudes[::step], traj.polarization[::step])
        fname = "trajectory.csv" if not cfg.variants else f"trajectory_{_safe(label)}.csv"
        (out / fname).write_text(thin.to_csv())
        files[label] = {"file": fname, "dt": dt, "steps": int(traj.times.size)}
    _write_json(out / "result.json", _envelope("timedomain", cfg, t0, data=files,
                                               drive=args.drive, t_max=args.t_max))
    print(f"wrote {len(files)} trajectory file(s) to {out}")
    return 0


def cmd_preset(args) -> int:
    if args.list or not args.name:
        print("\n".join(PRESET_NAMES))
        return 0
    text = json.dumps(config_to_dict(paper_preset(args.name)), indent=2) + "\n"
    if args.out:
        (_outdir(args) / f"{args.name}.json").write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle_check(args) -> int:
    t0 = time.perf_counter()
    cfg = load_request(args)
    if not isinstance(cfg.model, DistributionSpec) or not cfg.model.continuous:
        raise ConfigError("the oracle check applies to continuous (Gaussian) distributions only")
    report = {}
    worst = 0.0
    for label, sub in cfg.expand():
        if sub.model.sigma == 0:
            report[label] = {"skipped": "sigma = 0 has an exact closed form"}
            print(f"{label}: skipped (sigma = 0)")
            continue
        err = oracle_max_error(sub.model, sub.grid.omegas())
        ok = err <= ORACLE_TOL
        worst = max(worst, err)
        report[label] = {"max_rel_error": err, "pass": ok}
        print(f"{label}: max relative error {err:.3e} {'PASS' if ok else 'FAIL'}")
    passed = worst <= ORACLE_TOL
    if args.out:
        _write_json(_outdir(args) / "result.json",
                    _envelope("oracle-check", cfg, t0, oracle=report, tolerance=ORACLE_TOL,
                              passed=passed))
    return 0 if passed else 1


# ---------------------------------------------------------------- parser


def _add_source(p, grid: bool = True):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=PRESET_NAMES)
    src.add_argument("--config", help="JSON scenario file")
    if grid:
        p.add_argument("--grid", help="frequency grid override MIN:MAX:STEPS")


def _add_doublet(p):
    p.add_argument("--J", type=float, required=True)
    p.add_argument("--Gamma", type=float, required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--out", help="also write result.json here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inhomsus",
                                 description="Collective susceptibility of inhomogeneous ensembles")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="sweep chi/chi0 over a frequency grid")
    _add_source(p)
    p.add_argument("--out", default=".")
    p.add_argument("--svg", action="store_true")
    p.add_argument("--threads", type=int, default=1, help="0 = one per CPU")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("poles", help="poles of the uniform doublet")
    _add_doublet(p)
    p.set_defaults(func=cmd_poles)

    p = sub.add_parser("modes", help="eigenmodes of the uniform doublet")
    _add_doublet(p)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("timedomain", help="integrate the mode equations")
    _add_source(p, grid=False)
    p.add_argument("--out", default=".")
    p.add_argument("--drive", choices=("impulse", "rectangular", "gaussian_pulse"),
                   default="impulse")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--width", type=float, default=0.5)
    p.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--stride", type=int, default=10, help="write every n-th step")
    p.set_defaults(func=cmd_timedomain)

    p = sub.add_parser("preset", help="print a named scenario as JSON")
    p.add_argument("name", nargs="?", choices=PRESET_NAMES)
    p.add_argument("--list", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("oracle-check", help="closed forms against adaptive quadrature")
    _add_source(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle_check)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, StepSizeError, OracleError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
