"""
Command-line front end.

::

    cavityswap simulate   [--config PATH] [--protocol P] [--out DIR] [--assert]
    cavityswap scan       [--config PATH] [--axis NAME=v1,v2,...] [--workers N] [--out DIR]
    cavityswap darkstates [--config PATH] [--protocol P] [--out DIR] [--assert]
    cavityswap estimate   --intensity W_PER_CM2 --tp SECONDS

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 acceptance threshold violated (only with ``--assert``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .darkstates import TrackingError, analyze_step, roles_for_step
from .gateanalysis import evaluate_gate, parameter_scan, physical_estimates, scan_csv
from .hilbert import StateVector, build_basis
from .propagator import PropagationError, Trajectory, default_grid, propagate
from .pulses import PROTOCOLS, schedule_diagnostics

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ASSERT = 0, 2, 3, 4

# thresholds checked by --assert
DARK_KERNEL_TOL = 1e-10
DARK_OVERLAP_MIN = 0.999
DARK_GEOMETRIC_TOL = 1e-4


def _fmt(x: float) -> str:
    return repr(float(x))


def trajectory_csv(traj: Trajectory, schedule, *, partial: bool = False) -> str:
    """CSV text: ``t/Tp``, one population column per recorded label, one
    ``Omega*Tp[name]`` column per pulse. Populations are dimensionless,
    times are in Tp, Rabi frequencies are in 1/Tp."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    labels = traj.labels
    pulses = schedule.pulses
    w.writerow(["t/Tp"] + labels + [f"Omega*Tp[{p.name}]" for p in pulses] + (["status"] if partial else []))
    if traj.times.size:
        pops = traj.populations
        t_p = schedule.t_p
        env = np.array([p.envelope(traj.times) for p in pulses]).reshape(len(pulses), traj.times.size)
        for k, t in enumerate(traj.times):
            row = [_fmt(t / t_p)] + [_fmt(v) for v in pops[k]] + [_fmt(v * t_p) for v in env[:, k]]
            w.writerow(row + (["partial"] if partial else []))
    return buf.getvalue()


def _partial_trajectory(err: PropagationError, basis) -> Trajectory | None:
    if err.times is None or err.samples is None or err.active is None:
        return None
    # first batch column corresponds to the single simulated state
    block = err.samples[..., 0] if err.samples.ndim == 3 else err.samples
    pops = np.abs(np.nan_to_num(block)) ** 2
    labels = [basis.states[i].label for i, p in zip(err.active, pops.max(axis=0, initial=0)) if p > 1e-6]
    return Trajectory(basis, np.asarray(err.times), np.asarray(err.active), pops,
                      np.sqrt(pops.sum(axis=1)), StateVector(basis, np.zeros(basis.dim, complex)), labels)


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if getattr(args, "protocol", None):
        data = cfg.to_dict()
        data["protocol"] = args.protocol
        cfg = RunConfig.from_dict(data)
    return cfg


def _basis_for(cfg: RunConfig, schedule):
    include_u = schedule.requires_u if cfg.include_u is None else cfg.include_u
    if schedule.requires_u and not include_u:
        raise ConfigError("field 'include_u': the schedule drives |u> but include_u is false")
    try:
        return build_basis(cfg.n_max, include_u=include_u)
    except ValueError as exc:
        raise ConfigError(f"field 'n_max': {exc}") from None


def _schedule_for(cfg: RunConfig):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        schedule = cfg.build_schedule()
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    report = schedule_diagnostics(schedule)
    for flag in report.flags:
        print(f"warning: {flag}", file=sys.stderr)
    return schedule, report


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    schedule, report = _schedule_for(cfg)
    basis = _basis_for(cfg, schedule)
    psi0 = cfg.initial_state(basis)
    try:
        grid = default_grid(schedule, cfg.dt, cfg.stride)
    except ValueError as exc:
        raise ConfigError(f"field 'dt'/'stride': {exc}") from None
    out = Path(args.out)
    stem = args.name or schedule.protocol
    try:
        traj = propagate(psi0, schedule, grid, cfg.loss)
        result = evaluate_gate(schedule, cfg.target_name, cfg.loss, grid, cfg.n_max, basis=basis)
    except PropagationError as exc:
        partial = _partial_trajectory(exc, basis)
        if partial is not None:
            path = _write(out, f"{stem}_trajectory.csv", trajectory_csv(partial, schedule, partial=True))
            print(f"partial trajectory written to {path}", file=sys.stderr)
        print(f"error: integration aborted at t={exc.t}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    _write(out, f"{stem}_trajectory.csv", trajectory_csv(traj, schedule))
    final = {lbl: float(traj.final.population(lbl)) for lbl in traj.labels}
    payload = {
        "tool": "cavityswap",
        "version": __version__,
        "units": {"time": "Tp", "rates": "1/Tp"},
        "config": cfg.to_dict(),
        "schedule": schedule.to_dict(),
        "diagnostics": {
            "ok": report.ok,
            "flags": list(report.flags),
            "omega_max_tp": report.omega_max_tp,
            "g_tp": report.g_tp,
            "steps": [{"label": s.label, "ordering_ok": s.ordering_ok, "delay": s.delay,
                       "overlap_with_next": s.overlap_with_next} for s in report.steps],
            "dt": grid.h,
            "n_steps": grid.n_steps,
        },
        "trajectory": {
            "initial": cfg.initial,
            "final_populations": final,
            "final_norm": float(traj.final.norm),
            "max_e_population": float(traj.excited_population.max()),
            "max_photon_number": float(traj.photon_number.max()),
        },
        "gate": result.to_dict(),
    }
    _write(out, f"{stem}_gate.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"{schedule.protocol}: fidelity vs {result.target} = {result.fidelity:.6f}, "
          f"max leakage = {result.max_leakage:.3e}, max e = {result.max_e_population:.4f}, "
          f"max n = {result.max_photon_number:.4f}")
    if args.assert_ and result.fidelity < cfg.fidelity_threshold:
        print(f"assertion failed: fidelity {result.fidelity:.6f} < {cfg.fidelity_threshold}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def _parse_axis(text: str) -> tuple[str, list[float]]:
    name, _, values = text.partition("=")
    if not name or not _:
        raise ConfigError(f"--axis {text!r}: expected NAME=v1,v2,...")
    try:
        return name.strip(), [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--axis {text!r}: values must be numbers") from None


def cmd_scan(args) -> int:
    cfg = _load_config(args)
    axes = dict(cfg.scan)
    for text in args.axis or []:
        name, values = _parse_axis(text)
        axes[name] = values
    data = cfg.to_dict()
    data["scan"] = axes
    cfg = RunConfig.from_dict(data)
    base = cfg.schedule_params
    base["phases"] = cfg.phases
    workers = args.workers or cfg.workers
    rows = parameter_scan(cfg.protocol, axes, cfg.loss, cfg.target_name, workers, **base)
    path = _write(Path(args.out), args.name or f"{cfg.protocol}_scan.csv", scan_csv(rows, axes))
    failures = [r for r in rows if r["status"] != "ok"]
    print(f"{len(rows)} points written to {path} ({len(failures)} failed)")
    if args.assert_ and any(r["status"] == "ok" and r["fidelity"] < cfg.fidelity_threshold for r in rows):
        return EXIT_ASSERT
    return EXIT_OK


def cmd_darkstates(args) -> int:
    cfg = _load_config(args)
    schedule, _ = _schedule_for(cfg)
    basis = _basis_for(cfg, schedule)
    steps = []
    violations = []
    for k, step in enumerate(schedule.steps):
        try:
            roles_for_step(step)
        except ValueError as exc:
            steps.append({"step": step.label, "skipped": str(exc)})
            continue
        try:
            analysis = analyze_step(schedule, k, basis)
        except TrackingError as exc:
            print(f"error: dark-state tracking failed in step {step.label} at t={exc.t}: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        d = analysis.to_dict()
        steps.append(d)
        if max(d["kernel_residual_dark7"], d["kernel_residual_dark16"]) > DARK_KERNEL_TOL:
            violations.append(f"step {step.label}: kernel residual above {DARK_KERNEL_TOL}")
        for tr in d["tracked"]:
            if tr["end_overlap"] < DARK_OVERLAP_MIN:
                violations.append(f"step {step.label}: {tr['initial']} end overlap {tr['end_overlap']:.6f}")
            if abs(tr["geometric_phase"]) > DARK_GEOMETRIC_TOL:
                violations.append(f"step {step.label}: {tr['initial']} geometric phase {tr['geometric_phase']:.3e}")
    payload = {"tool": "cavityswap", "version": __version__, "units": {"time": "Tp", "rates": "1/Tp"},
               "config": cfg.to_dict(), "steps": steps}
    path = _write(Path(args.out), args.name or f"{schedule.protocol}_darkstates.json",
                  json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"{len(steps)} steps analysed, report written to {path}")
    for v in violations:
        print(f"violation: {v}", file=sys.stderr)
    if args.assert_ and violations:
        return EXIT_ASSERT
    return EXIT_OK


def cmd_estimate(args) -> int:
    try:
        est = physical_estimates(args.intensity, args.tp, args.gamma)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    d = est.to_dict()
    width = max(map(len, d))
    for k, v in d.items():
        print(f"{k:<{width}}  {v:.4g}")
    if args.assert_ and not (math.isfinite(est.adiabatic_ratio) and est.adiabatic_ratio > 1):
        return EXIT_ASSERT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavityswap",
                                     description="Cavity-mediated adiabatic SWAP/CNOT gate simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, outputs=True):
        p.add_argument("--config", metavar="PATH", help="JSON run configuration")
        p.add_argument("--protocol", choices=PROTOCOLS, help="override the configured protocol")
        p.add_argument("--assert", dest="assert_", action="store_true",
                       help="exit with code 4 when an acceptance threshold is violated")
        if outputs:
            p.add_argument("--out", metavar="DIR", default=".", help="output directory")
            p.add_argument("--name", help="output file name (stem for simulate)")

    p = sub.add_parser("simulate", help="propagate one initial state and evaluate the gate")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="gate metrics over a parameter grid")
    common(p)
    p.add_argument("--axis", action="append", metavar="NAME=V1,V2,...",
                   help="scan axis (repeatable); overrides the config's scan entry")
    p.add_argument("--workers", type=int, help="process-pool size")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("darkstates", help="dark-state kernel, gap and phase report per step")
    common(p)
    p.set_defaults(func=cmd_darkstates)

    p = sub.add_parser("estimate", help="helium order-of-magnitude estimates")
    p.add_argument("--intensity", type=float, required=True, help="laser intensity in W/cm^2")
    p.add_argument("--tp", type=float, required=True, help="pulse duration Tp in seconds")
    p.add_argument("--gamma", type=float, default=1e7, help="excited-state decay rate in 1/s")
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PropagationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TrackingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
