"""Command line entry point: ``analyze``, ``simulate``, ``sweep`` and ``r0``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config
from .equilibria import (FULL_LABELS, REDUCED_LABELS, Equilibrium, EquilibriumError, Existence,
                         e2_cubic, e4_cubic, e5_cubic, eq_all, eq_reduced)
from .integrate import IntegrationError, IntegratorConfig, integrate, integrate_reduced
from .model import PARAM_NAMES, InvalidParamsError, boundedness_constants
from .polynomials import PolynomialError, roots
from .stability import StabilityConsistencyError, UndefinedR0Error, classify, r0

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

NUMERIC_ERRORS = (IntegrationError, EquilibriumError, StabilityConsistencyError,
                  PolynomialError, FloatingPointError, ZeroDivisionError)


def _error_object(exc: Exception) -> dict:
    return {"error": {"type": type(exc).__name__, "message": str(exc)}}


def _equilibria(cfg: ScenarioConfig) -> list[Equilibrium]:
    return eq_reduced(cfg.params) if cfg.disease_free else eq_all(cfg.params)


def _cubic_summary(poly_fn, params) -> dict:
    try:
        poly = poly_fn(params)
        found = roots(poly)
    except (PolynomialError, EquilibriumError) as exc:
        return _error_object(exc)
    return {"coeffs": list(poly.coeffs), "roots": [[z.real, z.imag] for z in found.roots]}


def build_report(cfg: ScenarioConfig, timestamp: str | None = None) -> dict:
    """Equilibria with stability, R0, implicit cubics and the boundedness constants."""
    params = cfg.params
    entries = []
    for eq in _equilibria(cfg):
        entry = eq.to_dict()
        entry["stability"] = None
        if eq.exists is Existence.EXISTS:
            # re-verify at report level
            if eq.residual is None or eq.residual >= 1e-6:
                raise EquilibriumError(f"{eq.label} residual {eq.residual} fails re-verification")
            try:
                entry["stability"] = classify(params, eq).to_dict()
            except StabilityConsistencyError as exc:
                entry["stability"] = _error_object(exc)
        entries.append(entry)

    if cfg.disease_free:
        r0_entry = None
        cubics = {"E^2": _cubic_summary(e2_cubic, params)}
    else:
        try:
            r0_entry = r0(params).to_dict()
        except UndefinedR0Error as exc:
            r0_entry = _error_object(exc)
        cubics = {"E2": _cubic_summary(e2_cubic, params),
                  "E4": _cubic_summary(e4_cubic, params),
                  "E5": _cubic_summary(e5_cubic, params)}
    try:
        mu, eta = boundedness_constants(params)
        bounded = {"mu": mu, "eta": eta, "bound": eta / mu}
    except ValueError as exc:
        bounded = _error_object(exc)

    return {
        "tool": "ecoepi",
        "version": __version__,
        "timestamp": timestamp,
        "scenario": cfg.label,
        "model": "disease-free" if cfg.disease_free else "full",
        "params": params.as_dict(),
        "r0": r0_entry,
        "equilibria": entries,
        "cubics": cubics,
        "boundedness": bounded,
    }


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".ecoepi-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def cmd_analyze(cfg: ScenarioConfig, out_path: str, stamp: bool = False) -> dict:
    timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if stamp else None
    report = build_report(cfg, timestamp)
    _atomic_write(out_path, json.dumps(report, indent=2, allow_nan=False) + "\n")
    return report


def _integrator_config(cfg: ScenarioConfig) -> IntegratorConfig:
    return IntegratorConfig(t_end=cfg.t_end, rtol=cfg.rtol, atol=cfg.atol,
                            output_stride=cfg.output_stride)


def run_simulation(cfg: ScenarioConfig):
    runner = integrate_reduced if cfg.disease_free else integrate
    return runner(cfg.params, cfg.initial, _integrator_config(cfg))


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def cmd_simulate(cfg: ScenarioConfig, out_path: str) -> None:
    traj = run_simulation(cfg)
    lines = [",".join(("t",) + traj.columns)]
    for t, row in zip(traj.times, traj.states):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in row]))
    _atomic_write(out_path, "\n".join(lines) + "\n")


def _label_summary(params, eqs: list[Equilibrium], label: str) -> tuple[str, str]:
    group = [e for e in eqs if e.label == label]
    if not group:
        return Existence.NO_ROOT.value, ""
    existing = [e for e in group if e.exists is Existence.EXISTS]
    if not existing:
        return group[0].exists.value, ""
    verdicts = []
    for e in existing:
        try:
            verdicts.append(classify(params, e).verdict.value)
        except StabilityConsistencyError:
            verdicts.append("error")
    return Existence.EXISTS.value, ";".join(verdicts)


def sweep_point(cfg: ScenarioConfig, name: str, value: float) -> list[str]:
    """One CSV row of a parameter sweep."""
    params = cfg.params.replace(**{name: value})
    point = ScenarioConfig(params, cfg.s0, cfg.i0, cfg.v0, cfg.p0, cfg.t_end, cfg.rtol,
                           cfg.atol, cfg.output_stride, cfg.disease_free, cfg.label)
    row = [_fmt(value)]
    if cfg.disease_free:
        row.append("")
    else:
        try:
            row.append(_fmt(r0(params).value))
        except UndefinedR0Error:
            row.append("")
    eqs = _equilibria(point)
    for label in (REDUCED_LABELS if cfg.disease_free else FULL_LABELS):
        row.extend(_label_summary(params, eqs, label))
    traj = run_simulation(point)
    v_index = 1 if cfg.disease_free else 2
    row.append("" if traj.converged_to is None else _fmt(traj.converged_to[v_index]))
    return row


def _sweep_task(args):
    return sweep_point(*args)


def sweep_header(cfg: ScenarioConfig, name: str) -> list[str]:
    header = [name, "r0"]
    for label in (REDUCED_LABELS if cfg.disease_free else FULL_LABELS):
        header += [f"{label}_exists", f"{label}_verdict"]
    return header + ["v_limit"]


def cmd_sweep(cfg: ScenarioConfig, name: str, lo: float, hi: float, steps: int, out_path: str,
              jobs: int | None = None) -> list[list[str]]:
    if name not in PARAM_NAMES:
        raise ConfigError(f"unknown parameter {name!r}")
    if steps < 2:
        raise ConfigError("steps must be at least 2")
    grid = [float(x) for x in np.linspace(lo, hi, steps)]
    for value in grid:
        try:
            cfg.params.replace(**{name: value})
        except InvalidParamsError as exc:
            raise ConfigError(f"{name} = {value}: {exc}") from None
    tasks = [(cfg, name, value) for value in grid]
    jobs = jobs if jobs is not None else min(steps, os.cpu_count() or 1)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(t) for t in tasks]
    lines = [",".join(sweep_header(cfg, name))] + [",".join(r) for r in rows]
    _atomic_write(out_path, "\n".join(lines) + "\n")
    return rows


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecoepi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="equilibria, stability and R0 as a JSON report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--timestamp", action="store_true",
                   help="record the wall-clock time (makes the output non-reproducible)")

    p = sub.add_parser("simulate", help="integrate the model and write a CSV time series")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="scan one parameter over a grid")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="lo", type=float, required=True)
    p.add_argument("--to", dest="hi", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: one per CPU)")

    p = sub.add_parser("r0", help="print the basic reproduction number")
    p.add_argument("--config", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
        if args.command == "analyze":
            cmd_analyze(cfg, args.out, args.timestamp)
        elif args.command == "simulate":
            cmd_simulate(cfg, args.out)
        elif args.command == "sweep":
            cmd_sweep(cfg, args.param, args.lo, args.hi, args.steps, args.out, args.jobs)
        elif args.command == "r0":
            print(json.dumps(r0(cfg.params).to_dict()))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UndefinedR0Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
