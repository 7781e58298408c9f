"""Command-line front end.

Commands: ``check``, ``field``, ``kmatrices``, ``gramian`` and ``steer``.
Exit status is 0 whenever the analysis ran (whatever the verdict) and 1
on bad input or numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from .config import AnalysisConfig, ConfigError
from .controllability import ControllabilityReport, analyze, gramian, k_matrices, rank_test
from .errors import ModelError, NumericalError
from .maneuver import ManeuverResult, default_steps, simulate_maneuver
from .model import magnetic_field

DEFAULT_X0 = (0.05, 0.05, 0.05, 1e-4, 1e-4, 1e-4)

FIELD_COLUMNS = ("t", "b1", "b2", "b3")
KMATRIX_COLUMNS = ("t", "s1", "s2", "s3", "s4", "s5", "s6", "rank")
STEER_COLUMNS = ("t", "q1", "q2", "q3", "w1", "w2", "w3", "m1", "m2", "m3")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# -- command bodies (pure; return data) ----------------------------------------

def cmd_check(cfg: AnalysisConfig) -> ControllabilityReport:
    return analyze(cfg.inertia_tensor, cfg.orbit_config,
                   rank_tol=cfg.numerics.rank_tol, nodes=cfg.numerics.gramian_nodes)


def cmd_field(cfg: AnalysisConfig, samples: int = 100, orbits: int = 1) -> list[tuple]:
    if samples < 2:
        raise ValueError(f"--samples must be >= 2, got {samples}")
    if orbits < 1:
        raise ValueError(f"--orbits must be >= 1, got {orbits}")
    orbit = cfg.orbit_config
    times = np.linspace(0.0, orbits * orbit.period, samples * orbits + 1)
    rows = []
    for t in times:
        b = magnetic_field(orbit, t)
        rows.append((t, b.b1, b.b2, b.b3))
    return rows


def sweep_times(cfg: AnalysisConfig, sweep: int) -> np.ndarray:
    """``sweep`` equispaced times over one orbit, endpoint excluded."""
    if sweep < 1:
        raise ValueError(f"--sweep must be >= 1, got {sweep}")
    return np.arange(sweep) * (cfg.orbit_config.period / sweep)


def cmd_kmatrices(cfg: AnalysisConfig, times) -> list[tuple]:
    j, orbit = cfg.inertia_tensor, cfg.orbit_config
    rows = []
    for t in times:
        res = rank_test(k_matrices(j, orbit, float(t)), cfg.numerics.rank_tol)
        rows.append((float(t), *res.singular_values, res.rank))
    return rows


def cmd_gramian(cfg: AnalysisConfig, orbits: int = 1) -> dict:
    orbit = cfg.orbit_config
    nodes = (cfg.numerics.gramian_nodes - 1) * orbits + 1
    g = gramian(cfg.inertia_tensor, orbit, 0.0, orbits * orbit.period, nodes)
    return {
        "t0": 0.0,
        "tf": orbits * orbit.period,
        "nodes": nodes,
        "gramian": g.matrix.tolist(),
        "eigenvalues": g.eigenvalues.tolist(),
        "ratio": g.ratio,
    }


def cmd_steer(cfg: AnalysisConfig, x0=DEFAULT_X0, orbits: int = 1) -> ManeuverResult:
    j, orbit = cfg.inertia_tensor, cfg.orbit_config
    tf = orbits * orbit.period
    steps = default_steps(orbit, 0.0, tf, cfg.numerics.steps_per_orbit)
    nodes = (cfg.numerics.gramian_nodes - 1) * orbits + 1
    return simulate_maneuver(j, orbit, np.asarray(x0, dtype=float), 0.0, tf, steps,
                             nodes=nodes)


def steer_rows(result: ManeuverResult) -> list[tuple]:
    return [(t, *x, *m) for t, x, m in zip(result.times, result.states, result.controls)]


def format_report(report: ControllabilityReport) -> str:
    sv = ", ".join(f"{v:.4e}" for v in report.k_rank.singular_values)
    eigs = ", ".join(f"{v:.4e}" for v in report.gramian_eigs)
    return "\n".join([
        f"cond1 residual (J33 - J22):             {report.cond1_residual:.6g}",
        f"cond2 residual:                         {report.cond2_residual:.6g}",
        f"equatorial orbit:                       {report.equatorial}",
        f"rank [K0|K1|K2] at w0 t = pi/2:         {report.k_rank.rank} "
        f"(tol {report.k_rank.tolerance_used:.3e})",
        f"  singular values:                      {sv}",
        f"6x6 minor determinant:                  {report.submatrix_det:.6e}",
        f"closed-form bracket:                    {report.closed_form_det_factor:.6e}",
        f"Gramian eigenvalues (one orbit):        {eigs}",
        f"Gramian lambda_min/lambda_max:          {report.gramian_ratio:.4e}",
        f"verdict:                                {report.verdict.value}",
    ])


# -- argument handling -----------------------------------------------------------

def _x0(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--x0 needs six numbers, got {text!r}") from None
    if len(values) != 6 or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"--x0 needs six finite numbers, got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file (default: built-in)")
    common.add_argument("--output", type=Path, help="write the result here instead of stdout")
    common.add_argument("--rank-tol", type=float, help="relative SVD rank tolerance")
    common.add_argument("--steps-per-orbit", type=int, help="RK4 steps per orbit")
    common.add_argument("--gramian-nodes", type=int, help="Simpson nodes per orbit (odd)")

    parser = argparse.ArgumentParser(
        prog="magctrb",
        description="Controllability of magnetically actuated spacecraft attitude.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="full controllability report")
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("field", parents=[common], help="dipole field samples as CSV")
    p.add_argument("--samples", type=int, default=100, help="samples per orbit")
    p.add_argument("--orbits", type=int, default=1)

    p = sub.add_parser("kmatrices", parents=[common],
                       help="singular values and rank of [K0|K1|K2] as CSV")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--time", type=float, help="single evaluation time, s")
    group.add_argument("--sweep", type=int, help="number of times over one orbit")

    p = sub.add_parser("gramian", parents=[common], help="controllability Gramian as JSON")
    p.add_argument("--orbits", type=int, default=1)

    p = sub.add_parser("steer", parents=[common], help="minimum-energy steering as CSV")
    p.add_argument("--x0", type=_x0, default=DEFAULT_X0,
                   help="initial state 'q1,q2,q3,w1,w2,w3'")
    p.add_argument("--orbits", type=int, default=1)
    return parser


def _load(args) -> AnalysisConfig:
    cfg = config_mod.load(args.config) if args.config else config_mod.default()
    return cfg.with_numerics(rank_tol=args.rank_tol,
                             steps_per_orbit=args.steps_per_orbit,
                             gramian_nodes=args.gramian_nodes)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        output.write_text(text)


def _run(args) -> None:
    cfg = _load(args)
    if args.command == "check":
        report = cmd_check(cfg)
        machine = json.dumps(report.to_dict(), indent=2)
        if args.json:
            _emit(machine, args.output)
        else:
            print(format_report(report))
            if args.output is not None:
                _emit(machine, args.output)
    elif args.command == "field":
        _emit(to_csv(FIELD_COLUMNS, cmd_field(cfg, args.samples, args.orbits)), args.output)
    elif args.command == "kmatrices":
        if args.sweep is not None:
            times = sweep_times(cfg, args.sweep)
        else:
            times = [cfg.orbit_config.t_c if args.time is None else args.time]
        _emit(to_csv(KMATRIX_COLUMNS, cmd_kmatrices(cfg, times)), args.output)
    elif args.command == "gramian":
        if args.orbits < 1:
            raise ValueError(f"--orbits must be >= 1, got {args.orbits}")
        _emit(json.dumps(cmd_gramian(cfg, args.orbits), indent=2), args.output)
    elif args.command == "steer":
        if args.orbits < 1:
            raise ValueError(f"--orbits must be >= 1, got {args.orbits}")
        result = cmd_steer(cfg, args.x0, args.orbits)
        _emit(to_csv(STEER_COLUMNS, steer_rows(result)), args.output)
        summary = (f"final_norm_ratio={_fmt(result.final_norm_ratio)} "
                   f"energy={_fmt(result.energy)}")
        print(summary, file=sys.stdout if args.output is not None else sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _run(args)
    except (ConfigError, ModelError, NumericalError, ValueError, OSError) as err:
        print(f"magctrb {args.command}: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
