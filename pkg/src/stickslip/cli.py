"""Command-line frontend.

Three commands: ``simulate`` runs one of the solvers and writes plottable
column files, ``calibrate`` fits model parameters to a measured record, and
``ou-gen`` writes a noise path.  Numbers are emitted at 9 significant digits,
whitespace-separated, so seeded runs are byte-reproducible.

Trajectory files carry columns (t, x, v, friction, b) at indices 0-4;
``--split-phases`` additionally writes one file per stick/slip segment
(``<prefix>_s1.txt``, ``<prefix>_d1.txt``, ...) whose concatenation equals
the unsplit file.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .calibrate import (
    PARAM_NAMES,
    CalibrationProblem,
    FitParams,
    calibrate,
)
from .euler import EulerConfig, simulate_euler
from .events import EngineConfig, MaxSubphasesError, simulate_events
from .model import (
    FrictionParams,
    HarmonicForcing,
    PhaseLabel,
    SampledTemperature,
    TemperatureSeries,
    TemperatureSpringForcing,
    Trajectory,
)
from .noise import SeriesParseError, _parse_columns, load_temperature_series, \
    ou_path, perturbed_temperature
from .quasistatic import simulate_quasistatic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SOLVER = 4

_FMT = "%.9g"


class ConfigError(ValueError):
    pass


def _fmt_row(values) -> str:
    return " ".join(_FMT % v for v in values)


# --------------------------------------------------------------------------
# Trajectory / event file IO
# --------------------------------------------------------------------------

def write_trajectory(path: Path, traj: Trajectory, header: bool = False) -> None:
    with open(path, "w") as fh:
        if header:
            fh.write("# t x v friction b\n")
        for i in range(len(traj)):
            fh.write(_fmt_row((traj.t[i], traj.x[i], traj.v[i],
                               traj.friction[i], traj.b[i])) + "\n")


def write_events(path: Path, traj: Trajectory, header: bool = False) -> None:
    with open(path, "w") as fh:
        if header:
            fh.write("# time kind position epsilon\n")
        for e in traj.events:
            fh.write(f"{_FMT % e.time} {e.kind.value} {_FMT % e.position} "
                     f"{e.epsilon:d}\n")


def write_split_segments(prefix: Path, traj: Trajectory,
                         header: bool = False) -> list[Path]:
    """One file per consecutive same-phase segment, numbered per phase."""
    paths = []
    counts = {PhaseLabel.STATIC: 0, PhaseLabel.DYNAMIC: 0}
    tag = {PhaseLabel.STATIC: "s", PhaseLabel.DYNAMIC: "d"}
    i = 0
    n = len(traj)
    while i < n:
        phase = traj.phase_at(i)
        j = i
        while j < n and traj.phase[j] == traj.phase[i]:
            j += 1
        counts[phase] += 1
        path = prefix.with_name(f"{prefix.name}_{tag[phase]}{counts[phase]}.txt")
        with open(path, "w") as fh:
            if header:
                fh.write("# t x v friction b\n")
            for k in range(i, j):
                fh.write(_fmt_row((traj.t[k], traj.x[k], traj.v[k],
                                   traj.friction[k], traj.b[k])) + "\n")
        paths.append(path)
        i = j
    return paths


def read_trajectory(path: Path) -> Trajectory:
    """Parse a trajectory column file back; phase is inferred from the
    stick signature v = 0 and friction = b."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append([float(tok) for tok in line.split()])
    data = np.array(rows)
    if data.ndim != 2 or data.shape[1] != 5:
        raise SeriesParseError(0, "expected 5 columns (t x v friction b)")
    t, x, v, fr, b = data.T
    static = (v == 0.0) & (fr == b)
    phase = np.where(static, PhaseLabel.STATIC.value,
                     PhaseLabel.DYNAMIC.value).astype(np.int8)
    return Trajectory(t=t, x=x, v=v, friction=fr, b=b, phase=phase)


# --------------------------------------------------------------------------
# Argument handling
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stickslip",
        description="Stick/slip friction oscillator simulation and calibration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a solver and write column files")
    sim.add_argument("--config", type=Path, help="key=value defaults file")
    sim.add_argument("--solver", choices=("euler", "events", "quasistatic"),
                     default="events")
    sim.add_argument("--forcing", choices=("shaw", "thermal"), default="thermal")
    sim.add_argument("--m", type=float, default=1.0)
    sim.add_argument("--fd", type=float, default=1.0)
    sim.add_argument("--fs", type=float, default=1.2)
    sim.add_argument("--alpha", type=float, default=0.0)
    sim.add_argument("--beta", type=float, default=6.0,
                     help="forcing amplitude (shaw) or dilatation (thermal)")
    sim.add_argument("--K", type=float, default=1.0, help="spring stiffness (thermal)")
    sim.add_argument("--omega", type=float, default=0.25,
                     help="forcing angular frequency")
    sim.add_argument("--x0", type=float, default=0.0)
    sim.add_argument("--t-end", type=float, required=True)
    sim.add_argument("--h", type=float, help="euler step size")
    sim.add_argument("--rho", type=float, default=0.0,
                     help="noise amplitude on the thermal cosine")
    sim.add_argument("--ou-dt", type=float,
                     help="noise path spacing (default: h for euler, else 0.01)")
    sim.add_argument("--temps", type=Path,
                     help="sampled temperature file (time, temperature)")
    sim.add_argument("--record-every", type=int, default=1)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", type=Path, required=True)
    sim.add_argument("--split-phases", action="store_true")
    sim.add_argument("--header", action="store_true")

    cal = sub.add_parser("calibrate", help="fit parameters to a record")
    cal.add_argument("--config", type=Path)
    cal.add_argument("--data", type=Path, nargs="+", required=True,
                     help="3-column (t, T, z) file, or two 2-column files")
    cal.add_argument("--bounds", type=Path, required=True,
                     help="file of lines: name lo hi")
    cal.add_argument("--budget", type=int, default=20000)
    cal.add_argument("--restarts", type=int, default=1)
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--kbp", type=float, default=2.0e6,
                     help="bearing-point shear stiffness")
    cal.add_argument("--shear-force", choices=("friction", "zero"),
                     default="friction")
    cal.add_argument("--out", type=Path, required=True)
    cal.add_argument("--header", action="store_true")

    ou = sub.add_parser("ou-gen", help="write an Ornstein-Uhlenbeck path")
    ou.add_argument("--config", type=Path)
    ou.add_argument("--n", type=int, required=True)
    ou.add_argument("--dt", type=float, required=True)
    ou.add_argument("--seed", type=int, default=0)
    ou.add_argument("--out", type=Path, required=True)
    ou.add_argument("--header", action="store_true")
    return parser


def _merge_config(argv: list[str]) -> list[str]:
    """Prepend key=value file entries as flags; explicit flags win."""
    if "--config" not in argv:
        return argv
    try:
        cfg_path = Path(argv[argv.index("--config") + 1])
    except IndexError:
        raise ConfigError("--config requires a file path")
    if not cfg_path.exists():
        raise ConfigError(f"config file not found: {cfg_path}")
    extra: list[str] = []
    for raw in cfg_path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"malformed config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "1") and key in (
                "split-phases", "split_phases", "header"):
            extra.append(flag)
        elif value.lower() in ("false", "no", "0") and key in (
                "split-phases", "split_phases", "header"):
            continue
        else:
            extra.extend([flag, value])
    return [argv[0]] + extra + argv[1:]


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _build_thermal_forcing(args) -> TemperatureSpringForcing:
    if args.temps is not None:
        if not args.temps.exists():
            raise SeriesParseError(0, f"temperature file not found: {args.temps}")
        with open(args.temps) as fh:
            series = load_temperature_series(fh)
        return TemperatureSpringForcing(K=args.K, beta=args.beta,
                                        T=SampledTemperature(series))
    ou_dt = args.ou_dt if args.ou_dt else (args.h if args.solver == "euler"
                                           and args.h else 0.01)
    n = int(math.ceil(args.t_end / ou_dt)) + 2
    path = ou_path(n, ou_dt, args.seed)
    return TemperatureSpringForcing(
        K=args.K, beta=args.beta,
        T=perturbed_temperature(args.omega, args.rho, path))


def run_simulate(args) -> int:
    p = FrictionParams(m=args.m, f_d=args.fd, f_s=args.fs)
    if args.forcing == "shaw":
        if args.solver == "quasistatic":
            raise ConfigError("quasistatic solver requires thermal forcing")
        forcing = HarmonicForcing(beta=args.beta, Omega=args.omega,
                                  alpha=args.alpha)
    else:
        forcing = _build_thermal_forcing(args)

    if args.solver == "euler":
        if not args.h:
            raise ConfigError("euler solver requires --h")
        cfg = EulerConfig(h=args.h, n_steps=int(round(args.t_end / args.h)),
                          record_every=args.record_every)
        traj = simulate_euler(args.x0, forcing, p, cfg)
    elif args.solver == "events":
        traj = simulate_events(args.x0, forcing, p, EngineConfig(t_end=args.t_end))
    else:
        traj = simulate_quasistatic(args.x0, forcing, p, args.t_end)

    out: Path = args.out
    write_trajectory(out.with_name(out.name + ".txt"), traj, header=args.header)
    write_events(out.with_name(out.name + ".events.txt"), traj,
                 header=args.header)
    if args.split_phases:
        write_split_segments(out, traj, header=args.header)
    return EXIT_OK


def _load_record(paths: list[Path]) -> tuple[TemperatureSeries, np.ndarray]:
    for path in paths:
        if not path.exists():
            raise SeriesParseError(0, f"data file not found: {path}")
    if len(paths) == 1:
        with open(paths[0]) as fh:
            t, temp, z = _parse_columns(fh, 3)
        if np.any(np.diff(t) <= 0):
            raise SeriesParseError(0, "times must be strictly increasing")
        return TemperatureSeries(t, temp), z
    if len(paths) == 2:
        with open(paths[0]) as fh:
            temps = load_temperature_series(fh)
        with open(paths[1]) as fh:
            displ = load_temperature_series(fh)
        if len(temps.times) != len(displ.times) or \
                not np.array_equal(temps.times, displ.times):
            raise SeriesParseError(0, "temperature and displacement times differ")
        return temps, displ.temps
    raise ConfigError("--data takes one 3-column file or two 2-column files")


def _load_bounds(path: Path) -> dict[str, tuple[float, float]]:
    if not path.exists():
        raise SeriesParseError(0, f"bounds file not found: {path}")
    bounds: dict[str, tuple[float, float]] = {}
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").replace("=", " ").split()
        if len(parts) != 3:
            raise SeriesParseError(line_no, f"expected 'name lo hi': {raw!r}")
        name = parts[0]
        if name not in PARAM_NAMES:
            raise SeriesParseError(
                line_no, f"unknown parameter {name!r} (expected {PARAM_NAMES})")
        try:
            bounds[name] = (float(parts[1]), float(parts[2]))
        except ValueError:
            raise SeriesParseError(line_no, f"non-numeric bound in {raw!r}")
    return bounds


def run_calibrate(args) -> int:
    temps, displs = _load_record(args.data)
    bounds = _load_bounds(args.bounds)
    out: Path = args.out

    results = []
    for r in range(args.restarts):
        prob = CalibrationProblem(temps=temps, displs=displs, bounds=bounds,
                                  K_BP=args.kbp, budget=args.budget,
                                  seed=args.seed + r,
                                  shear_force=args.shear_force)
        results.append(calibrate(prob))

    with open(out.with_name(out.name + ".fit.txt"), "w") as fh:
        if args.header:
            fh.write("# run z0 K f_d f_s beta residual\n")
        for r, res in enumerate(results):
            q = res.params
            fh.write(f"{r} " + _fmt_row((q.z0, q.K, q.f_d, q.f_s, q.beta,
                                         res.residual)) + "\n")
    best = min(results, key=lambda res: res.residual)
    with open(out.with_name(out.name + ".best.txt"), "w") as fh:
        for name, value in zip(PARAM_NAMES, best.params):
            fh.write(f"{name}={_FMT % value}\n")
        fh.write(f"residual={_FMT % best.residual}\n")
        fh.write(f"evaluations={best.evaluations}\n")
    with open(out.with_name(out.name + ".history.txt"), "w") as fh:
        if args.header:
            fh.write("# eval best_residual\n")
        for i, value in enumerate(best.history):
            fh.write(f"{i} {_FMT % value}\n")
    return EXIT_OK


def run_ou_gen(args) -> int:
    path = ou_path(args.n, args.dt, args.seed)
    out: Path = args.out
    with open(out.with_name(out.name + ".txt"), "w") as fh:
        if args.header:
            fh.write("# t v\n")
        for t, v in zip(path.times(), path.values):
            fh.write(_fmt_row((t, v)) + "\n")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _merge_config(argv)
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK

    try:
        if args.command == "simulate":
            return run_simulate(args)
        if args.command == "calibrate":
            return run_calibrate(args)
        return run_ou_gen(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SeriesParseError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MaxSubphasesError as exc:
        print(f"solver diagnostic: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entrypoint() -> None:
    sys.exit(main())
