"""Command-line interface: ``zwitter <subcommand> [options]``.

Exit codes: 0 success, 1 failed validation or a simulation error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .grid import GridError, make_grid
from .potentials import parse_potential

log = logging.getLogger("zwitter")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "doubleslit": dict(grid="256x256", extent_z=32.0, potential="quartic:omega=0,lambda=0.01",
                       gamma=[0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2],
                       dt=2e-3, horizon=3.0),
    "groundstate": dict(grid="64x64", extent_z=10.0, potential="quartic:omega=1,lambda=0.1",
                        gamma=[0.2], dt=4e-3, horizon=40.0),
    "scan-gamma": dict(grid="64x64", extent_z=10.0, potential="quartic:omega=1,lambda=0.1",
                       gamma=[0.0, 0.05, 0.1, 0.15, 0.2, 0.3], dt=4e-3, horizon=40.0),
    "doublewell": dict(grid="96x96", extent_z=8.0, potential="double_well:a=1,b=4",
                       gamma=[0.0, 0.05, 0.1, 0.15, 0.2, 0.25], dt=4e-3, horizon=40.0),
    "evolve": dict(grid="256x256", extent_z=20.0, potential="quartic:omega=1,lambda=0.1",
                   gamma=[0.0], dt=1e-3, horizon=5.0),
    "validate": dict(grid="64x64", extent_z=10.0, potential="free", gamma=[0.0], dt=1e-3, horizon=1.0),
}


class UsageError(ValueError):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", help="lattice size NZxNP")
    p.add_argument("--extent-z", type=float, help="box length in z")
    p.add_argument("--potential", help='e.g. "quartic:omega=1,lambda=0.1" or "double_well:a=1,b=4"')
    p.add_argument("--gamma", type=float, action="append", help="mixing angle in [0, pi/2]; repeatable")
    p.add_argument("--dt", type=float, help="time step")
    p.add_argument("--horizon", type=float,
                   help="evolution time (averaging window for ground-state runs)")
    p.add_argument("--out", default="zwitter-out", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed for bootstrap and random test states")
    p.add_argument("--snapshots", type=int, default=0, metavar="N",
                   help="write a ZWIT snapshot every N steps (evolve only)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", dest="table_format")
    p.add_argument("--no-plots", action="store_true", help="skip SVG figures")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zwitter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("doubleslit", help="double-slit marginals and visibility against gamma")
    _common(p)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--width", type=float, default=0.4)
    p.add_argument("--oracle", action="store_true", help="also run the Schrodinger oracle")

    for name, text in (("groundstate", "zwitter ground state and its energy statistics"),
                       ("scan-gamma", "ground-state statistics over gamma with power-law fits"),
                       ("doublewell", "energy width against the tunnelling splitting")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--relaxation", type=float, default=10.0, help="time before averaging starts")
        p.add_argument("--scheme", choices=("strang", "yoshida4"), default="yoshida4")

    p = sub.add_parser("evolve", help="evolve a Gaussian packet and record diagnostics")
    _common(p)
    p.add_argument("--z0", type=float, default=1.5)
    p.add_argument("--p0", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=math.sqrt(0.5))
    p.add_argument("--scheme", choices=("strang", "yoshida4"), default="strang")
    p.add_argument("--report-every", type=int, default=100)

    from .experiments.checks import SUITES
    p = sub.add_parser("validate", help="run an acceptance suite and print a JSON verdict")
    _common(p)
    p.add_argument("suite", nargs="?", default="quick", choices=sorted(SUITES))
    return parser


def _config(args):
    from .experiments.config import ExperimentConfig, parse_grid

    d = DEFAULTS[args.command]
    try:
        n_z, n_p = parse_grid(args.grid or d["grid"])
        pot = parse_potential(args.potential or d["potential"])
        cfg = ExperimentConfig(
            kind=args.command, n_z=n_z, n_p=n_p,
            z_extent=args.extent_z if args.extent_z is not None else d["extent_z"],
            potential=pot, gammas=tuple(args.gamma or d["gamma"]),
            horizon=args.horizon if args.horizon is not None else d["horizon"],
            dt=args.dt if args.dt is not None else d["dt"], out=args.out, seed=args.seed,
            snapshots=args.snapshots, table_format=args.table_format)
        grid = make_grid(cfg.n_z, cfg.n_p, cfg.z_extent)
    except (ValueError, GridError) as exc:
        raise UsageError(str(exc)) from None
    return cfg, grid


def _cmd_doubleslit(args, cfg, grid) -> int:
    from .experiments.config import write_table
    from .experiments.doubleslit import DoubleSlitConfig, run_double_slit, schrodinger_profile

    ds = DoubleSlitConfig(cfg.n_z, cfg.n_p, cfg.z_extent, cfg.potential, cfg.gammas, cfg.horizon, cfg.dt,
                          args.separation, args.width)
    profiles = run_double_slit(ds)
    oracle = schrodinger_profile(ds) if args.oracle else None
    out, prov = Path(cfg.out), cfg.provenance()
    rows = [[p.gamma, p.visibility, p.spacing if p.spacing is not None else float("nan")] for p in profiles]
    if oracle:
        rows.append(["schrodinger", oracle.visibility, oracle.spacing or float("nan")])
    write_table(out / "fringes", ["gamma", "visibility", "fringe_spacing"], rows, prov, cfg.table_format)
    write_table(out / "marginals", ["z", *(f"gamma={p.gamma:.6g}" for p in profiles)],
                np.column_stack([grid.z, *(p.marginal for p in profiles)]).tolist(), prov, cfg.table_format)
    if not args.no_plots:
        from .plotting import plot_marginals
        plot_marginals(profiles, out / "marginals.svg", oracle)
    for p in profiles:
        print(f"gamma={p.gamma:.4f} visibility={p.visibility:.5f}")
    return EXIT_OK


SPECTRO_COLUMNS = ["gamma", "mean_energy", "width", "shift", "E0", "f1", "f2", "stationary", "window_drift",
                   "n_z", "n_p", "z_extent", "dt", "scheme", "relaxation", "window"]


def _spectro_rows(results):
    return [[r.as_row()[c] for c in SPECTRO_COLUMNS] for r in results]


def _cmd_groundstate(args, cfg, grid) -> int:
    from .experiments.config import write_table
    from .experiments.spectroscopy import zwitter_ground_state
    from .snapshot import write_snapshot

    rho, res = zwitter_ground_state(grid, cfg.potential, cfg.gammas[0], relaxation=args.relaxation,
                                    window=cfg.horizon, dt=cfg.dt, scheme=args.scheme)
    out = Path(cfg.out)
    write_table(out / "groundstate", SPECTRO_COLUMNS, _spectro_rows([res]), cfg.provenance(), cfg.table_format)
    write_snapshot(out / "rho_q.zwit", rho)
    print(json.dumps({k: res.as_row()[k] for k in ("gamma", "mean_energy", "width", "shift", "stationary")}))
    return EXIT_OK


def _cmd_scan(args, cfg, grid) -> int:
    from .experiments.config import write_table, write_text_atomic
    from .experiments.spectroscopy import FitError, scan_gamma

    out = Path(cfg.out)
    try:
        results, fits = scan_gamma(grid, cfg.potential, cfg.gammas, relaxation=args.relaxation,
                                   window=cfg.horizon, dt=cfg.dt, scheme=args.scheme)
    except FitError as exc:
        raise UsageError(str(exc)) from None
    write_table(out / "scan", SPECTRO_COLUMNS, _spectro_rows(results), cfg.provenance(), cfg.table_format)
    write_text_atomic(out / "fit.json", json.dumps({k: vars(v) for k, v in fits.items()}, indent=2))
    if not args.no_plots:
        from .plotting import plot_scaling
        plot_scaling(results, fits.get("width"), out / "scaling.svg")
    print(json.dumps({k: vars(v) for k, v in fits.items()}))
    return EXIT_OK


def _cmd_doublewell(args, cfg, grid) -> int:
    from .experiments.config import write_table, write_text_atomic
    from .experiments.spectroscopy import run_double_well_proximity

    out = Path(cfg.out)
    try:
        rep = run_double_well_proximity(grid, cfg.potential, cfg.gammas, seed=cfg.seed,
                                        relaxation=args.relaxation, window=cfg.horizon, dt=cfg.dt,
                                        scheme=args.scheme)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_table(out / "doublewell", ["gamma", "width", "splitting", "ratio"],
                [[g, w, rep.splitting, r] for g, w, r in zip(rep.gammas, rep.widths, rep.ratios)],
                cfg.provenance(), cfg.table_format)
    summary = {"E0": rep.E0, "E1": rep.E1, "splitting": rep.splitting, "crossing_gamma": rep.crossing_gamma,
               "crossing_uncertainty": rep.crossing_uncertainty}
    write_text_atomic(out / "crossing.json", json.dumps(summary, indent=2))
    if not args.no_plots:
        from .plotting import plot_double_well
        plot_double_well(rep, out / "doublewell.svg")
    print(json.dumps(summary))
    return EXIT_OK


def _cmd_evolve(args, cfg, grid) -> int:
    from .evolution import PropagatorConfig, evolve
    from .experiments.config import write_table
    from .observables import quantum_expectation
    from .operators import Hamiltonian, PQ, XQ
    from .state import gaussian_packet, pure_state_density
    from .transforms import quantum_position_distribution, quantum_transform

    out = Path(cfg.out)
    _, psi_c = pure_state_density(gaussian_packet(grid, args.z0, args.p0, args.sigma))
    h = Hamiltonian(cfg.potential)
    observers = {"H_Q": lambda f: quantum_expectation(f, h), "X_Q": lambda f: quantum_expectation(f, XQ),
                 "P_Q": lambda f: quantum_expectation(f, PQ)}
    pcfg = PropagatorConfig(cfg.gammas[0], cfg.dt, args.scheme)
    final, report = evolve(psi_c, cfg.potential, pcfg, cfg.horizon, observers, report_every=args.report_every,
                           snapshot_every=cfg.snapshots, snapshot_dir=out / "snapshots")
    write_table(out / "trace", report.columns(), report.rows(), cfg.provenance(), cfg.table_format)
    z, marginal = quantum_position_distribution(quantum_transform(final))
    write_table(out / "marginal", ["z", "probability_density"], zip(z, marginal), cfg.provenance(),
                cfg.table_format)
    if not args.no_plots:
        from .plotting import plot_trace
        plot_trace(report, out / "trace.svg")
    print(f"t={report.time[-1]:.6g} norm={report.norm[-1]:.12f} H_Q={report.observables['H_Q'][-1]:.10f}")
    return EXIT_OK


def _cmd_validate(args, cfg, grid) -> int:
    from .experiments.checks import to_json, validate
    from .experiments.config import write_text_atomic

    verdict = validate(args.suite)
    text = to_json(verdict)
    write_text_atomic(Path(cfg.out) / f"validate-{args.suite}.json", text)
    print(text)
    return EXIT_OK if verdict["passed"] else EXIT_FAIL


COMMANDS = {"doubleslit": _cmd_doubleslit, "groundstate": _cmd_groundstate, "scan-gamma": _cmd_scan,
            "doublewell": _cmd_doublewell, "evolve": _cmd_evolve, "validate": _cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, grid = _config(args)
        return COMMANDS[args.command](args, cfg, grid)
    except UsageError as exc:
        print(f"zwitter {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError) as exc:
        # StateError, BoundaryMassError and RealityError land here
        print(f"zwitter {args.command}: simulation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
