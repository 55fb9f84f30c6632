"""Command-line entry point: ``cogmap {plan,simulate,ensemble,calibrate}``.

Exit status is 0 on success, 1 for configuration problems and 2 for
numerical failures (unstable integration, diverging predictor training).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import io, planner, scenarios, sim
from .core import AVUS, COUS
from .defaults import DEFAULTS, merged
from .errors import (ConfigError, InvalidScenario, LearningDiverged, NoPath, TemplateInfeasible,
                     UnstableIntegration)
from .lattice import LatticeParams, measure_front_speed

_TEMPLATE_FIELDS = {f.name for f in dataclasses.fields(scenarios.ScenarioTemplate)} - {"family"}


def _parser():
    p = argparse.ArgumentParser(prog="cogmap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            src = sp.add_mutually_exclusive_group(required=True)
            src.add_argument("--scenario", help="scenario file")
            src.add_argument("--template", choices=scenarios.FAMILIES, help="scenario family")
            sp.add_argument("--mode", choices=(AVUS, COUS, "both"), default="both")
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--segment", choices=scenarios.SEGMENTS, default="center",
                            help="door segment holding the target (templates only)")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a default or template parameter (repeatable)")
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit the generated-at header line from outputs")

    common(sub.add_parser("plan", help="build maps and trace paths"))
    common(sub.add_parser("simulate", help="plan and execute among pedestrians"))
    ens = sub.add_parser("ensemble", help="run a seeded ensemble and compare strategies")
    common(ens)
    ens.add_argument("--runs", type=int, default=20)
    ens.add_argument("--workers", type=int, default=1)
    cal = sub.add_parser("calibrate", help="measure the empty-lattice front speed")
    common(cal, scenario=False)
    cal.add_argument("--sizes", type=int, nargs="+", default=[80, 120])
    return p


def _overrides(pairs, template):
    cfg, tpl = {}, {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if template and key in _TEMPLATE_FIELDS:
            tpl[key] = value
        elif key in DEFAULTS:
            cfg[key] = value
        else:
            raise ConfigError(f"unknown parameter {key!r}")
    try:
        cfg = merged(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, tpl


def _template(args, tpl):
    text = "\n".join([f"template = {args.template}", f"seed = {args.seed}",
                      f"segment = {args.segment}"] + [f"{k} = {v}" for k, v in tpl.items()])
    return io.parse_template(text)


def _scenario(args, cfg, tpl):
    if args.scenario:
        return io.load_scenario(args.scenario, cfg)
    return scenarios.generate(_template(args, tpl))


def _modes(args):
    return (AVUS, COUS) if args.mode == "both" else (args.mode,)


def _open(out, name):
    return open(os.path.join(out, name), "w", encoding="utf-8", newline="")


def _cmd_plan(args, cfg, tpl):
    sc = _scenario(args, cfg, tpl)
    for mode in _modes(args):
        cmap = planner.build_map(sc, mode, cfg)
        with _open(args.out, f"map_{mode}.txt") as fh:
            io.dump_map(cmap, fh)
        try:
            path = planner.trace(cmap, sc.target, cfg["descent_step"], sc.nav_tolerance)
        except NoPath as exc:
            print(f"{mode}: no path ({exc})")
            continue
        traj = planner.to_world_trajectory(path, sc, cfg["execution_timing"], v_w=cmap.v_w)
        with _open(args.out, f"path_{mode}.csv") as fh:
            io.stamp(fh, not args.no_timestamp)
            io.write_csv(fh, io.PATH_HEADER, io.path_rows(traj))
        print(f"{mode}: omega={cmap.omega_count} cells, path {path.length:.3f} m")
    return sc


def _cmd_simulate(args, cfg, tpl):
    from .metrics import evaluate
    sc = _scenario(args, cfg, tpl)
    rows = []
    for k, mode in enumerate(_modes(args)):
        res = sim.simulate(sc, mode, cfg)
        with _open(args.out, f"map_{mode}.txt") as fh:
            io.dump_map(res.cmap, fh)
        if res.completed or res.t is not None:
            with _open(args.out, f"trajectories_{mode}.csv") as fh:
                io.stamp(fh, not args.no_timestamp)
                io.write_csv(fh, io.TRAJECTORY_HEADER, io.trajectory_rows(res))
        with _open(args.out, f"events_{mode}.csv") as fh:
            io.stamp(fh, not args.no_timestamp)
            io.write_csv(fh, io.EVENT_HEADER, res.events)
        met = evaluate(res, cfg["d_crt"]) if res.completed else None
        rec = sim.RunRecord(0, sc.seed, mode, args.segment if args.template else "", res.completed,
                            res.cause, met, res.collisions, res.cmap.omega_count)
        rows.append(rec.row())
        summary = f"L={met.L:.4f} S={met.S:.4f} E={met.E:.4f}" if met else res.cause
        print(f"{mode}: {summary}, collisions={res.collisions}")
    with _open(args.out, "metrics.csv") as fh:
        io.stamp(fh, not args.no_timestamp)
        io.write_csv(fh, io.METRICS_HEADER, rows)
    return sc


def _cmd_ensemble(args, cfg, tpl):
    if args.runs < 1:
        raise ConfigError("--runs must be >= 1")
    if not args.template:
        raise ConfigError("ensemble needs --template")
    template = _template(args, tpl)
    records = sim.run_ensemble(template, args.runs, args.seed, _modes(args), cfg, args.workers)
    with _open(args.out, "runs.csv") as fh:
        io.stamp(fh, not args.no_timestamp)
        io.write_csv(fh, io.METRICS_HEADER, [r.row() for r in records])
    stats = sim.ensemble_stats(records)
    with _open(args.out, "stats.csv") as fh:
        io.write_stats(fh, stats, timestamp=not args.no_timestamp)
    for row in stats.summary():
        print("{:<2} {:<5} mean={:.4f} std={:.4f} n={}".format(*row))
    for name, p in sorted(stats.p_values().items()):
        print(f"p({name}) = {p:.4g}")


def _cmd_calibrate(args, cfg, tpl):
    params = LatticeParams.from_config(cfg)
    with _open(args.out, "calibration.txt") as fh:
        io.stamp(fh, not args.no_timestamp)
        fh.write("n v_w_cells_per_tau\n")
        for n in args.sizes:
            v = measure_front_speed(n, params)
            fh.write(f"{n} {v!r}\n")
            print(f"n={n}: v_w = {v:.5f} cells per mental time unit")


_COMMANDS = {"plan": _cmd_plan, "simulate": _cmd_simulate, "ensemble": _cmd_ensemble,
             "calibrate": _cmd_calibrate}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg, tpl = _overrides(args.set, getattr(args, "template", None))
        os.makedirs(args.out, exist_ok=True)
        with _open(args.out, "params.txt") as fh:
            io.write_params(fh, cfg, timestamp=not args.no_timestamp)
        _COMMANDS[args.command](args, cfg, tpl)
    except (ConfigError, InvalidScenario, TemplateInfeasible, KeyError, OSError) as exc:
        print(f"cogmap: error: {exc}", file=sys.stderr)
        return 1
    except (UnstableIntegration, LearningDiverged) as exc:
        print(f"cogmap: numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
