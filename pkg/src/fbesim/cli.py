"""Command-line front end: scenario files in, tables and CSV files out.

Exit codes: 0 success, 1 scenario/config validation error, 2 I/O error,
3 internal assertion.  All diagnostics go to stderr; result tables go to
stdout.  Identical invocations (flags, files, seed) produce byte-identical
output files.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import analytic, experiments, sim
from .configfile import parse_scenario_file
from .core import SchemeKind, validate_scenario
from .errors import (ConfigFileError, FbeError, ScenarioValidationError,
                     SimulationIntegrityError)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


def _add_common(p: argparse.ArgumentParser, *, frames=True, out=True) -> None:
    if frames:
        p.add_argument("--frames", type=int, default=None,
                       help="frames per replication (overrides the scenario file)")
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument("--replications", type=int, default=None)
        p.add_argument("--workers", type=int, default=None,
                       help="parallel replication workers (default: cpu count)")
    if out:
        p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--quiet", action="store_true",
                   help="suppress progress output (results are unaffected)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fbesim",
        description="Frame-based channel access: blocking analysis and simulation")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form blocking table for a scenario")
    p.add_argument("--config", type=Path, required=True)
    _add_common(p, frames=False, out=False)

    p = sub.add_parser("simulate", help="simulate one scenario")
    p.add_argument("--config", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser("sweep", help="axis sweep over a scenario")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--axis", choices=("q", "n_configs", "p0"), required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated axis values, e.g. 2,3,4")
    _add_common(p)

    p = sub.add_parser("reproduce", help="run a figure-reproduction preset")
    p.add_argument("preset", choices=experiments.PRESET_NAMES)
    _add_common(p)
    return ap


def _print_analytic(spec, result) -> None:
    print(f"scheme={spec.scheme.value} q={len(spec.transmitters)}")
    if result.p_c is not None:
        att = result.per_ue_attempts[0]
        print(f"p0={spec.transmitters[0].p0:g} attempts={'inf' if att is None else att}")
        print(f"p_c={result.p_c:.6f} P_trans={result.p_trans:.6f} "
              f"P_failure={result.p_failure:.6f}")
        return
    for i, tx in enumerate(spec.transmitters):
        att = result.per_ue_attempts[i]
        rank = f" rank={tx.priority_rank}" if tx.priority_rank is not None else ""
        print(f"ue={i}{rank} p0={tx.p0:g} attempts={'inf' if att is None else att} "
              f"p_c={result.per_ue_pc[i]:.6f} P_failure={result.per_ue_failure[i]:.6f}")


def _print_sim(merged: sim.SimResult) -> None:
    print(f"frames={merged.frames_simulated} replications={len(merged.seeds)}")
    print("ue packets tx_success drops p_failure_emp ci_low ci_high mean_align_us")
    for u in merged.per_ue:
        print(f"{u.ue_id} {u.packets} {u.tx_success} {u.drops} "
              f"{u.p_failure_emp:.6g} {u.ci_low:.6g} {u.ci_high:.6g} "
              f"{u.mean_alignment_us:.6g}")


def _cmd_analytic(args) -> int:
    spec = parse_scenario_file(args.config)
    validate_scenario(spec)
    _print_analytic(spec, analytic.analyze_spec(spec))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec = parse_scenario_file(args.config)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    scenario = validate_scenario(spec)
    frames = args.frames if args.frames is not None else spec.horizon_frames
    reps = args.replications if args.replications is not None else 1
    seeds = [scenario.seed + r for r in range(reps)]
    merged = experiments.run_replications(scenario, frames, seeds,
                                          workers=args.workers)
    _print_sim(merged)
    if args.out is not None:
        out_rows = experiments.summarize_point(spec, merged, scenario.seed)
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / f"simulate_{spec.scheme.value}.csv"
        experiments.write_csv(out_rows, path)
        if not args.quiet:
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = parse_scenario_file(args.config)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    values: tuple = tuple(
        float(v) if args.axis == "p0" else int(v)
        for v in args.values.split(","))
    sweep = experiments.SweepSpec(
        base_scenario=spec, axis=args.axis, values=values,
        frames_per_point=(args.frames if args.frames is not None
                          else experiments.DEFAULT_FRAMES_PER_POINT),
        replications=(args.replications if args.replications is not None
                      else experiments.DEFAULT_REPLICATIONS))
    rows = experiments.run_sweep(sweep, workers=args.workers)
    out = args.out if args.out is not None else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    tag = f"sweep_{args.axis}"
    csv_path = out / f"{tag}_{spec.scheme.value}.csv"
    experiments.write_csv(rows, csv_path)
    experiments.emit_plot_data(rows, out, tag)
    if not args.quiet:
        print(f"wrote {csv_path}", file=sys.stderr)
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    out = args.out if args.out is not None else Path.cwd() / "reproductions"
    kwargs = {}
    if args.frames is not None:
        kwargs["frames"] = args.frames
    if args.replications is not None:
        kwargs["replications"] = args.replications
    if args.seed is not None:
        kwargs["seed"] = args.seed
    paths = experiments.reproduce(args.preset, out, workers=args.workers,
                                  quiet=args.quiet, **kwargs)
    if not args.quiet:
        for p in paths:
            print(f"wrote {p}", file=sys.stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        stream=sys.stderr, format="%(message)s")
    handlers = {
        "analytic": _cmd_analytic,
        "simulate": _cmd_simulate,
        "sweep": _cmd_sweep,
        "reproduce": _cmd_reproduce,
    }
    try:
        return handlers[args.command](args)
    except (ScenarioValidationError, ConfigFileError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AssertionError, SimulationIntegrityError, FbeError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
