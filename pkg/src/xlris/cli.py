"""Command-line entry point: ``xlris <converge|dist-sweep|elem-sweep|baseline> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, Mode, load_config
from .experiments import (run_baseline, run_convergence, run_distance_sweep, run_element_sweep)
from .output import emit_outputs

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3

log = logging.getLogger("xlris")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="TOML scenario file (empty file = built-in defaults)")
    common.add_argument("--seed", type=int, help="base seed; trial t uses seed + t")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
    common.add_argument("--mode", help="continuous | discrete:<b> | stochastic | ff | nojam")
    common.add_argument("--out", default="results", help="output directory (default: results)")
    common.add_argument("--full-scale", action="store_true", help="64x8 RIS and 8 BS antennas")
    common.add_argument("--workers", type=int, help="parallel worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="xlris", description="Secrecy-rate optimization for XL-RIS links")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("converge", parents=[common], help="per-sweep rate, jamming vs no jamming")
    d = sub.add_parser("dist-sweep", parents=[common], help="rate vs eavesdropper radius (NF and FF)")
    d.add_argument("--radii", help="comma-separated radii in meters")
    e = sub.add_parser("elem-sweep", parents=[common], help="rate vs number of RIS elements")
    e.add_argument("--n1", help="comma-separated horizontal RIS sizes")
    sub.add_parser("baseline", parents=[common], help="single-point baseline (default: stochastic)")
    return p


def _floats(text, name):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--{name} expects comma-separated numbers") from None
    if not vals:
        raise ConfigError(f"--{name} is empty")
    return vals


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.scenario, full_scale=args.full_scale)
        over = {}
        if args.seed is not None:
            over["seed"] = args.seed
        if args.trials is not None:
            over["trials"] = args.trials
        if args.workers is not None:
            over["workers"] = args.workers
        mode = Mode.parse(args.mode) if args.mode else None
        if mode is not None:
            over["mode"] = mode
        cfg = cfg.replace(**over) if over else cfg
        if args.command == "converge":
            results = run_convergence(cfg)
        elif args.command == "dist-sweep":
            radii = _floats(args.radii, "radii") if args.radii else None
            if radii is not None and any(r <= 0 for r in radii):
                raise ConfigError("radii must be positive")
            results = run_distance_sweep(cfg, radii, scheme=mode)
            alt = cfg.sweep.alt_eve_azimuth
            if abs(alt - cfg.geometry.eve_polar[1]) > 1e-12:
                results += run_distance_sweep(cfg, radii, eve_azimuth=alt, scheme=mode, far_field=False)
        elif args.command == "elem-sweep":
            n1 = [int(x) for x in _floats(args.n1, "n1")] if args.n1 else None
            if n1 is not None and any(n < 1 for n in n1):
                raise ConfigError("--n1 values must be >= 1")
            results = run_element_sweep(cfg, n1, [mode] if mode else None)
        else:
            results = [run_baseline(cfg, mode)]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = emit_outputs(results, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        log.info("wrote %s", path)
    skipped = sum(r.total_skipped for r in results)
    if skipped:
        log.warning("%d trial(s) skipped as infeasible", skipped)
    if all(r.all_infeasible for r in results):
        print("all trials infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
