"""Command-line entry point.

    kpo run --experiment <name> [--set key=value]... [--out DIR]
            [--workers N] [--smoke] [--config FILE]
    kpo list

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from numpy.linalg import LinAlgError

from .csvio import format_number
from .errors import ConfigError, KposimError
from .experiments import list_experiments, run_experiment, validate_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _parse_set(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        try:
            out[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            out[key.strip()] = raw
    return out


def _cmd_list() -> int:
    for name, description, defaults in list_experiments():
        print(f"{name}: {description}")
        knobs = ", ".join(
            f"{k}={format_number(v) if isinstance(v, (int, float)) else v}"
            for k, v in sorted(defaults.items())
        )
        print(f"    defaults: {knobs}")
    return EXIT_OK


def _cmd_run(args) -> int:
    raw: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = validate_config(fh.read())
            raw = {
                "experiment": cfg.experiment,
                "overrides": dict(cfg.overrides),
                "out_dir": cfg.out_dir,
                "workers": cfg.workers,
                "smoke": cfg.smoke,
            }
    if args.experiment:
        raw["experiment"] = args.experiment
    overrides = dict(raw.get("overrides", {}))
    overrides.update(_parse_set(args.set or []))
    raw["overrides"] = overrides
    if args.out is not None:
        raw["out_dir"] = args.out
    if args.workers is not None:
        raw["workers"] = args.workers
    if args.smoke:
        raw["smoke"] = True
    raw.setdefault("out_dir", "results")
    cfg = validate_config(raw)
    paths = run_experiment(cfg)
    for path in paths:
        print(path)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kpo", description="KPO reflection-tomography sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment and write its CSV dataset(s)")
    run_p.add_argument("--experiment", help="experiment name (see `kpo list`)")
    run_p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one configuration key (repeatable)")
    run_p.add_argument("--out", help="output directory (default: results)")
    run_p.add_argument("--workers", type=int, help="worker processes for independent sweep points")
    run_p.add_argument("--smoke", action="store_true", help="coarse grids for a quick run")
    run_p.add_argument("--config", help="JSON configuration file; flags override it")

    sub.add_parser("list", help="list experiments with their default parameters")

    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        return _cmd_run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KposimError, FloatingPointError, LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
