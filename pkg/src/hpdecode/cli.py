"""Command line entry point: ``hpdecode <subcommand> --config FILE``.

Exit codes: 0 success, 2 invalid input, 3 capacity exceeded, 4 precondition
failure. Errors are reported on stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import config as cfgmod
from . import runner
from .errors import CapacityError, HPError, InvalidInputError, PreconditionError

SUBCOMMANDS = ("exact", "membrane", "mc", "predict", "sweep", "fit")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hpdecode", description="Hayden-Preskill decoding-error experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS[:-1]:
        sp = sub.add_parser(name, help=f"run a {name} experiment from a YAML config")
        sp.add_argument("--config", required=True, help="YAML experiment file")
        sp.add_argument("--out", help="output CSV path (overrides config)")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--threads", type=int, help="worker processes for sweeps")
    fp = sub.add_parser("fit", help="power-law fit of a summary CSV")
    fp.add_argument("--config", help="optional YAML with keys input, x, y")
    fp.add_argument("--input", help="CSV with the data columns")
    fp.add_argument("--x", default=None)
    fp.add_argument("--y", default=None)
    fp.add_argument("--out", help="write the fit as JSON here (default: stdout)")
    fp.add_argument("--seed", type=int, help="ignored; accepted for uniformity")
    fp.add_argument("--threads", type=int, help="ignored; accepted for uniformity")
    return ap


def _fail(code: int, exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        n = int(os.environ.get(cfgmod.ENV_PREFIX + "THREADS", "1"))
    if n < 1:
        raise InvalidInputError("--threads must be >= 1")
    return n


def _fit(args) -> int:
    spec = {}
    if args.config:
        import yaml

        with open(args.config, encoding="utf-8") as fh:
            spec = yaml.safe_load(fh) or {}
        unknown = set(spec) - {"input", "x", "y", "negate"}
        if unknown:
            raise InvalidInputError(f"unknown fit keys {sorted(unknown)}")
    path = args.input or spec.get("input")
    if not path:
        raise InvalidInputError("fit needs --input or a config with 'input'")
    xs, ys = runner.read_xy(path, args.x or spec.get("x", "x"), args.y or spec.get("y", "value"))
    text = json.dumps(runner.fit_to_dict(runner.fit_power_law(xs, ys)), indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            return _fit(args)
        overrides = cfgmod.env_overrides()
        if args.seed is not None:
            overrides["seed"] = args.seed
        cfg = cfgmod.load(args.config, overrides)
        if cfg.mode != args.command:
            raise InvalidInputError(f"config mode {cfg.mode!r} does not match subcommand {args.command!r}")
        for path in runner.run(cfg, args.out, _threads(args)):
            print(path)
        return 0
    except CapacityError as exc:
        return _fail(3, exc)
    except PreconditionError as exc:
        return _fail(4, exc)
    except (HPError, ValueError, OSError, KeyError) as exc:
        return _fail(2, exc)


if __name__ == "__main__":
    sys.exit(main())
