"""Command-line entry point: run (one experiment), verify (invariant
suites), sweep (parameter grid).  Exit codes: 0 success, 1 runtime failure,
2 usage or configuration error."""

from __future__ import annotations

import argparse
import json
import sys

from .experiment import ConfigError, ExperimentConfig, run_experiment, run_sweep
from .verify import SUITES, run_suite


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, metavar="PATH",
                   help="JSON experiment configuration")
    p.add_argument("--out", metavar="DIR",
                   help="output directory (overrides the config's)")
    p.add_argument("--subsample", type=int, metavar="M",
                   help="use only the first M data lines")
    p.add_argument("--seed-offset", type=int, default=0, metavar="K",
                   help="add K to every configured seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxaccel",
        description="Convex optimization benchmark harness")
    subs = parser.add_subparsers(dest="command", required=True)
    _add_common(subs.add_parser("run", help="run one seeded experiment"))
    v = subs.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=sorted(SUITES) + ["all"])
    _add_common(subs.add_parser("sweep", help="run a parameter grid"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return 0 if run_suite(args.suite) else 1
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "run":
            cfg = ExperimentConfig.from_dict(raw)
            out = args.out or cfg.output
            if not out:
                raise ConfigError("no output directory (config or --out)")
            run_experiment(cfg, out, subsample=args.subsample,
                           seed_offset=args.seed_offset)
        else:
            out = args.out or raw.get("output")
            if not out:
                raise ConfigError("no output directory (config or --out)")
            run_sweep(raw, out, subsample=args.subsample,
                      seed_offset=args.seed_offset)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver failure; partial traces stay on disk
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
