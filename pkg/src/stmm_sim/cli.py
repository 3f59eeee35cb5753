"""``stmm-sim`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import ConfigError
from .experiments import SCENARIOS, SweepConfig, load_config, run, to_csv

EXIT_OK, EXIT_CONFIG, EXIT_ORACLE = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stmm-sim",
        description="Seeded sweeps of STMM back-reflection link metrics (CSV output).")
    p.add_argument("scenario", nargs="?", choices=SCENARIOS)
    p.add_argument("--config", help="JSON sweep configuration (defaults if omitted)")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--out", help="CSV output path (stdout if omitted)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--sidecar", action="store_true",
                   help="also write <out>.json with the resolved config and seed")
    p.add_argument("--print-defaults", action="store_true",
                   help="print the default configuration as JSON and exit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.print_defaults:
            cfg = SweepConfig.from_dict({}, args.scenario or "reflection_loss")
            print(json.dumps(cfg.to_dict(), indent=2))
            return EXIT_OK
        if args.scenario is None:
            raise ConfigError("a scenario is required", "scenario")
        if args.workers < 1:
            raise ConfigError("must be >= 1", "--workers")
        if args.config:
            cfg = load_config(args.config, args.scenario)
        else:
            cfg = SweepConfig.from_dict({}, args.scenario)
        if args.seed is not None:
            cfg.seed = args.seed
        out = args.out or cfg.output_path
        if args.sidecar and not out:
            raise ConfigError("--sidecar needs an output path", "--out")
    except ConfigError as exc:
        print(f"stmm-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rows = run(cfg, args.workers)
    text = to_csv(cfg.scenario, rows)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
        if args.sidecar:
            with open(out + ".json", "w") as fh:
                json.dump({"version": __version__, "config": cfg.to_dict()}, fh, indent=2)
    else:
        sys.stdout.write(text)

    if cfg.scenario == "oracle_check" and any(r[2] != "pass" for r in rows):
        print("stmm-sim: oracle check failed", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
