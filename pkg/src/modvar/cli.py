"""argparse front end: one subcommand per named experiment.

Exit codes: 0 clean run, 1 configuration problem (bad key, bad value, bad
parameter range), 2 a checked property failed.  MODVAR_JOBS overrides
--jobs.
"""

import argparse
import sys

from . import harness
from .util import DomainError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="modvar",
        description="numerical experiments for modulated-average variation",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="KIND")
    for kind in sorted(harness.SCHEMAS):
        p = sub.add_parser(kind, help="run the %s experiment" % kind)
        p.add_argument("--config", default=None, metavar="PATH",
                       help="key = value config file")
        p.add_argument("--set", action="append", default=[], dest="sets",
                       metavar="KEY=VALUE", help="override one config key")
        p.add_argument("--seed", type=int, default=2026)
        p.add_argument("--out", default=".", metavar="DIR",
                       help="output directory for result files")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker threads for batched draws")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        text = ""
        if args.config is not None:
            with open(args.config) as fh:
                text = fh.read()
        overrides = {}
        for item in args.sets:
            if "=" not in item:
                raise harness.ConfigError(
                    "--set expects KEY=VALUE, got %r" % item)
            key, val = item.split("=", 1)
            overrides[key.strip()] = val
        config = harness.parse_config(text, kind=args.command,
                                      overrides=overrides)
        return harness.run(config, out_dir=args.out, seed=args.seed,
                           jobs=args.jobs)
    except harness.ConfigError as ex:
        print("config error: %s" % ex, file=sys.stderr)
        return 1
    except (DomainError, OSError) as ex:
        print("config error: %s" % ex, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
