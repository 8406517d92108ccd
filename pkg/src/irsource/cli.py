"""Command-line entry point: ``irsource <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import experiment
from .config import PRESETS, ExperimentConfig, preset
from .exceptions import InvalidArgumentError, StageError
from .verification import SUITES, verify


def _add_common(p):
    p.add_argument("--config", metavar="PATH", help="experiment config file")
    p.add_argument("--preset", choices=PRESETS, help="start from a shipped preset")
    p.add_argument("--seed", type=int, metavar="U64", help="master seed")
    p.add_argument("--workers", type=int, metavar="N", help="threads used for path batches")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--paths", type=int, metavar="P", help="override the path count")
    p.add_argument("--noise", type=float, metavar="SIGMA", help="override the noise level")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="irsource",
        description="Simulate boundary-flux data for stochastic heat/wave equations and recover |f|.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="forward solves only; writes flux.csv")
    _add_common(p)
    p = sub.add_parser("synthesize", help="ensemble + variance series; writes variance.csv")
    _add_common(p)
    p.add_argument("--dump-flux", action="store_true", help="also write per-path flux.csv")
    p = sub.add_parser("kernel", help="tabulate recovery kernels; writes kernel.csv")
    _add_common(p)
    p = sub.add_parser("invert", help="invert stored variance.csv + kernel.csv")
    _add_common(p)
    p.add_argument("--variance", metavar="PATH")
    p.add_argument("--kernel", metavar="PATH")
    p = sub.add_parser("run", help="end-to-end pipeline")
    _add_common(p)
    p.add_argument("--dump-flux", action="store_true")
    p = sub.add_parser("verify", help="run self-check suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    return parser


def load_config(args):
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    else:
        cfg = preset(args.preset or "ex1")
    changes = {}
    for flag, name in (("seed", "seed"), ("workers", "workers"), ("paths", "paths"), ("noise", "noise"), ("out", "output")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[name] = value
    return cfg.replace(**changes) if changes else cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "verify":
        report = verify(args.suite)
        print(json.dumps(report, indent=2))
        return 0 if report["passed"] else 1

    try:
        cfg = load_config(args)
        out = cfg.output
        if args.command == "simulate":
            print(experiment.simulate(cfg, out))
        elif args.command == "synthesize":
            _, path = experiment.synthesize(cfg, out, args.dump_flux)
            print(path)
        elif args.command == "kernel":
            _, path = experiment.kernels(cfg, out)
            print(path)
        elif args.command == "invert":
            _, summary, path, _ = experiment.invert_from_files(cfg, out, args.variance, args.kernel)
            print(path)
            print(f"relative error {summary['error']['relative_l2']:.4f}")
        elif args.command == "run":
            result = experiment.run_experiment(cfg, out, args.dump_flux)
            for path in result.files.values():
                print(path)
            print(f"relative error {result.summary['error']['relative_l2']:.4f}")
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps({"stage": exc.stage, "config": exc.config}, indent=2), file=sys.stderr)
        return 2
    except (InvalidArgumentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
