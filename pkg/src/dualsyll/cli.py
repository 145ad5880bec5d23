"""Command-line entry point.

Exit codes: 0 success, 1 data error, 2 config error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import sys

from . import report
from .config import ConfigError, RunConfig, _floats, _ints
from .dataset import DataError, read_table, validate_report

EXIT_OK, EXIT_DATA, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--data", help="human response table (CSV)")
    common.add_argument("--out", help="output/archive directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--k", type=int, help="number of CV folds")
    common.add_argument("--epochs", type=int)
    common.add_argument("--lr", type=float)
    common.add_argument("--loss-weights", type=_floats, help="w_intuition,w_deliberation")
    common.add_argument("--resamples", type=int, help="bootstrap resamples")
    common.add_argument("--seeds", type=_ints, help="comma-separated sweep seeds")
    common.add_argument("--test-fraction", type=float)

    p = argparse.ArgumentParser(prog="dualsyll", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("validate", "check a human response table"),
        ("cv", "k-fold cross-validation of all three models"),
        ("canonical", "80:20 interpretability run"),
        ("ablate", "inference-time single-state ablation"),
        ("sweep", "multi-seed stability sweep"),
        ("encode", "dump the 64 x 29 feature matrix"),
        ("report", "re-render figures from an archive"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return p


def build_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    try:
        cfg = cfg.updated(
            data=args.data, out=args.out, seed=args.seed, k=args.k, epochs=args.epochs,
            lr=args.lr, loss_weights=args.loss_weights, resamples=args.resamples,
            seeds=args.seeds, test_fraction=args.test_fraction,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg.with_env()


def cmd_validate(path) -> int:
    try:
        m = read_table(path)
    except FileNotFoundError:
        print(f"error: data file not found: {path}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    summary = validate_report(m)
    for line in summary.lines():
        print(line)
    return EXIT_OK if summary.ok else EXIT_DATA


COMMANDS = {
    "cv": report.cmd_cv,
    "canonical": report.cmd_canonical,
    "ablate": report.cmd_ablate,
    "sweep": report.cmd_sweep,
    "encode": report.cmd_encode,
    "report": report.cmd_report,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "validate":
            if not cfg.data:
                raise ConfigError("validate needs --data")
            return cmd_validate(cfg.data)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
