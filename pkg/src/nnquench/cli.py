"""Command-line entry point.

Subcommands: ``prepare`` (fit the initial state), ``evolve`` (full pipeline:
prepare, evolve, merits, statistics), ``merits`` (re-score checkpoints against
the dense oracle), ``stats`` (aggregate replicate tables), ``resume``
(continue an interrupted run).  Exit codes: 0 success, 2 configuration error,
3 resource-guard refusal, 4 numerical failure.

``NNQUENCH_THREADS`` caps the BLAS thread pools (exported before the numerics
load); small chains are usually fastest with NNQUENCH_THREADS=1.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys


def _apply_thread_env() -> None:
    threads = os.environ.get("NNQUENCH_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnquench",
        description="Neural-network quantum state quench dynamics on the tilted Ising chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("prepare", "fit the uniform initial state and write checkpoint 0"),
        ("evolve", "run the full pipeline: prepare, evolve, merits, statistics"),
        ("merits", "score existing checkpoints against the dense oracle"),
        ("stats", "aggregate replicate tables into summary CSVs"),
        ("resume", "continue an interrupted evolution from its last checkpoint"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", metavar="FILE", help="key = value configuration file")
        _add_field_flags(cmd)
    return parser


def _add_field_flags(cmd: argparse.ArgumentParser) -> None:
    # one flag per ExperimentConfig field; values are parsed like file entries
    from .experiment import ExperimentConfig

    for f in dataclasses.fields(ExperimentConfig):
        cmd.add_argument(f"--{f.name}", metavar="VALUE", default=None)


def _collect_config(args):
    from .experiment import ExperimentConfig, config_from_sources, parse_config_file

    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {}
    for f in dataclasses.fields(ExperimentConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return config_from_sources(file_values, overrides)


def main(argv=None) -> int:
    _apply_thread_env()
    args = _build_parser().parse_args(argv)

    from .errors import ConfigError, NumericError, ResourceError
    from . import experiment

    try:
        config = _collect_config(args)
        if args.command == "prepare":
            for rep in range(config.replicates):
                experiment.prepare_replicate(config, rep)
        elif args.command in ("evolve", "resume"):
            experiment.run_experiment(config, resume=args.command == "resume")
        elif args.command == "merits":
            for rep in range(config.replicates):
                experiment.merit_replicate(config, rep)
        elif args.command == "stats":
            experiment.write_statistics(config)
    except ConfigError as exc:
        print(f"nnquench: configuration error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"nnquench: resource guard: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"nnquench: numerical failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
