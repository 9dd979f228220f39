"""Command-line interface.

Subcommands map to experiment kinds; every run can be driven from a
config file (--config), with --seed / --out / --trials overriding it.
Exit codes: 0 all verdicts pass, 1 any verdict fails, 2 config or
runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .config import KINDS, default_config, load_config, override
from .errors import ConfigError, MemolabError
from .frechet import FrechetProblem, frechet_mean
from .harness import run_experiment
from .partitions import build_unit_interval, estimate_schedule
from .processes import GeometricDecay, UniformIID

_SUBCOMMAND_KINDS = {
    "simulate": ("consistency", "bayes-excess"),
    "partition": ("partition-fmv",),
    "lemma1": ("lemma1",),
    "tail": ("lemma2-tail",),
    "adversary": ("adversary",),
    "fool-test": ("fool-test",),
    "frechet": ("frechet-convergence",),
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to an INI experiment config")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--out", help="CSV output path")
    parser.add_argument("--trials", type=int, help="override the kind's trial count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memolab",
        description="Simulation lab for universal online learning with unbounded losses",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMAND_KINDS:
        p = sub.add_parser(name)
        _add_common(p)
        if name == "partition":
            p.add_argument(
                "--text-out",
                help="also materialize a small partition and write its flat text form",
            )
            p.add_argument(
                "--text-levels", type=int, default=2,
                help="levels for the materialized realization (default 2)",
            )
        if name == "frechet":
            p.add_argument("--samples", help="inline comma-separated samples")
            p.add_argument("--samples-file", help="one value per line")
            p.add_argument("--power", type=float, default=2.0)
    verify = sub.add_parser("verify-all")
    _add_common(verify)
    return parser


def _config_for(args, allowed) -> object:
    if args.config:
        config = load_config(args.config)
        if config.kind not in allowed:
            raise ConfigError(
                f"config kind {config.kind!r} not valid here (expected one of {allowed})"
            )
    else:
        config = default_config(allowed[0])
    return override(config, seed=args.seed, out=args.out, trials=args.trials)


def _print_report(report) -> None:
    print(f"[{report.kind}] seed={report.seed} rows={len(report.rows)}")
    for verdict in report.verdicts:
        status = "PASS" if verdict.passed else "FAIL"
        print(f"  {status} {verdict.name}: {verdict.detail}")


def _run_frechet_direct(args) -> int:
    if args.samples:
        values = [float(tok) for tok in args.samples.split(",") if tok.strip()]
    else:
        with open(args.samples_file, "r", encoding="utf-8") as fh:
            values = [float(line) for line in fh if line.strip()]
    if not values:
        raise ConfigError("no samples supplied")
    result = frechet_mean(FrechetProblem(tuple(values), power=args.power))
    print(f"minimizer={result.minimizer:.17g}")
    print(f"risk={result.risk:.17g}")
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(b"n,power,minimizer,risk\n")
            line = f"{len(values)},{args.power:.17g},{result.minimizer:.17g},{result.risk:.17g}\n"
            fh.write(line.encode("ascii"))
    return 0


def _write_partition_text(args, seed: int) -> None:
    name = "iid-uniform"
    if args.config:
        name = load_config(args.config).params.get("sampler", name)
    sampler = UniformIID(seed=seed) if name == "iid-uniform" else GeometricDecay(seed=seed)
    schedule = estimate_schedule(sampler, args.text_levels, 1000)
    partition = build_unit_interval(schedule, seed)
    with open(args.text_out, "w", encoding="ascii") as fh:
        fh.write(partition.to_text())
    print(f"partition realization written to {args.text_out}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "frechet" and (args.samples or args.samples_file):
            return _run_frechet_direct(args)
        if args.command == "verify-all":
            reports = []
            for kind in KINDS:
                config = default_config(kind, seed=args.seed or 0)
                config = override(config, trials=args.trials)
                if args.out:
                    config = override(config, out=f"{args.out}.{kind}.csv")
                report = run_experiment(config)
                _print_report(report)
                reports.append(report)
            return 0 if all(r.passed for r in reports) else 1
        config = _config_for(args, _SUBCOMMAND_KINDS[args.command])
        if args.command == "partition" and args.text_out:
            _write_partition_text(args, config.seed)
        report = run_experiment(config)
        _print_report(report)
        return 0 if report.passed else 1
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except MemolabError as err:
        print(f"error [{err.code}]: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
