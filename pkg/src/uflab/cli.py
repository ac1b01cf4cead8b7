"""Batch command line: one subcommand per experiment.

Examples
--------
    uflab dsu-bench --n 2^8,2^10,2^12 --m 2^20 --modes naive,ubs,ubs+pc
    uflab threshold --decoder uf --d 9,13,17 --p 0.08:0.11:0.005 --trials 10000
    uflab erasure-perc --model 3d --L 6,10,14 --p 0.02,0.03 --trials 500
"""

from __future__ import annotations

import argparse
import sys
from decimal import Decimal
from pathlib import Path

from .experiments import DEFAULT_SEED, ConfigError, ExperimentConfig, run_experiment
from .lattice import PLANAR, TORIC


def parse_int(text: str) -> int:
    """An integer, also written ``2^k`` or ``2**k``."""
    text = text.strip()
    for sep in ("**", "^"):
        if sep in text:
            base, exp = text.split(sep, 1)
            return int(base) ** int(exp)
    return int(text)


def int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(parse_int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def float_list(text: str) -> tuple[float, ...]:
    """Comma-separated floats; ``start:stop:step`` expands inclusively."""
    values: list[float] = []
    try:
        for token in (t.strip() for t in text.split(",")):
            if not token:
                continue
            if ":" in token:
                start, stop, step = (Decimal(x) for x in token.split(":"))
                if step <= 0:
                    raise ValueError
                x = start
                while x <= stop:
                    values.append(float(x))
                    x += step
            else:
                values.append(float(token))
    except (ValueError, ArithmeticError):
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return tuple(values)


def str_list(text: str) -> tuple[str, ...]:
    values = tuple(t.strip() for t in text.split(",") if t.strip())
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _common(sp: argparse.ArgumentParser, trials: int | None = 1000):
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed (default %(default)s)")
    sp.add_argument("--out", default=None, help="output file (default: standard output)")
    sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    if trials is not None:
        sp.add_argument("--trials", type=int, default=trials, help="trials per grid point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uflab", description="Union-find decoder laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    sp = sub.add_parser("dsu-bench", help="accesses per merge for random unions")
    _common(sp, trials=None)
    sp.add_argument("--n", type=int_list, default=(2 ** 10,), help="element counts")
    sp.add_argument("--m", type=int_list, default=(2 ** 20,), help="merge counts")
    sp.add_argument("--modes", type=str_list, default=("naive", "ubs", "ubs+pc"))
    sp.add_argument("--reps", type=int, default=1, help="independent repetitions to average")
    sp.add_argument("--linking", choices=("coin", "lower-id"), default="coin",
                    help="naive linking rule (default %(default)s)")

    sp = sub.add_parser("access-count", help="DSU table accesses during syndrome validation")
    _common(sp)
    sp.add_argument("--code", choices=(TORIC, PLANAR), default=PLANAR)
    sp.add_argument("--d", type=int_list, default=(49,))
    sp.add_argument("--p", type=float_list, default=(0.08,))
    sp.add_argument("--modes", type=str_list, default=("naive", "ubs", "pc", "ps", "ubs+pc", "ubs+ps"))
    sp.add_argument("--rounds", choices=("1", "L"), default="1")
    sp.add_argument("--q", choices=("0", "p"), default="0")

    sp = sub.add_parser("threshold", help="logical failure rates")
    _common(sp)
    sp.add_argument("--code", choices=(TORIC, PLANAR), default=TORIC)
    sp.add_argument("--decoder", choices=("uf", "mwpm"), default="uf")
    sp.add_argument("--d", type=int_list, default=(9, 13, 17))
    sp.add_argument("--p", type=float_list, default=(0.08, 0.09, 0.10, 0.11))
    sp.add_argument("--mode", default="naive", help="DSU mode for the union-find decoder")
    sp.add_argument("--rounds", choices=("1", "L"), default="1")
    sp.add_argument("--q", choices=("0", "p"), default="0")

    sp = sub.add_parser("cluster-stats", help="cluster size, perimeter and count, with fits")
    _common(sp)
    sp.add_argument("--code", choices=(TORIC, PLANAR), default=PLANAR)
    sp.add_argument("--d", type=int_list, default=(9, 13, 17, 25, 33, 49))
    sp.add_argument("--p", type=float_list, default=(0.08,))
    sp.add_argument("--fits-out", default=None,
                    help="where to write the fit table (default: next to --out, or after the table)")

    sp = sub.add_parser("bond-perc", help="top-to-bottom bond percolation on an open square lattice")
    _common(sp)
    sp.add_argument("--L", type=int_list, default=(8, 16, 32, 64))
    sp.add_argument("--p", type=float_list, default=(0.45, 0.5, 0.55))

    sp = sub.add_parser("erasure-perc", help="percolation of validated erasures")
    _common(sp)
    sp.add_argument("--model", choices=("2d", "3d"), default="2d")
    sp.add_argument("--code", choices=(TORIC, PLANAR), default=TORIC)
    sp.add_argument("--L", type=int_list, default=(8, 16, 32, 64))
    sp.add_argument("--p", type=float_list, default=(0.05, 0.10, 0.15))
    sp.add_argument("--estimator", choices=("auto", "validation", "mwpm-ball"), default="auto",
                    help="auto: validation in 2d, matching balls in 3d")

    sp = sub.add_parser("soundness", help="pipeline consistency checks across DSU modes")
    _common(sp)
    sp.add_argument("--code", choices=(TORIC, PLANAR), default=TORIC)
    sp.add_argument("--d", type=int_list, default=(9,))
    sp.add_argument("--p", type=float_list, default=(0.08,))
    sp.add_argument("--rounds", choices=("1", "L"), default="1")
    sp.add_argument("--q", choices=("0", "p"), default="0")

    sp = sub.add_parser("oracle-check", help="fast paths against brute-force oracles")
    _common(sp)

    sp = sub.add_parser("repro", help="run the claim manifest and report pass/fail")
    sp.add_argument("--claims", type=str_list, default=None, help="claim ids (default: all)")
    sp.add_argument("--workdir", default=None, help="where claim outputs are written")
    sp.add_argument("--out", default=None, help="report file (default: standard output)")
    sp.add_argument("--list", action="store_true", help="print the manifest and exit")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cmd = args.command
    common = dict(kind=cmd, seed=args.seed, out=args.out, fmt=args.fmt)
    if cmd == "dsu-bench":
        return ExperimentConfig(sizes=args.n, ms=args.m, modes=args.modes, reps=args.reps,
                                linking=args.linking, **common)
    common["trials"] = args.trials
    if cmd == "access-count":
        return ExperimentConfig(code=args.code, distances=args.d, p=args.p, modes=args.modes,
                                rounds=args.rounds, q=args.q, **common)
    if cmd == "threshold":
        return ExperimentConfig(code=args.code, decoder=args.decoder, distances=args.d, p=args.p,
                                modes=(args.mode,), rounds=args.rounds, q=args.q, **common)
    if cmd == "cluster-stats":
        return ExperimentConfig(code=args.code, distances=args.d, p=args.p, **common)
    if cmd == "bond-perc":
        return ExperimentConfig(distances=args.L, p=args.p, **common)
    if cmd == "erasure-perc":
        three = args.model == "3d"
        return ExperimentConfig(code=args.code, distances=args.L, p=args.p, estimator=args.estimator,
                                rounds="L" if three else "1", q="p" if three else "0", **common)
    if cmd == "soundness":
        return ExperimentConfig(code=args.code, distances=args.d, p=args.p,
                                rounds=args.rounds, q=args.q, **common)
    if cmd == "oracle-check":
        return ExperimentConfig(**common)
    raise ConfigError(f"unknown command {cmd!r}")


def _write(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _fits_path(args) -> str | None:
    if args.fits_out:
        return args.fits_out
    if args.out:
        out = Path(args.out)
        return str(out.with_name(out.stem + ".fits." + args.fmt))
    return None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "repro":
        from .repro import main as repro_main

        return repro_main(args)
    try:
        config = config_from_args(args)
        result = run_experiment(config)
    except ConfigError as exc:
        parser.error(str(exc))
    _write(result.table.render(config.fmt), config.out)
    if result.fits is not None:
        path = _fits_path(args)
        if path is None:
            sys.stdout.write("\n")
        _write(result.fits.render(config.fmt), path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
