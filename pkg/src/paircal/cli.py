"""Command-line front end.

Usage::

    paircal simulate --dist poisson --mean 5 --eta1 0.6 --eta2 0.4 \\
        --samples 100000 --seed 42 --out counts.csv
    paircal simulate --background-run --bg1 0.5 --bg2 0.2 --samples 100000 \\
        --seed 7 --out bg.csv
    paircal estimate --counts counts.csv [--background bg.csv] --method all
    paircal variance-curve --method B --eta2 0.1 --samples 1
    paircal oracle --dist thermal --mean 2 --eta1 0.5 --eta2 0.5

Exit codes: 0 success, 2 parameter error, 3 data error, 4 method unavailable.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import error_model, io, oracle, source
from .detector import DetectorChannel, simulate_counts
from .errors import (CalibrationError, DataError, MethodUnavailableError, ParameterError,
                     TruncationError)
from .estimators import METHODS, corrected_estimate, estimate
from .moments import sample_moments
from .rng import check_seed

EXIT_OK, EXIT_PARAM, EXIT_DATA, EXIT_METHOD = 0, 2, 3, 4


def _distribution(args) -> source.PairDistribution:
    if args.dist == "custom":
        if not args.pmf_file:
            raise ParameterError("--dist custom needs --pmf-file")
        return source.load_pmf_file(args.pmf_file)
    if args.mean is None:
        raise ParameterError(f"--dist {args.dist} needs --mean")
    return source.PairDistribution(args.dist, args.mean)


def _add_source_args(p, need_eta=True):
    p.add_argument("--dist", choices=["poisson", "thermal", "custom"], default="poisson")
    p.add_argument("--mean", type=float, help="mean pair number N per sample window")
    p.add_argument("--pmf-file", help="custom pair-number PMF, one probability per line")
    p.add_argument("--eta1", type=float, required=need_eta)
    p.add_argument("--eta2", type=float, required=need_eta)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paircal", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate count records to CSV")
    _add_source_args(p, need_eta=False)
    p.add_argument("--bg1", type=float, default=0.0, help="mean background counts, arm 1")
    p.add_argument("--bg2", type=float, default=0.0, help="mean background counts, arm 2")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--no-coincidence", action="store_true", help="omit the c column")
    p.add_argument("--background-run", action="store_true",
                   help="source blocked: record background only (l_B,m_B)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("estimate", help="estimate efficiencies from a counts file")
    p.add_argument("--counts", required=True)
    p.add_argument("--background")
    p.add_argument("--method", default="all", choices=["all", *METHODS])
    p.add_argument("--out", help="JSON report path (default: stdout)")

    p = sub.add_parser("variance-curve", help="Poissonian variance of eta1 versus eta1")
    p.add_argument("--method", default="B", choices=["A", "B", "product", "difference"])
    p.add_argument("--eta2", default="equal", help="fixed eta2 value, or 'equal' for eta2 = eta1")
    p.add_argument("--mean", type=float, default=math.inf, help="N (default: large-N limit)")
    p.add_argument("--samples", type=int, default=1, help="sample size M")
    p.add_argument("--grid", help="comma-separated eta1 values (default 0.01..1, 100 points)")
    p.add_argument("--out")

    p = sub.add_parser("oracle", help="exact moments and covariances as JSON")
    _add_source_args(p)
    p.add_argument("--samples", type=int, default=1, help="sample size M for the covariances")
    p.add_argument("--out")
    return parser


def _emit(text: str, out) -> None:
    if out:
        io.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    seed = check_seed(args.seed)
    if args.samples < 0:
        raise ParameterError("--samples must be >= 0")
    if args.background_run:
        dist = source.poisson(0.0)
        ch1, ch2 = DetectorChannel(1.0, args.bg1), DetectorChannel(1.0, args.bg2)
        with_c = False
    else:
        if args.eta1 is None or args.eta2 is None:
            raise ParameterError("simulate needs --eta1 and --eta2")
        dist = _distribution(args)
        ch1, ch2 = DetectorChannel(args.eta1, args.bg1), DetectorChannel(args.eta2, args.bg2)
        with_c = not args.no_coincidence
    counts = simulate_counts(dist, ch1, ch2, args.samples, seed, with_coincidence=with_c,
                             workers=args.workers)
    meta = {
        "seed": seed,
        "dist": dist.kind,
        "mean": dist.mean,
        "eta1": ch1.efficiency,
        "eta2": ch2.efficiency,
        "bg1": ch1.background_mean,
        "bg2": ch2.background_mean,
        "samples": args.samples,
        "background_run": bool(args.background_run),
    }
    io.write_counts(args.out, counts, meta, background=args.background_run)
    return EXIT_OK


def estimate_report(counts_path, background_path=None, method="all") -> dict:
    counts, meta = io.read_counts(counts_path)
    raw = sample_moments(counts)
    bg = None
    report = {
        "schema": "paircal.estimate/1",
        "counts_file": str(counts_path),
        "sample_size": raw.sample_size,
        "moments": raw.to_dict(),
        "background_corrected": background_path is not None,
    }
    if background_path is not None:
        bg_counts, _ = io.read_counts(background_path)
        bg = sample_moments(bg_counts, with_coincidence=False)
        report["background_file"] = str(background_path)
        report["background_sample_size"] = bg.sample_size
        report["background_moments"] = bg.to_dict()
        from .estimators import correct_background

        report["corrected_moments"] = correct_background(raw, bg).to_dict()
    names = list(METHODS) if method == "all" else [method]
    estimates, unavailable = {}, []
    for name in names:
        if name == "coincidence" and not raw.has_coincidences:
            if method == "all":
                unavailable.append(name)
                continue
            raise MethodUnavailableError("coincidence method needs a 'c' column in the counts file")
        est = estimate(raw, name) if bg is None else corrected_estimate(raw, bg, name)
        entry = est.to_dict()
        entry["std_eta1"] = None if est.var_eta1 is None else math.sqrt(est.var_eta1)
        entry["std_eta2"] = None if est.var_eta2 is None else math.sqrt(est.var_eta2)
        estimates[name] = entry
    report["estimates"] = estimates
    report["unavailable"] = unavailable
    return report


def cmd_estimate(args) -> int:
    report = estimate_report(args.counts, args.background, args.method)
    _emit(io.dumps(report), args.out)
    return EXIT_OK


def _parse_grid(text):
    if text is None:
        return error_model.default_grid().tolist()
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"invalid --grid {text!r}") from None


def cmd_variance_curve(args) -> int:
    eta2 = args.eta2
    if eta2 != "equal":
        try:
            eta2 = float(eta2)
        except ValueError:
            raise ParameterError(f"--eta2 must be a number or 'equal', got {eta2!r}") from None
    series = error_model.variance_curve(args.method, eta2, args.mean, args.samples, _parse_grid(args.grid))
    meta = {"method": args.method, "eta2": eta2, "N": args.mean, "M": args.samples, "source": "poisson"}
    _emit(io.format_curve(series, meta), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    dist = _distribution(args)
    mom = oracle.exact_moments(dist, args.eta1, args.eta2, sample_size=args.samples)
    report = {
        "schema": "paircal.oracle/1",
        "dist": dist.kind,
        "mean": dist.mean,
        "eta1": args.eta1,
        "eta2": args.eta2,
        "moments": mom.to_dict(),
        "covariances_of_means": oracle.exact_covariances(dist, args.eta1, args.eta2, args.samples),
    }
    _emit(io.dumps(report), args.out)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "variance-curve": cmd_variance_curve,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except MethodUnavailableError as exc:
        print(f"paircal: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except ParameterError as exc:
        print(f"paircal: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (DataError, TruncationError, OSError) as exc:
        print(f"paircal: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CalibrationError as exc:
        print(f"paircal: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
