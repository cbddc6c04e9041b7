"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical degeneracy,
4 internal error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings

from .errors import PrecDiffError
from .io import load_csv
from .pipeline import run_test
from .report import DEFAULT_P, DEFAULT_S0, TestConfig, format_p
from .simulate import curve_csv, power_curve, simulate, summary_csv

log = logging.getLogger("precdiff")


def _csv_list(convert):
    def parse(text):
        try:
            return [convert(tok) for tok in text.split(",") if tok.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _config_args(parser, default_b=1000):
    g = parser.add_argument_group("test configuration")
    g.add_argument("--p-norms", type=_csv_list(str),
                   default=[str(format_p(p)) for p in DEFAULT_P],
                   help="comma-separated norm orders, 'inf' for the max norm (default: 1,2,3,4,5,inf)")
    g.add_argument("--s0", type=_csv_list(int), default=list(DEFAULT_S0),
                   help="comma-separated s0 values, clamped to d(d-1)/2 (default: 10,100,500,1000)")
    g.add_argument("--bootstrap", "-B", type=int, default=default_b, help="bootstrap replicates")
    g.add_argument("--alpha", type=float, default=0.05)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--kappa", type=float, default=2.0, help="penalty scale in kappa*sqrt(s_ii log d / n)")
    g.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--threads", default="1", help="worker threads or 'auto' (default: 1)")
    parser.add_argument("--output", "-o", help="output file (default: stdout)")


def _config(args) -> TestConfig:
    return TestConfig(p_grid=tuple(args.p_norms), s0_grid=tuple(args.s0), B=args.bootstrap,
                      alpha=args.alpha, seed=args.seed, kappa=args.kappa,
                      standardize=args.standardize, threads=args.threads)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="precdiff",
        description="Test equality of two high-dimensional precision matrices.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run the test on two CSV files")
    t.add_argument("--group1", required=True, help="CSV of group 1 (rows are observations)")
    t.add_argument("--group2", required=True, help="CSV of group 2")
    t.add_argument("--header", action="store_true", help="first CSV row holds variable names")
    _config_args(t)

    s = sub.add_parser("simulate", help="empirical size/power for one configuration")
    s.add_argument("--model", default="model1", choices=["model1", "model2", "model3"])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n1", type=int, required=True)
    s.add_argument("--n2", type=int)
    s.add_argument("--m-t", type=int, default=20)
    s.add_argument("--r", type=float, default=0.0)
    s.add_argument("--reps", type=int, default=100)
    _config_args(s, default_b=200)

    c = sub.add_parser("power-curve", help="rejection frequencies over a list of r")
    c.add_argument("--model", default="model1", choices=["model1", "model2", "model3"])
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m-t", type=int, default=20)
    c.add_argument("--r-list", type=_csv_list(float), required=True)
    c.add_argument("--reps", type=int, default=100)
    _config_args(c, default_b=200)
    return parser


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    warnings.simplefilter("default")
    try:
        config = _config(args)
        if args.command == "test":
            g1 = load_csv(args.group1, has_header=args.header, group_label=1)
            g2 = load_csv(args.group2, has_header=args.header, group_label=2)
            report = run_test(g1, g2, config)
            _emit(report.to_json() + "\n", args.output)
        elif args.command == "simulate":
            summary = simulate(args.model, args.d, args.n1, args.n2 or args.n1, args.m_t,
                               args.r, config, args.reps)
            _emit(summary_csv([summary]), args.output)
        else:
            rows = power_curve(args.model, args.d, args.n, args.m_t, args.r_list, config,
                               args.reps)
            _emit(curve_csv(rows), args.output)
    except PrecDiffError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2
    except Exception:  # noqa: BLE001
        log.exception("internal error")
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
