"""Command-line front end: ``lmg-metrology {surface,optimal,robustness,thermo,validate}``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import metrology
from .analytic import global_critical_line
from .errors import DomainError, LMGError
from .metrology import ScanTable
from .validation import REPORT_COLUMNS, run_suite

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3


class InputError(DomainError):
    pass


def parse_axis(text: str) -> np.ndarray:
    """'x', 'a,b,c' or 'start:stop:step' (stop included when on the grid)."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(s) for s in text.split(":"))
            if step <= 0:
                raise InputError(f"step must be positive in {text!r}")
            if stop < start:
                raise InputError(f"empty range {text!r}")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return np.round(start + step * np.arange(count), 12)
        values = np.array([float(s) for s in text.split(",") if s.strip()])
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(f"cannot parse {text!r}: {exc}") from None
    if values.size == 0:
        raise InputError(f"no values in {text!r}")
    return values


def _betas(args) -> np.ndarray:
    if args.temperature is not None:
        temps = parse_axis(args.temperature)
        if np.any(temps <= 0):
            raise InputError("temperatures must be positive")
        return 1.0 / temps
    return parse_axis(args.beta)


def _emit(table: ScanTable, args):
    text = table.to_csv() if args.format == "csv" else table.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_surface(args) -> int:
    table = metrology.scan(args.n_sites, parse_axis(args.gamma), parse_axis(args.field),
                           _betas(args), workers=args.workers)
    _emit(table, args)
    return EXIT_NUMERICAL if table.failed_rows else EXIT_OK


def cmd_thermo(args) -> int:
    table = metrology.thermo_scan(parse_axis(args.gamma), parse_axis(args.field), _betas(args),
                                  cutoff=args.cutoff, workers=args.workers)
    _emit(table, args)
    return EXIT_NUMERICAL if table.failed_rows else EXIT_OK


def cmd_optimal(args) -> int:
    rows = []
    for g in parse_axis(args.gamma):
        for b in _betas(args):
            for r in metrology.optimal_field(args.n_sites, float(g), float(b), args.target):
                rows.append((args.n_sites, float(g), float(b), r.field_star, r.qfi_at_star,
                             r.nearest_critical, r.branch))
    _emit(ScanTable(metrology.OPTIMAL_COLUMNS, rows), args)
    return EXIT_OK


def cmd_robustness(args) -> int:
    rows = []
    for g in parse_axis(args.gamma):
        hc = global_critical_line(args.n_sites, float(g))
        for b in _betas(args):
            for s in parse_axis(args.sigma):
                xi = metrology.robustness_ratio(args.n_sites, float(g), float(b), float(s))
                rows.append((args.n_sites, float(g), float(b), float(s), hc, xi))
    columns = ("n_sites", "gamma", "beta", "sigma", "h_critical", "xi")
    _emit(ScanTable(columns, rows), args)
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_suite(seed=args.seed, perturb=args.perturb)
    _emit(ScanTable(REPORT_COLUMNS, [r.row() for r in results]), args)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmg-metrology",
        description="Fisher information for anisotropy and temperature in thermal LMG models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sites=True, field=True):
        if sites:
            p.add_argument("--n-sites", type=int, default=2)
        p.add_argument("--gamma", default="0.5", help="value, list a,b or start:stop:step")
        if field:
            p.add_argument("--field", default="0.5", help="value, list a,b or start:stop:step")
        temp = p.add_mutually_exclusive_group()
        temp.add_argument("--beta", default="10", help="inverse temperatures, comma list")
        temp.add_argument("--temperature", help="temperatures, converted with beta = 1/T")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("surface", help="QFI and FI on a gamma x field x beta grid")
    common(p)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("optimal", help="fields maximizing the QFI")
    common(p, field=False)
    p.add_argument("--target", choices=("anisotropy", "temperature"), default="anisotropy")
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("robustness", help="field-averaged QFI ratio at the critical line")
    common(p, field=False)
    p.add_argument("--sigma", default="0.01", help="field noise widths, comma list")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("thermo", help="thermodynamic-limit QFIs")
    common(p, sites=False)
    p.add_argument("--cutoff", type=int, default=None, help="Fock truncation dimension")
    p.set_defaults(func=cmd_thermo)

    p = sub.add_parser("validate", help="run the oracle suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", type=float, default=0.0,
                   help="test hook: scale spectral QFIs by (1 + PERTURB) in the oracle checks")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_validate)

    for name in ("surface", "optimal", "robustness", "thermo"):
        sub.choices[name].add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        status, exc_ = EXIT_INPUT, exc
    except LMGError as exc:
        status, exc_ = EXIT_NUMERICAL, exc
    sys.stderr.write(json.dumps({"error": type(exc_).__name__, "message": str(exc_),
                                 "exit_status": status}) + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
