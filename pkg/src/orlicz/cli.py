"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import dist as dist_mod
from .errors import NumericalError, ValidationError
from .murphy import (
    expectile_kernel,
    generic_kernel,
    murphy_curve,
    pnorm_kernel,
    scenario_kernel,
)
from .orliczfn import CATALOG, catalog_lookup
from .orrisk import avar_inner, expectation_inner, or_risk, orlicz_inner
from .premium import orlicz_premium
from .scoring import family_for, mean_score
from .svg import line_chart

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _phi_from_args(args):
    if args.phi is None:
        raise ValidationError("--phi is required")
    if args.phi not in CATALOG:
        raise ValidationError(f"--phi: unknown function {args.phi!r}; choose from {', '.join(CATALOG)}")
    params = {k: getattr(args, k) for k in CATALOG[args.phi] if getattr(args, k, None) is not None}
    return catalog_lookup(args.phi, params)


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:count[:log|lin]`` -> threshold array (log spacing by default)."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ValidationError(f"--grid: expected lo:hi:count[:log|lin], got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError(f"--grid: malformed {text!r}") from None
    spacing = parts[3] if len(parts) == 4 else "log"
    if count < 1 or not (0 < lo <= hi) or (count > 1 and lo == hi) or spacing not in ("log", "lin"):
        raise ValidationError(f"--grid: need 0 < lo < hi, count >= 1, spacing log|lin; got {text!r}")
    if count == 1:
        return np.array([lo])
    return np.geomspace(lo, hi, count) if spacing == "log" else np.linspace(lo, hi, count)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# --- subcommands ------------------------------------------------------------------

def cmd_premium(args) -> int:
    d = dist_mod.read_distribution(args.dist)
    spec = _phi_from_args(args)
    res = orlicz_premium(d, spec, method=args.method)
    rec = {"function": spec.label, "value": res.value, "method": res.method, "residual": res.residual}
    if args.emit == "csv":
        _write(_csv(["value", "method", "residual"], [[res.value, res.method, res.residual]]), args.out)
    else:
        _write(_json(rec), args.out)
    return EXIT_OK


def _forecast_files(items):
    out = {}
    for item in items:
        name, sep, path = item.partition("=")
        if not sep:
            name, path = Path(item).stem, item
        if name in out:
            raise ValidationError(f"duplicate forecaster name {name!r}")
        out[name] = dist_mod.read_sample(path).values
    return out


def cmd_score(args) -> int:
    spec = _phi_from_args(args)
    fam = family_for(spec, args.weight)
    y = dist_mod.read_sample(args.outcomes).values
    forecasts = _forecast_files(args.forecast)
    if not forecasts:
        raise ValidationError("--forecast: at least one forecast file is required")
    reports = [mean_score(fam, x, y, forecaster=name) for name, x in forecasts.items()]
    reports.sort(key=lambda r: (r.mean, r.forecaster))
    if args.emit == "json":
        _write(_json({"family": fam.label,
                      "scores": [{"forecaster": r.forecaster, "n": r.n, "mean_score": r.mean} for r in reports]}),
               args.out)
    else:
        _write(_csv(["forecaster", "n", "mean_score"], [[r.forecaster, r.n, r.mean] for r in reports]), args.out)
    return EXIT_OK


def cmd_murphy(args) -> int:
    if args.scenario:
        if args.scenario == "lognormal":
            p = 0.0 if args.p is None else args.p
            sample = dist_mod.sample_lognormal_scenario(args.n_sims, args.seed, sigma_y=args.sigma_y,
                                                        sigma_mu=args.sigma_mu, p=p, n_obs=args.n_obs,
                                                        workers=args.workers)
            kernel = scenario_kernel("lognormal", p)
        else:
            q = 0.5 if args.q is None else args.q
            sample = dist_mod.sample_exponential_scenario(args.n_sims, args.seed, sigma_lambda=args.sigma_lambda,
                                                          q=q, n_obs=args.n_obs, workers=args.workers)
            kernel = scenario_kernel("exponential", q)
        y, forecasts = sample.flat()
        meta = {"scenario": args.scenario, "seed": args.seed, "n_sims": args.n_sims, "n_obs": args.n_obs}
    else:
        if not args.outcomes or not args.forecast:
            raise ValidationError("murphy needs --scenario, or --outcomes with --forecast files")
        spec = _phi_from_args(args)
        if spec.name == "pnorm":
            kernel = pnorm_kernel(spec.params["p"])
        elif spec.name == "expectile":
            kernel = expectile_kernel(spec.params["q"])
        else:
            kernel = generic_kernel(spec)
        y = dist_mod.read_sample(args.outcomes).values
        forecasts = _forecast_files(args.forecast)
        meta = {"outcomes": str(args.outcomes)}
    thresholds = parse_grid(args.grid) if args.grid else None
    curve = murphy_curve(kernel, forecasts, y, thresholds, meta)

    rows = list(curve.rows())
    csv_text = _csv(["z", "forecaster", "mean_score"], [list(r) for r in rows])
    if args.emit == "json":
        _write(_json({"kernel": curve.kernel, "n": curve.n, "meta": curve.meta,
                      "thresholds": curve.thresholds.tolist(),
                      "scores": {k: v.tolist() for k, v in curve.scores.items()}}), args.out)
    elif args.emit == "svg":
        if not args.out:
            raise ValidationError("--emit svg needs --out")
        svg = line_chart(curve.thresholds, curve.scores, title=f"Murphy diagram: {curve.kernel}")
        Path(args.out).write_text(svg)
        Path(args.out).with_suffix(".csv").write_text(csv_text)
    else:
        _write(csv_text, args.out)
    return EXIT_OK


def cmd_orrisk(args) -> int:
    d = dist_mod.read_distribution(args.dist)
    if args.inner == "avar":
        if args.level is None:
            raise ValidationError("--inner avar needs --level")
        inner = avar_inner(args.level)
    elif args.inner == "expectation":
        inner = expectation_inner()
    else:
        inner = orlicz_inner(_phi_from_args(args))
    res = or_risk(d, inner)
    if args.emit == "csv":
        _write(_csv(["value", "minimizer", "boundary_flag"],
                    [[res.value, res.minimizer, str(res.boundary_flag).lower()]]), args.out)
    else:
        _write(_json({"inner": inner.name, **res.to_dict()}), args.out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------------

def _add_phi(p, required=False):
    p.add_argument("--phi", required=required, help=f"Orlicz function: {', '.join(CATALOG)}")
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda-mix", dest="lambda_mix", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orlicz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("premium", help="Orlicz premium of a discrete distribution")
    p.add_argument("--dist", required=True, help="CSV with header value,weight")
    _add_phi(p, required=True)
    p.add_argument("--method", choices=("auto", "closed_form", "bisection"), default="auto")
    p.add_argument("--out")
    p.add_argument("--emit", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_premium)

    p = sub.add_parser("score", help="mean scores of forecasters against outcomes")
    p.add_argument("--outcomes", required=True, help="one positive real per line")
    p.add_argument("--forecast", action="append", default=[], metavar="[NAME=]PATH")
    _add_phi(p, required=True)
    p.add_argument("--weight", choices=("invz", "invz2"))
    p.add_argument("--out")
    p.add_argument("--emit", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("murphy", help="Murphy diagram for a simulated scenario or forecast files")
    p.add_argument("--scenario", choices=("lognormal", "exponential"))
    p.add_argument("--outcomes")
    p.add_argument("--forecast", action="append", default=[], metavar="[NAME=]PATH")
    _add_phi(p)
    p.add_argument("--sigma-y", type=float, default=0.2)
    p.add_argument("--sigma-mu", type=float, default=0.2)
    p.add_argument("--sigma-lambda", type=float, default=0.2)
    p.add_argument("--n-sims", type=int, default=10_000)
    p.add_argument("--n-obs", type=int, default=1_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="threads for scenario replications")
    p.add_argument("--grid", help="lo:hi:count[:log|lin]")
    p.add_argument("--out")
    p.add_argument("--emit", choices=("csv", "json", "svg"), default="csv")
    p.set_defaults(func=cmd_murphy)

    p = sub.add_parser("orrisk", help="optimized return risk measure")
    p.add_argument("--dist", required=True)
    p.add_argument("--inner", choices=("avar", "hg", "expectation"), required=True)
    p.add_argument("--level", type=float, help="AV@R level in [0, 1)")
    _add_phi(p)
    p.add_argument("--out")
    p.add_argument("--emit", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_orrisk)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, csv.Error) as exc:
        # ValidationError plus malformed files (bad encoding, broken CSV, missing paths)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
