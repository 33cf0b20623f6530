"""Command-line front end.

Every subcommand reads JSON fixtures and prints one JSON report on stdout.
Exit codes: 0 ok, 2 bad input, 3 precision failure, 4 missing fixture or
fixture data, 5 factorization incomplete.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Dict, List

from mpmath import mp

from . import __version__
from .height import (
    IncompleteFactorization,
    MissingModel,
    bsd_sha_estimate,
    finite_pairings,
    global_height,
    gram_and_regulator,
    gram_from_relations,
)
from .ideals import InsufficientPrecision
from .intersect import divisors_from_json, local_neron_pairing
from .model import FixtureError, curve_from_json, model_from_json, naive_model
from .polynomials import PolynomialParseError
from .relevant_primes import meeting_primes
from .theta import GUARD_DIGITS, ThetaError, ThetaEvaluator, period_from_json

EXIT_INPUT, EXIT_PRECISION, EXIT_MISSING, EXIT_FACTOR = 2, 3, 4, 5


class InputError(Exception):
    pass


class MissingFixture(Exception):
    pass


class Job:
    """Loaded inputs of one invocation, with a provenance record per file."""

    def __init__(self, args):
        self.args = args
        self.provenance: List[dict] = []

    def load(self, path: str) -> dict:
        p = Path(path)
        if not p.is_file():
            raise MissingFixture(f"fixture not found: {path}")
        raw = p.read_bytes()
        self.provenance.append({"path": path, "sha256": hashlib.sha256(raw).hexdigest()})
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: {exc}") from exc

    def curve(self):
        return curve_from_json(self.load(self.args.curve))

    def divisor_pair(self):
        divs = {}
        for path in self.args.divisors:
            divs.update(divisors_from_json(self.load(path)))
        try:
            return divs[self.args.pair[0]], divs[self.args.pair[1]]
        except KeyError as exc:
            raise InputError(f"unknown divisor {exc.args[0]!r}; have {sorted(divs)}") from None

    def models(self, curve) -> Dict[int, object]:
        out = {}
        for item in self.args.model or []:
            prime, _, path = item.partition("=")
            if not path or not prime.isdigit():
                raise InputError(f"--model expects PRIME=PATH, got {item!r}")
            model = model_from_json(self.load(path), curve)
            if model.p != int(prime):
                raise InputError(f"{path} describes p = {model.p}, not {prime}")
            out[int(prime)] = model
        return out

    def period(self):
        period = period_from_json(self.load(self.args.period))
        want = self.args.precision
        if want is not None:
            if want > period.precision:
                raise PrecisionFailure(f"period fixture carries {period.precision} digits, {want} requested")
            period.precision = want
        return period


class PrecisionFailure(Exception):
    pass


def _digits(args) -> int:
    return args.precision or 30


def _real(x, err=None, digits: int = 30) -> dict:
    out = {"value": mp.nstr(x, digits)}
    out["abs_error"] = mp.nstr(err if err is not None else mp.mpf(10) ** (-digits), 3)
    return out


def _rational(q: Fraction) -> dict:
    return {"exact_rational": str(q)}


def _hints(args):
    return [int(h) for h in args.factor_hint.split(",") if h] if args.factor_hint else []


# --------------------------------------------------------------------------
# subcommands


def cmd_relevant_primes(job: Job) -> dict:
    curve = job.curve()
    D, E = job.divisor_pair()
    report = meeting_primes(curve, D, E, job.args.budget, _hints(job.args))
    if not report.complete:
        raise IncompleteFactorization("could not factor " + ", ".join(map(str, report.unfactored)))
    return report.to_json()


def cmd_local_pairing(job: Job) -> dict:
    curve = job.curve()
    D, E = job.divisor_pair()
    models = job.models(curve)
    if job.args.prime is None:
        pairings, report = finite_pairings(curve, D, E, models, job.args.budget, _hints(job.args))
    else:
        p = job.args.prime
        pairings = {p: local_neron_pairing(D, E, models[p] if p in models else naive_model(curve, p))}
    return {"pairings": {str(p): {"m": _rational(lp.value), "horizontal": _rational(lp.horizontal),
                                  "correction": _rational(lp.correction), "meaning": "m * log p"}
                         for p, lp in sorted(pairings.items())}}


def cmd_theta_eval(job: Job) -> dict:
    period = job.period()
    digits = period.precision
    z = json.loads(job.args.z)
    with mp.workdps(digits + GUARD_DIGITS):
        zs = [mp.mpc(mp.mpf(str(a)), mp.mpf(str(b))) for a, b in z]
        ev = ThetaEvaluator(period.tau, digits)
        val = ev.theta(zs)
        lam, lam_err = ev.neron_lambda(zs)
        return {"theta": {"re": _real(mp.re(val.value), val.abs_error, digits),
                          "im": _real(mp.im(val.value), val.abs_error, digits)},
                "neron_function": _real(lam, lam_err, digits)}


def cmd_height(job: Job) -> dict:
    if not job.args.assert_nonspecial:
        raise InputError("the archimedean formula needs non-special E1, E2; "
                         "check this and pass --assert-nonspecial")
    curve = job.curve()
    D, E = job.divisor_pair()
    models = job.models(curve)
    period = job.period()
    h = global_height(curve, D, E, period, models, budget=job.args.budget, hints=_hints(job.args))
    digits = period.precision
    with mp.workdps(digits + GUARD_DIGITS):
        return _height_report(D, E, h, digits)


def _height_report(D, E, h, digits: int) -> dict:
    places = {str(p): {"local_pairing": _rational(lp.value), "meaning": "m * log p",
                       "contribution": _real(-mp.mpf(lp.value.numerator) / lp.value.denominator * mp.log(p),
                                             mp.mpf(10) ** (-digits), digits)}
              for p, lp in sorted(h.finite.items())}
    places["inf"] = {"local_pairing": _real(h.archimedean.value, h.archimedean.abs_error, digits),
                     "contribution": _real(-h.archimedean.value, h.archimedean.abs_error, digits)}
    return {"pair": [D.name, E.name], "height": _real(h.value, h.abs_error, digits),
            "places": places, "relevant_primes": h.places.relevant_primes, "bad_primes": h.places.bad_primes}


def cmd_regulator(job: Job) -> dict:
    data = job.load(job.args.input)
    if data.get("schema") != 1:
        raise InputError("regulator input has unsupported schema version")
    digits = _digits(job.args)
    with mp.workdps(digits + GUARD_DIGITS):
        if "observations" in data:
            rank = int(data["rank"])
            obs = [(o["a"], o["b"], mp.mpf(str(o["value"]))) for o in data["observations"]]
            G = gram_from_relations(rank, obs)
            labels = data.get("labels") or [f"g{i + 1}" for i in range(rank)]
            values = {(labels[i], labels[j]): G[i, j] for i in range(rank) for j in range(rank)}
        else:
            labels = data["labels"]
            values = {(e["a"], e["b"]): mp.mpf(str(e["value"])) for e in data["pairs"]}
        report = gram_and_regulator(labels, values, float(data.get("tolerance", 1e-8)))
        out = report.to_json(digits)
        out["determinant"] = _real(report.determinant, None, digits)
        return out


def cmd_bsd_check(job: Job) -> dict:
    a = job.args
    tam = [int(t) for t in a.tamagawa.split(",")] if a.tamagawa else []
    with mp.workdps(30):
        sha = bsd_sha_estimate(mp.mpf(a.L_star), mp.mpf(a.regulator), mp.mpf(a.real_period), tam, a.torsion)
        # the inputs are taken as exact, so only rounding enters the error
        return {"sha_estimate": _real(sha, abs(sha) * mp.mpf(10) ** -20, 20), "parameters": {
            "L_star": a.L_star, "regulator": a.regulator, "real_period": a.real_period,
            "tamagawa": tam, "torsion_order": a.torsion}}


COMMANDS = {
    "relevant-primes": cmd_relevant_primes,
    "local-pairing": cmd_local_pairing,
    "theta-eval": cmd_theta_eval,
    "height": cmd_height,
    "regulator": cmd_regulator,
    "bsd-check": cmd_bsd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neronheights", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pair=True):
        p.add_argument("--precision", type=int, help="decimal digits (default: fixture precision)")
        p.add_argument("--factor-hint", default="", help="comma-separated primes to try first")
        p.add_argument("--budget", type=float, default=30.0, help="seconds per factorization")
        p.add_argument("-v", "--verbose", action="store_true")
        if pair:
            p.add_argument("--curve", required=True)
            p.add_argument("--divisors", required=True, action="append")
            p.add_argument("--pair", required=True, nargs=2, metavar=("D", "E"))
            p.add_argument("--model", action="append", metavar="PRIME=PATH")

    common(sub.add_parser("relevant-primes", help="bad primes and primes where D and E may meet"))
    lp = sub.add_parser("local-pairing", help="exact non-archimedean local pairings")
    common(lp)
    lp.add_argument("--prime", type=int)
    te = sub.add_parser("theta-eval", help="Riemann theta and the Néron function at a point")
    common(te, pair=False)
    te.add_argument("--period", required=True)
    te.add_argument("--z", required=True, help='JSON list of [re, im] pairs')
    h = sub.add_parser("height", help="global Néron-Tate height pairing")
    common(h)
    h.add_argument("--period", required=True)
    h.add_argument("--assert-nonspecial", action="store_true",
                   help="assert that the effective parts used at infinity are non-special")
    r = sub.add_parser("regulator", help="Gram determinant from pair values")
    common(r, pair=False)
    r.add_argument("--input", required=True)
    b = sub.add_parser("bsd-check", help="analytic order of Sha predicted by BSD")
    common(b, pair=False)
    b.add_argument("--L-star", dest="L_star", required=True)
    b.add_argument("--regulator", required=True)
    b.add_argument("--real-period", required=True)
    b.add_argument("--tamagawa", default="")
    b.add_argument("--torsion", type=int, default=1)
    return parser


def run(argv=None) -> tuple[int, dict]:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    job = Job(args)
    try:
        body = COMMANDS[args.command](job)
        code = 0
    except PolynomialParseError as exc:
        code, body = EXIT_INPUT, {"error": str(exc), "position": exc.position}
    except (MissingFixture, MissingModel, KeyError) as exc:
        code, body = EXIT_MISSING, {"error": str(exc)}
    except (PrecisionFailure, InsufficientPrecision, ThetaError) as exc:
        code, body = EXIT_PRECISION, {"error": f"{type(exc).__name__}: {exc}"}
    except IncompleteFactorization as exc:
        code, body = EXIT_FACTOR, {"error": str(exc)}
    except (InputError, FixtureError, ValueError, ArithmeticError) as exc:
        code, body = EXIT_INPUT, {"error": f"{type(exc).__name__}: {exc}"}
    report = {"command": args.command, "version": __version__, "exit_code": code, **body,
              "inputs": job.provenance}
    return code, report


def main(argv=None) -> int:
    code, report = run(argv)
    print(json.dumps(report, indent=1, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
