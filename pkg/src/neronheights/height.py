"""Global Néron-Tate height pairings, Gram matrices, regulators and the BSD quotient.

The height is minus the sum of the local pairings over all places.  Local
pairings at finite primes are exact rationals (multiples of log p); only the
archimedean term carries numerical error.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import mpmath
from mpmath import mp

from .intersect import DivisorSpec, LocalPairing, local_neron_pairing
from .model import ChartedModel, PlaneCurve, naive_model
from .relevant_primes import PlaceReport, meeting_primes
from .theta import GUARD_DIGITS, ArchimedeanPairing, PeriodData, ThetaEvaluator, archimedean_pairing, find_w

log = logging.getLogger(__name__)


class MissingModel(LookupError):
    """A bad prime is relevant but no model was supplied for it."""


class IncompleteFactorization(ArithmeticError):
    """Some integer bounding the relevant primes could not be factored."""


class AsymmetricInput(ValueError):
    pass


@dataclass
class HeightPairing:
    value: mpmath.mpf
    abs_error: mpmath.mpf
    finite: Dict[int, LocalPairing]
    archimedean: ArchimedeanPairing
    places: PlaceReport | None = None
    precision: int = 30

    @property
    def breakdown(self) -> Dict[str, mpmath.mpf]:
        """Contribution of each place to the height (i.e. minus its local pairing)."""
        out = {str(p): -mp.mpf(lp.value.numerator) / lp.value.denominator * mp.log(p)
               for p, lp in sorted(self.finite.items())}
        out["inf"] = -self.archimedean.value
        return out

    @property
    def finite_part(self) -> Dict[int, Fraction]:
        return {p: lp.value for p, lp in sorted(self.finite.items())}


def archimedean_split(D: DivisorSpec, g: int) -> Tuple[List[Tuple[str, int]], List[Tuple[str, int]]]:
    """E1, E2 effective of degree g with D = E1 - E2 on points."""
    if D.split is not None:
        return [tuple(t) for t in D.split[0]], [tuple(t) for t in D.split[1]]
    mult = D.point_multiplicities()
    plus = [(k, v) for k, v in mult.items() if v > 0]
    minus = [(k, -v) for k, v in mult.items() if v < 0]
    if sum(v for _, v in plus) != g:
        raise ValueError(f"divisor {D.name!r} needs an explicit split into two effective divisors of degree {g}")
    return plus, minus


def _point_list(D: DivisorSpec) -> List[Tuple[str, int]]:
    return list(D.point_multiplicities().items())


def resolve_models(curve: PlaneCurve, report: PlaceReport, models: Mapping[int, ChartedModel]) -> Dict[int, ChartedModel]:
    """One model per relevant prime: supplied ones for bad primes, naive ones elsewhere."""
    out = {}
    for p in report.relevant_primes:
        if p in models:
            out[p] = models[p]
        elif p in report.bad_primes:
            raise MissingModel(f"no model supplied for the bad prime {p}")
        else:
            out[p] = naive_model(curve, p)
    return out


def finite_pairings(curve: PlaneCurve, D: DivisorSpec, E: DivisorSpec, models: Mapping[int, ChartedModel] = {},
                    budget: float = 30.0, hints: Iterable[int] = ()) -> Tuple[Dict[int, LocalPairing], PlaceReport]:
    report = meeting_primes(curve, D, E, budget, hints)
    if not report.complete:
        raise IncompleteFactorization("could not factor " + ", ".join(str(n) for n in report.unfactored))
    chosen = resolve_models(curve, report, models)
    out = {}
    for p, model in chosen.items():
        out[p] = local_neron_pairing(D, E, model)
        log.info("<D,E>_%d = %s log %d", p, out[p].value, p)
    return out, report


def global_height(curve: PlaneCurve, D: DivisorSpec, E: DivisorSpec, period: PeriodData,
                  models: Mapping[int, ChartedModel] = {}, w: Sequence | None = None,
                  evaluator: ThetaEvaluator | None = None, budget: float = 30.0,
                  hints: Iterable[int] = ()) -> HeightPairing:
    """ĥ(D, E) = -Σ_p <D,E>_p - <D,E>_∞."""
    if D.degree or E.degree:
        raise ValueError("height pairing needs degree-0 divisors")
    finite, report = finite_pairings(curve, D, E, models, budget, hints)
    ev = evaluator or ThetaEvaluator(period.tau, period.precision)
    if w is None:
        w = period.w if period.w is not None else find_w(period, evaluator=ev).w
    E1, E2 = archimedean_split(E, period.g)
    arch = archimedean_pairing(_point_list(D), E1, E2, period, w, ev)
    with mp.workdps(period.precision + GUARD_DIGITS):
        total = -arch.value
        for p, lp in finite.items():
            total -= mp.mpf(lp.value.numerator) / lp.value.denominator * mp.log(p)
    return HeightPairing(total, arch.abs_error, finite, arch, report, period.precision)


# --------------------------------------------------------------------------
# Gram matrices and regulators


@dataclass
class RegulatorReport:
    labels: List[str]
    gram: mpmath.matrix
    determinant: mpmath.mpf
    up_to_square: bool = True
    warnings: List[str] = field(default_factory=list)

    def to_json(self, digits: int = 15) -> dict:
        n = len(self.labels)
        return {
            "labels": self.labels,
            "gram": [[mp.nstr(self.gram[i, j], digits) for j in range(n)] for i in range(n)],
            "determinant": mp.nstr(self.determinant, digits),
            "up_to_integral_square": self.up_to_square,
            "warnings": self.warnings,
        }


def gram_and_regulator(labels: Sequence[str], values: Mapping[Tuple[str, str], object],
                       tol: float = 1e-8, up_to_square: bool = True) -> RegulatorReport:
    """Fill a symmetric Gram matrix from pair values and take its determinant.

    A pair may be given in either order; if both orders appear they must agree to ``tol``.
    """
    n = len(labels)
    G = mp.matrix(n, n)
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            x, y = values.get((a, b)), values.get((b, a))
            if x is None and y is None:
                raise KeyError(f"missing pairing ({a}, {b})")
            if x is not None and y is not None and abs(mp.mpf(x) - mp.mpf(y)) > tol:
                raise AsymmetricInput(f"({a}, {b}) = {x} but ({b}, {a}) = {y}")
            G[i, j] = mp.mpf(x if x is not None else y)
    det = mp.det(G) if n else mp.mpf(1)
    warnings = []
    scale = max([abs(G[i, i]) for i in range(n)] + [mp.mpf(1)]) ** n
    if det <= 0:
        warnings.append("determinant is not positive: the classes are dependent or the input is wrong")
    elif det < scale * mp.mpf(10) ** (-mp.dps // 2):
        warnings.append("determinant is numerically close to zero")
    return RegulatorReport(list(labels), G, det, up_to_square, warnings)


def gram_from_relations(rank: int, observations: Sequence[Tuple[Sequence[int], Sequence[int], object]]) -> mpmath.matrix:
    """Recover the Gram matrix of a basis from pairings of known integer combinations of it.

    Each observation (a, b, h) says <Σ a_i g_i, Σ b_j g_j> = h.  Solved by least squares
    over the rank(rank+1)/2 entries of the symmetric matrix.
    """
    index = [(i, j) for i in range(rank) for j in range(i, rank)]
    if len(observations) < len(index):
        raise ValueError(f"need at least {len(index)} observations, got {len(observations)}")
    A = mp.matrix(len(observations), len(index))
    rhs = mp.matrix(len(observations), 1)
    for r, (a, b, h) in enumerate(observations):
        for c, (i, j) in enumerate(index):
            A[r, c] = a[i] * b[j] + (a[j] * b[i] if i != j else 0)
        rhs[r] = mp.mpf(h)
    x = mp.qr_solve(A, rhs)[0] if len(observations) > len(index) else mp.lu_solve(A, rhs)
    G = mp.matrix(rank, rank)
    for c, (i, j) in enumerate(index):
        G[i, j] = G[j, i] = x[c]
    return G


def bsd_sha_estimate(L_star, regulator, real_period, tamagawa: Sequence[int], torsion_order: int):
    """Analytic order of Sha predicted by BSD: L* |T|^2 / (R Ω Π c_p)."""
    values = [L_star, regulator, real_period, torsion_order, *tamagawa]
    if any(v <= 0 for v in values):
        raise ValueError("all BSD inputs must be positive")
    prod = mp.mpf(1)
    for c in tamagawa:
        prod *= c
    return mp.mpf(L_star) * mp.mpf(torsion_order) ** 2 / (mp.mpf(regulator) * mp.mpf(real_period) * prod)
