"""Places where a local pairing can be nonzero, and the p-adic precision needed there."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List

from .arith import Factorization, factorize
from .ideals import IdealPresentation, gb_integer
from .intersect import DivisorSpec, precision_bound
from .model import PlaneCurve
from .polynomials import ZZ


class DegenerateChart(ArithmeticError):
    """The elimination ideal is zero where a nonzero integer was expected."""


@dataclass
class PlaceReport:
    bad_primes: List[int]
    chart_integers: Dict[str, int]
    meeting_integers: Dict[str, int] = field(default_factory=dict)
    meeting_primes: List[int] = field(default_factory=list)
    precision: Dict[int, int] = field(default_factory=dict)
    unfactored: List[int] = field(default_factory=list)
    archimedean: bool = True

    @property
    def relevant_primes(self) -> List[int]:
        return sorted(set(self.bad_primes) | set(self.meeting_primes))

    @property
    def complete(self) -> bool:
        return not self.unfactored

    def to_json(self) -> dict:
        return {
            "bad_primes": self.bad_primes,
            "chart_integers": {k: str(v) for k, v in self.chart_integers.items()},
            "meeting_integers": {k: str(v) for k, v in self.meeting_integers.items()},
            "meeting_primes": self.meeting_primes,
            "relevant_primes": self.relevant_primes,
            "precision": {str(p): n for p, n in sorted(self.precision.items())},
            "unfactored": [str(n) for n in self.unfactored],
            "factorization_complete": self.complete,
            "archimedean": self.archimedean,
        }


def jacobian_integers(curve: PlaneCurve) -> Dict[str, int]:
    """Per standard chart, the generator of (f, ∂f/∂x_i) ∩ Z."""
    out = {}
    for chart in curve.standard_charts():
        f = chart.relations[0]
        gens = (f,) + tuple(f.derivative(v) for v in chart.variables)
        n = gb_integer(IdealPresentation(chart.variables, gens, (), ZZ))
        if n == 0:
            raise DegenerateChart(f"jacobian ideal on chart {chart.id} meets Z trivially: singular generic fibre?")
        out[chart.id] = n
    return out


def _factor_all(numbers: Iterable[int], budget: float, hints: Iterable[int]) -> Factorization:
    total = Factorization()
    for n in numbers:
        if n in (0, 1):
            continue
        fac = factorize(n, budget, hints)
        for p, e in fac.factors.items():
            total.factors[p] = max(total.factors.get(p, 0), e)
        total.unfactored.extend(u for u in fac.unfactored if u not in total.unfactored)
    return total


def bad_primes(curve: PlaneCurve, budget: float = 30.0, hints: Iterable[int] = ()) -> PlaceReport:
    ints = jacobian_integers(curve)
    fac = _factor_all(ints.values(), budget, hints)
    return PlaceReport(fac.primes, ints, unfactored=fac.unfactored)


def meeting_integers(curve: PlaneCurve, D: DivisorSpec, E: DivisorSpec) -> Dict[str, int]:
    """n_{A,B} for every chart and every pair of effective constituents A of D and B of E."""
    out = {}
    for chart in curve.standard_charts():
        for _, a in D.terms:
            for _, b in E.terms:
                gens = a.generators(chart) + b.generators(chart)
                n = gb_integer(chart.ideal(gens))
                if n == 0:
                    raise DegenerateChart(f"{a.label} and {b.label} meet on the generic fibre (chart {chart.id})")
                out[f"{a.label}|{b.label}|{chart.id}"] = n
    return out


def meeting_primes(curve: PlaneCurve, D: DivisorSpec, E: DivisorSpec, budget: float = 30.0,
                   hints: Iterable[int] = ()) -> PlaceReport:
    """Bad primes plus primes dividing some n_{A,B}, with the precision each prime needs."""
    report = bad_primes(curve, budget, hints)
    ints = meeting_integers(curve, D, E)
    fac = _factor_all(ints.values(), budget, hints)
    report.meeting_integers = ints
    report.meeting_primes = fac.primes
    report.unfactored.extend(u for u in fac.unfactored if u not in report.unfactored)
    for p in report.relevant_primes:
        report.precision[p] = max([precision_bound(p, n) for n in ints.values()] + [1])
    return report
