"""Naive intersection numbers on constructible sets and the non-archimedean Néron pairing.

All intersection numbers are returned as exact rationals m, meaning m * log p.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .arith import valuation
from .ideals import (
    IdealPresentation,
    NonArtinianQuotient,
    gb_integer,
    quotient_log_length,
    saturate,
)
from .model import (
    PROJECTIVE,
    Chart,
    ChartedModel,
    Closed,
    ConstructibleSet,
    Difference,
    DisjointUnion,
    FixtureError,
    dehomogenize,
    intersect_sets,
)
from .polynomials import QQ, ZZ, MultiPoly

log = logging.getLogger(__name__)

MAX_CLOSED_GENERATORS = 16


class CommonComponent(ArithmeticError):
    """The two divisors share a component on a chart, so the pairing is undefined."""


class InconsistentModel(ArithmeticError):
    """The vertical correction system has no solution; the model data is wrong."""


# --------------------------------------------------------------------------
# divisors


@dataclass(frozen=True)
class EffectiveDivisor:
    """An effective divisor on the generic fibre, as ideals per chart.

    ``homogeneous`` generators (in X, Y, Z) give the ideal on every standard
    chart; ``charts`` overrides or supplies ideals on other charts.
    """

    label: str
    degree: int
    homogeneous: Tuple[MultiPoly, ...] = ()
    charts: Dict[str, Tuple[MultiPoly, ...]] = field(default_factory=dict)
    points: Tuple[str, ...] = ()  # geometric points (Abel-Jacobi labels), with repetition

    def geometric_points(self) -> Tuple[str, ...]:
        if self.points:
            return self.points
        if self.degree == 1:
            return (self.label,)
        raise FixtureError(f"divisor {self.label!r} of degree {self.degree} lists no geometric points")

    def generators(self, chart: Chart) -> Tuple[MultiPoly, ...]:
        if chart.id in self.charts:
            return self.charts[chart.id]
        if self.homogeneous and chart.id in PROJECTIVE:
            k = PROJECTIVE.index(chart.id)
            return tuple(_integral(dehomogenize(g, k, chart.variables)) for g in self.homogeneous)
        raise FixtureError(f"divisor {self.label!r} has no ideal on chart {chart.id!r}")


def _integral(f: MultiPoly) -> MultiPoly:
    if f.ring.kind == "QQ":
        return f.clear_denominators().change_ring(ZZ)
    return f


@dataclass(frozen=True)
class DivisorSpec:
    """A formal sum Σ c_k D_k of effective divisors."""

    name: str
    terms: Tuple[Tuple[int, EffectiveDivisor], ...]
    # optional split into two effective point divisors of degree g for the archimedean place
    split: Tuple[Tuple[Tuple[str, int], ...], Tuple[Tuple[str, int], ...]] | None = None

    @property
    def degree(self) -> int:
        return sum(c * d.degree for c, d in self.terms)

    def effective_part(self) -> List[Tuple[int, EffectiveDivisor]]:
        return [(c, d) for c, d in self.terms if c > 0]

    def antieffective_part(self) -> List[Tuple[int, EffectiveDivisor]]:
        return [(-c, d) for c, d in self.terms if c < 0]

    def point_multiplicities(self) -> Dict[str, int]:
        """The divisor as a formal sum of geometric point labels."""
        out: Dict[str, int] = {}
        for c, d in self.terms:
            for lab in d.geometric_points():
                out[lab] = out.get(lab, 0) + c
        return {k: v for k, v in sorted(out.items()) if v}


@dataclass(frozen=True)
class VerticalDivisor:
    coefficients: Tuple[Fraction, ...]


@dataclass
class LocalPairing:
    p: int
    horizontal: Fraction
    correction: Fraction
    precision: Dict[str, int] = field(default_factory=dict)

    @property
    def value(self) -> Fraction:
        return self.horizontal + self.correction


def point_divisor(label: str, coords: Sequence[int]) -> EffectiveDivisor:
    """A rational point (X:Y:Z) with integer coordinates, cut out by 2x2 minors."""
    a, b, c = (int(v) for v in coords)
    if not any((a, b, c)):
        raise FixtureError(f"point {label!r} has all coordinates zero")
    X, Y, Z = (MultiPoly.variable(v, PROJECTIVE, ZZ) for v in PROJECTIVE)
    gens = [g for g in (b * X - a * Y, c * X - a * Z, c * Y - b * Z) if g]
    return EffectiveDivisor(label, 1, tuple(gens))


def divisors_from_json(data: dict) -> Dict[str, DivisorSpec]:
    """Divisor fixture: named effective pieces, then degree-0 divisors as integer combinations of them.

    {"schema": 1,
     "pieces": {"P": {"point": [1, 0, 0]},
                "AB": {"degree": 2, "homogeneous": [...], "points": ["A", "B"]},
                "Q": {"degree": 1, "charts": {"U1": [...]}}},
     "divisors": {"D": {"P": 1, "AB": -1}}}

    A divisor may also use the two-part form {"effective": "P", "antieffective": "Q"},
    or {"terms": {...}, "split": [{"A": 1, "B": 1, "X": 1}, {"Q": 1, "R": 1, "X": 1}]}
    to fix the decomposition used at the archimedean place.
    """
    from .model import _check_schema
    _check_schema(data, "divisor")
    pieces: Dict[str, EffectiveDivisor] = {}
    for label, piece in data["pieces"].items():
        if "point" in piece:
            pieces[label] = point_divisor(label, piece["point"])
            continue
        hom = tuple(MultiPoly.parse(g, PROJECTIVE, QQ) for g in piece.get("homogeneous", ()))
        hom = tuple(_integral(g) for g in hom)
        charts = {}
        for cid, body in piece.get("charts", {}).items():
            charts[cid] = tuple(_integral(MultiPoly.parse(g, body["vars"], QQ)) for g in body["generators"])
        if not hom and not charts:
            raise FixtureError(f"piece {label!r} has no ideal")
        pieces[label] = EffectiveDivisor(label, int(piece["degree"]), hom, charts, tuple(piece.get("points", ())))
    out = {}
    for name, body in data["divisors"].items():
        split = None
        if "effective" in body or "antieffective" in body:
            combo = {body["effective"]: 1, body["antieffective"]: -1}
        elif "terms" in body:
            combo = body["terms"]
            if "split" in body:
                split = tuple(tuple(sorted((str(k), int(v)) for k, v in part.items())) for part in body["split"])
                if len(split) != 2:
                    raise FixtureError(f"divisor {name!r}: split must have exactly two parts")
        else:
            combo = body
        terms = []
        for label, c in combo.items():
            if label not in pieces:
                raise FixtureError(f"divisor {name!r} uses unknown piece {label!r}")
            terms.append((int(c), pieces[label]))
        div = DivisorSpec(name, tuple(terms), split)
        if split is not None:
            diff: Dict[str, int] = {}
            for sign, part in zip((1, -1), split):
                for lab, m in part:
                    diff[lab] = diff.get(lab, 0) + sign * m
            if {k: v for k, v in sorted(diff.items()) if v} != div.point_multiplicities():
                raise FixtureError(f"divisor {name!r}: split does not add up to the divisor")
        if div.degree:
            raise FixtureError(f"divisor {name!r} has degree {div.degree}, expected 0")
        out[name] = div
    return out


# --------------------------------------------------------------------------
# naive pairing


def _closed_pairing(gens: Sequence[MultiPoly], ideal: IdealPresentation, chart: Chart, p: int, N: int) -> int:
    """ι over Z(f_1..f_r) by inclusion-exclusion over the localisations at products of the f_i."""
    if any(g.is_constant() and g.constant_coefficient() % p for g in gens):
        return 0  # a unit at p: empty set
    gens = [g for g in gens if not g.is_zero()]
    if len(gens) > MAX_CLOSED_GENERATORS:
        raise ValueError(f"closed set has {len(gens)} generators; the limit is {MAX_CLOSED_GENERATORS}")
    ring = chart.ring()
    total = 0
    for r in range(len(gens) + 1):
        for T in itertools.combinations(gens, r):
            J = ideal
            if T:
                f = T[0]
                for g in T[1:]:
                    f = f * g
                J = saturate(ideal, f)
            total += (-1) ** r * quotient_log_length(ring, J, p, N)
    return total


def naive_pairing(V: ConstructibleSet, D: IdealPresentation, E: IdealPresentation, chart: Chart, p: int,
                  N: int) -> int:
    """m with ι^naive_V(D, E) = m log p, for V a constructible subset of the chart."""
    ideal = IdealPresentation(chart.variables, tuple(D.generators) + tuple(E.generators), chart.relations, ZZ)
    return _naive(V, ideal, chart, p, N)


def _naive(V: ConstructibleSet, ideal: IdealPresentation, chart: Chart, p: int, N: int) -> int:
    if isinstance(V, Closed):
        return _closed_pairing(V.generators, ideal, chart, p, N)
    if isinstance(V, Difference):
        return _naive(V.a, ideal, chart, p, N) - _naive(intersect_sets(V.a, V.b), ideal, chart, p, N)
    if isinstance(V, DisjointUnion):
        return sum(_naive(part, ideal, chart, p, N) for part in V.parts)
    raise TypeError(f"not a constructible set: {V!r}")


# --------------------------------------------------------------------------
# horizontal and vertical parts


def horizontal_ideal(D: EffectiveDivisor, chart: Chart, p: int) -> IdealPresentation:
    """Closure of the generic-fibre divisor: (I : p^∞) in the chart ring."""
    ideal = chart.ideal(D.generators(chart))
    return saturate(ideal, MultiPoly.constant(p, chart.variables, ZZ))


def horizontal_extension(D: DivisorSpec, model: ChartedModel) -> Dict[Tuple[str, str], IdealPresentation]:
    """Saturated ideals of every term of D on every chart, keyed by (label, chart id)."""
    return {(d.label, chart.id): horizontal_ideal(d, chart, model.p) for _, d in D.terms for chart in model.charts}


def meeting_integer(a: IdealPresentation, b: IdealPresentation) -> int:
    return gb_integer(IdealPresentation(a.variables, a.generators + b.generators, a.relations, ZZ))


def precision_bound(p: int, n: int | None = None, multiplicities: Sequence[int] = ()) -> int:
    """Working precision N: v_p(n) + 1 for two horizontal divisors, max multiplicity + 1 with a vertical one."""
    if n is None:
        return max(multiplicities, default=1) + 1
    if n == 0:
        raise CommonComponent("divisors meet on the generic fibre")
    if n % p:
        return 1
    return valuation(n, p) + 1


class _Context:
    """Caches saturated ideals for one model."""

    def __init__(self, model: ChartedModel):
        self.model = model
        self.cache: Dict[Tuple[str, str], IdealPresentation] = {}

    def ideal(self, d: EffectiveDivisor, chart: Chart) -> IdealPresentation:
        key = (d.label, chart.id)
        if key not in self.cache:
            self.cache[key] = horizontal_ideal(d, chart, self.model.p)
        return self.cache[key]

    def horizontal(self, a: EffectiveDivisor, b: EffectiveDivisor, precision: Dict[str, int]) -> int:
        p = self.model.p
        total = 0
        for chart, V in zip(self.model.charts, self.model.partition):
            ia, ib = self.ideal(a, chart), self.ideal(b, chart)
            n = meeting_integer(ia, ib)
            if n == 0:
                raise CommonComponent(f"{a.label} and {b.label} share a component on chart {chart.id}")
            N = precision_bound(p, n)
            precision[f"{a.label}|{b.label}|{chart.id}"] = N
            if n % p:
                continue
            try:
                total += naive_pairing(V, ia, ib, chart, p, N)
            except NonArtinianQuotient as exc:
                raise CommonComponent(f"{a.label} and {b.label} on chart {chart.id}: {exc}") from exc
        return total

    def vertical(self, index: int, d: EffectiveDivisor) -> int:
        """ι(Γ_index, d) over the partition."""
        comp = self.model.components[index]
        N = precision_bound(self.model.p, None, self.model.multiplicities)
        total = 0
        for chart, V in zip(self.model.charts, self.model.partition):
            gens = comp.generators.get(chart.id)
            if gens is None:
                continue
            total += naive_pairing(V, chart.ideal(gens), self.ideal(d, chart), chart, self.model.p, N)
        return total


def component_degrees(D: DivisorSpec, model: ChartedModel, ctx: _Context | None = None) -> List[int]:
    """b_i = ι(Γ_i, D) for every fibre component."""
    ctx = ctx or _Context(model)
    return [sum(c * ctx.vertical(i, d) for c, d in D.terms) for i in range(len(model.components))]


def solve_correction(M: Sequence[Sequence[int]], b: Sequence[int]) -> List[Fraction]:
    """x with M x = -b and x_0 = 0, by exact elimination."""
    n = len(M)
    if n == 0:
        return []
    rows = [[Fraction(M[i][j]) for j in range(1, n)] + [Fraction(-b[i])] for i in range(n)]
    m = n - 1
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(n):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(rows[i][m] != 0 for i in range(r, n)):
        raise InconsistentModel(f"M x = -b has no solution for b = {list(b)}")
    if len(pivots) != m:
        raise InconsistentModel("intersection matrix has a kernel beyond the fibre; components are not connected")
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c + 1] = rows[i][m]
    return x


def vertical_correction(D: DivisorSpec, model: ChartedModel, ctx: _Context | None = None) -> VerticalDivisor:
    if len(model.components) <= 1:
        return VerticalDivisor(tuple(Fraction(0) for _ in model.components))
    b = component_degrees(D, model, ctx)
    return VerticalDivisor(tuple(solve_correction(model.intersection_matrix, b)))


def shift_gauge(phi: VerticalDivisor, model: ChartedModel, t: Fraction) -> VerticalDivisor:
    """Φ + t * (full fibre); the pairing must not notice."""
    return VerticalDivisor(tuple(x + t * m for x, m in zip(phi.coefficients, model.multiplicities)))


def local_neron_pairing(D: DivisorSpec, E: DivisorSpec, model: ChartedModel,
                        phi: VerticalDivisor | None = None) -> LocalPairing:
    """⟨D, E⟩_p = ι(D, E) + ι(Φ(D), E), as a rational multiple of log p."""
    if D.degree or E.degree:
        raise ValueError("local pairing needs degree-0 divisors")
    shared = {d.label for _, d in D.terms} & {e.label for _, e in E.terms}
    if shared:
        raise CommonComponent(f"supports of D and E share {sorted(shared)}")
    ctx = _Context(model)
    precision: Dict[str, int] = {}
    horizontal = 0
    for c, a in D.terms:
        for e, b in E.terms:
            horizontal += c * e * ctx.horizontal(a, b, precision)
    correction = Fraction(0)
    if len(model.components) > 1:
        phi = phi or vertical_correction(D, model, ctx)
        bE = component_degrees(E, model, ctx)
        correction = sum((x * v for x, v in zip(phi.coefficients, bE)), Fraction(0))
    return LocalPairing(model.p, Fraction(horizontal), correction, precision)
