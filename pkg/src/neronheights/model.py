"""Arithmetic-surface inputs: charts, constructible sets, partitions and fibre components."""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import sympy

from .ideals import IdealPresentation
from .polynomials import ZZ, MultiPoly

SCHEMA_VERSION = 1


class FixtureError(ValueError):
    """A fixture file is malformed, has an unknown schema, or is inconsistent."""


# --------------------------------------------------------------------------
# constructible sets


class ConstructibleSet:
    """Boolean expression over closed subsets of one chart."""

    def intersect_closed(self, gens: Sequence[MultiPoly]) -> "ConstructibleSet":
        raise NotImplementedError

    def contains(self, point: Mapping[str, int], modulus: int) -> bool:
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError

    def generator_count(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class Closed(ConstructibleSet):
    """Common zero set of ``generators``; no generators means the whole chart."""

    generators: Tuple[MultiPoly, ...] = ()

    def intersect_closed(self, gens):
        return Closed(self.generators + tuple(g for g in gens if g not in self.generators))

    def contains(self, point, modulus):
        return all(g.evaluate([point[v] for v in g.variables]) % modulus == 0 for g in self.generators)

    def to_json(self):
        return {"closed": [g.to_string() for g in self.generators]}

    def generator_count(self):
        return len(self.generators)


@dataclass(frozen=True)
class Difference(ConstructibleSet):
    """Points of ``a`` not in ``b``."""

    a: ConstructibleSet
    b: ConstructibleSet

    def intersect_closed(self, gens):
        return Difference(self.a.intersect_closed(gens), self.b)

    def contains(self, point, modulus):
        return self.a.contains(point, modulus) and not self.b.contains(point, modulus)

    def to_json(self):
        return {"difference": [self.a.to_json(), self.b.to_json()]}

    def generator_count(self):
        return max(self.a.generator_count(), self.b.generator_count())


@dataclass(frozen=True)
class DisjointUnion(ConstructibleSet):
    parts: Tuple[ConstructibleSet, ...]

    def intersect_closed(self, gens):
        return DisjointUnion(tuple(p.intersect_closed(gens) for p in self.parts))

    def contains(self, point, modulus):
        return any(p.contains(point, modulus) for p in self.parts)

    def to_json(self):
        return {"union": [p.to_json() for p in self.parts]}

    def generator_count(self):
        return max((p.generator_count() for p in self.parts), default=0)


def intersect_sets(a: ConstructibleSet, b: ConstructibleSet) -> ConstructibleSet:
    """a ∩ b as a constructible expression."""
    if isinstance(b, Closed):
        return a.intersect_closed(b.generators)
    if isinstance(b, Difference):
        return Difference(intersect_sets(a, b.a), b.b)
    if isinstance(b, DisjointUnion):
        return DisjointUnion(tuple(intersect_sets(a, p) for p in b.parts))
    raise TypeError(f"not a constructible set: {b!r}")


def parse_constructible(data, variables: Sequence[str]) -> ConstructibleSet:
    if not isinstance(data, dict) or len(data) != 1:
        raise FixtureError(f"constructible set must be a one-key object, got {data!r}")
    (kind, body), = data.items()
    if kind == "closed":
        return Closed(tuple(MultiPoly.parse(s, variables, ZZ) for s in body))
    if kind == "difference":
        if len(body) != 2:
            raise FixtureError("difference needs exactly two operands")
        return Difference(parse_constructible(body[0], variables), parse_constructible(body[1], variables))
    if kind == "union":
        return DisjointUnion(tuple(parse_constructible(b, variables) for b in body))
    raise FixtureError(f"unknown constructible node {kind!r}")


# --------------------------------------------------------------------------
# charts and models


@dataclass(frozen=True)
class Chart:
    id: str
    variables: Tuple[str, ...]
    relations: Tuple[MultiPoly, ...]
    note: str = ""

    def ring(self) -> IdealPresentation:
        return IdealPresentation(self.variables, (), self.relations, ZZ)

    def ideal(self, gens: Iterable[MultiPoly]) -> IdealPresentation:
        return IdealPresentation(self.variables, tuple(gens), self.relations, ZZ)

    def parse(self, text: str) -> MultiPoly:
        return MultiPoly.parse(text, self.variables, ZZ)


@dataclass(frozen=True)
class FiberComponent:
    """An irreducible component of the special fibre; ideals are given per chart."""

    name: str
    multiplicity: int
    generators: Dict[str, Tuple[MultiPoly, ...]]


@dataclass
class ChartedModel:
    p: int
    charts: List[Chart]
    partition: List[ConstructibleSet]
    components: List[FiberComponent]
    intersection_matrix: List[List[int]]
    note: str = ""

    def chart(self, chart_id: str) -> Chart:
        for c in self.charts:
            if c.id == chart_id:
                return c
        raise KeyError(f"model has no chart {chart_id!r}")

    @property
    def multiplicities(self) -> List[int]:
        return [c.multiplicity for c in self.components]


def partition_from_cover(charts: Sequence[Chart],
                         complements: Mapping[Tuple[str, str], Sequence[MultiPoly]]) -> List[ConstructibleSet]:
    """V_i = C_i minus the earlier charts.

    ``complements[(i, j)]`` lists generators whose common zeros in chart i are
    exactly the points of C_i outside C_j (for C_j = {h != 0} this is just h).
    """
    out = []
    for i, ci in enumerate(charts):
        gens: List[MultiPoly] = []
        for cj in charts[:i]:
            key = (ci.id, cj.id)
            if key not in complements:
                raise FixtureError(f"missing overlap data for charts {key}")
            for g in complements[key]:
                if g.variables != ci.variables:
                    raise FixtureError(f"overlap generator {g} is not in chart {ci.id}")
                gens.append(g)
        out.append(Closed(tuple(gens)))
    return out


@dataclass
class ValidationReport:
    ok: bool
    failures: List[str] = field(default_factory=list)
    checks: Dict[str, bool] = field(default_factory=dict)

    def to_json(self):
        return {"ok": self.ok, "checks": self.checks, "failures": self.failures}


def kernel_defect(matrix: Sequence[Sequence[int]], mult: Sequence[int]) -> List[int]:
    return [sum(a * m for a, m in zip(row, mult)) for row in matrix]


def validate_model(model: ChartedModel) -> ValidationReport:
    failures = []
    M = model.intersection_matrix
    n = len(model.components)
    shape = len(M) == n and all(len(r) == n for r in M)
    if not shape:
        failures.append(f"intersection matrix is not {n}x{n}")
    symmetric = shape and all(M[i][j] == M[j][i] for i in range(n) for j in range(n))
    if shape and not symmetric:
        failures.append("intersection matrix is not symmetric")
    kernel = shape and not any(kernel_defect(M, model.multiplicities))
    if shape and not kernel:
        failures.append(f"M * multiplicities = {kernel_defect(M, model.multiplicities)}, expected 0")
    contains_p = True
    from .ideals import contains
    for comp in model.components:
        for chart_id, gens in comp.generators.items():
            chart = model.chart(chart_id)
            if not contains(chart.ideal(gens), MultiPoly.constant(model.p, chart.variables, ZZ)):
                contains_p = False
                failures.append(f"component {comp.name} in chart {chart_id} does not contain p={model.p}")
    partition = len(model.partition) == len(model.charts)
    if not partition:
        failures.append("partition must have one piece per chart")
    positive = all(c.multiplicity > 0 for c in model.components)
    if not positive:
        failures.append("multiplicities must be positive")
    checks = {"symmetric": bool(symmetric), "kernel": bool(kernel), "components_contain_p": contains_p,
              "partition_shape": partition, "multiplicities_positive": positive}
    return ValidationReport(not failures, failures, checks)


# --------------------------------------------------------------------------
# plane curves and their naive models

PROJECTIVE = ("X", "Y", "Z")


@dataclass(frozen=True)
class PlaneCurve:
    """A curve F(X, Y, Z) = 0 in the projective plane over Z."""

    equation: MultiPoly
    name: str = ""

    @classmethod
    def parse(cls, text: str, name: str = "") -> "PlaneCurve":
        f = MultiPoly.parse(text, PROJECTIVE, ZZ)
        degs = {sum(e) for e in f.terms}
        if len(degs) != 1:
            raise FixtureError("curve equation must be homogeneous")
        return cls(f, name)

    @property
    def degree(self) -> int:
        return self.equation.total_degree()

    def standard_charts(self) -> List[Chart]:
        """Charts X != 0, Y != 0, Z != 0 with lower-case affine coordinates."""
        charts = []
        for k, big in enumerate(PROJECTIVE):
            names = tuple(v.lower() for i, v in enumerate(PROJECTIVE) if i != k)
            rel = dehomogenize(self.equation, k, names)
            charts.append(Chart(big, names, (rel,), note=f"{big} = 1"))
        return charts

    def standard_partition(self, charts: Sequence[Chart]) -> List[ConstructibleSet]:
        complements = {}
        for i, ci in enumerate(charts):
            for j, cj in enumerate(charts[:i]):
                # C_i minus C_j is where the j-th projective coordinate vanishes
                complements[(ci.id, cj.id)] = [MultiPoly.variable(PROJECTIVE[j].lower(), ci.variables, ZZ)]
        return partition_from_cover(charts, complements)


def dehomogenize(f: MultiPoly, index: int, names: Sequence[str]) -> MultiPoly:
    terms: Dict[tuple, int] = {}
    for e, c in f.terms.items():
        k = tuple(x for i, x in enumerate(e) if i != index)
        terms[k] = terms.get(k, 0) + c
    return MultiPoly(tuple(names), {k: v for k, v in terms.items() if v}, f.ring)


def _fibre_irreducible(curve: PlaneCurve, p: int, tries: int = 40, seed: int = 0) -> bool | None:
    """Irreducibility of F mod p over F_p by degree analysis of specialisations.

    After a random linear change making F monic in Y, a factorisation of F
    with Y-degree k forces every specialisation F(a, Y, 1) to have a set of
    irreducible factors of total degree k.  If no k in 1..d-1 survives all
    specialisations, F is irreducible.  Returns None when inconclusive.
    """
    X, Y, Z = sympy.symbols("X Y Z")
    F = sympy.sympify(curve.equation.to_string().replace("^", "**"), locals={"X": X, "Y": Y, "Z": Z})
    d = curve.degree
    rng = random.Random(seed)
    Fp = sympy.Poly(F, X, Y, Z, modulus=p)
    if Fp.is_zero:
        return False
    if sympy.Poly(F, X, Y, Z, modulus=p).total_degree() < d:
        return False
    for _ in range(tries):
        M = sympy.Matrix(3, 3, lambda i, j: rng.randrange(p))
        if M.det() % p == 0:
            continue
        new = M * sympy.Matrix([X, Y, Z])
        G = sympy.Poly(sympy.expand(F.subs({X: new[0], Y: new[1], Z: new[2]}, simultaneous=True)),
                       X, Y, Z, modulus=p)
        if G.coeff_monomial(Y**d) % p == 0:
            continue
        possible = set(range(1, d))
        y = sympy.Symbol("y")
        for a in range(min(p, 4 * d + 20)):
            fiber = sympy.Poly(G.as_expr().subs({X: a, Z: 1, Y: y}), y, modulus=p)
            if fiber.degree() != d:
                continue
            _, facs = fiber.factor_list()
            degs = []
            for f, e in facs:
                degs.extend([f.degree()] * e)
            sums = {0}
            for k in degs:
                sums |= {s + k for s in sums}
            possible &= sums
            if not possible:
                return True
        return None
    return None


def fibre_is_smooth(curve: PlaneCurve, p: int) -> bool:
    """No common zero of F and its partials over the algebraic closure of F_p (a smooth plane curve is irreducible)."""
    from .ideals import contains
    for chart in curve.standard_charts():
        f = chart.relations[0]
        gens = [f] + [f.derivative(v) for v in chart.variables] + [MultiPoly.constant(p, chart.variables, ZZ)]
        if not contains(IdealPresentation(chart.variables, tuple(gens), (), ZZ),
                        MultiPoly.constant(1, chart.variables, ZZ)):
            return False
    return True


def naive_model(curve: PlaneCurve, p: int) -> ChartedModel:
    """The model given by the plane equation itself, asserted regular by the caller.

    The special fibre must be irreducible (checked), so there is a single
    component of multiplicity 1 and no vertical correction.
    """
    verdict = fibre_is_smooth(curve, p) or _fibre_irreducible(curve, p)
    if verdict is not True:
        raise FixtureError(f"cannot certify that the fibre at p={p} is irreducible; supply a model fixture")
    charts = curve.standard_charts()
    pconst = {c.id: (MultiPoly.constant(p, c.variables, ZZ),) for c in charts}
    comp = FiberComponent("fibre", 1, pconst)
    return ChartedModel(p, charts, curve.standard_partition(charts), [comp], [[0]],
                        note="naive model, irreducible special fibre")


# --------------------------------------------------------------------------
# JSON fixtures


def _check_schema(data: dict, kind: str) -> None:
    if data.get("schema") != SCHEMA_VERSION:
        raise FixtureError(f"{kind} fixture has unsupported schema version {data.get('schema')!r}")


def model_from_json(data: dict, curve: PlaneCurve | None = None) -> ChartedModel:
    _check_schema(data, "model")
    p = int(data["p"])
    if data.get("naive"):
        if curve is None:
            raise FixtureError("naive model fixture needs the curve")
        return naive_model(curve, p)
    charts = [Chart(c["id"], tuple(c["vars"]), tuple(MultiPoly.parse(r, c["vars"], ZZ) for r in c["relations"]),
                    c.get("note", "")) for c in data["charts"]]
    by_id = {c.id: c for c in charts}
    if len(data["partition"]) != len(charts):
        raise FixtureError("partition must list one constructible set per chart")
    partition = [parse_constructible(v, c.variables) for v, c in zip(data["partition"], charts)]
    comps = []
    for k, comp in enumerate(data["components"]):
        gens = {}
        for cid, polys in comp["generators"].items():
            if cid not in by_id:
                raise FixtureError(f"component refers to unknown chart {cid!r}")
            gens[cid] = tuple(by_id[cid].parse(s) for s in polys)
        comps.append(FiberComponent(comp.get("name", f"G{k}"), int(comp["multiplicity"]), gens))
    M = [[int(v) for v in row] for row in data["intersection_matrix"]]
    return ChartedModel(p, charts, partition, comps, M, data.get("note", ""))


def model_to_json(model: ChartedModel) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "p": model.p,
        "note": model.note,
        "charts": [{"id": c.id, "vars": list(c.variables), "relations": [r.to_string() for r in c.relations]}
                   for c in model.charts],
        "partition": [v.to_json() for v in model.partition],
        "components": [{"name": c.name, "multiplicity": c.multiplicity,
                        "generators": {k: [g.to_string() for g in v] for k, v in c.generators.items()}}
                       for c in model.components],
        "intersection_matrix": model.intersection_matrix,
    }


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{path}: invalid JSON ({exc})") from exc


def curve_from_json(data: dict) -> PlaneCurve:
    _check_schema(data, "curve")
    return PlaneCurve.parse(data["equation"], data.get("name", ""))
