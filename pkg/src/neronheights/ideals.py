"""Ideals in quotients of polynomial rings: bases, saturation, quotient lengths."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, List, Sequence, Tuple

from .groebner import Engine
from .polynomials import (
    DEGREVLEX,
    QQ,
    ZZ,
    CoefficientRing,
    MonomialOrder,
    MultiPoly,
    monomial_divides,
)


class NonArtinianQuotient(ArithmeticError):
    """The quotient ring is infinite at the prime (common component or missing saturation)."""


class InsufficientPrecision(ArithmeticError):
    """The quotient may not be determined modulo p^N."""


@dataclass(frozen=True)
class IdealPresentation:
    """The ideal generated by ``generators`` in ``ring[variables] / (relations)``."""

    variables: Tuple[str, ...]
    generators: Tuple[MultiPoly, ...]
    relations: Tuple[MultiPoly, ...] = ()
    ring: CoefficientRing = ZZ

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relations", tuple(self.relations))
        for g in self.generators + self.relations:
            if g.variables != self.variables:
                raise ValueError(f"polynomial {g} lives in {g.variables}, expected {self.variables}")

    @classmethod
    def from_strings(cls, variables: Sequence[str], generators: Iterable[str], relations: Iterable[str] = (),
                     ring: CoefficientRing = ZZ) -> "IdealPresentation":
        variables = tuple(variables)
        return cls(variables,
                   tuple(MultiPoly.parse(g, variables, ring) for g in generators),
                   tuple(MultiPoly.parse(r, variables, ring) for r in relations),
                   ring)

    def all_generators(self) -> List[MultiPoly]:
        return list(self.generators) + list(self.relations)

    def with_generators(self, gens: Iterable[MultiPoly]) -> "IdealPresentation":
        return IdealPresentation(self.variables, tuple(gens), self.relations, self.ring)

    def __add__(self, other: "IdealPresentation") -> "IdealPresentation":
        if other.variables != self.variables or other.ring != self.ring:
            raise ValueError("ideals live in different rings")
        rels = self.relations + tuple(r for r in other.relations if r not in self.relations)
        return IdealPresentation(self.variables, self.generators + other.generators, rels, self.ring)

    def __mul__(self, other: "IdealPresentation") -> "IdealPresentation":
        gens = [a * b for a in self.generators for b in other.generators]
        return IdealPresentation(self.variables, tuple(gens), self.relations, self.ring)

    def change_ring(self, ring: CoefficientRing) -> "IdealPresentation":
        return IdealPresentation(self.variables, tuple(g.change_ring(ring) for g in self.generators),
                                 tuple(r.change_ring(ring) for r in self.relations), ring)


def _engine_input(ideal: IdealPresentation, extra: Sequence[MultiPoly] = ()):
    """Map an ideal to (domain, term dicts) for the engine; Z/p^N becomes Z plus p^N."""
    ring = ideal.ring
    polys = ideal.all_generators() + list(extra)
    if ring.kind == "QQ":
        return "QQ", [dict(p.terms) for p in polys if p]
    terms = [dict(p.terms) for p in polys if p]
    if ring.kind == "ZZ/p^N":
        terms.append({(0,) * len(ideal.variables): ring.modulus})
    return "ZZ", terms


def _to_polys(ideal: IdealPresentation, basis, variables=None) -> List[MultiPoly]:
    variables = ideal.variables if variables is None else variables
    out = []
    for t in basis:
        p = MultiPoly(variables, t, ideal.ring)
        if p:
            out.append(p)
    return out


def groebner_basis(ideal: IdealPresentation, order: MonomialOrder = DEGREVLEX) -> List[MultiPoly]:
    """Reduced Groebner basis (strong over Z) of generators + relations."""
    domain, terms = _engine_input(ideal)
    basis = Engine(len(ideal.variables), order, domain).groebner(terms)
    return _to_polys(ideal, basis)


def _basis_terms(ideal: IdealPresentation, order: MonomialOrder = DEGREVLEX):
    domain, terms = _engine_input(ideal)
    engine = Engine(len(ideal.variables), order, domain)
    return engine, engine.groebner(terms)


def normal_form(f: MultiPoly, ideal: IdealPresentation, order: MonomialOrder = DEGREVLEX) -> MultiPoly:
    engine, basis = _basis_terms(ideal, order)
    return MultiPoly(ideal.variables, engine.normal_form(dict(f.terms), basis), ideal.ring)


def contains(ideal: IdealPresentation, f: MultiPoly) -> bool:
    return normal_form(f, ideal).is_zero()


def ideal_equal(a: IdealPresentation, b: IdealPresentation) -> bool:
    """Equality of a + relations and b + relations, by mutual membership."""
    ea, ba = _basis_terms(a)
    eb, bb = _basis_terms(b)
    return (all(not eb.normal_form(t, bb) for t in ba)
            and all(not ea.normal_form(t, ba) for t in bb))


def eliminate(ideal: IdealPresentation, names: Sequence[str]) -> IdealPresentation:
    """Intersect with the subring omitting ``names`` (block order, eliminated block first)."""
    names = list(names)
    rest = [v for v in ideal.variables if v not in names]
    ordered = tuple(names + rest)
    moved = IdealPresentation(ordered, tuple(g.embed(ordered) for g in ideal.generators),
                              tuple(r.embed(ordered) for r in ideal.relations), ideal.ring)
    order = MonomialOrder("block", (len(names), len(rest)))
    engine, basis = _basis_terms(moved, order)
    k = len(names)
    kept = []
    for t in basis:
        if all(not any(e[:k]) for e in t):
            kept.append(MultiPoly(rest, {e[k:]: c for e, c in t.items()}, ideal.ring))
    kept = [p.embed(ideal.variables) for p in kept if p]
    return IdealPresentation(ideal.variables, tuple(kept), ideal.relations, ideal.ring)


def _fresh(variables: Sequence[str], stem: str = "_t") -> str:
    name = stem
    while name in variables:
        name += "_"
    return name


def saturate(ideal: IdealPresentation, f: MultiPoly) -> IdealPresentation:
    """(I : f^oo) = {r : f^n r in I for some n}, via I + (1 - t f) and eliminating t."""
    if f.is_zero():
        raise ValueError("cannot saturate by zero")
    t = _fresh(ideal.variables)
    big = (t,) + ideal.variables
    tf = MultiPoly.variable(t, big, ideal.ring) * f.embed(big)
    lifted = IdealPresentation(big, tuple(g.embed(big) for g in ideal.generators) + (1 - tf,),
                               tuple(r.embed(big) for r in ideal.relations), ideal.ring)
    elim = eliminate(lifted, [t])
    return IdealPresentation(ideal.variables, tuple(_drop_first(g, ideal.variables) for g in elim.generators),
                             ideal.relations, ideal.ring)


def _drop_first(g: MultiPoly, variables: Tuple[str, ...]) -> MultiPoly:
    return MultiPoly(variables, {e[1:]: c for e, c in g.terms.items()}, g.ring)


def intersect(a: IdealPresentation, b: IdealPresentation) -> IdealPresentation:
    """a ∩ b in R (relations folded into both sides) via t*a + (1-t)*b."""
    t = _fresh(a.variables)
    big = (t,) + a.variables
    tv = MultiPoly.variable(t, big, a.ring)
    gens = ([tv * g.embed(big) for g in a.all_generators()]
            + [(1 - tv) * g.embed(big) for g in b.all_generators()])
    elim = eliminate(IdealPresentation(big, tuple(gens), (), a.ring), [t])
    return IdealPresentation(a.variables, tuple(_drop_first(g, a.variables) for g in elim.generators),
                             a.relations, a.ring)


def colon(a: IdealPresentation, f: MultiPoly) -> IdealPresentation:
    """(a : f) = {r : r f in a}, from the polynomial-ring intersection (a + relations) ∩ (f)."""
    fa = IdealPresentation(a.variables, (f,), (), a.ring)
    inter = intersect(IdealPresentation(a.variables, tuple(a.all_generators()), (), a.ring), fa)
    gens = tuple(_exact_divide(g, f) for g in inter.generators)
    return IdealPresentation(a.variables, gens, a.relations, a.ring)


def _exact_divide(g: MultiPoly, f: MultiPoly) -> MultiPoly:
    q: dict = {}
    rem = {e: Fraction(c) for e, c in g.terms.items()}
    fm = max(f.terms, key=DEGREVLEX.key)
    fc = Fraction(f.terms[fm])
    while rem:
        m = max(rem, key=DEGREVLEX.key)
        if not monomial_divides(fm, m):
            break
        c = rem[m] / fc
        s = tuple(x - y for x, y in zip(m, fm))
        q[s] = q.get(s, 0) + c
        for e, a in f.terms.items():
            k = tuple(x + y for x, y in zip(e, s))
            v = rem.get(k, 0) - c * a
            if v:
                rem[k] = v
            else:
                rem.pop(k, None)
    if rem:
        raise ArithmeticError(f"{f} does not divide {g}")
    if g.ring.kind != "QQ" and any(c.denominator != 1 for c in q.values()):
        raise ArithmeticError("quotient has non-integral coefficients")
    return MultiPoly(g.variables, q, g.ring)


def gb_integer(ideal: IdealPresentation) -> int:
    """Positive generator of (ideal ∩ Z); 0 when the intersection is trivial."""
    if ideal.ring.kind != "ZZ":
        raise ValueError("gb_integer needs an ideal over ZZ")
    for p in groebner_basis(ideal):
        if p.is_constant():
            return abs(int(p.constant_coefficient()))
    return 0


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass
class QuotientStructure:
    """Standard-monomial description of (Z/p^N)[x]/I: monomial -> exponent k of Z/p^k."""

    p: int
    precision: int
    constant_exponent: int
    cells: dict = field(default_factory=dict)

    @property
    def log_length(self) -> int:
        return sum(self.cells.values())

    def size(self) -> int:
        return self.p ** self.log_length


def quotient_structure(ideal: IdealPresentation, p: int, precision: int) -> QuotientStructure:
    """Analyse (R/I) ⊗ Z/p^N from a strong Groebner basis of I + relations + (p^N).

    The quotient has a filtration by standard monomials with cyclic factors
    Z/c_m, where c_m is the gcd of the leading coefficients of basis elements
    whose leading monomial divides m.
    """
    if ideal.ring.kind == "QQ":
        raise ValueError("lengths need integral coefficients")
    modulus = p**precision
    zring = ideal.change_ring(ZZ) if ideal.ring.kind != "ZZ" else ideal
    domain, terms = _engine_input(zring, [MultiPoly.constant(modulus, zring.variables, ZZ)])
    engine = Engine(len(zring.variables), DEGREVLEX, "ZZ")
    basis = engine.groebner(terms)
    n = len(zring.variables)
    leads = []
    for t in basis:
        m = max(t, key=DEGREVLEX.key)
        v = _vp(t[m], p) if t[m] % modulus else precision
        leads.append((m, min(v, precision)))
    const_exp = min((v for m, v in leads if not any(m)), default=precision)
    # monomials with a unit leading coefficient bound the standard set
    unit_leads = [m for m, v in leads if v == 0]
    bounds = []
    for i in range(n):
        pure = [m[i] for m in unit_leads if all(m[j] == 0 for j in range(n) if j != i)]
        if not pure:
            raise NonArtinianQuotient(
                f"quotient is not finite at p={p}: no pure power of {zring.variables[i]} is a unit-leading term")
        bounds.append(min(pure))
    cells = {}
    for m in product(*(range(b) for b in bounds)):
        if any(monomial_divides(u, m) for u in unit_leads):
            continue
        k = min((v for lm, v in leads if monomial_divides(lm, m)), default=precision)
        if k:
            cells[m] = k
    return QuotientStructure(p, precision, const_exp, cells)


def quotient_log_length(ring: IdealPresentation, ideal: IdealPresentation, p: int, precision: int) -> int:
    """m with #((R/ideal) ⊗ Z_p) = p^m, where R = Z[x]/(ring.relations).

    ``ring`` supplies the defining relations of R (its generators are ignored).
    Raises NonArtinianQuotient if the quotient is infinite at p and
    InsufficientPrecision when p^(N-1) does not already kill it modulo p^N.
    """
    if precision < 1:
        raise ValueError("precision must be >= 1")
    rels = tuple(ring.relations) + tuple(r for r in ideal.relations if r not in ring.relations)
    full = IdealPresentation(ideal.variables, ideal.generators, rels, ideal.ring)
    q = quotient_structure(full, p, precision)
    if q.constant_exponent >= precision and q.cells:
        raise InsufficientPrecision(
            f"quotient at p={p} is not killed by p^{precision - 1}; increase precision beyond {precision}")
    return q.log_length
