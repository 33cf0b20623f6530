"""Buchberger's algorithm over Q and strong Groebner bases over Z.

The engine works on plain ``{exponent: coefficient}`` dictionaries.  Over Z
it implements the Euclidean-domain variant: S-polynomials plus G-polynomials
(built from a Bezout relation between leading coefficients), and reduction
that divides leading coefficients with remainder.  The output is a reduced
strong Groebner basis, so every element of the ideal has its leading term
divisible (coefficient and monomial) by the leading term of a basis element,
and normal forms are unique.

Computations in Z/p^N are done over Z with ``p^N`` added to the generators.
Pair selection follows the sugar strategy.
"""
from __future__ import annotations

import heapq
import logging
from fractions import Fraction
from math import gcd
from typing import Dict, List, Sequence, Tuple

from .polynomials import Exponent, MonomialOrder

log = logging.getLogger(__name__)

Terms = Dict[Exponent, object]


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _divides(a: Exponent, b: Exponent) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _lcm_mon(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x if x > y else y for x, y in zip(a, b))


def _sub_mon(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x - y for x, y in zip(a, b))


class _Elt:
    __slots__ = ("terms", "lm", "lc", "sugar", "lmdeg")

    def __init__(self, terms: Terms, order: MonomialOrder, sugar: int | None = None):
        self.terms = terms
        self.lm = max(terms, key=order.key)
        self.lc = terms[self.lm]
        self.lmdeg = sum(self.lm)
        self.sugar = max(sum(e) for e in terms) if sugar is None else sugar


def _leading(terms: Terms, order: MonomialOrder):
    m = max(terms, key=order.key)
    return m, terms[m]


def _axpy(f: Terms, c, shift: Exponent, g: Terms) -> None:
    """f -= c * x^shift * g, in place."""
    for e, a in g.items():
        m = tuple(x + y for x, y in zip(e, shift))
        v = f.get(m, 0) - c * a
        if v:
            f[m] = v
        else:
            f.pop(m, None)


def _scaled(c, shift: Exponent, g: Terms) -> Terms:
    return {tuple(x + y for x, y in zip(e, shift)): c * a for e, a in g.items()}


class Engine:
    """Groebner machinery for one coefficient domain ("ZZ" or "QQ") and order."""

    def __init__(self, nvars: int, order: MonomialOrder, domain: str = "ZZ"):
        if domain not in ("ZZ", "QQ"):
            raise ValueError(f"unsupported coefficient domain {domain!r}")
        self.nvars = nvars
        self.order = order
        self.domain = domain
        self.key = order.key

    # -- reduction ----------------------------------------------------------
    def _pick(self, m: Exponent, basis: Sequence[_Elt]):
        best = None
        for g in basis:
            if _divides(g.lm, m):
                if self.domain == "QQ":
                    return g
                if best is None or abs(g.lc) < abs(best.lc):
                    best = g
                    if abs(best.lc) == 1:
                        break
        return best

    def reduce(self, f: Terms, basis: Sequence[_Elt], full: bool = True) -> Terms:
        f = dict(f)
        rem: Terms = {}
        key = self.key
        while f:
            m = max(f, key=key)
            c = f[m]
            g = self._pick(m, basis)
            if g is not None:
                if self.domain == "QQ":
                    q = Fraction(c) / g.lc
                else:
                    q = c // g.lc
                if q:
                    _axpy(f, q, _sub_mon(m, g.lm), g.terms)
                    if m in f and self.domain == "ZZ":
                        # remainder r with 0 < r < |lc|; nothing reduces it further
                        pass
                    else:
                        continue
            if not full:
                rem.update(f)
                return rem
            rem[m] = f.pop(m)
        return rem

    def _normalize(self, f: Terms) -> Terms:
        if self.domain == "QQ":
            lc = f[max(f, key=self.key)]
            return {e: Fraction(c) / lc for e, c in f.items()}
        m = max(f, key=self.key)
        if f[m] < 0:
            return {e: -c for e, c in f.items()}
        return f

    # -- Buchberger ---------------------------------------------------------
    def groebner(self, polys: Sequence[Terms]) -> List[Terms]:
        basis: List[_Elt] = []
        pairs: list = []
        counter = 0

        def push(i: int, j: int):
            nonlocal counter
            f, g = basis[i], basis[j]
            m = _lcm_mon(f.lm, g.lm)
            sugar = sum(m) + max(f.sugar - f.lmdeg, g.sugar - g.lmdeg)
            heapq.heappush(pairs, (sugar, self.key(m), counter, i, j))
            counter += 1

        def add(terms: Terms, sugar: int | None = None):
            terms = self._normalize(terms)
            e = _Elt(terms, self.order, sugar)
            basis.append(e)
            k = len(basis) - 1
            for i in range(k):
                push(i, k)

        inputs = [dict(p) for p in polys if p]
        inputs.sort(key=lambda t: self.key(max(t, key=self.key)))
        for p in inputs:
            r = self.reduce(p, basis)
            if r:
                add(r)

        steps = 0
        while pairs:
            sugar, _, _, i, j = heapq.heappop(pairs)
            f, g = basis[i], basis[j]
            m = _lcm_mon(f.lm, g.lm)
            coprime_mon = all(x == 0 or y == 0 for x, y in zip(f.lm, g.lm))
            new_polys = []
            if self.domain == "QQ":
                if not coprime_mon:
                    s = _scaled(1 / Fraction(f.lc), _sub_mon(m, f.lm), f.terms)
                    _axpy(s, 1 / Fraction(g.lc), _sub_mon(m, g.lm), g.terms)
                    new_polys.append(s)
            else:
                a, b = f.lc, g.lc
                d = gcd(a, b)
                if not (coprime_mon and d == 1):
                    l = a // d * b
                    s = _scaled(l // a, _sub_mon(m, f.lm), f.terms)
                    _axpy(s, l // b, _sub_mon(m, g.lm), g.terms)
                    new_polys.append(s)
                if a % b and b % a:
                    _, u, v = _xgcd(a, b)
                    gp = _scaled(u, _sub_mon(m, f.lm), f.terms)
                    _axpy(gp, -v, _sub_mon(m, g.lm), g.terms)
                    new_polys.append(gp)
            for s in new_polys:
                if not s:
                    continue
                r = self.reduce(s, basis)
                if r:
                    add(r, sugar)
            steps += 1
        log.debug("groebner: %d pairs processed, %d elements before reduction", steps, len(basis))
        return self._interreduce([b.terms for b in basis])

    def _interreduce(self, polys: List[Terms]) -> List[Terms]:
        elts = [_Elt(self._normalize(p), self.order) for p in polys if p]
        # drop elements whose leading term is divisible by another's
        keep: List[_Elt] = []
        elts.sort(key=lambda e: (self.key(e.lm), abs(e.lc) if self.domain == "ZZ" else 0))
        for e in elts:
            redundant = False
            for k in keep:
                if _divides(k.lm, e.lm) and (self.domain == "QQ" or e.lc % k.lc == 0):
                    redundant = True
                    break
            if not redundant:
                keep.append(e)
        out = []
        for i, e in enumerate(keep):
            others = keep[:i] + keep[i + 1:]
            tail = dict(e.terms)
            lead = {e.lm: tail.pop(e.lm)}
            tail = self.reduce(tail, others) if tail else {}
            tail.update(lead)
            out.append(self._normalize(tail))
        out.sort(key=lambda t: self.key(max(t, key=self.key)))
        return out

    def normal_form(self, f: Terms, basis: Sequence[Terms]) -> Terms:
        elts = [_Elt(b, self.order) for b in basis]
        return self.reduce(f, elts)


def groebner_terms(polys: Sequence[Terms], nvars: int, order: MonomialOrder, domain: str = "ZZ") -> List[Terms]:
    return Engine(nvars, order, domain).groebner(polys)
