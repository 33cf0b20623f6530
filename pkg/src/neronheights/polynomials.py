"""Sparse multivariate polynomials over Q, Z and Z/p^N.

Polynomials are stored as ``{exponent tuple: coefficient}`` dictionaries with
no zero coefficients.  Coefficients are Python ``int`` for Z and Z/p^N and
``fractions.Fraction`` for Q.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Sequence, Tuple

Exponent = Tuple[int, ...]


class PolynomialParseError(ValueError):
    """Raised for malformed polynomial strings; ``position`` is 0-based."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}: {text!r}")


@dataclass(frozen=True)
class CoefficientRing:
    kind: str  # "QQ", "ZZ" or "ZZ/p^N"
    p: int | None = None
    exponent: int | None = None

    def __post_init__(self):
        if self.kind not in ("QQ", "ZZ", "ZZ/p^N"):
            raise ValueError(f"unsupported coefficient ring {self.kind!r}")
        if self.kind == "ZZ/p^N":
            from .arith import is_probable_prime

            if self.p is None or not is_probable_prime(self.p):
                raise ValueError(f"p must be prime, got {self.p}")
            if self.exponent is None or self.exponent < 1:
                raise ValueError(f"exponent must be >= 1, got {self.exponent}")

    @property
    def modulus(self) -> int | None:
        if self.kind == "ZZ/p^N":
            return self.p**self.exponent
        return None

    @property
    def is_field(self) -> bool:
        return self.kind == "QQ"

    def convert(self, c):
        if self.kind == "QQ":
            return Fraction(c)
        if isinstance(c, Fraction):
            if c.denominator != 1:
                if self.kind == "ZZ":
                    raise ValueError(f"{c} is not an integer")
                return c.numerator * pow(c.denominator, -1, self.modulus) % self.modulus
            c = c.numerator
        c = int(c)
        if self.kind == "ZZ/p^N":
            return c % self.modulus
        return c

    def __str__(self):
        if self.kind == "ZZ/p^N":
            return f"ZZ/{self.p}^{self.exponent}"
        return self.kind


QQ = CoefficientRing("QQ")
ZZ = CoefficientRing("ZZ")


def zmod(p: int, n: int) -> CoefficientRing:
    return CoefficientRing("ZZ/p^N", p, n)


@dataclass(frozen=True)
class MonomialOrder:
    """``degrevlex``, ``lex``, or ``block`` (degrevlex inside each block,
    blocks compared lexicographically; ``blocks`` holds the block sizes)."""

    kind: str = "degrevlex"
    blocks: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("degrevlex", "lex", "block"):
            raise ValueError(f"unknown monomial order {self.kind!r}")
        if self.kind == "block" and not self.blocks:
            raise ValueError("block order needs block sizes")

    def key(self, e: Exponent):
        return _order_key(self, e)


@lru_cache(maxsize=1 << 20)
def _order_key(order: MonomialOrder, e: Exponent):
    if order.kind == "degrevlex":
        return (sum(e), tuple(-x for x in reversed(e)))
    if order.kind == "lex":
        return e
    parts = []
    start = 0
    for size in order.blocks:
        b = e[start:start + size]
        parts.append((sum(b), tuple(-x for x in reversed(b))))
        start += size
    if start != len(e):
        b = e[start:]
        parts.append((sum(b), tuple(-x for x in reversed(b))))
    return tuple(parts)


DEGREVLEX = MonomialOrder("degrevlex")
LEX = MonomialOrder("lex")


class MultiPoly:
    """Immutable sparse polynomial in a fixed ordered list of variables."""

    __slots__ = ("variables", "terms", "ring", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponent, object] | None = None,
                 ring: CoefficientRing = ZZ):
        self.variables = tuple(variables)
        self.ring = ring
        n = len(self.variables)
        clean: Dict[Exponent, object] = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != n:
                raise ValueError(f"exponent {e} has wrong length for {self.variables}")
            c = ring.convert(c)
            if c:
                clean[e] = clean.get(e, 0) + c
                if ring.modulus:
                    clean[e] %= ring.modulus
                if not clean[e]:
                    del clean[e]
        self.terms = clean
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, c, variables: Sequence[str], ring: CoefficientRing = ZZ) -> "MultiPoly":
        return cls(variables, {(0,) * len(variables): c}, ring)

    @classmethod
    def variable(cls, name: str, variables: Sequence[str], ring: CoefficientRing = ZZ) -> "MultiPoly":
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): 1}, ring)

    @classmethod
    def parse(cls, text: str, variables: Sequence[str], ring: CoefficientRing = ZZ) -> "MultiPoly":
        return _Parser(text, tuple(variables), ring).parse()

    def _new(self, terms) -> "MultiPoly":
        return MultiPoly(self.variables, terms, self.ring)

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.variables != self.variables:
                raise ValueError(f"variable mismatch {self.variables} vs {other.variables}")
            return other
        return MultiPoly.constant(other, self.variables, self.ring)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return self._new(t)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        t: Dict[Exponent, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return self._new(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(1, self.variables, self.ring)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.variables == other.variables and self.terms == other.terms
        if other == 0:
            return not self.terms
        try:
            return self == self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # queries --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_coefficient(self):
        return self.terms.get((0,) * len(self.variables), 0)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, var: str) -> int:
        i = self.variables.index(var)
        return max((e[i] for e in self.terms), default=-1)

    def leading_monomial(self, order: MonomialOrder = DEGREVLEX) -> Exponent:
        return max(self.terms, key=order.key)

    def leading_coefficient(self, order: MonomialOrder = DEGREVLEX):
        return self.terms[self.leading_monomial(order)]

    def content(self) -> int:
        from math import gcd

        g = 0
        for c in self.terms.values():
            g = gcd(g, int(c))
        return g

    # transformations ------------------------------------------------------
    def change_ring(self, ring: CoefficientRing) -> "MultiPoly":
        return MultiPoly(self.variables, self.terms, ring)

    def clear_denominators(self) -> "MultiPoly":
        """Primitive-free integer multiple: scale a Q-polynomial to Z by the lcm of denominators."""
        from math import lcm

        d = 1
        for c in self.terms.values():
            d = lcm(d, Fraction(c).denominator)
        return MultiPoly(self.variables, {e: int(Fraction(c) * d) for e, c in self.terms.items()}, ZZ)

    def derivative(self, var: str) -> "MultiPoly":
        i = self.variables.index(var)
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                t[tuple(f)] = c * e[i]
        return self._new(t)

    def embed(self, variables: Sequence[str]) -> "MultiPoly":
        """Re-express in a larger (or reordered) variable list."""
        variables = tuple(variables)
        idx = [variables.index(v) for v in self.variables]
        t = {}
        for e, c in self.terms.items():
            f = [0] * len(variables)
            for i, k in zip(idx, e):
                f[i] = k
            t[tuple(f)] = c
        return MultiPoly(variables, t, self.ring)

    def substitute(self, values: Mapping[str, object], variables: Sequence[str] | None = None) -> "MultiPoly":
        """Substitute polynomials (in ``variables``) or scalars for variables."""
        target = tuple(variables) if variables is not None else self.variables
        pieces = {}
        for v in self.variables:
            if v in values:
                val = values[v]
                if not isinstance(val, MultiPoly):
                    val = MultiPoly.constant(val, target, self.ring)
                pieces[v] = val
            else:
                pieces[v] = MultiPoly.variable(v, target, self.ring)
        result = MultiPoly(target, {}, self.ring)
        cache: Dict[Tuple[str, int], MultiPoly] = {}
        for e, c in self.terms.items():
            term = MultiPoly.constant(c, target, self.ring)
            for v, k in zip(self.variables, e):
                if k:
                    if (v, k) not in cache:
                        cache[(v, k)] = pieces[v] ** k
                    term = term * cache[(v, k)]
            result = result + term
        return result

    def evaluate(self, point: Sequence[object]):
        """Evaluate at a point (any numeric type supporting + and *)."""
        total = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = v * x**k
            total = total + v
        return total

    def homogenize(self, name: str, degree: int | None = None) -> "MultiPoly":
        d = self.total_degree() if degree is None else degree
        variables = self.variables + (name,)
        return MultiPoly(variables, {e + (d - sum(e),): c for e, c in self.terms.items()}, self.ring)

    # formatting -----------------------------------------------------------
    def sorted_terms(self, order: MonomialOrder = DEGREVLEX):
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    def to_string(self) -> str:
        """Canonical form: ``coeff*x^e*...`` terms joined by `` + ``, degrevlex-descending."""
        if not self.terms:
            return "0"
        out = []
        for e, c in self.sorted_terms():
            factors = [str(c)]
            for v, k in zip(self.variables, e):
                if k == 1:
                    factors.append(v)
                elif k:
                    factors.append(f"{v}^{k}")
            out.append("*".join(factors))
        return " + ".join(out)

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"MultiPoly({self.to_string()!r}, vars={list(self.variables)}, ring={self.ring})"


def monomial_divides(a: Exponent, b: Exponent) -> bool:
    return all(x <= y for x, y in zip(a, b))


def parse_polys(texts: Iterable[str], variables: Sequence[str], ring: CoefficientRing = ZZ):
    return [MultiPoly.parse(t, variables, ring) for t in texts]


class _Parser:
    """Recursive descent over ``+ - * ^ ** ( )``, integers, ``a/b`` rationals and names."""

    def __init__(self, text: str, variables: Tuple[str, ...], ring: CoefficientRing):
        self.text = text
        self.variables = variables
        self.ring = ring
        self.pos = 0
        # rationals are allowed while parsing and checked at the end
        self.work_ring = QQ if ring.kind == "ZZ" else ring

    def error(self, msg: str, pos: int | None = None):
        raise PolynomialParseError(msg, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> MultiPoly:
        if not self.text.strip():
            self.error("empty polynomial")
        p = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.peek()!r}")
        if self.ring.kind == "ZZ":
            for c in p.terms.values():
                if Fraction(c).denominator != 1:
                    self.error("non-integer coefficient in a ZZ polynomial", 0)
            return MultiPoly(self.variables, {e: int(c) for e, c in p.terms.items()}, ZZ)
        return p

    def expr(self) -> MultiPoly:
        acc = self.term()
        while self.peek() in ("+", "-") and self.peek():
            op = self.text[self.pos]
            self.pos += 1
            t = self.term()
            acc = acc - t if op == "-" else acc + t
        return acc

    def term(self) -> MultiPoly:
        acc = self.power()
        while True:
            c = self.peek()
            if c == "*" and self.text[self.pos:self.pos + 2] != "**":
                self.pos += 1
                acc = acc * self.power()
            elif c == "/":
                self.pos += 1
                start = self.pos
                den = self.power()
                if not den.is_constant() or not den:
                    self.error("division only by nonzero constants", start)
                inv = Fraction(1) / Fraction(den.constant_coefficient())
                acc = acc * MultiPoly.constant(inv, self.variables, self.work_ring)
            else:
                return acc

    def power(self) -> MultiPoly:
        base = self.atom()
        if self.peek() == "^" or self.text[self.pos:self.pos + 2] == "**":
            self.pos += 2 if self.text[self.pos] == "*" else 1
            self.skip()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("expected a nonnegative integer exponent")
            base = base ** int(self.text[start:self.pos])
        return base

    def atom(self) -> MultiPoly:
        c = self.peek()
        if not c:
            self.error("unexpected end of input")
        if c == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return inner
        if c.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return MultiPoly.constant(int(self.text[start:self.pos]), self.variables, self.work_ring)
        if c.isalpha() or c == "_":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if name not in self.variables:
                self.error(f"unknown variable {name!r}", start)
            return MultiPoly.variable(name, self.variables, self.work_ring)
        if c == "-" or c == "+":
            self.pos += 1
            inner = self.power()
            return -inner if c == "-" else inner
        self.error(f"unexpected character {c!r}")
