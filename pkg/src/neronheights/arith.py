"""Integer helpers: valuations, probable primes, factorisation with a time budget."""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

from sympy import isprime

TRIAL_LIMIT = 10**6


def is_probable_prime(n: int) -> bool:
    return n > 1 and bool(isprime(n))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def _small_primes(limit: int) -> List[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(range(i * i, limit + 1, i)))
    return [i for i in range(limit + 1) if sieve[i]]


_PRIMES: List[int] = []


def _primes() -> List[int]:
    if not _PRIMES:
        _PRIMES.extend(_small_primes(TRIAL_LIMIT))
    return _PRIMES


def brent_rho(n: int, deadline: float, seed: int = 1) -> int | None:
    """A nontrivial factor of composite n, or None when the deadline passes."""
    if n % 2 == 0:
        return 2
    rng = random.Random(seed)
    while time.monotonic() < deadline:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
            if time.monotonic() > deadline:
                return None
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    return None


@dataclass
class Factorization:
    """Prime factors with exponents; ``unfactored`` holds composites left when time ran out."""

    factors: Dict[int, int] = field(default_factory=dict)
    unfactored: List[int] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.unfactored

    @property
    def primes(self) -> List[int]:
        return sorted(self.factors)


def factorize(n: int, budget: float = 30.0, hints: Iterable[int] = ()) -> Factorization:
    """Trial division to 10^6, caller-supplied hints, then Brent's rho until ``budget`` seconds."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out = Factorization()

    def add(p: int, e: int = 1):
        out.factors[p] = out.factors.get(p, 0) + e

    for h in sorted(set(abs(h) for h in hints)):
        if h > 1 and n % h == 0:
            e = valuation(n, h)
            n //= h**e
            if is_probable_prime(h):
                add(h, e)
            else:
                sub = factorize(h**e, budget, ())
                for p, k in sub.factors.items():
                    add(p, k)
                out.unfactored.extend(sub.unfactored)
    for p in _primes():
        if p * p > n:
            break
        if n % p == 0:
            e = valuation(n, p)
            n //= p**e
            add(p, e)
    deadline = time.monotonic() + budget
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_probable_prime(m):
            add(m)
            continue
        root = math.isqrt(m)
        if root * root == m:
            stack += [root, root]
            continue
        f = brent_rho(m, deadline)
        if f is None:
            out.unfactored.append(m)
            continue
        stack += [f, m // f]
    return out
