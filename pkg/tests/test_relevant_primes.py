import random

import pytest
import sympy

from neronheights.intersect import horizontal_ideal, local_neron_pairing, meeting_integer, naive_pairing, precision_bound
from neronheights.model import naive_model
from neronheights.relevant_primes import meeting_primes

import triangle
from conftest import example

PAIRS = [("torsion", "D", "E"), ("rank1", "D", "E"), ("rank1", "F", "G"), ("cartan", "D1", "E12"),
         ("ell37a", "D2", "E2"), ("verybad", "F", "G")]


@pytest.mark.parametrize("name,d,e", PAIRS)
def test_pairing_vanishes_outside_the_relevant_set(name, d, e):
    ex = example(name)
    D, E = ex.divisors[d], ex.divisors[e]
    report = meeting_primes(ex.curve, D, E)
    assert report.complete
    relevant = set(report.relevant_primes)
    rng = random.Random(f"{name}{d}{e}")
    others = rng.sample([p for p in sympy.primerange(2, 1000) if p not in relevant], 10)
    for p in others:
        assert local_neron_pairing(D, E, naive_model(ex.curve, p)).value == 0, p


def _horizontal_cases():
    ex = example("rank1")
    yield naive_model(ex.curve, 2), ex.divisors["D"], ex.divisors["E"]
    model, divs = triangle.model(), {k: triangle.divisor(k, **v) for k, v in
                                     {"D": {"A": 1, "E": -1}, "F": {"B": 1, "G": -1, "D": 1, "H": -1}}.items()}
    yield model, divs["D"], divs["F"]


@pytest.mark.parametrize("case", range(2))
def test_extra_precision_changes_nothing(case):
    model, D, E = list(_horizontal_cases())[case]
    p = model.p
    seen = 0
    for _, a in D.terms:
        for _, b in E.terms:
            for chart, V in zip(model.charts, model.partition):
                ia, ib = horizontal_ideal(a, chart, p), horizontal_ideal(b, chart, p)
                N = precision_bound(p, meeting_integer(ia, ib))
                m = naive_pairing(V, ia, ib, chart, p, N)
                assert all(naive_pairing(V, ia, ib, chart, p, N + k) == m for k in (1, 3))
                seen += m != 0
    assert seen
