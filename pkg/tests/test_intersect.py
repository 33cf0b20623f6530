import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from neronheights.arith import valuation
from neronheights.ideals import saturate
from neronheights.intersect import (
    CommonComponent,
    DivisorSpec,
    EffectiveDivisor,
    InconsistentModel,
    component_degrees,
    divisors_from_json,
    local_neron_pairing,
    naive_pairing,
    point_divisor,
    precision_bound,
    shift_gauge,
    solve_correction,
    vertical_correction,
)
from neronheights.model import Chart, Closed, Difference, DisjointUnion, FixtureError, naive_model
from neronheights.polynomials import ZZ, MultiPoly

import test_ideals
import triangle
from conftest import example

RANK1_POINTS = [(0, 0, 1), (0, 1, -1), (0, 1, 0), (1, 0, -1), (1, 0, 0), (1, 1, -1), (1, 1, 0), (1, 4, -3)]


def test_precision_bound():
    assert precision_bound(2, 12) == 3
    assert precision_bound(5, 12) == 1
    assert precision_bound(3, None, [1, 1, 2, 2]) == 3
    with pytest.raises(CommonComponent):
        precision_bound(3, 0)


def test_solve_correction_pins_first_coordinate():
    x = solve_correction(triangle.MATRIX, [1, -1, 0])
    assert x == [0, Fraction(-2, 3), Fraction(-1, 3)]
    with pytest.raises(InconsistentModel):
        solve_correction(triangle.MATRIX, [1, 0, 0])  # degree of b must vanish


# --- partition refinement -------------------------------------------------


def _pair_product(chart, labels, p):
    """Ideal of a sum of two triangle points: product of their ideals, made horizontal at p."""
    g1, g2 = (point_divisor(k, triangle.POINTS[k]).generators(chart) for k in labels)
    return saturate(chart.ideal([u * v for u in g1 for v in g2]), MultiPoly.constant(p, chart.variables, ZZ))


def meeting_pair_data():
    """A + F against B + G on the Y chart: they meet at two different points modulo 3."""
    chart = triangle.CURVE.standard_charts()[1]
    return chart, _pair_product(chart, "AF", 3), _pair_product(chart, "BG", 3)


@pytest.fixture(scope="module")
def meeting_pair():
    return meeting_pair_data()


polys = st.lists(st.integers(-3, 3), min_size=6, max_size=6)


def _poly(chart, coeffs):
    u, v = (MultiPoly.variable(n, chart.variables, ZZ) for n in chart.variables)
    terms = [MultiPoly.constant(1, chart.variables, ZZ), u, v, u * v, u * u, v * v]
    out = MultiPoly.constant(0, chart.variables, ZZ)
    for c, t in zip(coeffs, terms):
        out = out + t * c
    return out


@settings(max_examples=20, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(polys, polys)
def test_partition_refinement(meeting_pair, c1, c2):
    chart, a, b = meeting_pair
    whole = Closed(())
    N = 3
    total = naive_pairing(whole, a, b, chart, 3, N)
    assert total == 2
    h1, h2 = _poly(chart, c1), _poly(chart, c2)
    halves = [Closed((h1,)), Difference(whole, Closed((h1,)))]
    quarters = [q for V in halves for q in (V.intersect_closed((h2,)), Difference(V, Closed((h2,))))]
    assert sum(naive_pairing(V, a, b, chart, 3, N) for V in halves) == total
    assert sum(naive_pairing(V, a, b, chart, 3, N) for V in quarters) == total
    assert naive_pairing(DisjointUnion(tuple(quarters)), a, b, chart, 3, N) == total


def test_naive_pairing_against_enumeration():
    # the affine plane as a chart: then the quotient is the one enumerated in test_ideals
    chart = Chart("A2", test_ideals.XY, ())
    rng = random.Random(31)
    for _ in range(30):
        p, a, b, k, f, g, hs = inst = test_ideals._random_instance(rng)
        D = chart.ideal([test_ideals.poly(_text(f)), MultiPoly.constant(p**k, chart.variables, ZZ)])
        E = chart.ideal([test_ideals.poly(_text(e)) for e in [g, *hs]])
        whole = Closed(())
        m = naive_pairing(whole, D, E, chart, p, k + 1)
        assert m == test_ideals._brute_log_length(*inst), inst
        h = test_ideals.poly(f"x - {rng.randrange(p)}")
        assert naive_pairing(DisjointUnion((Closed((h,)), Difference(whole, Closed((h,))))), D, E, chart, p, k + 1) == m


def _text(expr):
    return str(expr).replace("**", "^")


# --- vertical correction on a regular model with three components ---------

TRIANGLE_DIVISORS = {
    "D": {"A": 1, "E": -1},
    "E": {"F": 1, "C": -1},
    "F": {"B": 1, "G": -1, "D": 1, "H": -1},
}


def triangle_data():
    return triangle.model(), {k: triangle.divisor(k, **v) for k, v in TRIANGLE_DIVISORS.items()}


@pytest.fixture(scope="module")
def tri():
    return triangle_data()


@pytest.mark.parametrize("name", sorted(TRIANGLE_DIVISORS))
def test_phi_orthogonality(tri, name):
    model, divs = tri
    D = divs[name]
    phi = vertical_correction(D, model)
    b = component_degrees(D, model)
    M = model.intersection_matrix
    assert [b[i] + sum(M[i][j] * phi.coefficients[j] for j in range(3)) for i in range(3)] == [0, 0, 0]


def test_component_degrees_follow_reduction(tri):
    model, divs = tri
    assert component_degrees(divs["F"], model) == [1, 1, -2]


@pytest.mark.parametrize("t", [Fraction(1), Fraction(-5, 7), Fraction(13, 2)])
def test_gauge_independence(tri, t):
    model, divs = tri
    D, E = divs["E"], divs["F"]
    base = local_neron_pairing(D, E, model)
    moved = local_neron_pairing(D, E, model, shift_gauge(vertical_correction(D, model), model, t))
    assert moved.value == base.value == -2


def test_symmetry_and_values(tri):
    model, divs = tri
    expected = {("D", "E"): Fraction(-1, 3), ("D", "F"): Fraction(1), ("E", "F"): Fraction(-2)}
    for (a, b), v in expected.items():
        assert local_neron_pairing(divs[a], divs[b], model).value == v
        assert local_neron_pairing(divs[b], divs[a], model).value == v


def _sum(name, *divs):
    return DivisorSpec(name, tuple(t for d in divs for t in d.terms))


def test_bilinearity_on_the_triangle(tri):
    model, divs = tri
    D, E, F = divs["D"], divs["E"], divs["F"]
    total = local_neron_pairing(D, _sum("E+F", E, F), model).value
    assert total == local_neron_pairing(D, E, model).value + local_neron_pairing(D, F, model).value


def test_bilinearity_at_a_good_prime():
    ex = example("rank1")
    model = naive_model(ex.curve, 2)
    D, E, G = ex.divisors["D"], ex.divisors["E"], ex.divisors["G"]
    other = DivisorSpec("H", ((1, point_divisor("O", (0, 1, 0))), (-1, point_divisor("R", (0, 1, -1)))))
    for second in (G, other):
        total = local_neron_pairing(D, _sum("E+", E, second), model).value
        assert total == local_neron_pairing(D, E, model).value + local_neron_pairing(D, second, model).value


def test_shared_support_is_refused(tri):
    model, divs = tri
    with pytest.raises(CommonComponent):
        local_neron_pairing(divs["D"], triangle.divisor("X", A=1, B=-1), model)


# --- principal divisors at good primes ------------------------------------


def _line(rng, avoid):
    while True:
        c = [rng.randint(-4, 4) for _ in range(3)]
        if gcd(gcd(c[0], c[1]), c[2]) == 1 and all(_value(c, P) for P in avoid):
            return c


def _value(line, P):
    return sum(a * b for a, b in zip(line, P))


def _line_section(label, line, curve):
    X, Y, Z = (MultiPoly.variable(v, ("X", "Y", "Z"), ZZ) for v in ("X", "Y", "Z"))
    L = X * line[0] + Y * line[1] + Z * line[2]
    return EffectiveDivisor(label, curve.degree, (L, curve.equation))


def principal_instances(count=10, seed=7):
    """(D, div f, p, v_p(f(D))) with D = P - Q and f a quotient of two lines."""
    curve = example("rank1").curve
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        P, Q = rng.sample(RANK1_POINTS, 2)
        l1, l2 = _line(rng, (P, Q)), _line(rng, (P, Q))
        num, den = _value(l1, P) * _value(l2, Q), _value(l2, P) * _value(l1, Q)
        primes = [p for p in (2, 3, 5, 7, 11, 13) if (num * den) % p == 0]
        if not primes:
            continue
        p = rng.choice(primes)
        D = DivisorSpec("D", ((1, point_divisor("P", P)), (-1, point_divisor("Q", Q))))
        f = DivisorSpec("f", ((1, _line_section("L1", l1, curve)), (-1, _line_section("L2", l2, curve))))
        out.append((curve, D, f, p, valuation(num, p) - valuation(den, p)))
    return out


@pytest.mark.parametrize("case", range(10))
def test_principal_divisor_identity(case):
    curve, D, f, p, v = principal_instances()[case]
    lp = local_neron_pairing(D, f, naive_model(curve, p))
    # <D, div f>_p = -log|f(D)|_p = v_p(f(D)) log p
    assert lp.value == v
    assert local_neron_pairing(f, D, naive_model(curve, p)).value == v


def test_principal_instances_are_nontrivial():
    assert sum(1 for *_, v in principal_instances() if v) >= 5


# --- fixtures --------------------------------------------------------------


def test_rank1_local_pairing_at_two():
    ex = example("rank1")
    lp = local_neron_pairing(ex.divisors["D"], ex.divisors["E"], naive_model(ex.curve, 2))
    assert lp.value == -3 and lp.correction == 0


def test_divisor_fixture_errors():
    base = {"schema": 1, "pieces": {"P": {"point": [1, 0, 0]}, "Q": {"point": [0, 1, 0]}}}
    assert set(divisors_from_json({**base, "divisors": {"D": {"P": 1, "Q": -1}}})) == {"D"}
    with pytest.raises(FixtureError):
        divisors_from_json({**base, "divisors": {"D": {"P": 1}}})
    with pytest.raises(FixtureError):
        divisors_from_json({**base, "divisors": {"D": {"P": 1, "R": -1}}})
    bad_split = {"terms": {"P": 1, "Q": -1}, "split": [{"P": 1}, {"P": 1}]}
    with pytest.raises(FixtureError):
        divisors_from_json({**base, "divisors": {"D": bad_split}})
