import json

import pytest

from neronheights.model import (
    Closed,
    Difference,
    DisjointUnion,
    FixtureError,
    PlaneCurve,
    fibre_is_smooth,
    kernel_defect,
    model_from_json,
    model_to_json,
    naive_model,
    parse_constructible,
    validate_model,
)
from neronheights.polynomials import MultiPoly

import triangle
from conftest import example

# component data of the two very bad fibres of the genus-3 example (p = 3 and p = 5)
VERY_BAD = {
    3: ([1, 1, 2, 2], [[-6, 0, 2, 1], [0, -2, 0, 1], [2, 0, -2, 1], [1, 1, 1, -2]]),
    5: ([1, 1, 1, 1, 1, 1, 2, 3, 3], [
        [-1, 0, 1, 0, 0, 0, 0, 0, 0],
        [0, -4, 0, 0, 0, 1, 0, 0, 1],
        [1, 0, -2, 0, 0, 1, 0, 0, 0],
        [0, 0, 0, -3, 1, 0, 1, 0, 0],
        [0, 0, 0, 1, -2, 1, 0, 0, 0],
        [0, 1, 1, 0, 1, -3, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, -2, 0, 1],
        [0, 0, 0, 0, 0, 0, 0, -1, 1],
        [0, 1, 0, 0, 0, 0, 1, 1, -2],
    ]),
}


@pytest.mark.parametrize("p", sorted(VERY_BAD))
def test_fibre_class_is_in_the_kernel(p):
    mult, M = VERY_BAD[p]
    assert kernel_defect(M, mult) == [0] * len(mult)
    assert all(M[i][j] == M[j][i] for i in range(len(M)) for j in range(len(M)))
    assert kernel_defect(M, [1] * len(mult)) != [0] * len(mult)


def test_constructible_membership():
    v = ("x", "y")
    x, y = (MultiPoly.variable(n, v) for n in v)
    V = Difference(Closed((x,)), Closed((x, y - 1)))
    assert V.contains({"x": 0, "y": 0}, 3)
    assert not V.contains({"x": 0, "y": 4}, 3)
    assert not V.contains({"x": 1, "y": 0}, 3)
    U = DisjointUnion((Closed((x,)), Difference(Closed(()), Closed((x,)))))
    assert all(U.contains({"x": a, "y": b}, 5) for a in range(5) for b in range(5))
    assert parse_constructible(V.to_json(), v) == V


def test_naive_model_at_good_and_regular_bad_primes():
    curve = PlaneCurve.parse("X^2*Y^2 - X*Y^3 - X^3*Z - 2*X^2*Z^2 + Y^2*Z^2 - X*Z^3 + Y*Z^3")
    assert fibre_is_smooth(curve, 5)
    assert not fibre_is_smooth(curve, 41)
    m = naive_model(curve, 41)
    assert validate_model(m).ok
    assert m.multiplicities == [1]


def test_naive_model_refuses_reducible_fibres():
    with pytest.raises(FixtureError):
        naive_model(triangle.CURVE, 3)


def test_triangle_model_validates_and_round_trips():
    m = triangle.model()
    report = validate_model(m)
    assert report.ok, report.failures
    again = model_from_json(json.loads(json.dumps(model_to_json(m))))
    assert model_to_json(again) == model_to_json(m)


def test_validation_catches_bad_data():
    m = triangle.model()
    m.intersection_matrix = [[-2, 1, 1], [1, -2, 1], [0, 1, -2]]
    report = validate_model(m)
    assert not report.ok and not report.checks["kernel"] and not report.checks["symmetric"]


def test_unknown_schema_is_rejected():
    with pytest.raises(FixtureError):
        model_from_json({"schema": 2, "p": 3, "naive": True}, triangle.CURVE)


def _projective_points(p):
    for Z in range(p):
        for Y in range(p):
            for X in range(p):
                if (X, Y, Z) != (0, 0, 0) and next(c for c in (Z, Y, X) if c) == 1:
                    yield (X, Y, Z)


def _in_chart(chart, P, p):
    k = "XYZ".index(chart.id)
    if P[k] % p == 0:
        return None
    inv = pow(P[k], -1, p)
    names = iter(chart.variables)
    return {next(names): c * inv % p for i, c in enumerate(P) if i != k}


@pytest.mark.parametrize("name", ["torsion", "rank1", "cartan", "verybad", "triangle"])
@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_partition_pieces_are_disjoint(name, p):
    # every point of the plane over F_p, hence every point of the fibre, lies in exactly one piece
    curve = triangle.CURVE if name == "triangle" else example(name).curve
    charts = curve.standard_charts()
    pieces = curve.standard_partition(charts)
    for P in _projective_points(p):
        inside = [i for i, c in enumerate(charts) if (pt := _in_chart(c, P, p)) is not None and pieces[i].contains(pt, p)]
        assert len(inside) == 1, (P, inside)
