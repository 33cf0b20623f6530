"""A regular model with a triangle of lines as special fibre, for tests of the vertical correction.

C: XYZ = 3 G(X, Y, Z) with G nonzero mod 3 at the three vertices.  Mod 3 the
fibre is XYZ = 0; at a vertex the local equation is uv = 3 * unit, so the
surface is regular there, and it is smooth over F_3 elsewhere on the fibre.
"""
from neronheights.intersect import DivisorSpec, point_divisor
from neronheights.model import ChartedModel, FiberComponent, PlaneCurve
from neronheights.polynomials import MultiPoly, ZZ

G = "-2*X^3 + 2*Y^3 + Z^3 - 2*X^2*Y - Y^2*Z + X*Z^2 - 2*Y*Z^2"
CURVE = PlaneCurve.parse(f"X*Y*Z - 3*({G})", "triangle")
POINTS = {
    "A": (0, 1, 2), "B": (0, 1, -1), "C": (0, 1, 1),       # on X = 0 mod 3
    "D": (2, 3, 1), "E": (1, 0, 1),                       # on Y = 0 mod 3
    "F": (2, 1, 3), "G": (1, -1, -3), "H": (2, -1, -3),   # on Z = 0 mod 3
}
MATRIX = [[-2, 1, 1], [1, -2, 1], [1, 1, -2]]


def model() -> ChartedModel:
    charts = CURVE.standard_charts()
    by_id = {c.id: c for c in charts}

    def gens(chart_id, var):
        c = by_id[chart_id]
        return (MultiPoly.constant(3, c.variables, ZZ), MultiPoly.variable(var, c.variables, ZZ))

    comps = [
        FiberComponent("X=0", 1, {"Y": gens("Y", "x"), "Z": gens("Z", "x")}),
        FiberComponent("Y=0", 1, {"X": gens("X", "y"), "Z": gens("Z", "y")}),
        FiberComponent("Z=0", 1, {"X": gens("X", "z"), "Y": gens("Y", "z")}),
    ]
    return ChartedModel(3, charts, CURVE.standard_partition(charts), comps, MATRIX, "triangle")


def divisor(name: str, **coeffs) -> DivisorSpec:
    return DivisorSpec(name, tuple((c, point_divisor(k, POINTS[k])) for k, c in coeffs.items()))
