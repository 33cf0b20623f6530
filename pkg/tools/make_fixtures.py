"""Generate the committed fixtures under fixtures/.

    python tools/make_fixtures.py [torsion|rank1|cartan|verybad|ell37a|all]

Curves, divisors and models are written directly.  Period fixtures come from
tools/riemann_surface.py; each records the coordinate change, quadrature size
and τ symmetry residual in its "meta" block.
"""
from __future__ import annotations

import json
import logging
import sys
import time
from pathlib import Path

import sympy
from mpmath import mp

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tools"))

from riemann_surface import PlaneCurveSurface, X, Y, Z, choose_transform  # noqa: E402
from neronheights.theta import PeriodData, find_w, period_to_json  # noqa: E402

log = logging.getLogger("make_fixtures")
OUT = ROOT / "fixtures"


def dump(path: Path, data: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    log.info("wrote %s", path.relative_to(ROOT))


def curve_fixture(name: str, equation: str) -> dict:
    return {"schema": 1, "name": name, "equation": equation}


def naive_fixture(p: int) -> dict:
    return {"schema": 1, "p": p, "naive": True}


def period_fixture(equation: str, points: dict, theta_test=(), precision: int = 30, dps: int = 45,
                   quad_nodes: int = 36, seed: int = 0) -> dict:
    """τ, Abel-Jacobi images of ``points`` (label -> projective coordinates) and α(K), plus α(W) if possible."""
    F = sympy.sympify(equation, locals={"X": X, "Y": Y, "Z": Z})
    start = time.time()
    M = choose_transform(F, [tuple(complex(c) for c in P) for P in points.values()], seed=seed)
    S = PlaneCurveSurface(F, M, dps=dps, quad_nodes=quad_nodes)
    tau = S.compute_periods()
    aj = {label: S.aj(P) for label, P in points.items()}
    K = S.canonical_image()
    meta = {
        "generator": "tools/riemann_surface.py",
        "transform": M,
        "working_digits": dps,
        "quadrature_nodes": quad_nodes,
        "tau_symmetry_residual": mp.nstr(S.symmetry_residual, 3),
        "seconds": round(time.time() - start, 1),
    }
    period = PeriodData(S.g, tau, aj, K, precision, None, list(theta_test), meta)
    if theta_test or S.g == 1:
        res = find_w(period, list(theta_test))
        period.w = res.w
        meta["w_characteristic"] = list(res.characteristic)
        meta["w_theta_abs"] = mp.nstr(res.theta_abs, 3)
        meta["w_runner_up_abs"] = mp.nstr(res.runner_up_abs, 3)
    return period_to_json(period)


# --------------------------------------------------------------------------
# examples


def torsion():
    eq = "X^3*Y - X^2*Y^2 - X^2*Z^2 - X*Y^2*Z + X*Z^3 + Y^3*Z"
    d = OUT / "torsion"
    dump(d / "curve.json", curve_fixture("torsion", eq))
    dump(d / "divisors.json", {
        "schema": 1,
        "pieces": {"D1": {"point": [1, 0, 1]}, "D2": {"point": [1, 1, 0]},
                   "E1": {"point": [1, 0, 0]}, "E2": {"point": [1, 1, 1]}},
        "divisors": {"D": {"D1": 1, "D2": -1}, "E": {"E1": 3, "E2": -3}},
    })
    for p in (29, 163):
        dump(d / f"model_{p}.json", naive_fixture(p))
    pts = {"D1": (1, 0, 1), "D2": (1, 1, 0), "E1": (1, 0, 0), "E2": (1, 1, 1)}
    dump(d / "period.json", period_fixture(eq.replace("^", "**"), pts, ["D1", "D2"], seed=2))


def rank1():
    eq = "X^2*Y^2 - X*Y^3 - X^3*Z - 2*X^2*Z^2 + Y^2*Z^2 - X*Z^3 + Y*Z^3"
    d = OUT / "rank1"
    pts = {"D1": (1, 0, -1), "D2": (1, 1, -1), "E1": (1, 1, 0), "E2": (1, 4, -3),
           "O": (0, 1, 0), "R": (0, 1, -1)}
    dump(d / "curve.json", curve_fixture("rank1", eq))
    dump(d / "divisors.json", {
        "schema": 1,
        "pieces": {k: {"point": list(v)} for k, v in pts.items()},
        "divisors": {"D": {"D1": 1, "D2": -1}, "E": {"E1": 3, "E2": -3},
                     "F": {"O": 1, "D2": -1}, "G": {"E2": 3, "R": -3}},
    })
    for p in (41, 347):
        dump(d / f"model_{p}.json", naive_fixture(p))
    dump(d / "period.json", period_fixture(eq.replace("^", "**"), pts, ["D1", "D2"], seed=2))


# --------------------------------------------------------------------------
# moved divisors from line sections


def _expr(text: str):
    return sympy.expand(sympy.sympify(text.replace("^", "**"), locals={"X": X, "Y": Y, "Z": Z}))


def _same_point(a, b) -> bool:
    return sympy.Matrix(a).cross(sympy.Matrix(b)) == sympy.zeros(3, 1)


def line_through(F, a, b):
    """The line through rational points a and b, or the tangent line if a == b."""
    if tuple(a) == tuple(b):
        L = sum(sympy.diff(F, v).subs(dict(zip((X, Y, Z), a))) * v for v in (X, Y, Z))
    else:
        L = sympy.Matrix([[X, Y, Z], list(a), list(b)]).det()
    return sympy.Poly(L, X, Y, Z).primitive()[1].as_expr()


def line_section(F, L, named: dict):
    """L.C as a list of ("point", label-or-coords) and ("pair", ideal generators, roots) entries.

    A variable with unit coefficient in L is eliminated, so a quadratic factor made
    primitive in the other two variables generates the closure of its points over Z.
    """
    coeff = {v: sympy.Poly(L, X, Y, Z).coeff_monomial(v) for v in (X, Y, Z)}
    v = next((v for v in (X, Y, Z) if abs(coeff[v]) == 1), None)
    if v is None:
        raise ValueError(f"line {L} has no unit coefficient")
    a, b = [w for w in (X, Y, Z) if w != v]
    sub = sympy.solve(L, v)[0]
    H = sympy.expand(F.subs(v, sub))

    def lift(av, bv):
        vals = {a: av, b: bv}
        vals[v] = sub.subs({a: av, b: bv})
        return tuple(vals[w] for w in (X, Y, Z))

    out = []
    for f, e in sympy.factor_list(H)[1]:
        fp = sympy.Poly(f, a, b)
        if fp.total_degree() == 1:
            ca, cb = fp.coeff_monomial(a), fp.coeff_monomial(b)
            pt = [int(c) for c in lift(-cb, ca)]
            g = sympy.igcd(*pt)
            pt = tuple(c // g for c in pt)
            label = next((k for k, q in named.items() if _same_point(q, pt)), pt)
            out += [("point", label)] * e
        elif fp.total_degree() == 2 and e == 1:
            q = sympy.Poly(f, a, b).primitive()[1].as_expr()
            if fp.coeff_monomial(a ** 2) != 0:
                pts = [lift(r, 1) for r in sympy.Poly(q.subs(b, 1), a).all_roots()]
            else:
                pts = [lift(1, r) for r in sympy.Poly(q.subs(a, 1), b).all_roots()]
            out.append(("pair", [L, q], pts))
        else:
            raise ValueError(f"unexpected factor {f} of the line section")
    return out


def residual(F, a_label, b_label, named):
    """Line section through two named points with those two points removed."""
    L = line_through(F, named[a_label], named[b_label])
    sec = line_section(F, L, named)
    for lab in (a_label, b_label):
        sec.remove(("point", lab))
    return L, sec


def _poly_str(e) -> str:
    return str(sympy.expand(e)).replace("**", "^")


def _coords(P, digits: int = 80):
    out = []
    for c in P:
        v = sympy.N(c, digits)
        out.append(mp.mpc(mp.mpf(str(sympy.re(v))), mp.mpf(str(sympy.im(v)))))
    return tuple(out)


def cartan():
    eq = "(-Y-Z)*X^3 + (2*Y^2 + Y*Z)*X^2 + (-Y^3 + Y^2*Z - 2*Y*Z^2 + Z^3)*X + 2*Y^2*Z^2 - 3*Y*Z^3"
    F = _expr(eq)
    named = {"P0": (1, 0, 0), "P1": (0, 1, 0), "P2": (0, 0, 1), "P3": (-1, 0, 1),
             "P4": (1, 1, 0), "P5": (1, 0, 1), "P6": (0, 3, 2)}
    for k, v in named.items():
        assert F.subs(dict(zip((X, Y, Z), v))) == 0, k
    pieces = {k: {"point": list(v)} for k, v in named.items()}
    aj_points = {k: v for k, v in named.items()}
    divisors = {f"D{i}": {f"P{i}": 1, "P0": -1} for i in (1, 2, 3)}

    def as_terms(sec, line_key, sign, terms):
        for entry in sec:
            if entry[0] == "point":
                if not isinstance(entry[1], str):
                    raise ValueError("irrational line section point")
                terms[entry[1]] = terms.get(entry[1], 0) + sign
            else:
                _, gens, pts = entry
                label = f"S{line_key}"
                labels = [f"{label}a", f"{label}b"]
                pieces[label] = {"degree": 2, "homogeneous": [_poly_str(g) for g in gens], "points": labels}
                for lab, P in zip(labels, pts):
                    aj_points[lab] = _coords(P)
                terms[label] = terms.get(label, 0) + sign

    def geometric(terms):
        out = {}
        for lab, c in terms.items():
            for q in pieces[lab].get("points", [lab]):
                out[q] = out.get(q, 0) + c
        return {k: v for k, v in out.items() if v}

    choices = {}
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            best = None
            for a in named:
                try:
                    Lj, S = residual(F, f"P{j}", a, named)
                    L0, Sp = residual(F, "P0", a, named)
                except ValueError:
                    continue
                terms = {}
                as_terms(Sp, f"0{a[1:]}", 1, terms)
                as_terms(S, f"{j}{a[1:]}", -1, terms)
                pts = geometric(terms)
                if set(pts) & {f"P{i}", "P0"}:
                    continue
                irrational = sum(1 for e in S + Sp if e[0] == "pair")
                if best is None or irrational < best[0]:
                    best = (irrational, a, terms, pts, (Lj, L0))
            _, a, terms, pts, lines = best
            # auxiliary point off both lines: S' + x and S + x then lie on no line, and a degree-3
            # effective divisor on a smooth plane quartic is special exactly when it does
            for x in named:
                P = named[x]
                if x in pts or x in (f"P{i}", "P0"):
                    continue
                if any(L.subs(dict(zip((X, Y, Z), P))) == 0 for L in lines):
                    continue
                break
            plus = {k: v for k, v in pts.items() if v > 0}
            minus = {k: -v for k, v in pts.items() if v < 0}
            plus[x] = plus.get(x, 0) + 1
            minus[x] = minus.get(x, 0) + 1
            divisors[f"E{i}{j}"] = {"terms": terms, "split": [plus, minus]}
            choices[f"{i}{j}"] = {"via": a, "auxiliary": x}
    # keep only pieces that some divisor uses
    used = {lab for body in divisors.values() for lab in body.get("terms", body)}
    pieces = {k: v for k, v in pieces.items() if k in used}
    d = OUT / "cartan"
    dump(d / "curve.json", curve_fixture("cartan", eq))
    dump(d / "divisors.json", {"schema": 1, "pieces": pieces, "divisors": divisors, "meta": {"choices": choices}})
    dump(d / "model_13.json", naive_fixture(13))
    labels = sorted({q for body in divisors.values() for part in body.get("split", []) for q in part}
                    | {q for k in used for q in pieces[k].get("points", [k])})
    period_points = {k: aj_points[k] for k in labels}
    dump(d / "period.json", period_fixture(eq.replace("^", "**"), period_points, ["P1", "P2"], seed=3))


# --------------------------------------------------------------------------
# genus 1: y^2 + y = x^3 - x, P = (0, 0)


def _ell_add(P, Q, a=(0, 0, 1, -1, 0)):
    """Chord-tangent addition on a long Weierstrass cubic over Q (None is the origin)."""
    a1, a2, a3, a4, _ = a
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and y1 + y2 + a1 * x2 + a3 == 0:
        return None
    if x1 == x2:
        lam = (3 * x1 ** 2 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam ** 2 + a1 * lam - a2 - x1 - x2
    return x3, -(lam + a1) * x3 - nu - a3


def _projective(P):
    if P is None:
        return (0, 1, 0)
    x, y = P
    L = sympy.ilcm(x.denominator, y.denominator)
    return (int(x * L), int(y * L), int(L))


def ell37a():
    from fractions import Fraction
    eq = "Y^2*Z + Y*Z^2 - X^3 + X*Z^2"
    P = (Fraction(0), Fraction(0))
    multiples = {}
    Q = None
    for n in range(1, 6):
        Q = _ell_add(Q, P)
        multiples[f"{n}P"] = _projective(Q)
    pts = {"O": (0, 1, 0), **multiples}
    # D_n = nP - O paired with a representative of the same class away from nP and O
    shifts = {1: 2, 2: 1, 3: 1, 4: 1}
    divisors = {}
    for n, k in shifts.items():
        divisors[f"D{n}"] = {f"{n}P": 1, "O": -1}
        divisors[f"E{n}"] = {f"{n + k}P": 1, f"{k}P": -1}
    d = OUT / "ell37a"
    dump(d / "curve.json", curve_fixture("ell37a", eq))
    dump(d / "divisors.json", {"schema": 1, "pieces": {k: {"point": list(v)} for k, v in pts.items()},
                               "divisors": divisors})
    dump(d / "model_37.json", naive_fixture(37))
    dump(d / "period.json", period_fixture(eq.replace("^", "**"), pts, [], seed=1))


def verybad():
    # regular models at 3 and 5 need chart data from an external model builder; only the
    # naive models at the remaining bad primes are written here
    eq = "3*X^3*Y + 5*X*Y^2*Z + 5*Y^4 - 1953125*Z^4"
    d = OUT / "verybad"
    dump(d / "curve.json", curve_fixture("verybad", eq))
    pieces = {"P1": {"point": [1, 0, 0]}, "P2": {"point": [0, 25, 1]}, "P3": {"point": [0, -25, 1]},
              # the rest of X = 0 on the curve: a conjugate pair
              "Q": {"degree": 2, "homogeneous": ["X", "Y^2 + 625*Z^2"]}}
    divisors = {"D": {"P1": 1, "P2": -1}, "F": {"P1": 2, "Q": -1}, "G": {"P2": 1, "P3": -1}}
    dump(d / "divisors.json", {"schema": 1, "pieces": pieces, "divisors": divisors})
    for p in (17, 358166959, 523687087967):
        dump(d / f"model_{p}.json", naive_fixture(p))


EXAMPLES = {"torsion": torsion, "rank1": rank1, "cartan": cartan, "ell37a": ell37a, "verybad": verybad}


def main(argv):
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    names = argv[1:] or ["all"]
    for name in (EXAMPLES if names == ["all"] else names):
        EXAMPLES[name]()


if __name__ == "__main__":
    main(sys.argv)
