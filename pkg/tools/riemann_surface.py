"""Period matrices and Abel-Jacobi images for smooth plane curves.

Fixture-generation tooling, not part of the installed package.

The curve F(X,Y,Z) = 0 is moved by a projective change of coordinates into
general position and studied as a d-sheeted cover of the x-line.  Loops
around the branch points are realised as straight rays plus small polygons;
closed lifts of loop words (Schreier generators of the sheet stabiliser) give
a generating set of H_1.  Their intersection numbers are counted
geometrically: every cycle is drawn with its own slightly perturbed base
point and radii, and each transverse crossing of the x-projections where both
lifts sit on the same sheet contributes the sign of the crossing.  A
symplectic basis then yields the small period matrix.

Integrals use Gauss-Legendre quadrature in mpmath on segments kept at least
one segment-length away from every branch point; the fibre values at the
nodes come from double-precision continuation refined by Newton's method.
"""
from __future__ import annotations

import itertools
import logging
import math
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import mpmath
import numpy as np
import sympy
from mpmath import mp

log = logging.getLogger(__name__)

X, Y, Z = sympy.symbols("X Y Z")
x_, y_ = sympy.symbols("x y")


# --------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=8)
def gauss_legendre(n: int, dps: int):
    """Nodes and weights on [-1, 1] at ``dps`` digits (Newton-refined numpy guesses)."""
    guess, _ = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    with mp.workdps(dps + 10):
        for x0 in guess:
            x = mp.mpf(float(x0))
            for _ in range(100):
                p0, p1 = mp.mpf(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mp.mpf(10) ** (-dps - 5):
                    break
            p0, p1 = mp.mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            nodes.append(+x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    return nodes, weights


# --------------------------------------------------------------------------
# the curve


class PlaneCurveSurface:
    def __init__(self, F, transform: Sequence[Sequence[int]], dps: int = 50, quad_nodes: int = 44,
                 polygon_sides: int = 12, seed: int = 1):
        self.F = sympy.expand(sympy.sympify(F))
        self.M = sympy.Matrix(transform)
        if self.M.det() == 0:
            raise ValueError("singular coordinate change")
        self.Minv = self.M.inv()
        self.dps = dps
        mp.dps = dps + 10  # the tool runs as a script; all sums happen at working precision
        self.quad_nodes = quad_nodes
        self.polygon_sides = polygon_sides
        self.rng = random.Random(seed)
        u, v, w = sympy.symbols("u v w")
        old = self.M * sympy.Matrix([u, v, w])
        G = sympy.expand(self.F.subs({X: old[0], Y: old[1], Z: old[2]}, simultaneous=True))
        f = sympy.Poly(G.subs({u: x_, v: y_, w: 1}), x_, y_)
        self.f = f
        self.d = sympy.Poly(self.F, X, Y, Z).total_degree()
        self.g = (self.d - 1) * (self.d - 2) // 2
        fy = sympy.Poly(f.as_expr(), y_)
        if fy.degree() != self.d or sympy.Poly(fy.LC(), x_).degree() > 0:
            raise ValueError("curve is not monic-in-y up to a constant in these coordinates")
        # coefficients a_k(x) of y^k, low to high, as exact rational lists (high to low in x)
        self.coeffs = []
        for k in range(self.d + 1):
            ak = sympy.Poly(fy.as_expr().coeff(y_, k), x_)
            self.coeffs.append([Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1]))
                                for c in ak.all_coeffs()])
        self.np_coeffs = [np.array([float(c) for c in ck], dtype=complex) for ck in self.coeffs]
        self.dx_coeffs = []  # d a_k / dx
        for ck in self.coeffs:
            deg = len(ck) - 1
            self.dx_coeffs.append(np.array([float(c) * (deg - i) for i, c in enumerate(ck[:-1])] or [0.0],
                                           dtype=complex))
        with mp.workdps(dps + 10):
            self.mp_coeffs = [[mp.mpf(c.numerator) / c.denominator for c in ck] for ck in self.coeffs]
        # holomorphic differentials x^a y^b dx / f_y, a + b <= d - 3
        self.diff_monomials = [(a, b) for s in range(self.d - 2) for a in range(s + 1) for b in [s - a]]
        assert len(self.diff_monomials) == self.g
        disc = sympy.Poly(sympy.resultant(fy.as_expr(), sympy.diff(fy.as_expr(), y_), y_), x_)
        if disc.degree() != self.d * (self.d - 1):
            raise ValueError("branch point at infinity; choose another coordinate change")
        if sympy.gcd(disc, disc.diff(x_)).degree() > 0:
            raise ValueError("discriminant is not squarefree; choose another coordinate change")
        with mp.workdps(dps + 20):
            dc = [mp.mpf(sympy.Rational(c).p) / sympy.Rational(c).q for c in disc.all_coeffs()]
            roots = mp.polyroots(dc, maxsteps=400, extraprec=4 * dps)
        self.branch = [complex(r) for r in roots]
        self.branch_mp = roots
        self._setup_base()

    # -- evaluation ---------------------------------------------------------
    def fiber_coeffs(self, x: complex) -> np.ndarray:
        """Coefficients of f(x, y) in y, high degree first (numpy.roots convention)."""
        return np.array([np.polyval(c, x) for c in reversed(self.np_coeffs)])

    def fiber(self, x: complex) -> np.ndarray:
        return np.roots(self.fiber_coeffs(x))

    def _newton_np(self, x: complex, ys: np.ndarray, iters: int = 6) -> Tuple[np.ndarray, np.ndarray]:
        c = self.fiber_coeffs(x)
        dc = np.polyder(c)
        ys = ys.copy()
        last = np.zeros_like(ys)
        for _ in range(iters):
            step = np.polyval(c, ys) / np.polyval(dc, ys)
            ys -= step
            last = step
        return ys, np.abs(last)

    def dydx(self, x: complex, ys: np.ndarray) -> np.ndarray:
        c = self.fiber_coeffs(x)
        fy = np.polyval(np.polyder(c), ys)
        fx = sum(np.polyval(self.dx_coeffs[k], x) * ys**k for k in range(self.d + 1))
        return -fx / fy

    # -- continuation -------------------------------------------------------
    def track(self, xa: complex, xb: complex, ys: np.ndarray, checkpoints: Sequence[float] = ()):
        """Continue all given fibre values along [xa, xb].

        Returns (values at checkpoints, final values, samples) where samples
        is a list of (t, ys).
        """
        ys = np.array(ys, dtype=complex)
        t = 0.0
        h = 0.05
        marks = sorted(set(float(c) for c in checkpoints if 0 < c < 1))
        at_marks = {}
        samples = [(0.0, ys.copy())]
        full = np.roots(self.fiber_coeffs(xa))
        while t < 1.0:
            target = min(1.0, t + h)
            for m in marks:
                if t < m < target:
                    target = m
                    break
            x1 = xa + (xb - xa) * target
            dx = (xb - xa) * (target - t)
            pred = ys + self.dydx(xa + (xb - xa) * t, ys) * dx
            new, last = self._newton_np(x1, pred)
            allroots = np.roots(self.fiber_coeffs(x1))
            ok = np.all(np.isfinite(new))
            if ok:
                for i, yv in enumerate(new):
                    dist = np.abs(allroots - yv)
                    j = int(np.argmin(dist))
                    others = np.delete(allroots, j)
                    sep = np.min(np.abs(others - allroots[j])) if len(others) else 1.0
                    if dist[j] > 1e-8 * (1 + abs(yv)) or abs(new[i] - pred[i]) > sep / 4:
                        ok = False
                        break
                    new[i] = allroots[j] if dist[j] > 1e-13 else new[i]
                if ok and len(set(np.round(new, 9))) < len(new):
                    ok = False
            if not ok:
                h /= 2
                if h < 1e-12:
                    raise RuntimeError(f"continuation failed near x={x1}")
                continue
            new, _ = self._newton_np(x1, new, 2)
            ys = new
            t = target
            samples.append((t, ys.copy()))
            if t in marks:
                at_marks[t] = ys.copy()
            h = min(h * 1.6, 0.25)
        return at_marks, ys, samples

    # -- high-precision integration ----------------------------------------
    def _mp_fiber_coeffs(self, x):
        out = []
        for ck in self.mp_coeffs:
            acc = mp.mpc(0)
            for c in ck:
                acc = acc * x + c
            out.append(acc)
        return out  # low to high in y

    def _refine(self, x, y0: complex):
        cs = self._mp_fiber_coeffs(x)
        y = mp.mpc(y0)
        for _ in range(30):
            fv = mp.mpc(0)
            dv = mp.mpc(0)
            for c in reversed(cs):
                dv = dv * y + fv
                fv = fv * y + c
            step = fv / dv
            y -= step
            if abs(step) < mp.mpf(10) ** (-self.dps - 2) * (1 + abs(y)):
                break
        if abs(y - y0) > 1e-7 * (1 + abs(y0)):
            raise RuntimeError("high precision refinement jumped sheets")
        return y, cs

    def _omega(self, x, y, cs):
        # f_y = sum k a_k y^(k-1)
        fy = mp.mpc(0)
        for k in range(self.d, 0, -1):
            fy = fy * y + k * cs[k]
        return [x**a * y**b / fy for a, b in self.diff_monomials]

    def split_segment(self, xa: complex, xb: complex, ratio: float = 1.0) -> List[Tuple[float, float]]:
        """Parameter intervals of [xa, xb] whose pieces stay >= ratio * length from every branch point."""
        out = []
        stack = [(0.0, 1.0)]
        while stack:
            t0, t1 = stack.pop()
            a, b = xa + (xb - xa) * t0, xa + (xb - xa) * t1
            L = abs(b - a)
            if L < 1e-15:
                continue
            dist = min(_seg_point_dist(a, b, p) for p in self.branch)
            if dist >= ratio * L:
                out.append((t0, t1))
            else:
                mid = (t0 + t1) / 2
                stack.append((mid, t1))
                stack.append((t0, mid))
        return out

    def integrate_path(self, vertices: Sequence, ys0: np.ndarray):
        """Integrate ω along a polyline for every starting sheet in ``ys0``.

        Vertices may be mpmath numbers; quadrature nodes are placed on the exact segment.
        Returns (d x g list of mpc integrals, final fibre values in tracked order).
        """
        nodes, weights = gauss_legendre(self.quad_nodes, self.dps)
        ys = np.array(ys0, dtype=complex)
        with mp.workdps(self.dps + 10):
            totals = [[mp.mpc(0)] * self.g for _ in ys]
            for va, vb in zip(vertices[:-1], vertices[1:]):
                mva, mvb = mp.mpc(va), mp.mpc(vb)
                ca, cb = complex(va), complex(vb)
                for t0, t1 in self.split_segment(ca, cb):
                    a, b = ca + (cb - ca) * t0, ca + (cb - ca) * t1
                    ts = [float((1 + nd) / 2) for nd in nodes]
                    marks, ys_end, _ = self.track(a, b, ys, ts)
                    ma, mb = mva + (mvb - mva) * t0, mva + (mvb - mva) * t1
                    half = (mb - ma) / 2
                    for nd, wt, t in zip(nodes, weights, ts):
                        xm = ma + (mb - ma) * (1 + nd) / 2
                        guesses = marks[t]
                        for s, y0 in enumerate(guesses):
                            y, cs = self._refine(xm, complex(y0))
                            om = self._omega(xm, y, cs)
                            for i in range(self.g):
                                totals[s][i] += wt * half * om[i]
                    ys = ys_end
        return totals, ys

    # -- base point, loops, monodromy ---------------------------------------
    def _setup_base(self):
        B = np.array(self.branch)
        scale = max(1.0, float(np.max(np.abs(B - B.mean()))))
        best = None
        for _ in range(400):
            cand = complex(B.real.min() - scale * self.rng.uniform(0.3, 1.5),
                           B.imag.mean() + scale * self.rng.uniform(-1.2, 1.2))
            clear = min(_seg_point_dist(cand, bk, bj) / abs(bk - cand)
                        for k, bk in enumerate(self.branch) for j, bj in enumerate(self.branch) if j != k)
            if best is None or clear > best[0]:
                best = (clear, cand)
        self.clearance, self.x0 = best
        self.scale = scale
        fib = self.fiber(self.x0)
        self.base_fiber = np.array(sorted(fib, key=lambda y: (round(y.real, 10), y.imag)))
        # loop radii: keep every circle clear of other branch points and of foreign rays
        self.radii = []
        for k, bk in enumerate(self.branch):
            r = 0.3 * min(abs(bk - bj) for j, bj in enumerate(self.branch) if j != k)
            for j, bj in enumerate(self.branch):
                if j != k:
                    r = min(r, 0.45 * _seg_point_dist(self.x0, bj, bk))
            self.radii.append(r)
        log.info("base point %s, ray clearance %.3g, min radius %.3g", self.x0, self.clearance, min(self.radii))

    def loop_vertices(self, k: int, base: complex, radius_scale: float = 1.0, sides: int | None = None,
                      phase: float = 0.0) -> List[complex]:
        bk = self.branch[k]
        r = self.radii[k] * radius_scale
        u = (bk - base) / abs(bk - base)
        sides = sides or self.polygon_sides
        v0 = bk - r * u
        poly = [bk - r * u * complex(math.cos(2 * math.pi * j / sides + phase * (j % sides != 0)),
                                     math.sin(2 * math.pi * j / sides + phase * (j % sides != 0)))
                for j in range(sides + 1)]
        poly[0] = poly[-1] = v0
        return [base] + poly + [base]

    def sheet_index(self, ys: np.ndarray, fiber: np.ndarray | None = None) -> List[int]:
        fiber = self.base_fiber if fiber is None else fiber
        out = []
        for y in ys:
            dist = np.abs(fiber - y)
            j = int(np.argmin(dist))
            if dist[j] > 1e-6 * (1 + abs(y)):
                raise RuntimeError("loop did not return to the base fibre")
            out.append(j)
        return out

    def compute_loops(self):
        """Monodromy permutations and loop integrals for every (branch point, sheet)."""
        self.perms = []
        self.loop_integrals = []
        for k in range(len(self.branch)):
            verts = self.loop_vertices(k, self.x0)
            totals, ys = self.integrate_path(verts, self.base_fiber)
            perm = self.sheet_index(ys)
            if sorted(perm) != list(range(self.d)):
                raise RuntimeError(f"loop {k} does not permute the sheets")
            self.perms.append(perm)
            self.loop_integrals.append(totals)
            log.info("loop %d: permutation %s", k, perm)
        prod = list(range(self.d))
        for p in self.perms:
            prod = [p[i] for i in prod]
        # the product of all loops (ordered by argument around x0) encircles infinity, which is unramified;
        # only transitivity is checked here
        seen = {0}
        frontier = [0]
        while frontier:
            s = frontier.pop()
            for p in self.perms:
                if p[s] not in seen:
                    seen.add(p[s])
                    frontier.append(p[s])
        if len(seen) != self.d:
            raise RuntimeError("monodromy is not transitive: curve reducible?")

    # -- words and cycles ---------------------------------------------------
    def _tree_words(self):
        words = {0: []}
        queue = deque([0])
        while queue:
            s = queue.popleft()
            for k, p in enumerate(self.perms):
                for e in (1, -1):
                    t = p[s] if e == 1 else p.index(s)
                    if t not in words:
                        words[t] = words[s] + [(k, e)]
                        queue.append(t)
        return words

    def word_end(self, word, start=0):
        s = start
        for k, e in word:
            s = self.perms[k][s] if e == 1 else self.perms[k].index(s)
        return s

    def word_integral(self, word, start=0):
        s = start
        total = [mp.mpc(0)] * self.g
        for k, e in word:
            if e == 1:
                vec = self.loop_integrals[k][s]
                s = self.perms[k][s]
                total = [a + b for a, b in zip(total, vec)]
            else:
                s = self.perms[k].index(s)
                vec = self.loop_integrals[k][s]
                total = [a - b for a, b in zip(total, vec)]
        return total

    def schreier_cycles(self):
        words = self._tree_words()
        self.tree_words = words
        cycles = []
        for s in range(self.d):
            for k, p in enumerate(self.perms):
                w = _free_reduce(words[s] + [(k, 1)] + _inverse_word(words[p[s]]))
                if w:
                    cycles.append(w)
        return cycles

    # -- intersection numbers -------------------------------------------------
    def cycle_geometry(self, word, rng: random.Random):
        """A perturbed polyline realisation of the closed lift of ``word`` from sheet 0."""
        delta = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.02 * self.clearance * min(
            abs(b - self.x0) for b in self.branch)
        base = self.x0 + delta
        rscale = rng.uniform(0.55, 0.95)
        sides = self.polygon_sides + rng.randint(0, 5)
        phase = rng.uniform(-0.2, 0.2)
        verts = [base]
        for k, e in word:
            lv = self.loop_vertices(k, base, rscale, sides, phase)
            if e == -1:
                lv = lv[::-1]
            verts.extend(lv[1:])
        return verts

    def trace_lift(self, verts):
        """Per segment: endpoints, and samples (x, y) of the lift starting on sheet 0."""
        # sheet labels at the perturbed base come from a short continuation out of x0
        _, ys, _ = self.track(self.x0, verts[0], self.base_fiber)
        start = ys.copy()
        sheet = 0
        segs = []
        for a, b in zip(verts[:-1], verts[1:]):
            if abs(b - a) < 1e-15:
                continue
            _, ys_end, samples = self.track(a, b, ys)
            segs.append((a, b, [(t, s[sheet]) for t, s in samples]))
            ys = ys_end
        end = self.sheet_index(ys[[sheet]], start)[0]
        if end != 0:
            raise RuntimeError("perturbed cycle is not closed")
        return segs

    def lift_value(self, seg, t: float) -> complex:
        a, b, samples = seg
        ts = [s[0] for s in samples]
        i = int(np.searchsorted(ts, t))
        i = min(max(i, 0), len(samples) - 1)
        if i > 0 and abs(ts[i - 1] - t) < abs(ts[i] - t):
            i -= 1
        x = a + (b - a) * t
        y0 = samples[i][1]
        ys, _ = self._newton_np(x, np.array([y0]), 8)
        return ys[0]

    def intersection_matrix(self, cycles, seed: int = 7):
        rng = random.Random(seed)
        traced = []
        for w in cycles:
            traced.append(self.trace_lift(self.cycle_geometry(w, rng)))
        m = len(cycles)
        K = [[0] * m for _ in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                v = self._count(traced[i], traced[j])
                K[i][j] = v
                K[j][i] = -v
        return K

    def _count(self, A, B) -> int:
        pa = np.array([s[0] for s in A])
        qa = np.array([s[1] for s in A])
        pb = np.array([s[0] for s in B])
        qb = np.array([s[1] for s in B])
        da = qa - pa
        db = qb - pb
        # solve pa + s da = pb + t db
        cross = (np.conj(da)[:, None] * db[None, :]).imag
        diff = pb[None, :] - pa[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (np.conj(diff) * db[None, :]).imag / cross
            t = (np.conj(diff) * da[:, None]).imag / cross
        hit = (np.abs(cross) > 1e-14) & (s > 0) & (s < 1) & (t > 0) & (t < 1)
        total = 0
        for i, j in zip(*np.nonzero(hit)):
            si, tj = float(s[i, j]), float(t[i, j])
            if min(si, 1 - si, tj, 1 - tj) < 1e-9:
                raise RuntimeError("degenerate crossing at a vertex")
            ya = self.lift_value(A[i], si)
            yb = self.lift_value(B[j], tj)
            x = pa[i] + da[i] * si
            fib = self.fiber(x)
            sep = min(abs(u - v) for u, v in itertools.combinations(fib, 2))
            if abs(ya - yb) < sep / 3:
                total += 1 if cross[i, j] > 0 else -1
        return total

    # -- assembling the period matrix ------------------------------------------
    def compute_periods(self):
        self.compute_loops()
        cycles = self.schreier_cycles()
        periods = [self.word_integral(w) for w in cycles]
        tol = mp.mpf(10) ** (-self.dps // 2)
        keep = [i for i, p in enumerate(periods) if max(abs(v) for v in p) > tol]
        cycles = [cycles[i] for i in keep]
        periods = [periods[i] for i in keep]
        log.info("%d nontrivial Schreier cycles", len(cycles))
        K = self.intersection_matrix(cycles)
        U, rank = _column_hnf_transform(K)
        if rank != 2 * self.g:
            raise RuntimeError(f"intersection form has rank {rank}, expected {2 * self.g}")
        m = len(cycles)
        basis = [[U[r][c] for r in range(m)] for c in range(rank)]  # coefficient vectors
        G = [[sum(bi[r] * K[r][s] * bj[s] for r in range(m) for s in range(m) if bi[r] and bj[s])
              for bj in basis] for bi in basis]
        det = sympy.Matrix(G).det()
        if abs(det) != 1:
            raise RuntimeError(f"cycles generate a sublattice of index sqrt({det})")
        with mp.workdps(self.dps + 10):
            for sign in (1, -1):
                Gs = [[sign * v for v in row] for row in G]
                P = _symplectic_basis(Gs)
                vecs = [[sum(P[c][k] * basis[k][r] for k in range(rank)) for r in range(m)] for c in range(rank)]
                per = [[sum(v[r] * periods[r][i] for r in range(m) if v[r]) for v in vecs] for i in range(self.g)]
                A = mp.matrix([[per[i][j] for j in range(self.g)] for i in range(self.g)])
                Bm = mp.matrix([[per[i][self.g + j] for j in range(self.g)] for i in range(self.g)])
                tau = mp.inverse(A) * Bm
                Yim = mp.matrix([[mp.im(tau[i, j]) for j in range(self.g)] for i in range(self.g)])
                try:
                    mp.cholesky(Yim)
                except (ValueError, ZeroDivisionError):
                    continue
                asym = max(abs(tau[i, j] - tau[j, i]) for i in range(self.g) for j in range(self.g))
                self.A, self.Ainv, self.tau = A, mp.inverse(A), tau
                self.symmetry_residual = asym
                self.cycle_words = cycles
                self.symplectic_vectors = vecs
                self.orientation_sign = sign
                log.info("tau symmetric to %s", mp.nstr(asym, 3))
                return tau
        raise RuntimeError("no orientation gives a positive definite Im(tau)")

    # -- Abel-Jacobi --------------------------------------------------------
    def to_affine(self, point) -> Tuple[mpmath.mpc, mpmath.mpc]:
        """Projective point (original coordinates, mp complex) to affine (x, y)."""
        with mp.workdps(self.dps + 10):
            P = [mp.mpc(c) for c in point]
            Minv = [[mp.mpf(sympy.Rational(self.Minv[i, j]).p) / sympy.Rational(self.Minv[i, j]).q
                     for j in range(3)] for i in range(3)]
            u, v, w = [sum(Minv[i][j] * P[j] for j in range(3)) for i in range(3)]
            if abs(w) < mp.mpf(10) ** (-10):
                raise ValueError("point at infinity in the working chart")
            return u / w, v / w

    def aj_raw(self, point):
        """∫ from the base point (x0, sheet 0) to the point, non-normalised."""
        xp, yp = self.to_affine(point)
        xc = complex(xp)
        route = [self.x0, xp]
        if min(_seg_point_dist(self.x0, xc, b) for b in self.branch) < 0.05 * min(self.radii + [1.0]):
            route = self._detour(self.x0, xc)[:-1] + [xp]
        totals, ys = self.integrate_path(route, self.base_fiber)
        dist = np.abs(ys - complex(yp))
        s = int(np.argmin(dist))
        if dist[s] > 1e-6 * (1 + abs(complex(yp))):
            raise RuntimeError("target point not found in the fibre")
        with mp.workdps(self.dps + 10):
            return [a + b for a, b in zip(self.word_integral(self.tree_words[s]), totals[s])]

    def _detour(self, a, b):
        best = None
        for _ in range(200):
            mid = (a + b) / 2 + complex(self.rng.uniform(-1, 1), self.rng.uniform(-1, 1)) * abs(b - a) * 0.5
            clear = min(min(_seg_point_dist(a, mid, q), _seg_point_dist(mid, b, q)) for q in self.branch)
            if best is None or clear > best[0]:
                best = (clear, mid)
        return [a, best[1], b]

    def normalise(self, vec):
        with mp.workdps(self.dps + 10):
            v = self.Ainv * mp.matrix(vec)
            return [v[i] for i in range(self.g)]

    def aj(self, point):
        return self.normalise(self.aj_raw(point))

    def canonical_image(self):
        """α of (d-3) fibres of x, a canonical divisor (the fibre over x0 lifts by tree words)."""
        with mp.workdps(self.dps + 10):
            total = [mp.mpc(0)] * self.g
            for s in range(self.d):
                vec = self.word_integral(self.tree_words[s])
                total = [a + b for a, b in zip(total, vec)]
            return self.normalise([(self.d - 3) * t for t in total])


def _seg_point_dist(a: complex, b: complex, p: complex) -> float:
    d = b - a
    L2 = (d.conjugate() * d).real
    if L2 == 0:
        return abs(p - a)
    t = ((p - a) * d.conjugate()).real / L2
    t = min(1.0, max(0.0, t))
    return abs(a + t * d - p)


def _inverse_word(w):
    return [(k, -e) for k, e in reversed(w)]


def _free_reduce(w):
    out = []
    for k, e in w:
        if out and out[-1] == (k, -e):
            out.pop()
        else:
            out.append((k, e))
    return out


def _column_hnf_transform(K):
    """Unimodular U with K U = [H | 0]; returns (U, rank)."""
    m = len(K)
    A = [row[:] for row in K]
    n = len(A[0]) if A else 0
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    def colop(i, j, a, b, c, d):
        # (col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)
        for M in (A, U):
            for r in range(len(M)):
                x, y = M[r][i], M[r][j]
                M[r][i], M[r][j] = a * x + b * y, c * x + d * y

    col = 0
    for r in range(m):
        if col >= n:
            break
        for j in range(col + 1, n):
            if A[r][j]:
                x, y = A[r][col], A[r][j]
                g, s, t = _xgcd(x, y)
                colop(col, j, s, t, -y // g, x // g)
        if A[r][col]:
            col += 1
    return U, col


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _symplectic_basis(G):
    """Rows P (as coefficient vectors) with P G P^T = [[0, I], [-I, 0]] for unimodular alternating G."""
    n = len(G)

    def form(u, v):
        return sum(u[i] * G[i][j] * v[j] for i in range(n) if u[i] for j in range(n) if v[j])

    vecs = [[int(i == j) for j in range(n)] for i in range(n)]
    a_list, b_list = [], []
    while vecs:
        e = vecs[0]
        rest = vecs[1:]
        # Euclid on the values <e, v> among rest
        while True:
            vals = [form(e, v) for v in rest]
            nz = [i for i, v in enumerate(vals) if v]
            if not nz:
                raise RuntimeError("degenerate alternating form")
            i0 = min(nz, key=lambda i: abs(vals[i]))
            done = True
            for i in nz:
                if i != i0:
                    q = vals[i] // vals[i0]
                    rest[i] = [a - q * b for a, b in zip(rest[i], rest[i0])]
                    if vals[i] - q * vals[i0]:
                        done = False
            if done:
                break
        vals = [form(e, v) for v in rest]
        i0 = [i for i, v in enumerate(vals) if v][0]
        if abs(vals[i0]) != 1:
            raise RuntimeError("form is not unimodular")
        f = rest.pop(i0)
        if vals[i0] == -1:
            f = [-c for c in f]
        new = []
        for v in rest:
            ve, vf = form(v, e), form(v, f)
            new.append([vi - vf * ei + ve * fi for vi, ei, fi in zip(v, e, f)])
        a_list.append(e)
        b_list.append(f)
        vecs = new
    return a_list + b_list


def choose_transform(F, points=(), seed: int = 0, tries: int = 60, entries: int = 3):
    """Random integer coordinate change maximising the relative spacing of branch points.

    ``points`` (projective, complex) must stay away from the branch locus and from infinity.
    """
    rng = random.Random(seed)
    F = sympy.expand(sympy.sympify(F))
    d = sympy.Poly(F, X, Y, Z).total_degree()
    u, v, w = sympy.symbols("u v w")
    best = None
    for _ in range(tries):
        M = sympy.Matrix(3, 3, lambda i, j: rng.randint(-entries, entries))
        if M.det() == 0:
            continue
        old = M * sympy.Matrix([u, v, w])
        G = sympy.expand(F.subs({X: old[0], Y: old[1], Z: old[2]}, simultaneous=True))
        f = sympy.Poly(G.subs({u: x_, v: y_, w: 1}), y_)
        if f.degree() != d or sympy.Poly(f.LC(), x_).degree() > 0:
            continue
        disc = sympy.Poly(sympy.resultant(f.as_expr(), sympy.diff(f.as_expr(), y_), y_), x_)
        if disc.degree() != d * (d - 1):
            continue
        roots = np.roots([float(c) for c in disc.all_coeffs()])
        sep = min(abs(a - b) for a, b in itertools.combinations(roots, 2))
        spread = max(abs(r - roots.mean()) for r in roots)
        Minv = np.array(M.inv().tolist(), dtype=float)
        xs = []
        for P in points:
            q = Minv @ np.array(P, dtype=complex)
            if abs(q[2]) < 1e-6 * np.max(np.abs(q)):
                xs = None
                break
            xs.append(q[0] / q[2])
        if xs is None:
            continue
        near = min((min(abs(xp - r) for r in roots) for xp in xs), default=sep)
        if xs and max(abs(xp - roots.mean()) for xp in xs) > 3 * spread:
            continue
        score = min(sep, 2 * near) / spread
        if best is None or score > best[0]:
            best = (score, [[int(c) for c in M.row(i)] for i in range(3)])
    if best is None:
        raise RuntimeError("no admissible coordinate change found")
    log.info("coordinate change %s with relative separation %.3g", best[1], best[0])
    return best[1]
