"""Riemann theta function, Néron functions on the Jacobian, and the
archimedean local Néron pairing.

All arithmetic is done with mpmath at ``precision`` decimal digits (plus
guard digits).  Lattice sums are truncated to an ellipsoid around the
reduced argument and carry an explicit Gaussian tail bound.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import mpmath
import numpy as np
from mpmath import mp

GUARD_DIGITS = 12


class ThetaError(ArithmeticError):
    pass


class PrecisionUnreachable(ThetaError):
    """The requested error cannot be met at the working precision."""


class OnThetaDivisor(ThetaError):
    """θ vanishes (to working precision) at the requested point."""


class NoThetaCharacteristic(ThetaError):
    """No two-torsion translate makes θ vanish at the test point."""


@dataclass(frozen=True)
class ThetaValue:
    value: mpmath.mpc
    abs_error: mpmath.mpf


def _cvec(z) -> List[mpmath.mpc]:
    return [mp.mpc(x) for x in z]


def _cmat(tau) -> mpmath.matrix:
    return tau if isinstance(tau, mpmath.matrix) else mp.matrix([[mp.mpc(x) for x in row] for row in tau])


def _imag_part(tau: mpmath.matrix) -> mpmath.matrix:
    g = tau.rows
    return mp.matrix([[mp.im(tau[i, j]) for j in range(g)] for i in range(g)])


def check_period_matrix(tau, tol=None) -> None:
    """Symmetric with positive definite imaginary part (Cholesky must succeed)."""
    tau = _cmat(tau)
    g = tau.rows
    tol = mp.mpf(10) ** (-mp.dps // 2) if tol is None else tol
    for i in range(g):
        for j in range(i + 1, g):
            if abs(tau[i, j] - tau[j, i]) > tol * (1 + abs(tau[i, j])):
                raise ValueError("period matrix is not symmetric")
    try:
        mp.cholesky(_imag_part(tau))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError("imaginary part of the period matrix is not positive definite") from exc


class _Lattice:
    """Cholesky data of π·Im(τ) and a Fincke-Pohst enumerator in double precision."""

    def __init__(self, Y: mpmath.matrix):
        self.g = Y.rows
        L = mp.cholesky(mp.pi * Y)  # lower: πY = L L^T
        self.S = np.array([[float(L[j, i]) for j in range(self.g)] for i in range(self.g)])  # upper
        self.Yinv = mp.inverse(Y)
        self.rho = self._shortest()

    def enumerate(self, center: Sequence[float], radius: float):
        """Integer n with ||S (n + center)|| <= radius."""
        g, S = self.g, self.S
        r2 = radius * radius * (1 + 1e-12) + 1e-9
        out = []
        n = [0] * g

        def rec(i: int, rem: float):
            # coordinate i given the tail n[i+1:]
            s = S[i, i]
            shift = center[i] + sum(S[i, j] * (n[j] + center[j]) for j in range(i + 1, g)) / s
            half = math.sqrt(max(rem, 0.0)) / s
            lo = math.ceil(-shift - half - 1e-12)
            hi = math.floor(-shift + half + 1e-12)
            for k in range(lo, hi + 1):
                n[i] = k
                t = s * (k + shift)
                left = rem - t * t
                if left < -1e-9:
                    continue
                if i == 0:
                    out.append(tuple(n))
                else:
                    rec(i - 1, left)
            n[i] = 0

        rec(g - 1, r2)
        return out

    def _shortest(self) -> float:
        radius = min(abs(self.S[i, i]) for i in range(self.g))
        for _ in range(60):
            pts = [p for p in self.enumerate([0.0] * self.g, radius) if any(p)]
            if pts:
                return min(float(np.linalg.norm(self.S @ np.array(p, dtype=float))) for p in pts)
            radius *= 1.5
        raise ThetaError("could not determine the shortest lattice vector")

    def tail_bound(self, radius) -> mpmath.mpf:
        """Bound for the sum of exp(-||S v||^2) over shifted lattice points with ||S v|| > radius.

        Disjoint balls of radius ρ/2 around the points give
            g (2/ρ)^g ∫_{R-ρ}^∞ (t + ρ/2)^(g-1) exp(-t^2) dt,
        which expands into upper incomplete gamma functions.
        """
        g = self.g
        rho = mp.mpf(self.rho) * (1 - mp.mpf(1e-9))
        a = mp.mpf(radius) - rho
        if a <= 0:
            return mp.inf
        total = mp.mpf(0)
        for k in range(g):
            total += mp.binomial(g - 1, k) * (rho / 2) ** (g - 1 - k) * mp.gammainc((k + 1) / mp.mpf(2), a * a) / 2
        return g * (2 / rho) ** g * total


def _reduce(z: List[mpmath.mpc], tau: mpmath.matrix, Yinv: mpmath.matrix):
    """z = z' + m + τ n with the coordinates of Im z' in Im(τ)-units and of Re z' in [-1/2, 1/2]."""
    g = len(z)
    y = mp.matrix([mp.im(x) for x in z])
    c = Yinv * y
    n = [int(mp.nint(c[i])) for i in range(g)]
    zp = [z[i] - sum(tau[i, j] * n[j] for j in range(g)) for i in range(g)]
    m = [int(mp.nint(mp.re(x))) for x in zp]
    zp = [zp[i] - m[i] for i in range(g)]
    return zp, m, n


class ThetaEvaluator:
    """Cached evaluator for a fixed period matrix."""

    def __init__(self, tau, precision: int = 30):
        self.precision = precision
        with mp.workdps(precision + GUARD_DIGITS):
            self.tau = _cmat(tau)
            check_period_matrix(self.tau)
            self.g = self.tau.rows
            self.Y = _imag_part(self.tau)
            self.lattice = _Lattice(self.Y)
            self.Yinv = self.lattice.Yinv
        self._radius_cache: Dict[Tuple[str, int], float] = {}

    def _radius(self, eps) -> float:
        key = mp.nstr(eps, 5)
        if key not in self._radius_cache:
            radius = self.lattice.rho + 1.0
            while self.lattice.tail_bound(radius) > eps:
                radius *= 1.08
                if radius > 1e4:
                    raise PrecisionUnreachable(f"cannot reach eps={eps}")
            self._radius_cache[key] = radius
        return self._radius_cache[key]

    def theta_reduced(self, zp: List[mpmath.mpc], eps) -> Tuple[mpmath.mpc, mpmath.mpf]:
        """θ(z') for reduced z', with an absolute error bound."""
        g, tau = self.g, self.tau
        yp = mp.matrix([mp.im(x) for x in zp])
        c = self.Yinv * yp
        # |term| = exp(-||S(n + c)||^2 + π c^T Y c)
        prefactor = mp.exp(mp.pi * (c.T * self.Y * c)[0])
        radius = self._radius(eps / prefactor)
        pts = self.lattice.enumerate([float(c[i]) for i in range(g)], radius)
        total = mp.mpc(0)
        two_pi_i = 2j * mp.pi
        for n in pts:
            q = mp.mpc(0)
            for i in range(g):
                if n[i]:
                    row = mp.mpc(0)
                    for j in range(g):
                        if n[j]:
                            row += tau[i, j] * n[j]
                    q += n[i] * (row / 2 + zp[i])
            total += mp.exp(two_pi_i * q)
        tail = self.lattice.tail_bound(radius) * prefactor
        rounding = len(pts) * prefactor * mp.mpf(10) ** (-(self.precision + GUARD_DIGITS // 2))
        return total, tail + rounding

    def theta(self, z, eps=None) -> ThetaValue:
        with mp.workdps(self.precision + GUARD_DIGITS):
            eps = mp.mpf(10) ** (-self.precision) if eps is None else mp.mpf(eps)
            if eps <= mp.mpf(10) ** (-(self.precision + GUARD_DIGITS // 2)):
                raise PrecisionUnreachable(f"eps={eps} below working precision {self.precision}")
            z = _cvec(z)
            zp, m, n = _reduce(z, self.tau, self.Yinv)
            # θ(z' + m + τn) = exp(-πi n^T τ n - 2πi n^T z') θ(z')
            quad = sum(n[i] * self.tau[i, j] * n[j] for i in range(self.g) for j in range(self.g))
            lin = sum(n[i] * zp[i] for i in range(self.g))
            factor = mp.exp(-1j * mp.pi * quad - 2j * mp.pi * lin)
            afactor = abs(factor)
            value, err = self.theta_reduced(zp, eps / max(afactor, mp.mpf(1)))
            return ThetaValue(+(factor * value), +(err * afactor))

    def neron_lambda(self, z, eps=None) -> Tuple[mpmath.mpf, mpmath.mpf]:
        """-log|θ(z)| + π Im(z)^T Im(τ)^{-1} Im(z), evaluated at the reduced lift."""
        with mp.workdps(self.precision + GUARD_DIGITS):
            eps = mp.mpf(10) ** (-self.precision) if eps is None else mp.mpf(eps)
            zp, _, _ = _reduce(_cvec(z), self.tau, self.Yinv)
            value, err = self.theta_reduced(zp, eps)
            if abs(value) <= 2 * err:
                raise OnThetaDivisor(f"|θ| = {mp.nstr(abs(value), 5)} within its error bound {mp.nstr(err, 5)}")
            yp = mp.matrix([mp.im(x) for x in zp])
            quad = (yp.T * self.Yinv * yp)[0]
            return +(-mp.log(abs(value)) + mp.pi * quad), +(err / (abs(value) - err))


def riemann_theta(z, tau, eps=None, precision: int = 30) -> ThetaValue:
    return ThetaEvaluator(tau, precision).theta(z, eps)


def neron_lambda(z, tau, precision: int = 30):
    return ThetaEvaluator(tau, precision).neron_lambda(z)[0]


# ---------------------------------------------------------------------------
# Period data and the archimedean pairing


@dataclass
class PeriodData:
    g: int
    tau: mpmath.matrix
    aj: Dict[str, List[mpmath.mpc]]
    canonical_image: List[mpmath.mpc]
    precision: int = 30
    w: List[mpmath.mpc] | None = None
    theta_test: List[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        with mp.workdps(self.precision + GUARD_DIGITS):
            self.tau = _cmat(self.tau)
            if self.tau.rows != self.g or self.tau.cols != self.g:
                raise ValueError("tau has the wrong shape")
            check_period_matrix(self.tau)
            for label, v in self.aj.items():
                if len(v) != self.g:
                    raise ValueError(f"Abel-Jacobi image {label!r} has length {len(v)}, expected {self.g}")
            if len(self.canonical_image) != self.g:
                raise ValueError("canonical image has the wrong length")

    def image(self, divisor: Sequence[Tuple[str, int]]) -> List[mpmath.mpc]:
        """Additive extension of the Abel-Jacobi map to a labelled divisor."""
        out = [mp.mpc(0)] * self.g
        for label, mult in divisor:
            if label not in self.aj:
                raise KeyError(f"no Abel-Jacobi image for point {label!r}")
            v = self.aj[label]
            out = [a + mult * b for a, b in zip(out, v)]
        return out


def w_candidates(period: PeriodData) -> List[Tuple[Tuple[int, ...], List[mpmath.mpc]]]:
    """The 2^(2g) solutions of 2w = α(K) modulo the period lattice."""
    g = period.g
    out = []
    for bits in itertools.product((0, 1), repeat=2 * g):
        m, n = bits[:g], bits[g:]
        w = [period.canonical_image[i] / 2
             + (m[i] + sum(period.tau[i, j] * n[j] for j in range(g))) / 2 for i in range(g)]
        out.append((bits, w))
    return out


@dataclass
class WSearchResult:
    w: List[mpmath.mpc]
    characteristic: Tuple[int, ...]
    theta_abs: mpmath.mpf
    runner_up_abs: mpmath.mpf
    median_abs: mpmath.mpf


def find_w(period: PeriodData, test_labels: Sequence[str] | None = None, evaluator: ThetaEvaluator | None = None,
           threshold_digits: float | None = None) -> WSearchResult:
    """Find α(W) among the halves of α(K) so that θ vanishes at α(T) - α(W)
    for an effective divisor T of degree g-1 built from ``test_labels``."""
    g = period.g
    labels = list(period.theta_test if test_labels is None else test_labels)
    if len(labels) != g - 1:
        raise ValueError(f"need g-1 = {g - 1} test points, got {len(labels)}")
    ev = evaluator or ThetaEvaluator(period.tau, period.precision)
    with mp.workdps(period.precision + GUARD_DIGITS):
        t = period.image([(lab, 1) for lab in labels])
        scores = []
        for bits, w in w_candidates(period):
            val = ev.theta([t[i] - w[i] for i in range(g)])
            # compare |θ| at reduced points so quasi-periodicity factors do not distort the ranking
            zp, _, _ = _reduce([t[i] - w[i] for i in range(g)], ev.tau, ev.Yinv)
            red, _ = ev.theta_reduced(zp, mp.mpf(10) ** (-period.precision))
            scores.append((abs(red), bits, w, val))
        scores.sort(key=lambda s: s[0])
        absvals = [s[0] for s in scores]
        median = absvals[len(absvals) // 2]
        runner = absvals[1] if len(absvals) > 1 else median
        digits = period.precision / 2 if threshold_digits is None else threshold_digits
        if median == 0 or scores[0][0] > median * mp.mpf(10) ** (-digits):
            raise NoThetaCharacteristic(
                f"smallest |θ| = {mp.nstr(scores[0][0], 5)} vs median {mp.nstr(median, 5)}")
        best = scores[0]
        return WSearchResult(best[2], best[1], best[0], runner, median)


def split_point_differences(divisor: Sequence[Tuple[str, int]]) -> List[Tuple[str, str]]:
    """Greedy matching of a degree-0 divisor into differences P - P'."""
    pos, neg = [], []
    for label, mult in divisor:
        if mult > 0:
            pos.extend([label] * mult)
        elif mult < 0:
            neg.extend([label] * (-mult))
    if len(pos) != len(neg):
        raise ValueError("divisor does not have degree 0")
    return list(zip(pos, neg))


@dataclass
class ArchimedeanPairing:
    value: mpmath.mpf
    abs_error: mpmath.mpf
    terms: List[dict]


def archimedean_pairing(D: Sequence[Tuple[str, int]], E1: Sequence[Tuple[str, int]], E2: Sequence[Tuple[str, int]],
                        period: PeriodData, w: Sequence | None = None, evaluator: ThetaEvaluator | None = None,
                        matching: List[Tuple[str, str]] | None = None) -> ArchimedeanPairing:
    """⟨D, E1 - E2⟩_∞ for E1, E2 non-special effective divisors of degree g.

    Each difference P - P' of D contributes
        -log|θ(z11) θ(z22) / (θ(z12) θ(z21))| - 2π Im(z_E)^T Im(τ)^{-1} Im(z_D)
    with z_ij = α(P_i) - α(E_j) + α(W) built from one fixed lift per point.
    """
    g = period.g
    for part in (E1, E2):
        if sum(m for _, m in part) != g or any(m < 0 for _, m in part):
            raise ValueError(f"E parts must be effective of degree g={g}")
    shared = {lab for lab, _ in D} & ({lab for lab, _ in E1} | {lab for lab, _ in E2})
    if shared:
        raise ValueError(f"supports of D and E meet in {sorted(shared)}")
    ev = evaluator or ThetaEvaluator(period.tau, period.precision)
    if w is None:
        w = period.w if period.w is not None else find_w(period, evaluator=ev).w
    pairs = matching if matching is not None else split_point_differences(D)
    with mp.workdps(period.precision + GUARD_DIGITS):
        w = [mp.mpc(x) for x in w]
        e = [period.image(E1), period.image(E2)]
        zE = [e[0][i] - e[1][i] for i in range(g)]
        total = mp.mpf(0)
        err = mp.mpf(0)
        terms = []
        for P1, P2 in pairs:
            a = [period.image([(P1, 1)]), period.image([(P2, 1)])]
            zD = [a[0][i] - a[1][i] for i in range(g)]
            th = {}
            for i in range(2):
                for j in range(2):
                    z = [a[i][k] - e[j][k] + w[k] for k in range(g)]
                    th[(i, j)] = ev.theta(z)
            for key, tv in th.items():
                if abs(tv.value) <= 2 * tv.abs_error:
                    raise OnThetaDivisor(f"θ(z_{key[0] + 1}{key[1] + 1}) indistinguishable from 0 for {P1} - {P2}")
            ratio = th[(0, 0)].value * th[(1, 1)].value / (th[(0, 1)].value * th[(1, 0)].value)
            yE = mp.matrix([mp.im(x) for x in zE])
            yD = mp.matrix([mp.im(x) for x in zD])
            cross = (yE.T * ev.Yinv * yD)[0]
            value = -mp.log(abs(ratio)) - 2 * mp.pi * cross
            term_err = sum(tv.abs_error / (abs(tv.value) - tv.abs_error) for tv in th.values())
            total += value
            err += term_err
            terms.append({"pair": [P1, P2], "value": value, "abs_error": term_err})
        return ArchimedeanPairing(+total, +err, terms)


def archimedean_pairing_lambda(D, E1, E2, period: PeriodData, w, evaluator: ThetaEvaluator | None = None) -> mpmath.mpf:
    """Same pairing assembled from lattice-invariant Néron function values."""
    g = period.g
    ev = evaluator or ThetaEvaluator(period.tau, period.precision)
    with mp.workdps(period.precision + GUARD_DIGITS):
        w = [mp.mpc(x) for x in w]
        e = [period.image(E1), period.image(E2)]
        total = mp.mpf(0)
        for P1, P2 in split_point_differences(D):
            a = [period.image([(P1, 1)]), period.image([(P2, 1)])]
            for i in range(2):
                for j in range(2):
                    sign = 1 if i == j else -1
                    z = [a[i][k] - e[j][k] + w[k] for k in range(g)]
                    total += sign * ev.neron_lambda(z)[0]
        return +total


def _parse_complex(pair) -> mpmath.mpc:
    re, im = pair
    return mp.mpc(mp.mpf(str(re)), mp.mpf(str(im)))


def _format_complex(z, digits: int) -> List[str]:
    return [mp.nstr(mp.re(z), digits, strip_zeros=False, min_fixed=-mp.inf, max_fixed=mp.inf),
            mp.nstr(mp.im(z), digits, strip_zeros=False, min_fixed=-mp.inf, max_fixed=mp.inf)]


def period_from_json(data: dict) -> PeriodData:
    if data.get("schema") != 1:
        raise ValueError(f"period fixture has unsupported schema version {data.get('schema')!r}")
    precision = int(data.get("precision", 30))
    with mp.workdps(precision + GUARD_DIGITS):
        g = int(data["g"])
        tau = [[_parse_complex(v) for v in row] for row in data["tau"]]
        aj = {k: [_parse_complex(v) for v in vec] for k, v in data["aj"].items() for vec in [v]}
        K = [_parse_complex(v) for v in data["canonical_image"]]
        w = [_parse_complex(v) for v in data["w"]] if data.get("w") else None
        return PeriodData(g, tau, aj, K, precision, w, list(data.get("theta_test", [])), data.get("meta", {}))


def period_to_json(period: PeriodData, digits: int | None = None) -> dict:
    digits = digits or period.precision + GUARD_DIGITS
    with mp.workdps(digits + 5):
        out = {
            "schema": 1,
            "g": period.g,
            "precision": period.precision,
            "tau": [[_format_complex(period.tau[i, j], digits) for j in range(period.g)] for i in range(period.g)],
            "aj": {k: [_format_complex(z, digits) for z in v] for k, v in sorted(period.aj.items())},
            "canonical_image": [_format_complex(z, digits) for z in period.canonical_image],
            "theta_test": list(period.theta_test),
            "meta": period.meta,
        }
        if period.w is not None:
            out["w"] = [_format_complex(z, digits) for z in period.w]
        return out
