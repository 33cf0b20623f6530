import dataclasses
import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from neronheights.theta import (
    NoThetaCharacteristic,
    OnThetaDivisor,
    PrecisionUnreachable,
    ThetaEvaluator,
    archimedean_pairing,
    archimedean_pairing_lambda,
    find_w,
    period_from_json,
    period_to_json,
    split_point_differences,
)

from conftest import example, load

TOL = mp.mpf("1e-20")


def random_tau(g, seed):
    rng = random.Random(seed)
    B = [[rng.uniform(-0.6, 0.6) for _ in range(g)] for _ in range(g)]
    Y = [[sum(B[i][k] * B[j][k] for k in range(g)) + (0.6 if i == j else 0) for j in range(g)] for i in range(g)]
    X = [[0.0] * g for _ in range(g)]
    for i in range(g):
        for j in range(i, g):
            X[i][j] = X[j][i] = rng.uniform(-0.5, 0.5)
    with mp.workdps(50):
        return mp.matrix([[mp.mpc(mp.mpf(X[i][j]), mp.mpf(Y[i][j])) for j in range(g)] for i in range(g)])


def random_z(g, seed, spread=1.0):
    rng = random.Random(seed + 1000)
    return [mp.mpc(rng.uniform(-spread, spread), rng.uniform(-spread, spread)) for _ in range(g)]


def brute_theta(z, tau, radius):
    """Plain box sum around the dominant lattice point."""
    g = len(z)
    with mp.workdps(45):
        Y = mp.matrix([[mp.im(tau[i, j]) for j in range(g)] for i in range(g)])
        centre = mp.inverse(Y) * mp.matrix([-mp.im(x) for x in z])
        c = [int(mp.nint(centre[i])) for i in range(g)]
        total = mp.mpc(0)
        for n in itertools.product(range(-radius, radius + 1), repeat=g):
            n = [a + b for a, b in zip(n, c)]
            q = sum(n[i] * tau[i, j] * n[j] for i in range(g) for j in range(g)) / 2
            q += sum(n[i] * z[i] for i in range(g))
            total += mp.exp(2j * mp.pi * q)
        return total


def shifted(z, tau, m, n):
    g = len(z)
    with mp.workdps(50):
        return [z[i] + m[i] + sum(tau[i, j] * n[j] for j in range(g)) for i in range(g)]


genus = st.sampled_from([1, 2, 3])
seeds = st.integers(0, 10**6)
shifts = st.lists(st.integers(-3, 3), min_size=6, max_size=6)


@settings(max_examples=15, deadline=None, derandomize=True)
@given(genus, seeds)
def test_theta_is_even(g, seed):
    tau = random_tau(g, seed)
    ev = ThetaEvaluator(tau, 30)
    z = random_z(g, seed)
    a, b = ev.theta(z), ev.theta([-x for x in z])
    with mp.workdps(45):
        assert abs(a.value - b.value) <= TOL * max(1, abs(a.value))


@settings(max_examples=15, deadline=None, derandomize=True)
@given(genus, seeds, shifts)
def test_theta_quasi_periodicity(g, seed, shift):
    tau = random_tau(g, seed)
    ev = ThetaEvaluator(tau, 30)
    z = random_z(g, seed)
    m, n = shift[:g], shift[3:3 + g]
    with mp.workdps(45):
        moved = ev.theta(shifted(z, tau, m, n)).value
        quad = sum(n[i] * tau[i, j] * n[j] for i in range(g) for j in range(g))
        factor = mp.exp(-1j * mp.pi * quad - 2j * mp.pi * sum(n[i] * z[i] for i in range(g)))
        expected = factor * ev.theta(z).value
        assert abs(moved - expected) <= TOL * max(1, abs(expected))


@settings(max_examples=15, deadline=None, derandomize=True)
@given(genus, seeds, shifts)
def test_neron_function_lattice_invariance(g, seed, shift):
    tau = random_tau(g, seed)
    ev = ThetaEvaluator(tau, 30)
    z = random_z(g, seed)
    lam, _ = ev.neron_lambda(z)
    moved, _ = ev.neron_lambda(shifted(z, tau, shift[:g], shift[3:3 + g]))
    flipped, _ = ev.neron_lambda([-x for x in z])
    assert abs(lam - moved) <= TOL
    assert abs(lam - flipped) <= TOL


@pytest.mark.parametrize("g,seed", [(1, 1), (1, 2), (2, 3), (2, 4), (3, 5)])
def test_theta_against_box_sum(g, seed):
    tau = random_tau(g, seed)
    ev = ThetaEvaluator(tau, 30)
    # deliberately far from the fundamental domain
    z = shifted(random_z(g, seed), tau, [2] * g, [1] + [-1] * (g - 1))
    got = ev.theta(z)
    ref = brute_theta(z, tau, 9 if g < 3 else 7)
    with mp.workdps(45):
        assert abs(got.value - ref) <= got.abs_error + TOL * max(1, abs(ref))
        assert got.abs_error <= mp.mpf("1e-25") * max(1, abs(ref))


def test_theta_vanishes_at_odd_half_period():
    tau = random_tau(1, 9)
    ev = ThetaEvaluator(tau, 30)
    with pytest.raises(OnThetaDivisor):
        ev.neron_lambda([mp.mpf(1) / 2 + tau[0, 0] / 2])


def test_precision_limits():
    ev = ThetaEvaluator(random_tau(2, 0), 20)
    with pytest.raises(PrecisionUnreachable):
        ev.theta([0, 0], eps=mp.mpf("1e-40"))


def test_rejects_bad_period_matrix():
    with pytest.raises(ValueError):
        ThetaEvaluator([[mp.mpc(0, -1)]])
    with pytest.raises(ValueError):
        ThetaEvaluator([[mp.mpc(0, 1), mp.mpc(0.1, 0)], [mp.mpc(0.2, 0), mp.mpc(0, 1)]])


def test_split_point_differences():
    assert split_point_differences([("A", 2), ("B", -1), ("C", -1)]) == [("A", "B"), ("A", "C")]
    with pytest.raises(ValueError):
        split_point_differences([("A", 1)])


# --- period fixtures -------------------------------------------------------


@pytest.mark.parametrize("name", ["torsion", "rank1", "cartan", "ell37a"])
def test_period_fixture_round_trip(name):
    period = example(name).period
    again = period_from_json(period_to_json(period))
    with mp.workdps(period.precision + 10):
        assert mp.mnorm(again.tau - period.tau, 1) < mp.mpf(10) ** (-period.precision)
        assert set(again.aj) == set(period.aj)


def test_period_fixture_schema():
    data = dict(load("torsion", "period.json"))
    data["schema"] = 7
    with pytest.raises(ValueError):
        period_from_json(data)


@pytest.mark.parametrize("name", ["rank1", "ell37a"])
def test_w_search_reproduces_fixture(name):
    period = example(name).period
    found = find_w(period)
    assert found.characteristic == tuple(period.meta["w_characteristic"])
    assert found.theta_abs < mp.mpf(10) ** (-period.precision // 2) * found.median_abs


def test_w_search_fails_without_a_zero():
    period = example("rank1").period
    with pytest.raises((NoThetaCharacteristic, ValueError)):
        find_w(period, test_labels=[period.theta_test[0]])


def test_two_archimedean_formulas_agree():
    ex = example("rank1")
    D = list(ex.divisors["D"].point_multiplicities().items())
    E1, E2 = [[(k, v) for k, v in ex.divisors["E"].point_multiplicities().items() if (v > 0) == s] for s in (True, False)]
    E2 = [(k, -v) for k, v in E2]
    a = archimedean_pairing(D, E1, E2, ex.period, ex.period.w)
    b = archimedean_pairing_lambda(D, E1, E2, ex.period, ex.period.w)
    assert abs(a.value - b) < mp.mpf("1e-20")
    assert abs(a.value - mp.mpf("-0.013563")) < mp.mpf("1e-5")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_archimedean_pairing_is_symmetric(n):
    ex = example("ell37a")
    D, E = ex.divisors[f"D{n}"].point_multiplicities(), ex.divisors[f"E{n}"].point_multiplicities()

    def parts(div):
        return [(k, v) for k, v in div.items() if v > 0], [(k, -v) for k, v in div.items() if v < 0]

    de = archimedean_pairing(list(D.items()), *parts(E), ex.period)
    ed = archimedean_pairing(list(E.items()), *parts(D), ex.period)
    assert abs(de.value - ed.value) <= de.abs_error + ed.abs_error + mp.mpf("1e-25")


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pairing_ignores_the_choice_of_lifts(seed):
    ex = example("rank1")
    period = ex.period
    g, rng = period.g, random.Random(seed)
    with mp.workdps(period.precision + 20):
        moved = {label: shifted(z, period.tau, [rng.randint(-2, 2) for _ in range(g)],
                                [rng.randint(-2, 2) for _ in range(g)])
                 for label, z in period.aj.items()}
    other = dataclasses.replace(period, aj=moved)
    D = list(ex.divisors["D"].point_multiplicities().items())
    E = ex.divisors["E"].point_multiplicities()
    E1, E2 = [(k, v) for k, v in E.items() if v > 0], [(k, -v) for k, v in E.items() if v < 0]
    a = archimedean_pairing(D, E1, E2, period, period.w)
    b = archimedean_pairing(D, E1, E2, other, period.w)
    assert abs(a.value - b.value) <= a.abs_error + b.abs_error + mp.mpf("1e-25")
