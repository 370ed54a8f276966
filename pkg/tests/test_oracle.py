from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_barycenter.barycenter import solve_barycenter
from discrete_barycenter.errors import BudgetExceeded, ValidationError
from discrete_barycenter.measure import MeasureSet, dirac, make_measure
from discrete_barycenter.oracle import (
    RationalInstance,
    compare,
    coupling_cost,
    enumerate_optimum,
    random_instance,
    run_oracle,
)
from discrete_barycenter.sparsity import sparsify


def half(a, b):
    return make_measure([[a], [b]], ["1/2", "1/2"], exact=True)


def test_diracs():
    ms = MeasureSet((dirac([0, 0], exact=True), dirac([3, 0], exact=True), dirac([0, 3], exact=True)))
    coupling, cost = enumerate_optimum(ms)
    assert coupling.reshape(-1).tolist() == [1]
    # mean (1, 1): squared distances 2 + 5 + 5
    assert cost == 12


def test_dirac_and_two_point():
    _, cost = enumerate_optimum(RationalInstance(MeasureSet((dirac([0], exact=True), half(0, 2))), 2))
    assert cost == 1


def test_identical_measures_couple_diagonally():
    coupling, cost = enumerate_optimum(MeasureSet((half(0, 1), half(0, 1))))
    assert cost == 0
    assert coupling.tolist() == [[Fraction(1, 2), 0], [0, Fraction(1, 2)]]


def test_compare_identical():
    m = make_measure([[0, 1], [2, 2], [1, -1]], ["1/4", "1/4", "1/2"], exact=True)
    rep = compare(RationalInstance(MeasureSet((m, m, m)), 4))
    assert rep["passed"] and rep["linked"] == rep["multimarginal"] == rep["enumeration"] == 0


@pytest.mark.parametrize("w", [2, 3, 4])
def test_compare_tightness_family(w):
    p1 = make_measure([[3 * a] for a in range(w)], [Fraction(1, w)] * w, exact=True)
    ms = MeasureSet((p1, dirac([0], exact=True)))
    rep = compare(RationalInstance(ms, w))
    assert rep["passed"]
    assert sparsify(solve_barycenter(ms), ms).support_size == w


def test_budget():
    m = make_measure([[0], [1], [2]], ["1/4", "1/4", "1/2"], exact=True)
    with pytest.raises(BudgetExceeded):
        enumerate_optimum(MeasureSet((m, m, m)), budget=100)


def test_instance_validation():
    with pytest.raises(ValidationError):
        RationalInstance(MeasureSet((half(0, 1),)), 3)
    with pytest.raises(ValidationError):
        RationalInstance(MeasureSet((half(0, 1),)), 9)
    with pytest.raises(ValidationError):
        RationalInstance(MeasureSet((make_measure([[0], [1]], [0.5, 0.5]),)), 2)
    big = make_measure([[a] for a in range(5)], ["1/5"] * 5, exact=True)
    with pytest.raises(ValidationError):
        RationalInstance(MeasureSet((big, big, big)), 5)


def random_couplings(ms, rng, count):
    """North-west corner couplings under random atom orders, plus the product coupling."""
    prod = np.array([Fraction(1)], dtype=object)
    for m in ms:
        prod = np.multiply.outer(prod, np.asarray(m.masses, dtype=object))
    yield prod.reshape(ms.sizes)
    for _ in range(count):
        orders = [rng.permutation(m.size) for m in ms]
        rem = [[m.masses[k] for k in o] for m, o in zip(ms, orders)]
        ptr = [0] * ms.n
        c = np.array([Fraction(0)] * int(np.prod(ms.sizes)), dtype=object).reshape(ms.sizes)
        while all(p < len(r) for p, r in zip(ptr, rem)):
            w = min(r[p] for p, r in zip(ptr, rem))
            c[tuple(o[p] for o, p in zip(orders, ptr))] += w
            for i in range(ms.n):
                rem[i][ptr[i]] -= w
                if rem[i][ptr[i]] == 0:
                    ptr[i] += 1
        yield c


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_oracle_is_minimal(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng)
    ms = inst.measures
    _, best = enumerate_optimum(inst)
    for c in random_couplings(ms, rng, 4):
        for i, m in enumerate(ms):
            other = tuple(a for a in range(ms.n) if a != i)
            assert list(c.sum(axis=other) if other else c) == list(m.masses)
        assert coupling_cost(ms, c) >= best


def test_enumerated_coupling_attains_cost():
    rng = np.random.default_rng(7)
    for _ in range(10):
        inst = random_instance(rng)
        coupling, cost = enumerate_optimum(inst)
        assert coupling_cost(inst.measures, coupling) == cost


def test_run_oracle_small():
    rep = run_oracle(seed=3, count=10)
    assert rep["passed"] == 10 and rep["failures"] == []


def test_random_instance_shape():
    rng = np.random.default_rng(0)
    for _ in range(20):
        inst = random_instance(rng, max_n=3, max_support=3, q=4)
        assert 2 <= inst.measures.n <= 3
        assert all(1 <= s <= 3 for s in inst.measures.sizes)
        assert all((w * 4).denominator == 1 for m in inst.measures for w in m.masses)
        assert all(len(set(map(tuple, m.points))) == m.size for m in inst.measures)
