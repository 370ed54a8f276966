from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_barycenter.barycenter import NStarTransport, build_cost_tensor, solve_barycenter, transport_cost
from discrete_barycenter.centroid import build_centroids
from discrete_barycenter.errors import InfeasibleTransport
from discrete_barycenter.measure import MeasureSet, dirac, make_measure
from discrete_barycenter.sparsity import (
    TransportScheme,
    redundant_rows,
    scheme_from_transport,
    sparsify,
    support_bound,
    transport_from_scheme,
    tuple_costs,
)

from conftest import random_measure_set


def tightness_family(w):
    """P_1 uniform on W evenly spaced points, P_2 a Dirac at the first one."""
    p1 = make_measure([[3 * a] for a in range(w)], [Fraction(1, w)] * w, exact=True)
    return MeasureSet((p1, dirac([0], exact=True)))


def test_peeling_forced_transport():
    ms = MeasureSet((dirac([0]), make_measure([[0], [2]], [0.5, 0.5])))
    r = solve_barycenter(ms)
    sch = scheme_from_transport(r.transport, ms, r.centroids)
    # centroids are {0, 1}; the Dirac is atom 0 of P_1, P_2 has atoms 0 and 2 -> k = 0, 1
    assert sch.centers.tolist() == [0, 1]
    assert sch.endpoints.tolist() == [[0, 0], [0, 1]]
    assert sch.weights.tolist() == [0.5, 0.5]
    assert sch.cost() == 1.0


def test_diracs_single_tuple():
    ms = MeasureSet((dirac([0.0, 1.0]), dirac([2.0, 3.0]), dirac([4.0, -1.0])))
    r = solve_barycenter(ms)
    sch = scheme_from_transport(r.transport, ms, r.centroids)
    assert len(sch) == 1 and sch.weights.tolist() == [1.0]
    assert sparsify(r, ms).support_size == 1 == support_bound(ms)


def test_single_tuple_transport():
    ms = MeasureSet((dirac([0.0]), dirac([2.0])))
    s = build_centroids(ms)
    sch = TransportScheme(np.array([0]), np.array([[0, 0]]), np.array([1.0]),
                          tuple_costs(ms, s, np.array([0]), np.array([[0, 0]])), len(s))
    t = transport_from_scheme(sch)
    assert t.mass.tolist() == [1.0, 1.0] and t.z.tolist() == [1.0]


def test_shared_entries_merge():
    ms = MeasureSet((make_measure([[0], [2]], [0.5, 0.5]), make_measure([[0], [4]], [0.5, 0.5])))
    s = build_centroids(ms)
    centers = np.array([s.lookup(np.array([[1.0]]))[0]] * 2)
    ends = np.array([[0, 0], [0, 1]])
    sch = TransportScheme(centers, ends, np.array([0.25, 0.25]), tuple_costs(ms, s, centers, ends), len(s))
    t = transport_from_scheme(sch)
    # both tuples send P_1's atom 0 to the same centroid
    j, k, m = t.entries(0)
    assert list(zip(j, k, m)) == [(centers[0], 0, 0.5)]


def test_infeasible_transport_rejected():
    ms = MeasureSet((dirac([0.0]), dirac([2.0])))
    s = build_centroids(ms)
    bad = NStarTransport(np.array([0, 1]), np.array([0, 0]), np.array([0, 0]), np.array([0.5, 1.0]), np.ones(1))
    with pytest.raises(InfeasibleTransport):
        scheme_from_transport(bad, ms, s)


@pytest.mark.parametrize("w", [2, 3, 4, 5, 6])
def test_tightness_family(w):
    ms = tightness_family(w)
    r = sparsify(solve_barycenter(ms), ms)
    assert r.exact
    assert r.support_size == w == support_bound(ms)
    assert list(r.barycenter.masses) == [Fraction(1, w)] * w
    assert list(r.barycenter.points.ravel()) == [Fraction(3 * a, 2) for a in range(w)]


def test_tightness_w3_coordinates():
    r = sparsify(solve_barycenter(tightness_family(3)), tightness_family(3))
    assert [float(v) for v in r.barycenter.points.ravel()] == [0.0, 1.5, 3.0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_scheme_round_trip(seed):
    ms = random_measure_set(np.random.default_rng(seed), n_range=(2, 4), support_range=(1, 5))
    r = solve_barycenter(ms)
    ct = build_cost_tensor(ms, r.centroids)
    sch = scheme_from_transport(r.transport, ms, r.centroids)
    cost = transport_cost(r.transport, ct)
    assert sch.cost() == pytest.approx(cost, rel=1e-9, abs=1e-12)
    assert len(sch) <= np.count_nonzero(r.transport.mass > 1e-13)
    assert sch.marginal_residual(ms) <= 1e-9
    back = transport_from_scheme(sch)
    assert transport_cost(back, ct) == pytest.approx(cost, rel=1e-9, abs=1e-12)
    assert back.marginal_residual(ms) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_sparsify_bound(seed):
    ms = random_measure_set(np.random.default_rng(seed))
    r = solve_barycenter(ms)
    sp = sparsify(r, ms)
    assert sp.support_size <= support_bound(ms)
    assert sp.total_cost <= r.total_cost * (1 + 1e-9) + 1e-12
    assert sp.transport.marginal_residual(ms) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_redundant_rows(seed):
    ms = random_measure_set(np.random.default_rng(seed), n_range=(2, 4), support_range=(1, 4))
    r = solve_barycenter(ms)
    sch = scheme_from_transport(r.transport, ms, r.centroids)
    assert redundant_rows(sch, ms) >= ms.n - 1


def test_redundant_rows_exact():
    ms = tightness_family(4)
    r = solve_barycenter(ms)
    sch = scheme_from_transport(r.transport, ms, r.centroids)
    assert sch.exact and redundant_rows(sch, ms) >= 1
