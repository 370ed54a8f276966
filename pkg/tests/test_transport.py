from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_barycenter import transport as tr
from discrete_barycenter.barycenter import (
    BarycenterResult,
    DualSolution,
    NStarTransport,
    assemble_result,
    build_cost_tensor,
    check_dual,
    solve_barycenter,
)
from discrete_barycenter.centroid import build_centroids
from discrete_barycenter.measure import MeasureSet, dirac, make_measure
from discrete_barycenter.transport import (
    NOT_STRICTLY_COMPLEMENTARY,
    build_potentials,
    certify,
    certify_potentials,
    check_no_mass_splitting,
    refine_dual,
    slack_residual,
)

from conftest import random_measure_set


def test_diracs_certify_exactly():
    ms = MeasureSet((dirac([0, 0], exact=True), dirac([2, 4], exact=True), dirac([4, -1], exact=True)))
    r = solve_barycenter(ms)
    split = check_no_mass_splitting(r, ms)
    assert split.passed and split.targets.tolist() == [[0], [0], [0]]
    cert = certify(r, ms)
    assert cert.passed and not cert.potentials.refined
    assert cert.as_dict()["theorem2"] == {"i": True, "ii": True, "iii": True, "iv": True}


def test_identical_measures_identity_gradient():
    m = make_measure([[0, 0], [1, 3], [-2, 1]], [0.2, 0.3, 0.5])
    ms = MeasureSet((m, m))
    r = solve_barycenter(ms)
    cert = certify(r, ms)
    assert cert.passed
    ps = build_potentials(cert.dual, ms)
    for i in range(2):
        assert np.allclose(ps.gradient(i, r.barycenter.points), r.barycenter.points)


def test_single_piece_potential():
    ms = MeasureSet((dirac([1.0, 2.0]),))
    ps = build_potentials(DualSolution((np.zeros(1),), np.zeros((1, 1))), ms)
    x = np.array([[3.0, -1.0], [0.0, 0.0]])
    assert ps.value(0, x).tolist() == [1.0 * 3 - 2.0 - 2.5, -2.5]
    assert ps.gradient(0, x).tolist() == [[1.0, 2.0], [1.0, 2.0]]


def test_tie_rule_lowest_piece():
    ms = MeasureSet((make_measure([[0.0], [2.0]], [0.5, 0.5]),))
    ps = build_potentials(DualSolution((np.zeros(2),), np.zeros((1, 1))), ms)
    k, ties = ps.argmax(0, np.array([[1.0], [1.5]]))
    assert k.tolist() == [0, 1] and ties.tolist() == [True, False]
    exact = MeasureSet((make_measure([[0], [2]], ["1/2", "1/2"], exact=True),))
    ps = build_potentials(DualSolution((np.array([Fraction(0)] * 2, dtype=object),),
                                       np.array([[Fraction(0)]], dtype=object)), exact)
    k, ties = ps.argmax(0, np.array([[Fraction(1)]], dtype=object))
    assert k.tolist() == [0] and ties.tolist() == [True]


def splitting_transport():
    """Suboptimal transport sending the centroid 1 mass of P_1 to both of its atoms."""
    ms = MeasureSet((make_measure([[0.0], [2.0]], [0.5, 0.5]), dirac([0.0])))
    s = build_centroids(ms)
    j = int(s.lookup(np.array([[1.0]]))[0])
    t = NStarTransport(np.array([0, 0, 1]), np.array([j, j, j]), np.array([0, 1, 0]),
                       np.array([0.5, 0.5, 1.0]), np.eye(len(s))[j])
    ct = build_cost_tensor(ms, s)
    return ms, j, assemble_result(ms, s, ct, t, None, {})


def test_negative_control_split():
    ms, j, r = splitting_transport()
    rep = check_no_mass_splitting(r, ms)
    assert not rep.passed
    assert {"kind": "split", "i": 0, "j": j, "targets": [0, 1]} in rep.violations


def test_escalation_on_flag(monkeypatch):
    ms = MeasureSet((make_measure([[0.0], [2.0]], [0.5, 0.5]), make_measure([[0.0], [3.0]], [0.25, 0.75])))
    r = solve_barycenter(ms)
    real_certify, real_refine = tr.certify_potentials, tr.refine_dual
    calls = {"certify": 0, "refine": 0}

    def first_flagged(ps, result, measures, tol):
        calls["certify"] += 1
        rep = real_certify(ps, result, measures, tol=tol)
        if calls["certify"] == 1:
            rep.unique_argmax = False
            rep.flags = [NOT_STRICTLY_COMPLEMENTARY]
        return rep

    def counted_refine(result, measures):
        calls["refine"] += 1
        return real_refine(result, measures)

    monkeypatch.setattr(tr, "certify_potentials", first_flagged)
    monkeypatch.setattr(tr, "refine_dual", counted_refine)
    cert = certify(r, ms)
    assert calls == {"certify": 2, "refine": 1}
    assert cert.passed and cert.potentials.refined and cert.as_dict()["refined"]


def test_no_escalation_when_plain_passes(monkeypatch):
    ms = MeasureSet((make_measure([[0.0], [2.0]], [0.5, 0.5]), dirac([1.0])))
    r = solve_barycenter(ms)

    def fail(*_):
        raise AssertionError("refinement should not run")

    monkeypatch.setattr(tr, "refine_dual", fail)
    assert certify(r, ms).passed


def test_tie_is_flagged():
    # zero potentials tie both pieces of P_1 at the support point 1
    ms = MeasureSet((make_measure([[0.0], [2.0]], [0.5, 0.5]), make_measure([[0.0], [2.0]], [0.5, 0.5])))
    s = build_centroids(ms)
    j = int(s.lookup(np.array([[1.0]]))[0])
    t = NStarTransport(np.array([0, 1]), np.array([j, j]), np.array([0, 1]), np.array([1.0, 1.0]), np.eye(len(s))[j])
    r = assemble_result(ms, s, build_cost_tensor(ms, s), t, None, {})
    flat = DualSolution(tuple(np.zeros(2) for _ in range(2)), np.zeros((2, len(s))))
    rep = certify_potentials(build_potentials(flat, ms), r, ms)
    assert not rep.unique_argmax
    assert rep.flags == [NOT_STRICTLY_COMPLEMENTARY]


def test_near_tie_is_not_fatal():
    # two atoms 2e-5 apart leave exact piece gaps near 1e-10, below the tie tolerance
    ms = random_measure_set(np.random.default_rng(60197), n_range=(2, 4), support_range=(1, 5))
    r = solve_barycenter(ms)
    cert = certify(r, ms, tol=1e-7)
    assert cert.splitting.passed and cert.potentials.passed
    assert NOT_STRICTLY_COMPLEMENTARY in cert.potentials.flags


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_identity_at_probes(seed):
    rng = np.random.default_rng(seed)
    ms = random_measure_set(rng, n_range=(2, 3), support_range=(1, 5))
    r = solve_barycenter(ms)
    ps = build_potentials(r.dual, ms)
    probes = rng.normal(size=(20, ms.dim)) * 3
    for i, m in enumerate(ms):
        lhs = (probes**2).sum(axis=1) - 2 * ps.value(i, probes)
        d = probes[:, None, :] - m.points[None, :, :]
        rhs = ((d**2).sum(axis=2) - r.dual.tau[i][None, :]).min(axis=1)
        assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_slack_and_targets(seed):
    ms = random_measure_set(np.random.default_rng(seed), n_range=(2, 4), support_range=(1, 5))
    r = solve_barycenter(ms)
    assert slack_residual(r, ms) <= 1e-9
    cert = certify(r, ms)
    assert cert.passed
    ps = build_potentials(cert.dual, ms)
    # gradient at each support point is the unique transport target
    for i, m in enumerate(ms):
        grad = ps.gradient(i, r.barycenter.points)
        assert np.allclose(grad, m.points[cert.splitting.targets[i]], atol=1e-7)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_refined_dual_stays_optimal(seed):
    ms = random_measure_set(np.random.default_rng(seed), n_range=(2, 3), support_range=(1, 4))
    r = solve_barycenter(ms)
    dual = refine_dual(r, ms)
    refined = BarycenterResult(r.barycenter, r.transport, r.total_cost, r.per_measure_cost, dual, r.centroids,
                               r.support, r.info)
    rep = check_dual(refined, ms)
    assert rep["relative_gap"] <= 1e-8 and rep["edge_violation"] <= 1e-9
    assert slack_residual(r, ms, dual) <= 1e-9
    assert certify_potentials(build_potentials(dual, ms), r, ms).passed


def test_exact_certificate():
    ms = MeasureSet((
        make_measure([[0, 0], [3, 1]], ["1/3", "2/3"], exact=True),
        make_measure([[1, 1], [2, -1], [0, 2]], ["1/4", "1/4", "1/2"], exact=True),
    ))
    r = solve_barycenter(ms)
    cert = certify(r, ms)
    assert cert.passed
    assert slack_residual(r, ms) == 0


@pytest.mark.parametrize("tol", [1e-7])
def test_demo_certificate(demo_solution, tol):
    ms, _, _, sparse = demo_solution
    cert = certify(sparse, ms, tol=tol)
    assert cert.splitting.passed
    assert cert.potentials.passed
