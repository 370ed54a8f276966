import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_barycenter.centroid import (
    GridSpec,
    build_centroids,
    centroid_of,
    detect_grid,
    grid_density_bound,
    multiset_count,
    refined_grid,
)
from discrete_barycenter.errors import SizeError, ValidationError
from discrete_barycenter.measure import MeasureSet, dirac, make_measure

from conftest import demo_measures


def test_demo_centroid_count():
    s = build_centroids(demo_measures())
    assert len(s) == 12870 == math.comb(16, 8) == multiset_count(9, 8)


def test_identical_diracs_give_one_centroid():
    ms = MeasureSet(tuple(dirac([1.5, -2.0]) for _ in range(4)))
    s = build_centroids(ms)
    assert s.points.tolist() == [[1.5, -2.0]]


def test_halved_coordinates():
    ms = MeasureSet((make_measure([[0], [3], [6]], [1 / 3, 1 / 3, 1 / 3]), dirac([0.0])))
    assert build_centroids(ms).points.ravel().tolist() == [0.0, 1.5, 3.0]


def test_exact_centroids():
    ms = MeasureSet((make_measure([[0], [1]], ["1/2", "1/2"], exact=True), dirac([0], exact=True), dirac([0], exact=True)))
    s = build_centroids(ms)
    assert list(s.points.ravel()) == [Fraction(0), Fraction(1, 3)]


def test_provenance_is_smallest_tuple():
    # (0,1) and (1,0) both average to 0.5; the stored witness is (0, 1)
    ms = MeasureSet((make_measure([[0], [1]], [0.5, 0.5]), make_measure([[0], [1]], [0.5, 0.5])))
    s = build_centroids(ms)
    assert s.points.ravel().tolist() == [0.0, 0.5, 1.0]
    assert s.provenance.tolist() == [[0, 0], [0, 1], [1, 1]]


def test_tuple_cap():
    ms = MeasureSet(tuple(make_measure(np.arange(10.0)[:, None], np.full(10, 0.1)) for _ in range(3)))
    with pytest.raises(SizeError):
        build_centroids(ms, cap=999)


def test_lookup():
    ms = MeasureSet((make_measure([[0, 0], [2, 0]], [0.5, 0.5]), make_measure([[0, 2]], [1.0])))
    s = build_centroids(ms)
    assert s.lookup(np.array([[1.0, 1.0], [0.0, 1.0], [5.0, 5.0]])).tolist() == [1, 0, -1]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(0, 10**6))
def test_centroids_match_brute_force(d, sizes, seed):
    rng = np.random.default_rng(seed)
    # small integer coordinates make collisions likely
    ms = MeasureSet(tuple(make_measure(rng.integers(-2, 3, size=(s, d)).astype(float), np.full(s, 1.0 / s)) for s in sizes))
    s = build_centroids(ms)
    brute = {}
    for tup in itertools.product(*[range(m.size) for m in ms]):
        key = tuple(np.round(centroid_of(ms, tup), 12))
        brute.setdefault(key, tup)
    assert len(s) == len(brute) <= math.prod(ms.sizes)
    for p, tup in zip(s.points, s.provenance):
        assert np.allclose(p, centroid_of(ms, tup), atol=1e-12)
        assert tuple(tup) == brute[tuple(np.round(p, 12))]
    # canonical order
    assert np.all(np.lexsort(s.points.T[::-1]) == np.arange(len(s)))


def test_shared_support_count():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(5, 2))
    for n in (1, 2, 3, 4):
        ms = MeasureSet(tuple(make_measure(pts, np.full(5, 0.2)) for _ in range(n)))
        assert len(build_centroids(ms)) == math.comb(5 + n - 1, n)


# -- grids


def test_detect_square_lattice():
    ms = MeasureSet((
        make_measure([[0, 0], [2, 2], [1, 0]], [0.2, 0.3, 0.5]),
        make_measure([[0, 2], [2, 1]], [0.5, 0.5]),
    ))
    g = detect_grid(ms)
    assert g.origin.tolist() == [0.0, 0.0]
    assert g.axes.tolist() == [[2.0, 0.0], [0.0, 2.0]]
    assert g.extents == (3, 3)


def test_detect_incommensurable():
    ms = MeasureSet((make_measure([[0.0], [1.0], [math.sqrt(2)]], [0.2, 0.3, 0.5]),))
    assert detect_grid(ms) is None


def test_detect_uniform_spacing():
    ms = MeasureSet((make_measure([[0], [2], [4], [6]], [0.25] * 4),))
    g = detect_grid(ms)
    assert g.extents == (4,) and g.origin.tolist() == [0.0] and g.axes.tolist() == [[6.0]]


def test_detect_gaps_use_common_step():
    ms = MeasureSet((make_measure([[0.5], [1.25], [2.0]], [0.2, 0.3, 0.5]),))
    g = detect_grid(ms)
    assert g.extents == (3,)
    ms = MeasureSet((make_measure([[0.0], [0.75], [3.0]], [0.2, 0.3, 0.5]),))
    assert detect_grid(ms).extents == (5,)


def test_refined_grid():
    g = GridSpec(np.zeros(2), np.eye(2), (3, 3))
    assert refined_grid(g, 2).extents == (5, 5)
    assert refined_grid(g, 1).extents == g.extents
    assert refined_grid(GridSpec(np.zeros(1), np.eye(1), (2,)), 8).extents == (9,)


def test_density_bound():
    g1 = GridSpec(np.zeros(1), np.eye(1), (5,))
    for n in (1, 3, 7):
        assert grid_density_bound(g1, n).density == pytest.approx(5 / 4)
    g = GridSpec(np.zeros(2), np.eye(2), (3, 3))
    b = grid_density_bound(g, 2)
    assert b.density == pytest.approx(1.125) and b.support == 2 * 8 + 1
    assert grid_density_bound(GridSpec(np.zeros(2), np.eye(2), (10, 10)), 4).density == pytest.approx(0.30864197, rel=1e-7)


def test_grid_validation():
    with pytest.raises(ValidationError):
        GridSpec(np.zeros(2), np.array([[1.0, 0.0], [2.0, 0.0]]), (3, 3))
    with pytest.raises(ValidationError):
        GridSpec(np.zeros(2), np.eye(2), (1, 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(1, 4), st.integers(0, 10**6))
def test_grid_closure(l1, l2, n, seed):
    rng = np.random.default_rng(seed)
    origin = rng.normal(size=2)
    step = rng.uniform(0.1, 3.0, size=2)
    g = GridSpec(origin, np.diag(step * (np.array([l1, l2]) - 1)), (l1, l2))
    nodes = np.array([origin + step * np.array([a, b]) for a in range(l1) for b in range(l2)])
    measures = []
    for _ in range(n):
        k = int(rng.integers(1, len(nodes) + 1))
        idx = rng.choice(len(nodes), size=k, replace=False)
        measures.append(make_measure(nodes[idx], np.full(k, 1.0 / k)))
    s = build_centroids(MeasureSet(tuple(measures)))
    assert np.all(refined_grid(g, n).contains(s.points))
