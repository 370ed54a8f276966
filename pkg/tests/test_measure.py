import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_barycenter.errors import ParseError, ValidationError
from discrete_barycenter.measure import (
    MeasureSet,
    dirac,
    dump_measure,
    dump_measure_set,
    load_measure,
    load_measure_set,
    make_measure,
    second_moment,
)


def test_load_two_atoms():
    m = load_measure('{"points": [[0], [2]], "masses": [0.5, 0.5]}')
    assert m.size == 2 and m.dim == 1
    assert m.masses.tolist() == [0.5, 0.5]


def test_duplicate_points_merge():
    m = load_measure('{"points": [[0], [0]], "masses": [0.3, 0.7]}')
    assert m.size == 1
    assert m.masses[0] == 1.0


def test_mass_sum_rejected():
    with pytest.raises(ValidationError):
        load_measure('{"points": [[1, 2]], "masses": [0.9]}')


def test_bad_documents():
    with pytest.raises(ParseError):
        load_measure("{not json")
    with pytest.raises(ParseError):
        load_measure('{"masses": [1]}')
    with pytest.raises(ValidationError):
        load_measure('{"points": [[0], [1, 2]], "masses": [0.5, 0.5]}')
    with pytest.raises(ValidationError):
        load_measure('{"points": [[0], [1]], "masses": [1.5, -0.5]}')
    with pytest.raises(ValidationError):
        load_measure('{"dim": 2, "points": [[0]], "masses": [1]}')


def test_zero_mass_dropped():
    m = make_measure([[0], [1], [2]], [0.5, 0.0, 0.5])
    assert m.points.ravel().tolist() == [0.0, 2.0]


def test_near_duplicates_merge_within_tolerance():
    m = make_measure([[1.0], [1.0 + 1e-12], [2.0]], [0.25, 0.25, 0.5])
    assert m.size == 2
    assert m.masses.tolist() == [0.5, 0.5]


def test_exact_masses():
    doc = {"points": [[0], [1], [2]], "masses": [0.33, 0.33, 0.34], "masses_exact": ["1/3", "1/3", "1/3"]}
    m = load_measure(json.dumps(doc), exact=True)
    assert m.exact
    assert list(m.masses) == [Fraction(1, 3)] * 3
    assert sum(m.masses) == 1


def test_second_moment():
    assert second_moment(dirac([0.0, 0.0])) == 0.0
    assert second_moment(make_measure([[0], [2]], [0.5, 0.5])) == 2.0
    assert second_moment(make_measure([[1, 0], [0, 1]], [0.5, 0.5])) == 1.0
    assert second_moment(make_measure([[0], [2]], ["1/2", "1/2"], exact=True)) == 2


def test_measure_set_checks():
    with pytest.raises(ValidationError):
        MeasureSet((dirac([0.0]), dirac([0.0, 1.0])))
    with pytest.raises(ValidationError):
        MeasureSet(())
    with pytest.raises(ValidationError):
        MeasureSet((dirac([0.0]), dirac([0], exact=True)))


def test_measure_set_round_trip():
    ms = MeasureSet((make_measure([[0, 1], [2, 3]], [0.25, 0.75]), dirac([5.0, 5.0])))
    again = load_measure_set(dump_measure_set(ms))
    for a, b in zip(ms, again):
        assert np.array_equal(a.points, b.points)
        assert np.array_equal(a.masses, b.masses)


def test_exact_round_trip_keeps_rationals():
    m = make_measure([["1/3"], [2]], ["1/3", "2/3"], exact=True)
    again = load_measure(dump_measure(m), exact=True)
    assert list(again.points.ravel()) == [Fraction(1, 3), Fraction(2)]
    assert list(again.masses) == [Fraction(1, 3), Fraction(2, 3)]


weights = st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=1, max_size=8)


@settings(max_examples=60, deadline=None)
@given(weights, st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=10**6))
def test_round_trip_and_normalization(w, d, seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(len(w), d)) * 10
    w = np.array(w) / np.sum(w)
    m = make_measure(pts, w)
    assert abs(np.sum(m.masses) - 1.0) <= 1e-15
    assert np.all(m.masses > 0)
    again = load_measure(dump_measure(m))
    order = np.lexsort(m.points.T[::-1])
    order2 = np.lexsort(again.points.T[::-1])
    assert np.array_equal(m.points[order], again.points[order2])
    assert np.allclose(m.masses[order], again.masses[order2], rtol=0, atol=1e-15)
