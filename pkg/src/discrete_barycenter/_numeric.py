"""Small numeric helpers shared across modules (exact scalars, point merging)."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

DEDUP_RTOL = 1e-9


def to_fraction(value) -> Fraction:
    """Read a JSON scalar as an exact rational.

    Floats are interpreted through their shortest decimal repr, so ``0.1``
    becomes ``1/10`` rather than the nearest binary fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(float(value)))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational")


def to_float(value) -> float:
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


def fraction_array(values) -> np.ndarray:
    """Object array of Fractions with the same shape as ``values``."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = to_fraction(arr[idx])
    return out


def is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


def format_scalar(value):
    """JSON-friendly form: floats stay floats, Fractions become ``"p/q"``."""
    if isinstance(value, Fraction):
        return str(value)
    return float(value)


def dedup_tolerance(points: np.ndarray) -> float:
    scale = float(np.max(np.abs(points))) if points.size else 0.0
    return DEDUP_RTOL * (1.0 + scale)


def merge_labels(points: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Group points whose max-coordinate distance is within ``tol``.

    Returns one label per row; labels are numbered by first occurrence, so
    ``labels[0] == 0`` and the first member of each group keeps its order.
    Exact (object) arrays are grouped by equality.
    """
    n = len(points)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if is_exact(points):
        seen: dict = {}
        labels = np.empty(n, dtype=np.int64)
        for r in range(n):
            key = tuple(points[r])
            labels[r] = seen.setdefault(key, len(seen))
        return labels
    pts = np.asarray(points, dtype=float)
    if tol is None:
        tol = dedup_tolerance(pts)
    pairs = cKDTree(pts).query_pairs(r=tol, p=np.inf, output_type="ndarray")
    if len(pairs) == 0:
        return np.arange(n, dtype=np.int64)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, comp = connected_components(graph, directed=False)
    # renumber components by first occurrence
    first = np.full(comp.max() + 1, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    nxt = 0
    for r in range(n):
        c = comp[r]
        if first[c] < 0:
            first[c] = nxt
            nxt += 1
        order[r] = first[c]
    return order


def lexsort_rows(points: np.ndarray) -> np.ndarray:
    """Permutation sorting rows lexicographically (first coordinate major)."""
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    if is_exact(points):
        return np.array(sorted(range(len(points)), key=lambda r: tuple(points[r])), dtype=np.int64)
    pts = np.asarray(points, dtype=float)
    return np.lexsort(pts.T[::-1])
