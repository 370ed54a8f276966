"""Candidate barycenter support: all centroids of one atom per measure.

Every barycenter of discrete measures is supported on the finite set of
averages ``(x_1k1 + ... + x_NkN) / N``.  This module enumerates that set,
and handles the special case of measures living on a common uniform grid,
where the centroids fall on a refined grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np
from scipy.spatial import cKDTree

from ._numeric import DEDUP_RTOL, is_exact, lexsort_rows, merge_labels
from .errors import SizeError, ValidationError
from .measure import MeasureSet

DEFAULT_TUPLE_CAP = 10**8


@dataclass(frozen=True, eq=False)
class CentroidSet:
    """Distinct centroids in canonical (lexicographic) order.

    ``provenance[j]`` is the lexicographically smallest index tuple
    ``(k_1, ..., k_N)`` whose average is ``points[j]``.
    """

    points: np.ndarray
    provenance: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def exact(self) -> bool:
        return is_exact(self.points)

    def __len__(self) -> int:
        return self.points.shape[0]

    def lookup(self, query: np.ndarray) -> np.ndarray:
        """Index of each query point in the set, ``-1`` when absent."""
        query = np.atleast_2d(query)
        if self.exact:
            table = getattr(self, "_table", None)
            if table is None:
                table = {tuple(p): j for j, p in enumerate(self.points)}
                object.__setattr__(self, "_table", table)
            return np.array([table.get(tuple(q), -1) for q in query], dtype=np.int64)
        tree = getattr(self, "_tree", None)
        if tree is None:
            tree = cKDTree(np.asarray(self.points, dtype=float))
            object.__setattr__(self, "_tree", tree)
        q = np.asarray(query, dtype=float)
        dist, idx = tree.query(q, p=np.inf)
        tol = DEDUP_RTOL * (1.0 + float(np.max(np.abs(self.points))))
        return np.where(dist <= 10 * tol, idx, -1).astype(np.int64)


def tuple_count(ms: MeasureSet) -> int:
    return math.prod(ms.sizes)


def multiset_count(t: int, n: int) -> int:
    """Number of centroids when n measures share t points in general position."""
    return math.comb(t + n - 1, n)


def build_centroids(ms: MeasureSet, *, cap: int = DEFAULT_TUPLE_CAP) -> CentroidSet:
    """All distinct averages of one support point per measure.

    Partial sums are deduplicated after each measure is folded in, which
    yields the same set as the full N-fold product while only ever holding
    the distinct partial sums.

    Raises
    ------
    SizeError
        If the number of index tuples ``prod S_i`` exceeds ``cap``.
    """
    total = tuple_count(ms)
    if total > cap:
        raise SizeError(f"{total} index tuples exceed the cap of {cap}")
    exact = ms.exact
    base_tol = 0.0
    if not exact:
        scale = max(float(np.max(np.abs(m.points))) for m in ms)
        base_tol = DEDUP_RTOL * (1.0 + scale)

    sums = ms[0].points.copy()
    tuples = np.arange(ms[0].size, dtype=np.int64)[:, None]
    for i in range(1, ms.n):
        pts = ms[i].points
        s_i = pts.shape[0]
        sums = (sums[:, None, :] + pts[None, :, :]).reshape(-1, ms.dim)
        tuples = np.concatenate(
            [np.repeat(tuples, s_i, axis=0), np.tile(np.arange(s_i, dtype=np.int64), len(tuples))[:, None]],
            axis=1,
        )
        order = np.lexsort(tuples.T[::-1])
        sums, tuples = sums[order], tuples[order]
        labels = merge_labels(sums, None if exact else (i + 1) * base_tol)
        _, first = np.unique(labels, return_index=True)
        sums, tuples = sums[first], tuples[first]

    # recompute each centroid from its witness so the stored point is exact
    points = _average(ms, tuples)
    order = lexsort_rows(points)
    points, tuples = points[order], tuples[order]
    points.setflags(write=False)
    tuples.setflags(write=False)
    return CentroidSet(points, tuples)


def _average(ms: MeasureSet, tuples: np.ndarray) -> np.ndarray:
    acc = ms[0].points[tuples[:, 0]].copy()
    for i in range(1, ms.n):
        acc = acc + ms[i].points[tuples[:, i]]
    if ms.exact:
        return acc / Fraction(ms.n)
    return acc / ms.n


def centroid_of(ms: MeasureSet, tup) -> np.ndarray:
    return _average(ms, np.asarray(tup, dtype=np.int64)[None, :])[0]


# --------------------------------------------------------------------------
# uniform grids


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Points ``origin + sum_s l_s / (L_s - 1) * axes[s]`` with ``0 <= l_s < L_s``."""

    origin: np.ndarray
    axes: np.ndarray
    extents: tuple

    def __post_init__(self):
        axes = np.asarray(self.axes, dtype=float)
        d = len(self.origin)
        if axes.shape != (d, d) or len(self.extents) != d:
            raise ValidationError("grid needs d axis vectors and d extents")
        if any(int(L) < 2 for L in self.extents):
            raise ValidationError("grid extents must be at least 2")
        gram = axes @ axes.T
        norms = np.prod(np.diag(gram))
        if norms <= 0 or abs(np.linalg.det(gram)) <= 1e-12 * norms:
            raise ValidationError("grid axis vectors are linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.origin)

    @property
    def size(self) -> int:
        return math.prod(self.extents)

    def coordinates(self, points) -> np.ndarray:
        """Fractional lattice indices ``l_s`` of each point."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        frac = np.linalg.solve(np.asarray(self.axes, dtype=float).T, (pts - self.origin).T).T
        return frac * (np.asarray(self.extents, dtype=float) - 1)

    def contains(self, points, rtol: float = 1e-9) -> np.ndarray:
        """Whether each point is a grid node, coordinate residual <= rtol relative."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ext = np.asarray(self.extents, dtype=float)
        idx = np.clip(np.rint(self.coordinates(pts)), 0, ext - 1)
        snapped = self.origin + (idx / (ext - 1)) @ np.asarray(self.axes, dtype=float)
        scale = 1.0 + max(float(np.max(np.abs(pts))), float(np.max(np.abs(snapped))))
        return np.max(np.abs(pts - snapped), axis=1) <= rtol * scale


class GridBounds(NamedTuple):
    density: float
    support: int


def refined_grid(g: GridSpec, n: int) -> GridSpec:
    """Grid of all N-point averages: same frame, extents N(L_s - 1) + 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return GridSpec(g.origin, g.axes, tuple(n * (int(L) - 1) + 1 for L in g.extents))


def grid_density_bound(g: GridSpec, n: int) -> GridBounds:
    """Upper bounds for a sparse barycenter of n measures on grid ``g``.

    ``density`` bounds |supp| / (number of refined-grid nodes) and equals
    ``N^(1-d) * prod L_s / (L_s - 1)``; ``support`` is ``N (prod L_s - 1) + 1``.
    """
    d = g.dim
    density = 1.0 / n ** (d - 1)
    for L in g.extents:
        density *= L / (L - 1)
    return GridBounds(density, n * (math.prod(g.extents) - 1) + 1)


def _axis_step(values: np.ndarray, max_extent: int, rtol: float) -> Optional[int]:
    """Smallest n such that every offset is a multiple of span/n."""
    lo, hi = values.min(), values.max()
    span = hi - lo
    offsets = (values - lo) / span
    scale = 1.0 + float(np.max(np.abs(values)))
    for n in range(1, max_extent):
        t = offsets * n
        r = np.rint(t)
        if np.max(np.abs(t - r)) > 1e-6:
            continue
        if np.max(np.abs(lo + r / n * span - values)) <= rtol * scale:
            return n
    return None


def detect_grid(ms: MeasureSet, *, max_extent: int = 10_000, rtol: float = 1e-9) -> Optional[GridSpec]:
    """Smallest axis-aligned uniform grid carrying every support point, or None.

    Per axis the step is the largest spacing that divides every offset from
    the minimum coordinate (1e-6 relative on the step, 1e-9 relative on the
    final coordinate residual).  An axis with a single coordinate value gets
    a unit-length axis vector and extent 2.
    """
    pts = np.concatenate([np.asarray(m.points, dtype=float) for m in ms], axis=0)
    d = pts.shape[1]
    origin = np.empty(d)
    axes = np.zeros((d, d))
    extents = []
    for s in range(d):
        vals = np.unique(pts[:, s])
        origin[s] = vals.min()
        if vals.max() - vals.min() <= rtol * (1.0 + np.max(np.abs(vals))):
            axes[s, s] = 1.0
            extents.append(2)
            continue
        n = _axis_step(vals, max_extent, rtol)
        if n is None:
            return None
        axes[s, s] = vals.max() - vals.min()
        extents.append(n + 1)
    return GridSpec(origin, axes, tuple(extents))
