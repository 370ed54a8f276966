"""Sparse optimal barycenters through location-fixed transportation schemes.

A scheme is a list of weighted tuples ``(j; k_1, ..., k_N)``: mass ``w_h``
sits at centroid ``x_j`` and is shipped to atom ``k_i`` of every measure.
Any N-star transport can be peeled into such tuples at equal cost, and the
tuple weights can then be re-optimized with the tuples held fixed.  That LP
has one row per atom of every measure and N - 1 redundant rows, so a basic
optimum uses at most ``sum_i S_i - N + 1`` tuples, which bounds the support
of the resulting barycenter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._numeric import is_exact
from .barycenter import (
    BarycenterResult,
    NStarTransport,
    assemble_result,
    build_cost_tensor,
)
from .centroid import CentroidSet
from .errors import InfeasibleTransport, SolverFailure
from .lp import make_problem, solve
from .measure import MeasureSet
from .simplex import exact_rank

FEAS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransportScheme:
    """Tuples ``(centers[h]; endpoints[h, 0..N-1])`` with weights and costs."""

    centers: np.ndarray
    endpoints: np.ndarray
    weights: np.ndarray
    costs: np.ndarray
    n_centroids: int

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def exact(self) -> bool:
        return is_exact(self.weights)

    @property
    def n(self) -> int:
        return self.endpoints.shape[1]

    def cost(self):
        if self.exact:
            return sum((c * w for c, w in zip(self.costs, self.weights)), Fraction(0))
        return math.fsum(np.asarray(self.costs, dtype=float) * np.asarray(self.weights, dtype=float))

    def induced_masses(self) -> np.ndarray:
        """Barycenter mass at every centroid."""
        zero = Fraction(0) if self.exact else 0.0
        z = np.array([zero] * self.n_centroids, dtype=object if self.exact else float)
        for j, w in zip(self.centers, self.weights):
            z[j] += w
        return z

    def marginal_residual(self, ms: MeasureSet) -> float:
        worst = 0.0
        for i, m in enumerate(ms):
            acc = [Fraction(0) if self.exact else 0.0] * m.size
            for k, w in zip(self.endpoints[:, i], self.weights):
                acc[k] += w
            worst = max([worst] + [abs(float(a - d)) for a, d in zip(acc, m.masses)])
        return worst


def tuple_costs(ms: MeasureSet, s: CentroidSet, centers, endpoints) -> np.ndarray:
    """``sum_i |x_j - x_{i k_i}|^2`` for every tuple."""
    centers = np.asarray(centers, dtype=np.int64)
    endpoints = np.asarray(endpoints, dtype=np.int64).reshape(len(centers), ms.n)
    x = s.points[centers]
    total = None
    for i, m in enumerate(ms):
        diff = x - m.points[endpoints[:, i]]
        part = (diff * diff).sum(axis=1)
        total = part if total is None else total + part
    if total is None or len(centers) == 0:
        return np.array([], dtype=object if ms.exact else float)
    return total


def scheme_from_transport(t: NStarTransport, ms: MeasureSet, s: CentroidSet, *,
                          feas_tol: float = FEAS_TOL) -> TransportScheme:
    """Peel ``t`` into weighted tuples of equal total cost.

    Each step takes the smallest positive entry ``mu`` (lowest ``(i, j, k)``
    among ties), pairs it with the lowest-index positive entry of the same
    centroid in every other measure, and removes ``mu`` from all of them.

    Raises
    ------
    InfeasibleTransport
        If ``t`` violates its own marginal equations by more than ``feas_tol``.
    """
    exact = t.exact
    resid = t.marginal_residual(ms)
    if resid > (0 if exact else feas_tol):
        raise InfeasibleTransport(f"transport violates its marginals by {resid:.3g}")
    dust = 0 if exact else 1e-13
    N = ms.n
    # per (i, j): dict k -> remaining mass
    rem = {}
    for i, j, k, m in zip(t.i, t.j, t.k, t.mass):
        if m > dust:
            rem.setdefault((int(i), int(j)), {})
            rem[(int(i), int(j))][int(k)] = rem[(int(i), int(j))].get(int(k), 0) + m
    order = []
    weights = {}
    while rem:
        mu = None
        arg = None
        for (i, j), row in rem.items():
            for k, v in row.items():
                key = (i, j, k)
                if mu is None or v < mu or (v == mu and key < arg):
                    mu, arg = v, key
        i0, j0, k0 = arg
        tup = []
        for i in range(N):
            if i == i0:
                tup.append(k0)
                continue
            row = rem.get((i, j0))
            if not row:
                break
            tup.append(min(row))
        if len(tup) < N:
            # float residue at a centroid another measure has already emptied
            del rem[(i0, j0)][k0]
            if not rem[(i0, j0)]:
                del rem[(i0, j0)]
            continue
        key = (j0, tuple(tup))
        if key not in weights:
            order.append(key)
            weights[key] = 0
        weights[key] += mu
        for i, k in enumerate(tup):
            row = rem[(i, j0)]
            row[k] -= mu
            if row[k] <= dust:
                del row[k]
                if not row:
                    del rem[(i, j0)]
    centers = np.array([j for j, _ in order], dtype=np.int64)
    endpoints = np.array([list(tup) for _, tup in order], dtype=np.int64).reshape(len(order), N)
    w = np.array([weights[key] for key in order], dtype=object if exact else float)
    return TransportScheme(centers, endpoints, w, tuple_costs(ms, s, centers, endpoints), len(s))


def transport_from_scheme(sch: TransportScheme) -> NStarTransport:
    """Aggregate tuples into ``y_ijk``; shared (i, j, k) entries are summed."""
    exact = sch.exact
    zero = Fraction(0) if exact else 0.0
    acc = {}
    for j, tup, w in zip(sch.centers, sch.endpoints, sch.weights):
        if w == 0:
            continue
        for i, k in enumerate(tup):
            key = (i, int(j), int(k))
            acc[key] = acc.get(key, zero) + w
    keys = sorted(acc)
    col = lambda c: np.array([key[c] for key in keys], dtype=np.int64)  # noqa: E731
    mass = np.array([acc[key] for key in keys], dtype=object if exact else float)
    return NStarTransport(col(0), col(1), col(2), mass, sch.induced_masses())


def scheme_problem(sch: TransportScheme, ms: MeasureSet):
    """LP ``min sum c_h w_h`` with one marginal row per atom of every measure."""
    atom_off = np.concatenate([[0], np.cumsum(ms.sizes)])
    m = len(sch)
    rows = np.concatenate([atom_off[i] + sch.endpoints[:, i] for i in range(ms.n)]) if m else np.zeros(0, np.int64)
    cols = np.tile(np.arange(m), ms.n)
    vals = [1] * len(rows)
    b = np.concatenate([mm.masses for mm in ms])
    return make_problem(sch.costs, rows, cols, vals, b, exact=sch.exact)


def redundant_rows(sch: TransportScheme, ms: MeasureSet) -> int:
    """Row count minus rank of the scheme LP matrix (exact rank in exact mode)."""
    p = scheme_problem(sch, ms)
    if sch.exact:
        rank = exact_rank(p.dense())
    else:
        rank = int(np.linalg.matrix_rank(p.dense()))
    return p.shape[0] - rank


def support_bound(ms: MeasureSet) -> int:
    return sum(ms.sizes) - ms.n + 1


def sparsify(result: BarycenterResult, ms: MeasureSet, s: CentroidSet | None = None) -> BarycenterResult:
    """Equal-cost barycenter with at most ``sum_i S_i - N + 1`` atoms.

    The tuples of the peeled optimal transport are kept fixed and their
    weights re-optimized; a basic optimum of that small LP is returned.  The
    dual of ``result`` stays optimal and is carried over.
    """
    s = result.centroids if s is None else s
    exact = result.exact
    if not exact and ms.exact:
        ms = ms.to_float()
    sch = scheme_from_transport(result.transport, ms, s)
    p = scheme_problem(sch, ms)
    sol = solve(p, "exact" if exact else "float")
    if not sol.optimal:
        raise SolverFailure(sol.status.value, f"scheme LP ended {sol.status.value}")
    w = sol.x
    if not exact:
        w = np.where(w > 1e-15, w, 0.0)
    keep = np.flatnonzero(np.array([v != 0 for v in w], dtype=bool))
    basic = TransportScheme(sch.centers[keep], sch.endpoints[keep], np.asarray(w)[keep], sch.costs[keep], len(s))
    t = transport_from_scheme(basic)
    ct = build_cost_tensor(ms, s)
    info = dict(result.info)
    info.update({"sparsified": True, "scheme_tuples": len(sch), "basic_tuples": len(basic)})
    info.pop("lp", None)
    return assemble_result(ms, s, ct, t, result.dual, info)
