"""Exact barycenters as a linked family of transportation problems.

For measures P_1..P_N with atoms x_ik and masses d_ik, and the candidate
support S = {x_j} of all centroids, the barycenter solves

    min  sum_ijk c_ijk y_ijk
    s.t. sum_k y_ijk - z_j = 0        for every i, j
         sum_j y_ijk       = d_ik     for every i, k
         y, z >= 0,

with c_ijk = |x_j - x_ik|^2.  The optimal ``z`` is a barycenter and the
optimal value equals sum_i W_2(z, P_i)^2.  Its dual reads

    max  sum_ik d_ik tau_ik
    s.t. theta_ij + tau_ik <= c_ijk,   sum_i theta_ij >= 0 for every j.

Column layout of the primal: the block of measure ``i`` starts at
``offset[i] = |S| * (S_1 + ... + S_{i-1})`` and holds ``y_ijk`` at
``offset[i] + j * S_i + k``; the ``|S|`` z-columns come last.  Rows: the
link row of ``(i, j)`` is ``i * |S| + j``, the marginal row of ``(i, k)`` is
``N * |S| + (S_1 + ... + S_{i-1}) + k``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from ._numeric import format_scalar, is_exact, to_fraction
from .centroid import CentroidSet, build_centroids, tuple_count
from .errors import ParseError, SizeError, SolverFailure, ValidationError
from .lp import LpProblem, LpSolution, LpStatus, make_problem, solve
from .measure import DiscreteMeasure, MeasureSet, measure_from_dict, measure_to_dict

DEFAULT_VAR_CAP = 5 * 10**6
DEFAULT_MULTIMARGINAL_CAP = 10**6
SUPPORT_TOL = 1e-12
PRICING_TOL = 1e-9
# full LPs above this many columns are solved by centroid pricing
PRICING_THRESHOLD = 200_000


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class CostTensor:
    """``blocks[i][j, k] = |x_j - x_ik|^2``; object arrays in exact mode."""

    blocks: tuple

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def n_centroids(self) -> int:
        return self.blocks[0].shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.blocks[i]


@dataclass(frozen=True, eq=False)
class NStarTransport:
    """Sparse entries ``y[i, j, k] = mass`` plus the shared marginal ``z``."""

    i: np.ndarray
    j: np.ndarray
    k: np.ndarray
    mass: np.ndarray
    z: np.ndarray

    @property
    def exact(self) -> bool:
        return is_exact(self.z)

    def __len__(self) -> int:
        return len(self.mass)

    def entries(self, i: int):
        """``(j, k, mass)`` arrays for measure ``i``."""
        sel = self.i == i
        return self.j[sel], self.k[sel], self.mass[sel]

    def dense(self, i: int, n_centroids: int, size: int) -> np.ndarray:
        zero = Fraction(0) if self.exact else 0.0
        out = np.array([[zero] * size for _ in range(n_centroids)], dtype=object if self.exact else float)
        out = out.reshape(n_centroids, size)
        for j, k, m in zip(*self.entries(i)):
            out[j, k] += m
        return out

    def marginal_residual(self, ms: MeasureSet) -> float:
        """Largest violation of the link and marginal equations."""
        worst = 0.0
        n_c = len(self.z)
        for i, m in enumerate(ms):
            j, k, mass = self.entries(i)
            row = [Fraction(0)] * n_c if self.exact else np.zeros(n_c)
            col = [Fraction(0)] * m.size if self.exact else np.zeros(m.size)
            if self.exact:
                for jj, kk, v in zip(j, k, mass):
                    row[jj] += v
                    col[kk] += v
                worst = max(
                    [worst]
                    + [abs(float(a - b)) for a, b in zip(row, self.z)]
                    + [abs(float(a - b)) for a, b in zip(col, m.masses)]
                )
            else:
                np.add.at(row, j, mass)
                np.add.at(col, k, mass)
                worst = max(worst, float(np.max(np.abs(row - self.z))), float(np.max(np.abs(col - m.masses))))
        return worst


@dataclass(frozen=True, eq=False)
class DualSolution:
    """``tau[i][k]`` per atom and ``theta[i, j]`` per (measure, centroid)."""

    tau: tuple
    theta: np.ndarray

    @property
    def exact(self) -> bool:
        return is_exact(self.theta)

    def objective(self, ms: MeasureSet):
        if self.exact:
            return sum((d * t for m, tau in zip(ms, self.tau) for d, t in zip(m.masses, tau)), Fraction(0))
        return math.fsum(float(d * t) for m, tau in zip(ms, self.tau) for d, t in zip(m.masses, tau))


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    barycenter: DiscreteMeasure
    transport: NStarTransport
    total_cost: object
    per_measure_cost: list
    dual: Optional[DualSolution]
    centroids: CentroidSet
    support: np.ndarray = None  # centroid index of each barycenter atom
    info: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.transport.exact

    @property
    def support_size(self) -> int:
        return self.barycenter.size


# --------------------------------------------------------------------------
# construction


def build_cost_tensor(ms: MeasureSet, s: CentroidSet) -> CostTensor:
    blocks = []
    for m in ms:
        diff = s.points[:, None, :] - m.points[None, :, :]
        blocks.append((diff * diff).sum(axis=2))
    return CostTensor(tuple(blocks))


def primal_size(ms: MeasureSet, n_centroids: int) -> tuple:
    """``(variables, rows)`` of the linked primal."""
    total = sum(ms.sizes)
    return n_centroids * total + n_centroids, ms.n * n_centroids + total


def _offsets(sizes, n_c):
    off = np.zeros(len(sizes) + 1, dtype=np.int64)
    off[1:] = np.cumsum(np.asarray(sizes, dtype=np.int64) * n_c)
    return off


def build_primal(ms: MeasureSet, s: CentroidSet, ct: CostTensor, *, var_cap: int = DEFAULT_VAR_CAP) -> LpProblem:
    """Assemble the linked transportation LP in equality form.

    Raises
    ------
    SizeError
        If the number of variables exceeds ``var_cap``.
    """
    n_c = len(s)
    n_var, n_row = primal_size(ms, n_c)
    if n_var > var_cap:
        raise SizeError(f"{n_var} LP variables exceed the cap of {var_cap}")
    if ct.n_centroids != n_c or ct.n != ms.n:
        raise ValidationError("cost tensor does not match the measures and centroids")
    exact = ms.exact
    N = ms.n
    off = _offsets(ms.sizes, n_c)
    atom_off = np.concatenate([[0], np.cumsum(ms.sizes)])
    rows, cols, costs = [], [], []
    for i, m in enumerate(ms):
        jj, kk = np.meshgrid(np.arange(n_c), np.arange(m.size), indexing="ij")
        jj, kk = jj.ravel(), kk.ravel()
        var = off[i] + jj * m.size + kk
        rows += [i * n_c + jj, N * n_c + atom_off[i] + kk]
        cols += [var, var]
        costs.append(ct[i].ravel())
    zc = off[-1] + np.arange(n_c)
    rows.append(np.arange(N * n_c))
    cols.append(np.tile(zc, N))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    n_y = int(off[-1])
    if exact:
        one, zero = Fraction(1), Fraction(0)
        vals = np.array([one] * (2 * n_y) + [-one] * (N * n_c), dtype=object)
        c = np.concatenate([np.concatenate(costs), np.array([zero] * n_c, dtype=object)])
        b = np.concatenate([np.array([zero] * (N * n_c), dtype=object)] + [m.masses for m in ms])
        return LpProblem(c, rows, cols, vals, b)
    vals = np.concatenate([np.ones(2 * n_y), -np.ones(N * n_c)])
    c = np.concatenate(costs + [np.zeros(n_c)])
    b = np.concatenate([np.zeros(N * n_c)] + [m.masses for m in ms])
    return LpProblem(c, rows, cols, vals, b)


# --------------------------------------------------------------------------
# assembling results from LP vectors


def _clip(v, exact):
    if exact:
        return v
    v = np.asarray(v, dtype=float).copy()
    v[v <= SUPPORT_TOL] = 0.0
    return v


def transport_from_vector(x, ms: MeasureSet, n_c: int) -> NStarTransport:
    exact = is_exact(np.asarray(x))
    off = _offsets(ms.sizes, n_c)
    x = _clip(x, exact)
    ii, jj, kk, mm = [], [], [], []
    for i, m in enumerate(ms):
        block = x[off[i]:off[i + 1]]
        nz = np.flatnonzero(np.array([v != 0 for v in block], dtype=bool))
        ii.append(np.full(len(nz), i, dtype=np.int64))
        jj.append(nz // m.size)
        kk.append(nz % m.size)
        mm.append(block[nz])
    z = x[off[-1]:off[-1] + n_c]
    mass = np.concatenate(mm) if exact is False else np.array([v for part in mm for v in part], dtype=object)
    return NStarTransport(np.concatenate(ii), np.concatenate(jj), np.concatenate(kk), mass, z)


def transport_to_vector(t: NStarTransport, ms: MeasureSet, n_c: int) -> np.ndarray:
    off = _offsets(ms.sizes, n_c)
    n_var = int(off[-1]) + n_c
    if t.exact:
        x = np.array([Fraction(0)] * n_var, dtype=object)
    else:
        x = np.zeros(n_var)
    sizes = np.asarray(ms.sizes)
    idx = off[t.i] + t.j * sizes[t.i] + t.k
    for p, v in zip(idx, t.mass):
        x[p] += v
    x[off[-1]:] = t.z
    return x


def dual_from_vector(y, ms: MeasureSet, n_c: int) -> DualSolution:
    N = ms.n
    theta = np.asarray(y[: N * n_c]).reshape(N, n_c)
    tau = []
    pos = N * n_c
    for m in ms:
        tau.append(np.asarray(y[pos:pos + m.size]))
        pos += m.size
    return DualSolution(tuple(tau), theta)


def dual_to_vector(dual: DualSolution) -> np.ndarray:
    return np.concatenate([np.asarray(dual.theta).ravel()] + [np.asarray(t) for t in dual.tau])


def transport_cost(t: NStarTransport, ct: CostTensor):
    """Sum of ``c_ijk * y_ijk`` over the stored entries."""
    if len(t) == 0:
        return Fraction(0) if t.exact else 0.0
    if t.exact:
        return sum((ct[i][j, k] * m for i, j, k, m in zip(t.i, t.j, t.k, t.mass)), Fraction(0))
    return math.fsum(float(ct[i][j, k]) * float(m) for i, j, k, m in zip(t.i, t.j, t.k, t.mass))


def per_measure_costs(t: NStarTransport, ct: CostTensor) -> list:
    out = []
    for i in range(ct.n):
        j, k, m = t.entries(i)
        if t.exact:
            out.append(sum((ct[i][a, b] * v for a, b, v in zip(j, k, m)), Fraction(0)))
        else:
            out.append(math.fsum(np.asarray(ct[i][j, k], dtype=float) * m))
    return out


def assemble_result(ms: MeasureSet, s: CentroidSet, ct: CostTensor, t: NStarTransport,
                    dual: Optional[DualSolution], info: Optional[dict] = None) -> BarycenterResult:
    """Package a feasible transport as a result; costs are recomputed from entries."""
    exact = t.exact
    if exact:
        support = np.flatnonzero(np.array([v != 0 for v in t.z], dtype=bool))
    else:
        support = np.flatnonzero(np.asarray(t.z, dtype=float) > SUPPORT_TOL)
    masses = np.asarray(t.z)[support].copy()
    pts = np.asarray(s.points)[support].copy()
    pts.setflags(write=False)
    masses.setflags(write=False)
    bary = DiscreteMeasure(pts, masses)
    per = per_measure_costs(t, ct)
    total = sum(per, Fraction(0)) if exact else math.fsum(per)
    return BarycenterResult(bary, t, total, per, dual, s, support, dict(info or {}))


# --------------------------------------------------------------------------
# solving


def _single_measure(ms: MeasureSet, s: CentroidSet, ct: CostTensor) -> BarycenterResult:
    m = ms[0]
    idx = s.lookup(m.points)
    if np.any(idx < 0):
        raise ValidationError("centroid set does not contain the support of the only measure")
    n_c = len(s)
    exact = ms.exact
    zero = Fraction(0) if exact else 0.0
    z = np.array([zero] * n_c, dtype=object if exact else float)
    z[idx] = m.masses
    t = NStarTransport(np.zeros(m.size, dtype=np.int64), idx.astype(np.int64), np.arange(m.size), m.masses.copy(), z)
    theta = np.array([[zero] * n_c], dtype=object if exact else float).reshape(1, n_c)
    dual = DualSolution((np.array([zero] * m.size, dtype=object if exact else float),), theta)
    return assemble_result(ms, s, ct, t, dual, {"status": "optimal", "method": "single-measure"})


def solve_barycenter(ms: MeasureSet, *, mode: str | None = None, tol: float | None = None,
                     backend: str = "auto", strategy: str = "auto", centroids: CentroidSet | None = None,
                     var_cap: int = DEFAULT_VAR_CAP, tuple_cap: int | None = None,
                     keep_lp: bool = False) -> BarycenterResult:
    """Optimal barycenter of ``ms`` supported on its centroid set.

    Parameters
    ----------
    ms : MeasureSet
    mode : {"float", "exact"}, optional
        Defaults to the arithmetic of ``ms``.  Exact mode requires exact
        measures and returns a rational optimum.
    tol : float, optional
        Solver feasibility/optimality tolerance in float mode.
    backend : str
        Passed to :func:`discrete_barycenter.lp.solve`.
    strategy : {"auto", "full", "pricing"}
        ``"full"`` solves the complete LP.  ``"pricing"`` starts from a few
        centroids and adds those whose columns have negative reduced cost
        until none is left; the final vertex is optimal for the complete LP.
        ``"auto"`` prices when the complete LP has more than
        ``PRICING_THRESHOLD`` columns (float mode only).
    centroids : CentroidSet, optional
        Precomputed candidate support.
    keep_lp : bool
        Store the LP and its solution under ``info["lp"]``.

    Raises
    ------
    SizeError
        Above the tuple or variable caps.
    SolverFailure
        If the LP does not end optimal.
    """
    exact = ms.exact if mode is None else mode == "exact"
    if exact and not ms.exact:
        raise ValidationError("exact mode needs exact measures (load them with exact=True)")
    if not exact and ms.exact:
        ms = ms.to_float()
    s = centroids if centroids is not None else build_centroids(ms, **({} if tuple_cap is None else {"cap": tuple_cap}))
    ct = build_cost_tensor(ms, s)
    if ms.n == 1:
        return _single_measure(ms, s, ct)
    n_var, _ = primal_size(ms, len(s))
    if n_var > var_cap:
        raise SizeError(f"{n_var} LP variables exceed the cap of {var_cap}")
    if strategy == "auto":
        strategy = "pricing" if (not exact and n_var > PRICING_THRESHOLD) else "full"
    if strategy == "pricing":
        if exact:
            raise ValidationError("pricing is available in float mode only")
        return _solve_pricing(ms, s, ct, tol=tol, backend=backend)
    if strategy != "full":
        raise ValueError(f"unknown strategy {strategy!r}")
    p = build_primal(ms, s, ct, var_cap=var_cap)
    sol = solve(p, "exact" if exact else "float", backend=backend, tol=tol)
    if not sol.optimal:
        raise SolverFailure(sol.status.value, f"barycenter LP ended {sol.status.value}")
    t = transport_from_vector(sol.x, ms, len(s))
    dual = dual_from_vector(sol.y, ms, len(s))
    info = {"status": "optimal", "method": "full", "backend": sol.backend, "iterations": sol.iterations,
            "lp_objective": sol.objective}
    if keep_lp:
        info["lp"] = (p, sol)
    return assemble_result(ms, s, ct, t, dual, info)


# -- centroid pricing -------------------------------------------------------


def _northwest_tuples(ms: MeasureSet) -> list:
    """Index tuples of the multi-marginal north-west corner coupling."""
    rem = [np.asarray(m.masses, dtype=float).copy() for m in ms]
    ptr = [0] * ms.n
    out = []
    while all(p < m.size for p, m in zip(ptr, ms)):
        out.append(tuple(ptr))
        step = min(r[p] for r, p in zip(rem, ptr))
        for i in range(ms.n):
            rem[i][ptr[i]] -= step
        for i in range(ms.n):
            if rem[i][ptr[i]] <= 1e-15:
                ptr[i] += 1
    return out


def _reduced_centroid_costs(ct: CostTensor, tau) -> tuple:
    """For every centroid: sum_i min_k (c_ijk - tau_ik) and the minimizing theta."""
    theta = np.stack([np.min(ct[i] - tau[i][None, :], axis=1) for i in range(ct.n)])
    return theta.sum(axis=0), theta


def _solve_pricing(ms, s, ct, *, tol, backend, batch: int = 500, max_rounds: int = 1000):
    n_c = len(s)
    start = [s.lookup(np.mean([m.points[k] for m, k in zip(ms, tup)], axis=0))[0] for tup in _northwest_tuples(ms)]
    active = np.unique(np.array([j for j in start if j >= 0], dtype=np.int64))
    iterations = 0
    for rnd in range(max_rounds):
        sub = CentroidSet(s.points[active], s.provenance[active])
        sub_ct = CostTensor(tuple(ct[i][active] for i in range(ms.n)))
        p = build_primal(ms, sub, sub_ct, var_cap=10**9)
        sol = solve(p, "float", backend=backend, tol=tol)
        if not sol.optimal:
            raise SolverFailure(sol.status.value, f"restricted barycenter LP ended {sol.status.value}")
        iterations += sol.iterations
        sub_dual = dual_from_vector(sol.y, ms, len(active))
        g, theta = _reduced_centroid_costs(ct, sub_dual.tau)
        g[active] = 0.0
        scale = max(1.0, abs(sol.objective))
        cand = np.flatnonzero(g < -PRICING_TOL * scale)
        if len(cand) == 0:
            break
        cand = cand[np.argsort(g[cand], kind="stable")[:batch]]
        active = np.union1d(active, cand)
    else:
        raise SolverFailure("iteration_limit", "centroid pricing did not converge")

    # lift the restricted vertex and dual to the complete LP
    sub_t = transport_from_vector(sol.x, ms, len(active))
    z = np.zeros(n_c)
    z[active] = sub_t.z
    t = NStarTransport(sub_t.i, active[sub_t.j], sub_t.k, sub_t.mass, z)
    theta[:, active] = sub_dual.theta
    dual = DualSolution(sub_dual.tau, theta)
    info = {"status": "optimal", "method": "pricing", "backend": sol.backend, "iterations": iterations,
            "rounds": rnd + 1, "active_centroids": int(len(active)), "lp_objective": sol.objective}
    return assemble_result(ms, s, ct, t, dual, info)


# -- multi-marginal cross-check ---------------------------------------------


def solve_multimarginal(ms: MeasureSet, *, mode: str | None = None, cap: int = DEFAULT_MULTIMARGINAL_CAP,
                        backend: str = "auto", centroids: CentroidSet | None = None):
    """Barycenter via the optimal coupling of all N measures.

    Maximizes ``E|mean(X_1..X_N)|^2`` over couplings; the law of the mean
    is a barycenter.  Each tuple's mass is routed from its centroid to its
    N endpoints to build the transport whose cost is reported.

    Returns
    -------
    coupling : ndarray, shape (S_1, ..., S_N)
    result : BarycenterResult
        ``dual`` is None.
    """
    exact = ms.exact if mode is None else mode == "exact"
    if exact and not ms.exact:
        raise ValidationError("exact mode needs exact measures")
    if not exact and ms.exact:
        ms = ms.to_float()
    count = tuple_count(ms)
    if count > cap:
        raise SizeError(f"{count} coupling cells exceed the cap of {cap}")
    s = centroids if centroids is not None else build_centroids(ms)
    ct = build_cost_tensor(ms, s)
    tuples = np.array(list(itertools.product(*[range(m.size) for m in ms])), dtype=np.int64)
    bar = sum(m.points[tuples[:, i]] for i, m in enumerate(ms))
    bar = bar / (Fraction(ms.n) if exact else ms.n)
    gain = (bar * bar).sum(axis=1)
    atom_off = np.concatenate([[0], np.cumsum(ms.sizes)])
    rows = np.concatenate([atom_off[i] + tuples[:, i] for i in range(ms.n)])
    cols = np.tile(np.arange(count), ms.n)
    vals = [1] * len(rows)
    b = np.concatenate([m.masses for m in ms])
    p = make_problem(-gain, rows, cols, vals, b, exact=exact)
    sol = solve(p, "exact" if exact else "float", backend=backend)
    if not sol.optimal:
        raise SolverFailure(sol.status.value, f"multi-marginal LP ended {sol.status.value}")
    pi = _clip(sol.x, exact)
    coupling = np.asarray(pi).reshape(tuple(ms.sizes))
    t = transport_from_coupling(coupling, ms, s)
    return coupling, assemble_result(ms, s, ct, t, None, {"status": "optimal", "method": "multimarginal",
                                                         "objective": -sol.objective})


def transport_from_coupling(coupling: np.ndarray, ms: MeasureSet, s: CentroidSet) -> NStarTransport:
    """Route each tuple's mass from its centroid to its N endpoints."""
    exact = is_exact(coupling)
    n_c = len(s)
    flat = coupling.ravel()
    tuples = np.array(list(itertools.product(*[range(m.size) for m in ms])), dtype=np.int64)
    nz = np.flatnonzero(np.array([v != 0 for v in flat], dtype=bool))
    tuples, mass = tuples[nz], flat[nz]
    bar = sum(m.points[tuples[:, i]] for i, m in enumerate(ms))
    bar = bar / (Fraction(ms.n) if exact else ms.n)
    js = s.lookup(bar) if len(bar) else np.zeros(0, dtype=np.int64)
    if np.any(js < 0):
        raise ValidationError("a coupling centroid is missing from the centroid set")
    acc = {}
    zero = Fraction(0) if exact else 0.0
    z = np.array([zero] * n_c, dtype=object if exact else float)
    for tup, j, w in zip(tuples, js, mass):
        z[j] += w
        for i, k in enumerate(tup):
            key = (i, int(j), int(k))
            acc[key] = acc.get(key, zero) + w
    keys = sorted(acc)
    arr = lambda col: np.array([key[col] for key in keys], dtype=np.int64)  # noqa: E731
    masses = np.array([acc[key] for key in keys], dtype=object if exact else float)
    return NStarTransport(arr(0), arr(1), arr(2), masses, z)


# --------------------------------------------------------------------------
# checks


def check_dual(result: BarycenterResult, ms: MeasureSet, ct: CostTensor | None = None) -> dict:
    """Dual feasibility violations and the duality gap of ``result``."""
    if result.dual is None:
        raise ValueError("result carries no dual solution")
    ct = ct if ct is not None else build_cost_tensor(ms if not result.exact else ms, result.centroids)
    d = result.dual
    worst_edge = 0.0
    for i in range(ms.n):
        slack = ct[i] - np.asarray(d.theta[i])[:, None] - np.asarray(d.tau[i])[None, :]
        worst_edge = max(worst_edge, float(-np.min(np.asarray(slack, dtype=float))))
    col = np.asarray(d.theta).sum(axis=0)
    worst_sum = float(max(0.0, -float(np.min(np.asarray(col, dtype=float)))))
    dual_obj = d.objective(ms)
    if result.exact:
        gap = abs(float(dual_obj - result.total_cost))
        rel = gap / max(1.0, abs(float(result.total_cost)))
    else:
        gap = abs(dual_obj - result.total_cost)
        rel = gap / max(1.0, abs(result.total_cost))
    return {
        "edge_violation": max(0.0, worst_edge),
        "sum_violation": worst_sum,
        "dual_objective": dual_obj,
        "gap": gap,
        "relative_gap": rel,
        "exact_equal": bool(result.exact and dual_obj == result.total_cost),
    }


# --------------------------------------------------------------------------
# JSON


def _num(v):
    return float(v)


def result_to_dict(result: BarycenterResult) -> dict:
    exact = result.exact
    t = result.transport
    transports = []
    for i in range(len(result.per_measure_cost)):
        j, k, m = t.entries(i)
        entries = []
        for a, b_, v in zip(j, k, m):
            e = {"j": int(a), "k": int(b_), "mass": _num(v)}
            if exact:
                e["mass_exact"] = format_scalar(v)
            entries.append(e)
        transports.append({"i": i, "entries": entries})
    doc = {
        "barycenter": measure_to_dict(result.barycenter),
        "support": [int(j) for j in result.support],
        "total_cost": _num(result.total_cost),
        "per_measure_cost": [_num(v) for v in result.per_measure_cost],
        "transports": transports,
        "dual": None,
        "centroids": {
            "points": [[_num(c) for c in p] for p in result.centroids.points],
            "provenance": [[int(k) for k in tup] for tup in result.centroids.provenance],
        },
        "exact": exact,
    }
    if result.dual is not None:
        doc["dual"] = {
            "tau": [[_num(v) for v in tau] for tau in result.dual.tau],
            "theta": [[_num(v) for v in row] for row in result.dual.theta],
        }
        if exact:
            doc["dual"]["tau_exact"] = [[format_scalar(v) for v in tau] for tau in result.dual.tau]
            doc["dual"]["theta_exact"] = [[format_scalar(v) for v in row] for row in result.dual.theta]
    if exact:
        doc["total_cost_exact"] = format_scalar(result.total_cost)
    if result.info.get("method"):
        doc["method"] = result.info["method"]
    return doc


def dump_result(result: BarycenterResult) -> str:
    return json.dumps(result_to_dict(result), indent=1)


def result_from_dict(doc: dict, ms: MeasureSet) -> BarycenterResult:
    """Rebuild a result against its measures; centroids are recomputed and matched."""
    try:
        exact = bool(doc.get("exact", False)) and ms.exact
        if not exact and ms.exact:
            ms = ms.to_float()
        s = build_centroids(ms)
        pts = np.array(doc["centroids"]["points"], dtype=float).reshape(-1, ms.dim)
        if len(pts) != len(s) or not np.allclose(pts, np.asarray(s.points, dtype=float), rtol=1e-9, atol=1e-9):
            raise ValidationError("result centroids do not match the measures")
        conv = (lambda e, key: to_fraction(e[key + "_exact"])) if exact else (lambda e, key: float(e[key]))
        ii, jj, kk, mm = [], [], [], []
        for block in doc["transports"]:
            for e in block["entries"]:
                ii.append(int(block["i"]))
                jj.append(int(e["j"]))
                kk.append(int(e["k"]))
                mm.append(conv(e, "mass"))
        n_c = len(s)
        zero = Fraction(0) if exact else 0.0
        z = np.array([zero] * n_c, dtype=object if exact else float)
        for i, j, m in zip(ii, jj, mm):
            if i == 0:
                z[j] += m
        mass = np.array(mm, dtype=object if exact else float)
        t = NStarTransport(np.array(ii, dtype=np.int64), np.array(jj, dtype=np.int64),
                           np.array(kk, dtype=np.int64), mass, z)
        dual = None
        if doc.get("dual"):
            dd = doc["dual"]
            if exact and "tau_exact" in dd:
                tau = tuple(np.array([to_fraction(v) for v in row], dtype=object) for row in dd["tau_exact"])
                theta = np.array([[to_fraction(v) for v in row] for row in dd["theta_exact"]], dtype=object)
            else:
                tau = tuple(np.array(row, dtype=float) for row in dd["tau"])
                theta = np.array(dd["theta"], dtype=float)
            dual = DualSolution(tau, theta)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"malformed result document: {exc}") from exc
    ct = build_cost_tensor(ms, s)
    return assemble_result(ms, s, ct, t, dual, {"method": doc.get("method", "loaded")})


def load_result(source, ms: MeasureSet) -> BarycenterResult:
    if hasattr(source, "read"):
        source = source.read()
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return result_from_dict(doc, ms)


def barycenter_from_dict(doc: dict, *, exact: bool = False) -> DiscreteMeasure:
    return measure_from_dict(doc["barycenter"], exact=exact)


__all__ = [
    "CostTensor",
    "NStarTransport",
    "DualSolution",
    "BarycenterResult",
    "LpStatus",
    "LpSolution",
    "build_cost_tensor",
    "build_primal",
    "primal_size",
    "solve_barycenter",
    "solve_multimarginal",
    "transport_cost",
    "transport_from_coupling",
    "check_dual",
    "result_to_dict",
    "result_from_dict",
    "dump_result",
    "load_result",
]
