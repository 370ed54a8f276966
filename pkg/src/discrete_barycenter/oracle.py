"""Brute-force ground truth for tiny rational instances.

The barycenter cost equals ``sum_i E|X_i|^2 - N max E|mean(X)|^2`` where the
maximum runs over all couplings of P_1..P_N.  The coupling polytope is
bounded, so the maximum of this linear objective is attained at a vertex.
:func:`enumerate_optimum` lists every basis of the (full-rank) marginal
system, keeps the nonnegative basic solutions and returns the best one,
recomputed in exact arithmetic.  No LP solver is involved, which makes the
result an independent check on both LP formulations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .barycenter import solve_barycenter, solve_multimarginal
from .errors import BudgetExceeded, ValidationError
from .measure import MeasureSet, make_measure, second_moment
from .simplex import exact_inverse

DEFAULT_BUDGET = 10**8
MAX_CELLS = 64
MAX_DENOMINATOR = 8
CHUNK = 50_000


@dataclass(frozen=True, eq=False)
class RationalInstance:
    """Exact measures whose masses are integer multiples of ``1/q``."""

    measures: MeasureSet
    q: int

    def __post_init__(self):
        ms = self.measures
        if not ms.exact:
            raise ValidationError("oracle instances must be exact")
        if not 1 <= self.q <= MAX_DENOMINATOR:
            raise ValidationError(f"denominator must be in 1..{MAX_DENOMINATOR}")
        if math.prod(ms.sizes) > MAX_CELLS:
            raise ValidationError(f"more than {MAX_CELLS} coupling cells")
        for m in ms:
            if any((w * self.q).denominator != 1 for w in m.masses):
                raise ValidationError(f"a mass is not a multiple of 1/{self.q}")


def _marginal_system(ms: MeasureSet):
    """0/1 marginal matrix with one redundant row per extra measure removed."""
    cells = list(itertools.product(*[range(m.size) for m in ms]))
    rows, rhs = [], []
    for i, m in enumerate(ms):
        last = m.size - 1 if i > 0 else m.size
        for k in range(last):
            rows.append([1 if c[i] == k else 0 for c in cells])
            rhs.append(m.masses[k])
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(cells)), rhs, cells


def _mean_square(ms: MeasureSet, cells) -> list:
    """Exact |mean(x_1k1, ..., x_NkN)|^2 for each cell."""
    out = []
    n = Fraction(ms.n)
    for c in cells:
        mean = [sum((ms[i].points[k][s] for i, k in enumerate(c)), Fraction(0)) / n for s in range(ms.dim)]
        out.append(sum((v * v for v in mean), Fraction(0)))
    return out


def coupling_cost(ms: MeasureSet, coupling) -> Fraction:
    """Barycenter cost induced by a coupling: sum_i E|X_i - mean(X)|^2."""
    cells = list(itertools.product(*[range(m.size) for m in ms]))
    flat = np.asarray(coupling, dtype=object).ravel()
    total = Fraction(0)
    n = Fraction(ms.n)
    for c, w in zip(cells, flat):
        if w == 0:
            continue
        pts = [ms[i].points[k] for i, k in enumerate(c)]
        mean = [sum((p[s] for p in pts), Fraction(0)) / n for s in range(ms.dim)]
        total += w * sum((sum(((p[s] - mean[s]) ** 2 for s in range(ms.dim)), Fraction(0)) for p in pts), Fraction(0))
    return total


def enumerate_optimum(inst: RationalInstance | MeasureSet, *, budget: int = DEFAULT_BUDGET):
    """Best coupling by exhaustive basis enumeration.

    Returns
    -------
    coupling : ndarray of Fraction, shape (S_1, ..., S_N)
    cost : Fraction
        Induced barycenter cost ``sum_i W_2(P, P_i)^2``.

    Raises
    ------
    BudgetExceeded
        If the number of candidate bases exceeds ``budget``.
    """
    ms = inst.measures if isinstance(inst, RationalInstance) else inst
    if not ms.exact:
        raise ValidationError("oracle needs exact measures")
    A, rhs, cells = _marginal_system(ms)
    r, n = A.shape
    total = math.comb(n, r)
    if total > budget:
        raise BudgetExceeded(f"{total} candidate bases exceed the budget of {budget}")
    gain = _mean_square(ms, cells)
    gain_f = np.array([float(g) for g in gain])
    b_f = np.array([float(v) for v in rhs])
    Af = A.astype(float)

    best = -np.inf
    candidates = []
    combos = itertools.combinations(range(n), r)
    while True:
        chunk = np.array(list(itertools.islice(combos, CHUNK)), dtype=np.int64)
        if len(chunk) == 0:
            break
        chunk = chunk.reshape(-1, r)
        B = Af[:, chunk].transpose(1, 0, 2)  # (batch, r, r)
        det = np.linalg.det(B)
        ok = np.abs(det) > 0.5  # integer matrices: determinant is 0 or |det| >= 1
        if not np.any(ok):
            continue
        chunk, B = chunk[ok], B[ok]
        x = np.linalg.solve(B, np.broadcast_to(b_f, (len(B), r))[..., None])[..., 0]
        feas = np.all(x >= -1e-9, axis=1)
        if not np.any(feas):
            continue
        chunk, x = chunk[feas], x[feas]
        val = np.einsum("br,br->b", x, gain_f[chunk])
        top = float(val.max())
        if top > best + 1e-9:
            candidates = [c for c, v in zip(chunk, val) if v >= top - 1e-7]
            best = top
        elif top >= best - 1e-7:
            candidates += [c for c, v in zip(chunk, val) if v >= best - 1e-7]
            best = max(best, top)

    best_exact, best_x = None, None
    for cols in candidates:
        B = np.array([[Fraction(int(A[i, j])) for j in cols] for i in range(r)], dtype=object)
        inv = exact_inverse(B)
        if inv is None:
            continue
        xb = inv.dot(np.array(rhs, dtype=object))
        if any(v < 0 for v in xb):
            continue
        value = sum((gain[j] * v for j, v in zip(cols, xb)), Fraction(0))
        if best_exact is None or value > best_exact:
            best_exact, best_x = value, (cols, xb)
    if best_x is None:
        raise ValidationError("no feasible coupling found")
    flat = np.array([Fraction(0)] * n, dtype=object)
    for j, v in zip(*best_x):
        flat[j] = v
    coupling = flat.reshape(tuple(ms.sizes))
    # the induced cost equals sum_i E|X_i|^2 - N E|mean|^2
    cost = sum((second_moment(m) for m in ms), Fraction(0)) - ms.n * best_exact
    return coupling, cost


def compare(inst: RationalInstance) -> dict:
    """Exact costs from the linked LP, the multi-marginal LP and enumeration."""
    ms = inst.measures
    linked = solve_barycenter(ms, mode="exact").total_cost
    _, mm = solve_multimarginal(ms, mode="exact")
    _, brute = enumerate_optimum(inst)
    return {
        "sizes": ms.sizes,
        "linked": linked,
        "multimarginal": mm.total_cost,
        "enumeration": brute,
        "passed": linked == mm.total_cost == brute,
    }


# --------------------------------------------------------------------------
# random instances


def _composition(rng: np.random.Generator, q: int, parts: int) -> list[int]:
    """Uniformly random composition of q into ``parts`` positive integers."""
    cuts = sorted(rng.choice(np.arange(1, q), size=parts - 1, replace=False).tolist()) if parts > 1 else []
    edges = [0] + cuts + [q]
    return [b - a for a, b in zip(edges, edges[1:])]


def random_instance(rng: np.random.Generator, *, max_n: int = 3, max_support: int = 3, q: int = 4,
                    dim: int | None = None, coord_range: int = 4) -> RationalInstance:
    """Random instance with integer coordinates and masses in ``(1/q) Z``."""
    n = int(rng.integers(2, max_n + 1)) if max_n >= 2 else 1
    d = int(rng.integers(1, 3)) if dim is None else dim
    measures = []
    for _ in range(n):
        s = int(rng.integers(1, min(max_support, q) + 1))
        pts = set()
        while len(pts) < s:
            pts.add(tuple(int(v) for v in rng.integers(-coord_range, coord_range + 1, size=d)))
        parts = _composition(rng, q, s)
        measures.append(make_measure(sorted(pts), [Fraction(p, q) for p in parts], exact=True))
    return RationalInstance(MeasureSet(tuple(measures)), q)


def run_oracle(seed: int = 0, count: int = 100, max_n: int = 3, max_support: int = 3, q: int = 4) -> dict:
    """Compare the three solution paths on ``count`` random instances."""
    rng = np.random.default_rng(seed)
    failures = []
    for idx in range(count):
        inst = random_instance(rng, max_n=max_n, max_support=max_support, q=q)
        rep = compare(inst)
        if not rep["passed"]:
            failures.append({"instance": idx, **{k: str(v) for k, v in rep.items() if k != "passed"}})
    return {"seed": seed, "count": count, "passed": count - len(failures), "failed": len(failures),
            "failures": failures}
