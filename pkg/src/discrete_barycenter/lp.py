"""Standard-form linear programs: ``min c.x  s.t.  A x = b,  x >= 0``.

:func:`solve` returns an optimal *vertex* together with dual values and
reduced costs.  Float problems go to a sparse dual simplex (HiGHS) or to the
dense :class:`~discrete_barycenter.simplex.RevisedSimplex`; exact problems are
solved in rational arithmetic.  :func:`optimal_face_refine` moves a solved
pair into the relative interior of the primal and dual optimal faces, which
yields a strictly complementary pair.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ._highs import solve_highs
from ._numeric import is_exact
from .errors import NumericalError, ValidationError
from .simplex import RevisedSimplex

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
COMP_TOL = 1e-9
STRICT_TOL = 1e-10

# dense simplex is used automatically below this many matrix entries
DENSE_LIMIT = 200_000


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LpProblem:
    """Sparse equality-form LP stored as COO triplets."""

    c: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        m, n = len(self.b), len(self.c)
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise ValidationError("triplet arrays have different lengths")
        if len(self.rows) and (
            self.rows.min() < 0 or self.rows.max() >= m or self.cols.min() < 0 or self.cols.max() >= n
        ):
            raise ValidationError("triplet index out of range")
        if not self.exact:
            for arr in (self.c, self.vals, self.b):
                if not np.all(np.isfinite(np.asarray(arr, dtype=float))):
                    raise ValidationError("non-finite LP coefficient")

    @property
    def shape(self) -> tuple:
        return len(self.b), len(self.c)

    @property
    def exact(self) -> bool:
        return is_exact(self.c)

    def matrix(self, fmt: str = "csc") -> sp.spmatrix:
        """Float sparse matrix (duplicate triplets are summed)."""
        A = sp.coo_matrix(
            (np.asarray(self.vals, dtype=float), (self.rows, self.cols)), shape=self.shape
        )
        return A.asformat(fmt)

    def dense(self) -> np.ndarray:
        m, n = self.shape
        if self.exact:
            A = np.empty((m, n), dtype=object)
            A.fill(Fraction(0))
            for r, c_, v in zip(self.rows, self.cols, self.vals):
                A[r, c_] += v
            return A
        return self.matrix("csr").toarray()

    def residual(self, x) -> np.ndarray:
        """``A x - b``, exact in exact mode."""
        if self.exact or is_exact(np.asarray(x)):
            out = np.array([Fraction(0)] * self.shape[0], dtype=object)
            for r, c_, v in zip(self.rows, self.cols, self.vals):
                out[r] += v * x[c_]
            return out - self.b
        return self.matrix("csr") @ np.asarray(x, dtype=float) - np.asarray(self.b, dtype=float)

    def reduced_costs(self, y) -> np.ndarray:
        """``c - A^T y``."""
        if self.exact or is_exact(np.asarray(y)):
            out = np.array(list(self.c), dtype=object)
            for r, c_, v in zip(self.rows, self.cols, self.vals):
                out[c_] -= v * y[r]
            return out
        return np.asarray(self.c, dtype=float) - self.matrix("csc").T @ np.asarray(y, dtype=float)

    def to_exact(self) -> "LpProblem":
        if self.exact:
            return self
        conv = lambda a: np.array([Fraction(float(v)) for v in a], dtype=object)  # noqa: E731
        return LpProblem(conv(self.c), self.rows, self.cols, conv(self.vals), conv(self.b))

    def to_float(self) -> "LpProblem":
        if not self.exact:
            return self
        conv = lambda a: np.asarray(a, dtype=float)  # noqa: E731
        return LpProblem(conv(self.c), self.rows, self.cols, conv(self.vals), conv(self.b))


def make_problem(c, rows, cols, vals, b, *, exact: bool = False) -> LpProblem:
    dtype = object if exact else float
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if exact:
        conv = lambda a: np.array([v if isinstance(v, Fraction) else Fraction(v) for v in a], dtype=object)  # noqa: E731
        return LpProblem(conv(c), rows, cols, conv(vals), conv(b))
    return LpProblem(np.asarray(c, dtype=dtype), rows, cols, np.asarray(vals, dtype=dtype), np.asarray(b, dtype=dtype))


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    basis: Optional[np.ndarray] = None
    objective: object = None
    iterations: int = 0
    backend: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def exact(self) -> bool:
        return self.x is not None and is_exact(self.x)

    def dual_objective(self, p: LpProblem):
        if self.exact:
            return sum((bi * yi for bi, yi in zip(p.b, self.y)), Fraction(0))
        return float(np.dot(np.asarray(p.b, dtype=float), self.y))


def _objective(p: LpProblem, x):
    if is_exact(x):
        return sum((ci * xi for ci, xi in zip(p.c, x) if xi != 0), Fraction(0))
    return float(np.dot(np.asarray(p.c, dtype=float), x))


def _finish(p, status, x, y, basis, iterations, backend) -> LpSolution:
    if status != "optimal":
        return LpSolution(LpStatus(status), iterations=iterations, backend=backend)
    return LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        y=y,
        reduced_costs=p.reduced_costs(y),
        basis=None if basis is None else np.asarray(basis, dtype=np.int64),
        objective=_objective(p, x),
        iterations=iterations,
        backend=backend,
    )


def _empty_rows(p: LpProblem):
    m = p.shape[0]
    used = np.zeros(m, dtype=bool)
    nz = np.array([v != 0 for v in p.vals], dtype=bool)
    used[p.rows[nz]] = True
    return np.flatnonzero(~used)


def solve(p: LpProblem, mode: str = "float", *, backend: str = "auto", tol: float | None = None,
          warm_start: bool = True, time_limit: float | None = None) -> LpSolution:
    """Solve ``p`` to an optimal basic solution.

    Parameters
    ----------
    p : LpProblem
    mode : {"float", "exact"}
        Exact mode converts float data to exact rationals and returns
        Fraction arrays satisfying every optimality condition exactly.
    backend : {"auto", "highs", "simplex"}
        Float-mode engine.  ``"auto"`` uses the dense revised simplex for
        small problems and HiGHS otherwise.
    tol : float, optional
        Feasibility and optimality tolerance for float solves (default 1e-9).
    warm_start : bool
        Exact mode only: start the rational simplex from the basis of a float
        solve instead of from the all-artificial basis.  The answer is exact
        either way; only the pivot count changes.

    Raises
    ------
    NumericalError
        If the float engine loses control of the basis.
    """
    tol = FEAS_TOL if tol is None else tol
    if mode not in ("float", "exact"):
        raise ValueError(f"unknown mode {mode!r}")
    m, n = p.shape
    empty = _empty_rows(p)
    if len(empty) and any(p.b[r] != 0 for r in empty):
        return LpSolution(LpStatus.INFEASIBLE, backend="presolve")
    if n == 0:
        status = "optimal" if all(v == 0 for v in p.b) else "infeasible"
        zero = Fraction(0) if mode == "exact" else 0.0
        y = np.array([zero] * m, dtype=object if mode == "exact" else float)
        return _finish(p, status, y[:0], y, [], 0, "presolve")

    if m == 0:
        # no rows: x = 0 is optimal unless some cost is negative
        q = p.to_exact() if mode == "exact" else p.to_float()
        if any(v < 0 for v in q.c):
            return LpSolution(LpStatus.UNBOUNDED, backend="presolve")
        zero = Fraction(0) if mode == "exact" else 0.0
        x = np.array([zero] * n, dtype=object if mode == "exact" else float)
        return _finish(q, "optimal", x, x[:0], [], 0, "presolve")

    if mode == "exact":
        return _solve_exact(p.to_exact(), warm_start, tol)

    fp = p.to_float()
    if backend == "auto":
        backend = "simplex" if m * n <= DENSE_LIMIT else "highs"
    if backend == "simplex":
        res = RevisedSimplex(fp.dense(), fp.b, fp.c, tol=tol).solve()
        return _finish(fp, res.status, res.x, res.y, res.basis, res.iterations, "simplex")
    if backend == "highs":
        out = solve_highs(fp.c, fp.matrix("csc"), fp.b, feas_tol=tol, opt_tol=tol, time_limit=time_limit)
        if out["status"] == "error":
            raise NumericalError(out.get("message", "HiGHS failed"))
        if out["status"] != "optimal":
            return LpSolution(LpStatus(out["status"]), backend="highs")
        x = out["x"]
        # nonbasic columns sit exactly at their bound
        nonbasic = np.ones(n, dtype=bool)
        nonbasic[out["basis"]] = False
        x = np.where(nonbasic, 0.0, np.maximum(x, 0.0))
        return _finish(fp, "optimal", x, out["y"], out["basis"], out["iterations"], "highs")
    raise ValueError(f"unknown backend {backend!r}")


def _solve_exact(p: LpProblem, warm_start: bool, tol: float) -> LpSolution:
    A = p.dense()
    warm = None
    if warm_start:
        fp = p.to_float()
        try:
            fres = solve(fp, "float", backend="auto", tol=tol)
            if fres.optimal and fres.basis is not None:
                warm = [int(j) for j in fres.basis]
        except NumericalError:
            warm = None
    res = RevisedSimplex(A, p.b, p.c, exact=True).solve(warm_basis=warm)
    return _finish(p, res.status, res.x, res.y, res.basis, res.iterations, "exact-simplex")


# --------------------------------------------------------------------------
# checks


def is_strictly_complementary(s: LpSolution, strict_tol: float = STRICT_TOL) -> bool:
    if s.exact:
        return all(xi > 0 or ri > 0 for xi, ri in zip(s.x, s.reduced_costs))
    return bool(np.all((s.x > strict_tol) | (s.reduced_costs > strict_tol)))


def check_solution(p: LpProblem, s: LpSolution, *, feas_tol=FEAS_TOL, opt_tol=OPT_TOL, comp_tol=COMP_TOL) -> dict:
    """Evaluate the optimality conditions of ``s``; zero tolerance if exact."""
    if s.exact:
        p = p.to_exact()
        feas_tol = opt_tol = comp_tol = 0
        res = p.residual(s.x)
        x, r = s.x, s.reduced_costs
        prim = max((abs(v) for v in res), default=0)
        neg = -min(list(x) + [0])
        rc = -min(list(r) + [0])
        comp = max((abs(a * b) for a, b in zip(x, r)), default=0)
        gap = abs(s.objective - s.dual_objective(p))
    else:
        res = p.residual(s.x)
        prim = float(np.max(np.abs(res))) if len(res) else 0.0
        neg = float(max(0.0, -np.min(s.x))) if len(s.x) else 0.0
        rc = float(max(0.0, -np.min(s.reduced_costs))) if len(s.x) else 0.0
        comp = float(np.max(np.abs(s.x * s.reduced_costs))) if len(s.x) else 0.0
        gap = abs(s.objective - s.dual_objective(p)) / max(1.0, abs(s.objective))
    return {
        "primal_residual": prim,
        "negativity": neg,
        "dual_infeasibility": rc,
        "complementarity": comp,
        "duality_gap": gap,
        "ok": prim <= feas_tol and neg <= feas_tol and rc <= opt_tol and comp <= comp_tol and gap <= 1e-8,
    }


# --------------------------------------------------------------------------
# relative-interior refinement


def optimal_face_refine(p: LpProblem, s: LpSolution, *, strict_tol: float = STRICT_TOL,
                        backend: str = "auto") -> LpSolution:
    """Return a strictly complementary optimal pair.

    Two auxiliary LPs are solved.  The first works on the primal optimal
    face (columns with zero reduced cost) and finds a point whose support is
    as large as possible; in homogenized form

        max sum u  s.t.  A x = b*lam,  u <= x,  u <= 1,  lam >= 1.

    The second does the same for dual slacks on the dual optimal face given
    that support.  Every column then has a positive value or a positive
    slack.  Exact solutions are refined exactly.
    """
    if not s.optimal:
        raise ValueError("refinement needs an optimal solution")
    if is_strictly_complementary(s, strict_tol):
        return s
    exact = s.exact
    if exact:
        p = p.to_exact()
    mode = "exact" if exact else "float"
    opt_tol = 0 if exact else OPT_TOL
    m, n = p.shape
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    # ---- primal: maximal support on the optimal face
    face = np.flatnonzero(np.array([r <= opt_tol for r in s.reduced_costs], dtype=bool))
    k = len(face)
    col_of = np.full(n, -1, dtype=np.int64)
    col_of[face] = np.arange(k)
    sel = col_of[p.cols] >= 0
    # variable layout: x (k) | lam' (1) | u (k) | su (k) | sx (k)
    lam = k
    u0, su0, sx0 = k + 1, 2 * k + 1, 3 * k + 1
    rows = [p.rows[sel], np.arange(m)]
    cols = [col_of[p.cols[sel]], np.full(m, lam)]
    vals = [p.vals[sel], -np.asarray(p.b)]
    ar = np.arange(k)
    rows += [m + ar, m + ar, m + k + ar, m + k + ar, m + k + ar]
    cols += [u0 + ar, su0 + ar, ar, u0 + ar, sx0 + ar]
    vals += [np.array([one] * k, dtype=object if exact else float)] * 2
    vals += [np.array([one] * k, dtype=object if exact else float),
             np.array([-one] * k, dtype=object if exact else float),
             np.array([-one] * k, dtype=object if exact else float)]
    nv = 4 * k + 1
    c = np.array([zero] * nv, dtype=object if exact else float)
    c[u0:u0 + k] = -one
    b = np.concatenate([np.asarray(p.b), np.array([one] * k + [zero] * k, dtype=object if exact else float)])
    aux = make_problem(c, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), b, exact=exact)
    res = solve(aux, mode, backend=backend)
    if not res.optimal:
        raise NumericalError(f"primal face LP ended {res.status.value}")
    scale = one + res.x[lam]
    x_hat = np.array([zero] * n, dtype=object if exact else float)
    x_hat[face] = res.x[:k] / scale
    in_support = np.zeros(n, dtype=bool)
    in_support[face] = np.array([v > one / 2 for v in res.x[u0:u0 + k]], dtype=bool)

    # ---- dual: maximal slack off the support
    y_hat = _dual_refine(p, s, in_support, exact, backend)
    # averaging with the incumbent dual keeps every slack that was already positive
    y_new = (np.asarray(s.y) + y_hat) / 2
    if not exact:
        x_hat[~in_support] = 0.0
    return LpSolution(
        LpStatus.OPTIMAL,
        x=x_hat,
        y=y_new,
        reduced_costs=p.reduced_costs(y_new),
        basis=None,
        objective=_objective(p, x_hat),
        iterations=s.iterations + res.iterations,
        backend=s.backend + "+refined",
    )


def _dual_refine(p, s, in_support, exact, backend):
    m, n = p.shape
    opt_tol = 0 if exact else OPT_TOL
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    dt = object if exact else float
    tight = np.array([r <= opt_tol for r in s.reduced_costs], dtype=bool)
    target = np.flatnonzero(tight & ~in_support)
    others = np.flatnonzero(~in_support)
    # variable layout: y+ (m) | y- (m) | mu' (1) | t (|others|) | v (|target|) | sv (|target|)
    nt, nq = len(others), len(target)
    ypos, yneg, mu = 0, m, 2 * m
    t0 = 2 * m + 1
    v0 = t0 + nt
    sv0 = v0 + nq
    nv = sv0 + nq
    # constraint rows are columns of A: a_i^T y - c_i mu' (+ t_i + v_i) = c_i
    rows = [p.cols, p.cols, np.arange(n)]
    cols = [ypos + p.rows, yneg + p.rows, np.full(n, mu)]
    vals = [np.asarray(p.vals), -np.asarray(p.vals), -np.asarray(p.c)]
    rows.append(others)
    cols.append(t0 + np.arange(nt))
    vals.append(np.array([one] * nt, dtype=dt))
    rows.append(target)
    cols.append(v0 + np.arange(nq))
    vals.append(np.array([one] * nq, dtype=dt))
    rows += [n + np.arange(nq), n + np.arange(nq)]
    cols += [v0 + np.arange(nq), sv0 + np.arange(nq)]
    vals += [np.array([one] * nq, dtype=dt)] * 2
    b = np.concatenate([np.asarray(p.c), np.array([one] * nq, dtype=dt)])
    c = np.array([zero] * nv, dtype=dt)
    c[v0:v0 + nq] = -one
    aux = make_problem(c, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), b, exact=exact)
    res = solve(aux, "exact" if exact else "float", backend=backend)
    if not res.optimal:
        raise NumericalError(f"dual face LP ended {res.status.value}")
    scale = one + res.x[mu]
    return (res.x[ypos:ypos + m] - res.x[yneg:yneg + m]) / scale


# --------------------------------------------------------------------------
# debug dump


def dump_lp(p: LpProblem, path) -> None:
    """Write ``p`` as plain-text sparse triplets.

    Format: a header ``rows <m> cols <n> nnz <k>``, then ``c <j> <value>`` for
    nonzero costs, ``b <i> <value>`` for nonzero right-hand sides and
    ``a <i> <j> <value>`` per matrix entry.
    """
    m, n = p.shape
    fmt = (lambda v: str(v)) if p.exact else (lambda v: repr(float(v)))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# minimize c.x subject to A x = b, x >= 0\n")
        fh.write(f"rows {m} cols {n} nnz {len(p.vals)}\n")
        for j, v in enumerate(p.c):
            if v != 0:
                fh.write(f"c {j} {fmt(v)}\n")
        for i, v in enumerate(p.b):
            if v != 0:
                fh.write(f"b {i} {fmt(v)}\n")
        for r, c_, v in zip(p.rows, p.cols, p.vals):
            fh.write(f"a {r} {c_} {fmt(v)}\n")
