"""Dense two-phase revised simplex, in float or exact rational arithmetic.

The basis inverse is kept explicitly and updated by one elimination step
per pivot; in float mode it is rebuilt from an LU factorization every
``REFACTOR_EVERY`` pivots or when the basic solution drifts.  Exact mode
works on ``object`` arrays of Fractions and always prices with Bland's rule.

Intended for small and medium problems (a few hundred rows): oracle
instances, exact certification, and cross-checks of the sparse backend.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import NumericalError

REFACTOR_EVERY = 100
DRIFT_TOL = 1e-9
DEGENERATE_SWITCH = 50
COND_LIMIT = 1e14


class SimplexResult:
    __slots__ = ("status", "x", "y", "basis", "iterations")

    def __init__(self, status, x=None, y=None, basis=None, iterations=0):
        self.status = status
        self.x = x
        self.y = y
        self.basis = basis
        self.iterations = iterations


def _identity(m: int, exact: bool) -> np.ndarray:
    if not exact:
        return np.eye(m)
    out = np.empty((m, m), dtype=object)
    out.fill(Fraction(0))
    for r in range(m):
        out[r, r] = Fraction(1)
    return out


def exact_inverse(B: np.ndarray) -> np.ndarray | None:
    """Gauss-Jordan inverse of a square Fraction matrix; None if singular."""
    m = B.shape[0]
    M = np.concatenate([B.astype(object), _identity(m, True)], axis=1)
    for col in range(m):
        piv = None
        for r in range(col, m):
            if M[r, col] != 0:
                piv = r
                break
        if piv is None:
            return None
        if piv != col:
            M[[col, piv]] = M[[piv, col]]
        prow = M[col] / M[col, col]
        M[col] = prow
        nz = [r for r in range(m) if r != col and M[r, col] != 0]
        for r in nz:
            M[r] = M[r] - M[r, col] * prow
    return M[:, m:]


def exact_rank(M: np.ndarray) -> int:
    """Rank of a Fraction (or integer) matrix by exact elimination."""
    M = np.array(M, dtype=object)
    m, n = M.shape
    rank = 0
    for col in range(n):
        piv = next((r for r in range(rank, m) if M[r, col] != 0), None)
        if piv is None:
            continue
        M[[rank, piv]] = M[[piv, rank]]
        prow = M[rank] / Fraction(M[rank, col])
        for r in range(rank + 1, m):
            if M[r, col] != 0:
                M[r] = M[r] - M[r, col] * prow
        rank += 1
        if rank == m:
            break
    return rank


class RevisedSimplex:
    """Minimize ``c @ x`` subject to ``A @ x == b``, ``x >= 0``.

    Parameters
    ----------
    A : ndarray, shape (m, n)
        Dense constraint matrix (float, or object of Fractions).
    b, c : ndarray
        Right-hand side and costs, same arithmetic as ``A``.
    exact : bool
        Rational arithmetic with zero tolerances and Bland pricing.
    tol : float
        Pivot / reduced-cost tolerance in float mode.
    """

    def __init__(self, A, b, c, *, exact=False, tol=1e-9, max_iter=50_000):
        self.exact = exact
        self.tol = 0 if exact else tol
        self.max_iter = max_iter
        A = np.array(A, dtype=object if exact else float)
        b = np.array(b, dtype=object if exact else float)
        self.m, self.n = A.shape
        # rows with negative right-hand side are negated so artificials start feasible
        self.flip = np.array([v < 0 for v in b], dtype=bool)
        A[self.flip] = -A[self.flip]
        b[self.flip] = -b[self.flip]
        self.A = np.concatenate([A, _identity(self.m, exact)], axis=1)
        self.b = b
        self.c = np.array(c, dtype=object if exact else float)
        self.iterations = 0
        self._since_refactor = 0
        self._degenerate_run = 0

    # -- basis bookkeeping -------------------------------------------------

    def _zero(self):
        return Fraction(0) if self.exact else 0.0

    def _set_basis(self, basis) -> bool:
        self.basis = list(basis)
        B = self.A[:, self.basis]
        if self.exact:
            inv = exact_inverse(B)
            if inv is None:
                return False
            self.Binv = inv
        else:
            try:
                lu = lu_factor(B, check_finite=False)
            except (ValueError, np.linalg.LinAlgError):
                return False
            if np.any(np.abs(np.diag(lu[0])) < 1e-13 * max(1.0, np.abs(B).max())):
                return False
            self.Binv = lu_solve(lu, np.eye(self.m))
            if np.linalg.norm(self.Binv, np.inf) * np.linalg.norm(B, np.inf) > COND_LIMIT:
                return False
        self.xB = self.Binv.dot(self.b)
        self._since_refactor = 0
        return True

    def _refactor(self):
        if not self._set_basis(self.basis):
            raise NumericalError("basis became singular during refactorization")

    def _maybe_refactor(self):
        if self.exact:
            return
        self._since_refactor += 1
        drift = np.max(np.abs(self.A[:, self.basis].dot(self.xB) - self.b)) if self.m else 0.0
        if self._since_refactor >= REFACTOR_EVERY or drift > DRIFT_TOL:
            self._refactor()
            drift = np.max(np.abs(self.A[:, self.basis].dot(self.xB) - self.b)) if self.m else 0.0
            if drift > 1e3 * DRIFT_TOL:
                raise NumericalError(f"basic solution residual {drift:.3g} after refactorization")

    # -- pivoting ----------------------------------------------------------

    def _price(self, cost, allowed):
        y = cost[self.basis].dot(self.Binv)
        d = cost - y.dot(self.A)
        in_basis = np.zeros(self.A.shape[1], dtype=bool)
        in_basis[self.basis] = True
        cand = np.flatnonzero(allowed & ~in_basis & np.asarray(d < -self.tol, dtype=bool))
        if len(cand) == 0:
            return None
        if self.exact or self._degenerate_run >= DEGENERATE_SWITCH:
            return int(cand[0])  # Bland: lowest index
        vals = np.asarray(d[cand], dtype=float)
        return int(cand[np.argmin(vals)])  # argmin keeps the lowest index on ties

    def _ratio(self, u):
        pos = [r for r in range(self.m) if u[r] > self.tol]
        if not pos:
            return None
        best = None
        best_ratio = None
        for r in pos:
            ratio = self.xB[r] / u[r]
            if best is None or ratio < best_ratio or (
                ratio == best_ratio and self.basis[r] < self.basis[best]
            ):
                best, best_ratio = r, ratio
        if not self.exact:
            # among float near-ties prefer the lowest variable index
            ties = [r for r in pos if self.xB[r] / u[r] <= best_ratio + self.tol]
            best = min(ties, key=lambda r: self.basis[r])
        return best

    def _pivot(self, q, r, u):
        piv = u[r]
        row = self.Binv[r] / piv
        self.Binv = self.Binv - np.outer(u, row)
        self.Binv[r] = row
        theta = self.xB[r] / piv
        self.xB = self.xB - theta * u
        self.xB[r] = theta
        if not self.exact:
            self.xB[np.abs(self.xB) < 1e-13] = 0.0
        self._degenerate_run = self._degenerate_run + 1 if theta == 0 else 0
        self.basis[r] = q
        self.iterations += 1
        self._maybe_refactor()

    def _run(self, cost, allowed):
        while True:
            if self.iterations >= self.max_iter:
                raise NumericalError(f"simplex exceeded {self.max_iter} pivots")
            q = self._price(cost, allowed)
            if q is None:
                return "optimal"
            u = self.Binv.dot(self.A[:, q])
            r = self._ratio(u)
            if r is None:
                return "unbounded"
            self._pivot(q, r, u)

    # -- driver ------------------------------------------------------------

    def solve(self, warm_basis=None) -> SimplexResult:
        m, n = self.m, self.n
        real = np.zeros(n + m, dtype=bool)
        real[:n] = True
        started = False
        if warm_basis is not None:
            started = self._warm_start(list(warm_basis))
        if not started:
            self._set_basis(list(range(n, n + m)))
            phase1 = np.concatenate(
                [np.array([self._zero()] * n, dtype=self.c.dtype), np.array([self._zero() + 1] * m, dtype=self.c.dtype)]
            )
            self._run(phase1, real)
            infeas = sum(self.xB[r] for r in range(m) if self.basis[r] >= n)
            if infeas > (0 if self.exact else 1e-9 * max(1.0, float(np.max(np.abs(self.b))) if m else 1.0)):
                return SimplexResult("infeasible", iterations=self.iterations)
            self._drive_out_artificials()
        cost = np.concatenate([self.c, np.array([self._zero()] * m, dtype=self.c.dtype)])
        status = self._run(cost, real)
        if status == "unbounded":
            return SimplexResult("unbounded", iterations=self.iterations)
        x = np.array([self._zero()] * n, dtype=self.c.dtype)
        for r, j in enumerate(self.basis):
            if j < n:
                x[j] = self.xB[r]
        if not self.exact:
            x[x < 0] = 0.0
            drift = float(np.max(np.abs(self.A[:, :n].dot(x) - self.b))) if m else 0.0
            if drift > 1e3 * DRIFT_TOL * max(1.0, float(np.max(np.abs(self.b))) if m else 1.0):
                raise NumericalError(f"final primal residual {drift:.3g}")
        y = cost[self.basis].dot(self.Binv)
        y = np.where(self.flip, -y, y) if not self.exact else np.array(
            [-v if f else v for v, f in zip(y, self.flip)], dtype=object
        )
        basis = sorted(j for j in self.basis if j < n)
        return SimplexResult("optimal", x, y, basis, self.iterations)

    def _drive_out_artificials(self):
        n = self.n
        for r in range(self.m):
            if self.basis[r] < n:
                continue
            row = self.Binv[r].dot(self.A[:, :n])
            in_basis = set(self.basis)
            for j in range(n):
                if j not in in_basis and (row[j] != 0 if self.exact else abs(row[j]) > 1e-9):
                    self._pivot(j, r, self.Binv.dot(self.A[:, j]))
                    break
            # otherwise the row is redundant; its artificial stays basic at zero

    def _warm_start(self, cols) -> bool:
        """Complete ``cols`` with artificials on dependent rows and test feasibility."""
        m, n = self.m, self.n
        if len(cols) > m:
            return False
        Bc = self.A[:, cols]
        pivot_rows = _pivot_rows(Bc, self.exact)
        if pivot_rows is None or len(pivot_rows) != len(cols):
            return False
        extra = [n + r for r in range(m) if r not in set(pivot_rows)]
        if not self._set_basis(cols + extra):
            return False
        tol = 0 if self.exact else 1e-9
        for r, j in enumerate(self.basis):
            v = self.xB[r]
            if v < -tol or (j >= n and abs(v) > tol):
                return False
        if not self.exact:
            self.xB[self.xB < 0] = 0.0
        return True


def _pivot_rows(M: np.ndarray, exact: bool):
    """Rows chosen as pivots by Gaussian elimination on the columns of M."""
    M = M.copy()
    m, k = M.shape
    rows = []
    used = np.zeros(m, dtype=bool)
    for col in range(k):
        if exact:
            cand = [r for r in range(m) if not used[r] and M[r, col] != 0]
            if not cand:
                return None
            piv = cand[0]
        else:
            mags = np.where(used, 0.0, np.abs(M[:, col]))
            piv = int(np.argmax(mags))
            if mags[piv] < 1e-12:
                return None
        used[piv] = True
        rows.append(piv)
        prow = M[piv] / M[piv, col]
        for r in range(m):
            if r != piv and M[r, col] != 0:
                M[r] = M[r] - M[r, col] * prow
    return rows
