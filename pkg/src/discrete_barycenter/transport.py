"""Certificates for the structure of optimal barycenter transports.

Two facts are checked on a solved instance:

* no mass splitting: every barycenter atom sends all of its mass to a single
  atom of each input measure, and sits at the average of those N atoms;
* convex potentials: with ``tau`` from a strictly complementary dual,

      psi_i(x) = max_k <x, x_ik> - |x_ik|^2 / 2 + tau_ik / 2

  is a convex function whose gradient pushes the barycenter onto P_i, and
  the potentials average to ``|x|^2 / 2`` on the barycenter support.

If the dual returned by the simplex is not strictly complementary the
argmax in ``psi_i`` can tie at a support point; :func:`certify` then
recomputes the dual in the relative interior of the dual optimal face.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._numeric import is_exact
from .barycenter import (
    SUPPORT_TOL,
    BarycenterResult,
    DualSolution,
    build_cost_tensor,
    build_primal,
    dual_from_vector,
    dual_to_vector,
    transport_to_vector,
)
from .errors import NumericalError, SolverFailure
from .lp import LpSolution, LpStatus, optimal_face_refine
from .measure import MeasureSet

log = logging.getLogger(__name__)

CERT_TOL = 1e-7
TIE_RTOL = 1e-9


# --------------------------------------------------------------------------
# mass splitting


@dataclass
class SplittingReport:
    passed: bool
    targets: np.ndarray  # targets[i, a] = atom of P_i receiving barycenter atom a, -1 if split
    violations: list = field(default_factory=list)


def check_no_mass_splitting(result: BarycenterResult, ms: MeasureSet, s=None, *, tol: float = CERT_TOL) -> SplittingReport:
    """Each barycenter atom must ship to exactly one atom per measure.

    Also checks that the atom equals the average of its N targets (within
    ``tol`` per coordinate; exactly in exact mode).
    """
    s = result.centroids if s is None else s
    exact = result.exact
    t = result.transport
    support = list(result.support)
    pos = {int(j): a for a, j in enumerate(support)}
    targets = np.full((ms.n, len(support)), -1, dtype=np.int64)
    hits = [[[] for _ in support] for _ in range(ms.n)]
    for i, j, k, m in zip(t.i, t.j, t.k, t.mass):
        if (m != 0) if exact else (m > SUPPORT_TOL):
            a = pos.get(int(j))
            if a is None:
                continue
            hits[i][a].append(int(k))
    violations = []
    for i in range(ms.n):
        for a, j in enumerate(support):
            ks = sorted(set(hits[i][a]))
            if len(ks) == 1:
                targets[i, a] = ks[0]
            else:
                violations.append({"kind": "split", "i": i, "j": int(j), "targets": ks})
    for a, j in enumerate(support):
        if np.any(targets[:, a] < 0):
            continue
        mean = sum(ms[i].points[targets[i, a]] for i in range(ms.n))
        mean = mean / (Fraction(ms.n) if exact else ms.n)
        x = s.points[j]
        if exact:
            bad = any(u != v for u, v in zip(mean, x))
            err = 0.0 if not bad else float(max(abs(u - v) for u, v in zip(mean, x)))
        else:
            err = float(np.max(np.abs(np.asarray(mean, dtype=float) - np.asarray(x, dtype=float))))
            bad = err > tol
        if bad:
            violations.append({"kind": "centroid", "j": int(j), "error": err})
    return SplittingReport(not violations, targets, violations)


# --------------------------------------------------------------------------
# potentials


@dataclass(frozen=True, eq=False)
class PotentialSet:
    """Affine pieces ``<x, slopes[i][k]> + intercepts[i][k]`` of every psi_i."""

    slopes: tuple
    intercepts: tuple

    @property
    def n(self) -> int:
        return len(self.slopes)

    @property
    def exact(self) -> bool:
        return is_exact(self.intercepts[0])

    def pieces(self, i: int, x) -> np.ndarray:
        """Values of all affine pieces of psi_i at the rows of ``x``."""
        x = np.atleast_2d(x)
        return x.dot(self.slopes[i].T) + self.intercepts[i][None, :]

    def value(self, i: int, x) -> np.ndarray:
        return np.max(self.pieces(i, x), axis=1)

    def argmax(self, i: int, x):
        """Lowest maximizing piece index and whether the maximum is tied."""
        vals = self.pieces(i, x)
        best = np.argmax(vals, axis=1) if not self.exact else np.array([int(np.argmax(r)) for r in vals])
        top = vals[np.arange(len(vals)), best]
        if self.exact:
            ties = np.array([sum(1 for v in row if v == m) > 1 for row, m in zip(vals, top)], dtype=bool)
        else:
            vals = np.asarray(vals, dtype=float)
            top = np.asarray(top, dtype=float)
            tol = TIE_RTOL * (1.0 + np.abs(top))
            ties = (vals >= (top - tol)[:, None]).sum(axis=1) > 1
        return best.astype(np.int64), ties

    def gradient(self, i: int, x) -> np.ndarray:
        """Gradient of psi_i: the slope of the (lowest) maximizing piece."""
        k, _ = self.argmax(i, x)
        return self.slopes[i][k]


def build_potentials(dual: DualSolution, ms: MeasureSet) -> PotentialSet:
    slopes, intercepts = [], []
    half = Fraction(1, 2) if dual.exact else 0.5
    for m, tau in zip(ms, dual.tau):
        pts = m.points if dual.exact else np.asarray(m.points, dtype=float)
        sq = (pts * pts).sum(axis=1)
        slopes.append(pts)
        intercepts.append(-half * sq + half * np.asarray(tau))
    return PotentialSet(tuple(slopes), tuple(intercepts))


@dataclass
class PotentialReport:
    i: bool
    ii: bool
    iii: bool
    iv: bool
    unique_argmax: bool
    errors: dict
    violations: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    refined: bool = False

    @property
    def passed(self) -> bool:
        # a non-unique argmax is reported through ``flags`` and is not fatal
        return self.i and self.ii and self.iii and self.iv

    def as_dict(self) -> dict:
        return {"i": self.i, "ii": self.ii, "iii": self.iii, "iv": self.iv}


NOT_STRICTLY_COMPLEMENTARY = "NotStrictlyComplementary"
REFINEMENT_FAILED = "RefinementFailed"


def certify_potentials(ps: PotentialSet, result: BarycenterResult, ms: MeasureSet, *,
                       tol: float = CERT_TOL) -> PotentialReport:
    """Check the four potential properties on the barycenter support.

    (i)   the gradient of psi_i pushes the barycenter onto P_i;
    (ii)  the displacement cost under that gradient equals the cost to P_i;
    (iii) the gradients average to the identity on the support;
    (iv)  the potentials average to |x|^2 / 2 on the support.

    Float checks use ``tol`` (relative for (ii) and (iv)); exact results are
    checked with equality.
    """
    exact = result.exact and ps.exact
    x = result.barycenter.points
    z = result.barycenter.masses
    if not exact:
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
    N = ms.n
    violations = []
    unique = True
    grads = []
    vals = []
    err = {"i": 0.0, "ii": 0.0, "iii": 0.0, "iv": 0.0}
    ok = {"i": True, "ii": True, "iii": True, "iv": True}
    for i in range(N):
        k, ties = ps.argmax(i, x)
        if np.any(ties):
            unique = False
            for a in np.flatnonzero(ties):
                violations.append({"kind": "tie", "i": i, "atom": int(a)})
        grads.append(ps.slopes[i][k])
        vals.append(ps.value(i, x))
        # (i) pushforward
        m = ms[i]
        if exact:
            pushed = [Fraction(0)] * m.size
            for kk, w in zip(k, z):
                pushed[kk] += w
            e = max(abs(a - b) for a, b in zip(pushed, m.masses))
            good = e == 0
        else:
            pushed = np.zeros(m.size)
            np.add.at(pushed, k, z)
            e = float(np.max(np.abs(pushed - np.asarray(m.masses, dtype=float))))
            good = e <= tol
        err["i"] = max(err["i"], float(e))
        if not good:
            ok["i"] = False
            violations.append({"kind": "pushforward", "i": i, "error": float(e)})
        # (ii) cost
        d = x - ps.slopes[i][k]
        sq = (d * d).sum(axis=1)
        if exact:
            cost = sum((w * v for w, v in zip(z, sq)), Fraction(0))
            e = abs(cost - result.per_measure_cost[i])
            good = e == 0
            e = float(e)
        else:
            cost = math.fsum(z * sq)
            ref = float(result.per_measure_cost[i])
            e = abs(cost - ref) / max(1.0, abs(ref))
            good = e <= tol
        err["ii"] = max(err["ii"], e)
        if not good:
            ok["ii"] = False
            violations.append({"kind": "cost", "i": i, "error": e})
    # (iii) average gradient is the identity
    mean_grad = sum(grads) / (Fraction(N) if exact else N)
    if exact:
        bad = [a for a in range(len(x)) if any(u != v for u, v in zip(mean_grad[a], x[a]))]
        e3 = max([float(abs(u - v)) for a in bad for u, v in zip(mean_grad[a], x[a])] or [0.0])
    else:
        per = np.max(np.abs(mean_grad - x), axis=1) if len(x) else np.zeros(0)
        bad = list(np.flatnonzero(per > tol))
        e3 = float(per.max()) if len(per) else 0.0
    err["iii"] = e3
    if bad:
        ok["iii"] = False
        violations += [{"kind": "mean_gradient", "atom": int(a)} for a in bad]
    # (iv) average potential is |x|^2 / 2
    mean_val = sum(vals) / (Fraction(N) if exact else N)
    half_sq = (x * x).sum(axis=1) / (2 if not exact else Fraction(2))
    if exact:
        bad = [a for a in range(len(x)) if mean_val[a] != half_sq[a]]
        e4 = max([float(abs(mean_val[a] - half_sq[a])) for a in bad] or [0.0])
    else:
        rel = np.abs(mean_val - half_sq) / np.maximum(1.0, np.abs(half_sq))
        bad = list(np.flatnonzero(rel > tol))
        e4 = float(rel.max()) if len(rel) else 0.0
    err["iv"] = e4
    if bad:
        ok["iv"] = False
        violations += [{"kind": "mean_potential", "atom": int(a)} for a in bad]
    flags = [] if unique else [NOT_STRICTLY_COMPLEMENTARY]
    return PotentialReport(ok["i"], ok["ii"], ok["iii"], ok["iv"], unique, err, violations, flags)


# --------------------------------------------------------------------------
# refinement and the combined certificate


def refine_dual(result: BarycenterResult, ms: MeasureSet) -> DualSolution:
    """Dual in the relative interior of the dual optimal face of ``result``'s LP."""
    if result.dual is None:
        raise ValueError("result carries no dual solution")
    exact = result.exact
    if not exact and ms.exact:
        ms = ms.to_float()
    s = result.centroids
    ct = build_cost_tensor(ms, s)
    p = build_primal(ms, s, ct, var_cap=10**9)
    x = transport_to_vector(result.transport, ms, len(s))
    y = dual_to_vector(result.dual)
    sol = LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        y=y,
        reduced_costs=p.reduced_costs(y),
        objective=result.total_cost,
        backend="result",
    )
    if not exact:
        # reduced costs slightly below zero are solver noise on a tight column
        rc = np.asarray(sol.reduced_costs, dtype=float)
        sol = LpSolution(LpStatus.OPTIMAL, x=x, y=y, reduced_costs=np.where(np.abs(rc) <= 1e-12, 0.0, rc),
                         objective=result.total_cost, backend="result")
    refined = optimal_face_refine(p, sol)
    return dual_from_vector(refined.y, ms, len(s))


def slack_residual(result: BarycenterResult, ms: MeasureSet, dual: DualSolution | None = None) -> float:
    """Largest |c_ijk - tau_ik - theta_ij| over positive transport entries."""
    dual = result.dual if dual is None else dual
    ct = build_cost_tensor(ms if result.exact else ms.to_float(), result.centroids)
    worst = 0.0
    t = result.transport
    for i, j, k, m in zip(t.i, t.j, t.k, t.mass):
        if (m != 0) if result.exact else (m > SUPPORT_TOL):
            worst = max(worst, abs(float(ct[i][j, k] - dual.tau[i][k] - dual.theta[i, j])))
    return worst


@dataclass
class Certificate:
    splitting: SplittingReport
    potentials: PotentialReport
    dual: DualSolution

    @property
    def passed(self) -> bool:
        return self.splitting.passed and self.potentials.passed

    def as_dict(self) -> dict:
        return {
            "no_mass_splitting": self.splitting.passed,
            "theorem2": self.potentials.as_dict(),
            "violations": self.splitting.violations + self.potentials.violations,
            "refined": self.potentials.refined,
            "flags": self.potentials.flags,
        }


def certify(result: BarycenterResult, ms: MeasureSet, *, refine: bool = True, tol: float = CERT_TOL) -> Certificate:
    """Run both certificates, refining the dual if the plain one is not enough."""
    if not result.exact and ms.exact:
        ms = ms.to_float()
    split = check_no_mass_splitting(result, ms, tol=tol)
    dual = result.dual
    report = certify_potentials(build_potentials(dual, ms), result, ms, tol=tol)
    if refine and not (report.passed and report.unique_argmax):
        try:
            refined = refine_dual(result, ms)
        except (NumericalError, SolverFailure) as exc:
            # near-degenerate float data: keep the plain dual and say so
            log.info("dual refinement failed: %s", exc)
            report.flags.append(REFINEMENT_FAILED)
        else:
            dual = refined
            report = certify_potentials(build_potentials(dual, ms), result, ms, tol=tol)
            report.refined = True
    return Certificate(split, report, dual)
