"""Sparse dual-simplex backend on top of the HiGHS build shipped with SciPy.

SciPy's public ``linprog`` does not report the final basis, so the private
``_highspy`` bindings are used when importable; otherwise ``linprog`` with
``highs-ds`` is used and the basis is reported as the primal support.
"""

from __future__ import annotations

import os

import numpy as np

try:  # SciPy >= 1.15
    from scipy.optimize._highspy import _core as _hcore
except ImportError:  # pragma: no cover - exercised only on older SciPy
    _hcore = None


def _threads() -> int | None:
    raw = os.environ.get("BARYCENTER_THREADS")
    if not raw:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        return None


def solve_highs(c, A_csc, b, *, feas_tol=1e-9, opt_tol=1e-9, time_limit=None):
    """Minimize ``c @ x`` s.t. ``A x = b``, ``x >= 0`` with HiGHS dual simplex.

    Returns a dict with ``status`` ("optimal", "infeasible", "unbounded" or
    "error"), and for optimal solves ``x``, ``y``, ``basis``, ``iterations``.
    """
    if _hcore is None:
        return _solve_linprog(c, A_csc, b, feas_tol, opt_tol, time_limit)
    h = _hcore
    m, n = A_csc.shape
    lp = h.HighsLp()
    lp.num_col_ = n
    lp.num_row_ = m
    lp.a_matrix_.num_col_ = n
    lp.a_matrix_.num_row_ = m
    lp.a_matrix_.format_ = h.MatrixFormat.kColwise
    lp.col_cost_ = np.asarray(c, dtype=float)
    lp.col_lower_ = np.zeros(n)
    lp.col_upper_ = np.full(n, np.inf)
    lp.row_lower_ = np.asarray(b, dtype=float)
    lp.row_upper_ = np.asarray(b, dtype=float)
    lp.a_matrix_.start_ = A_csc.indptr.astype(np.int32)
    lp.a_matrix_.index_ = A_csc.indices.astype(np.int32)
    lp.a_matrix_.value_ = A_csc.data.astype(float)

    highs = h._Highs()
    opts = h.HighsOptions()
    opts.output_flag = False
    opts.log_to_console = False
    opts.solver = "simplex"
    opts.simplex_strategy = 1  # dual simplex
    opts.primal_feasibility_tolerance = feas_tol
    opts.dual_feasibility_tolerance = opt_tol
    opts.random_seed = 0
    threads = _threads()
    if threads is not None:
        opts.threads = threads
    if time_limit is not None:
        opts.time_limit = float(time_limit)
    highs.passOptions(opts)
    if highs.passModel(lp) == h.HighsStatus.kError:
        return {"status": "error", "message": "HiGHS rejected the model"}
    highs.run()
    status = highs.getModelStatus()
    if status == h.HighsModelStatus.kUnboundedOrInfeasible:
        # presolve could not tell which; rerun without it
        opts.presolve = "off"
        highs.passOptions(opts)
        highs.clearSolver()
        highs.run()
        status = highs.getModelStatus()
    if status == h.HighsModelStatus.kInfeasible:
        return {"status": "infeasible"}
    if status == h.HighsModelStatus.kUnbounded:
        return {"status": "unbounded"}
    if status != h.HighsModelStatus.kOptimal:
        return {"status": "error", "message": highs.modelStatusToString(status)}
    sol = highs.getSolution()
    basis = highs.getBasis()
    col_status = np.fromiter((int(s.value) for s in basis.col_status), dtype=np.int8, count=n)
    info = highs.getInfo()
    return {
        "status": "optimal",
        "x": np.asarray(sol.col_value, dtype=float),
        "y": np.asarray(sol.row_dual, dtype=float),
        "basis": np.flatnonzero(col_status == int(h.HighsBasisStatus.kBasic.value)),
        "iterations": int(info.simplex_iteration_count),
    }


def _solve_linprog(c, A_csc, b, feas_tol, opt_tol, time_limit):  # pragma: no cover
    from scipy.optimize import linprog

    options = {
        "primal_feasibility_tolerance": feas_tol,
        "dual_feasibility_tolerance": opt_tol,
    }
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    res = linprog(c, A_eq=A_csc, b_eq=b, bounds=(0, None), method="highs-ds", options=options)
    if res.status == 2:
        return {"status": "infeasible"}
    if res.status == 3:
        return {"status": "unbounded"}
    if res.status != 0:
        return {"status": "error", "message": res.message}
    return {
        "status": "optimal",
        "x": res.x,
        "y": res.eqlin.marginals,
        "basis": np.flatnonzero(res.x > 0),
        "iterations": int(res.nit),
    }
