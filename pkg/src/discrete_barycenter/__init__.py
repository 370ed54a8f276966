"""Exact Wasserstein-2 barycenters of finitely supported measures.

The barycenter of discrete measures is supported on the finite set of
centroids of one atom per measure, and is found by a single linear program
over that set.  The package builds and solves that program, extracts a
sparse barycenter, and certifies the structure of optimal transports.
"""

from .barycenter import (
    BarycenterResult,
    CostTensor,
    DualSolution,
    NStarTransport,
    build_cost_tensor,
    build_primal,
    check_dual,
    solve_barycenter,
    solve_multimarginal,
    transport_cost,
)
from .centroid import CentroidSet, GridSpec, build_centroids, detect_grid, grid_density_bound, refined_grid
from .errors import (
    BarycenterError,
    BudgetExceeded,
    DimensionError,
    InfeasibleTransport,
    NumericalError,
    ParseError,
    SizeError,
    SolverFailure,
    ValidationError,
)
from .lp import LpProblem, LpSolution, LpStatus, optimal_face_refine, solve
from .measure import DiscreteMeasure, MeasureSet, dirac, load_measure, load_measure_set, make_measure, measure_set
from .sparsity import TransportScheme, scheme_from_transport, sparsify, transport_from_scheme
from .transport import build_potentials, certify, certify_potentials, check_no_mass_splitting

__version__ = "0.1.0"

__all__ = [
    "BarycenterError",
    "BarycenterResult",
    "BudgetExceeded",
    "CentroidSet",
    "CostTensor",
    "DimensionError",
    "DiscreteMeasure",
    "DualSolution",
    "GridSpec",
    "InfeasibleTransport",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "MeasureSet",
    "NStarTransport",
    "NumericalError",
    "ParseError",
    "SizeError",
    "SolverFailure",
    "TransportScheme",
    "ValidationError",
    "build_centroids",
    "build_cost_tensor",
    "build_potentials",
    "build_primal",
    "certify",
    "certify_potentials",
    "check_dual",
    "check_no_mass_splitting",
    "detect_grid",
    "dirac",
    "grid_density_bound",
    "load_measure",
    "load_measure_set",
    "make_measure",
    "measure_set",
    "optimal_face_refine",
    "refined_grid",
    "scheme_from_transport",
    "solve",
    "solve_barycenter",
    "solve_multimarginal",
    "sparsify",
    "transport_cost",
    "transport_from_scheme",
]
