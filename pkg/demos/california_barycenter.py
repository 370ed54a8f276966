"""Barycenter of eight monthly temperature-deviation measures over California cities.

Each month weights nine cities by how far their average temperature sits
from 72F.  The barycenter LP over all 12870 centroids is solved by pricing,
reduced to a sparse optimal barycenter, certified, and drawn as SVG.

Run:  python demos/california_barycenter.py [output.svg]
"""

import sys
import time

from discrete_barycenter import build_centroids, certify, check_dual, solve_barycenter, sparsify
from discrete_barycenter.barycenter import primal_size
from discrete_barycenter.demo import california, generate_demo
from discrete_barycenter.sparsity import support_bound
from discrete_barycenter.svg import render_svg


def main(argv):
    spec = california()
    ms = generate_demo(spec)
    print(f"{ms.n} measures ({', '.join(spec.month_names)}) on {ms.sizes[0]} cities each")

    s = build_centroids(ms)
    n_var, n_row = primal_size(ms, len(s))
    print(f"{len(s)} centroids, LP with {n_var} variables and {n_row} constraints")

    start = time.perf_counter()
    result = solve_barycenter(ms, centroids=s)
    print(f"solved in {time.perf_counter() - start:.0f} s: cost {float(result.total_cost):.10g}, "
          f"{result.support_size} atoms in the solver's vertex")

    sparse = sparsify(result, ms, s)
    print(f"sparse barycenter: {sparse.support_size} atoms (bound {support_bound(ms)})")

    dual = check_dual(result, ms)
    print(f"duality gap {dual['relative_gap']:.1e}, dual infeasibility "
          f"{max(dual['edge_violation'], dual['sum_violation']):.1e}")

    cert = certify(sparse, ms)
    print(f"no mass splitting: {cert.splitting.passed}, convex potentials: {cert.potentials.passed}")

    out = argv[1] if len(argv) > 1 else "california_barycenter.svg"
    with open(out, "w") as fh:
        fh.write(render_svg(sparse, ms, transport_to=0))
    print(f"wrote {out}")


if __name__ == "__main__":
    main(sys.argv)
