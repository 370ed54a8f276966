import functools
import time

import numpy as np
import pytest

from discrete_barycenter.measure import MeasureSet, make_measure

ACCEPTANCE_LINES = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_measure_set(rng, *, n_range=(2, 5), support_range=(1, 6), dim_range=(1, 3)) -> MeasureSet:
    """Gaussian atoms with uniform random masses; generic position."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    d = int(rng.integers(dim_range[0], dim_range[1] + 1))
    measures = []
    for _ in range(n):
        s = int(rng.integers(support_range[0], support_range[1] + 1))
        w = rng.random(s) + 0.05
        measures.append(make_measure(rng.normal(size=(s, d)), w / w.sum()))
    return MeasureSet(tuple(measures))


@functools.lru_cache(maxsize=None)
def demo_measures():
    from discrete_barycenter.demo import california, generate_demo

    return generate_demo(california())


@pytest.fixture(scope="session")
def demo_solution():
    """The demonstration instance solved once and sparsified."""
    from discrete_barycenter.barycenter import solve_barycenter
    from discrete_barycenter.centroid import build_centroids
    from discrete_barycenter.sparsity import sparsify

    ms = demo_measures()
    start = time.perf_counter()
    s = build_centroids(ms)
    result = solve_barycenter(ms, centroids=s)
    sparse = sparsify(result, ms, s)
    result.info["seconds"] = time.perf_counter() - start
    return ms, s, result, sparse


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
