from pathlib import Path

import numpy as np
import pytest

from rkrank import ComparisonGraph

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def random_connected_graph(n: int, rng: np.random.Generator, extra: float = 0.3) -> ComparisonGraph:
    """Random spanning tree plus independent extra edges."""
    perm = rng.permutation(n)
    edges = {tuple(sorted((int(perm[t]), int(perm[rng.integers(t)])))) for t in range(1, n)}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < extra:
                edges.add((i, j))
    return ComparisonGraph.from_edges(n, sorted(edges))


def dense_laplacian(g: ComparisonGraph) -> np.ndarray:
    lap = np.zeros((g.n, g.n))
    for i, j in g.edges:
        lap[i, j] = lap[j, i] = -1.0
        lap[i, i] += 1.0
        lap[j, j] += 1.0
    return lap


def lsq_oracle(g: ComparisonGraph, y: np.ndarray, total: float = 0.0) -> np.ndarray:
    """Dense least squares ``min ‖x_i - x_j - y_ij‖`` with ``x_0 = 0``, shifted to ``Σx = total``.

    Needs a connected graph so the reduced problem has full column rank.
    """
    inc = np.zeros((g.m, g.n))
    inc[np.arange(g.m), g.edges[:, 0]] = 1.0
    inc[np.arange(g.m), g.edges[:, 1]] = -1.0
    reduced = inc[:, 1:]
    v = np.zeros(g.n)
    v[1:] = np.linalg.solve(reduced.T @ reduced, reduced.T @ y)
    return v - v.mean() + total / g.n


# wall time of each passed test's call phase, keyed by test function name
PASSED_DURATIONS: dict[str, float] = {}


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_runtest_logreport(report):
    if report.when == "call" and report.passed:
        PASSED_DURATIONS[report.nodeid.rsplit("::", 1)[-1]] = report.duration


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def report(request, capsys):
    """Print and remember one PASS/FAIL line for an acceptance criterion."""

    def _report(number: int, ok: bool, detail: str) -> bool:
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        with capsys.disabled():
            print(f"\n{line}")
        request.config._acceptance_lines.append(line)
        return ok

    return _report
