import time

import numpy as np
import pytest

from stochfix import build, solve
from stochfix.core import EquationSystem, finite_law_sampler


def constant_system(c=1.5, d=1):
    """X = 0 * X + c: the solution is the point mass at c."""
    sampler = finite_law_sampler([1.0], np.zeros((1, 1, d, d)), np.full((1, d), c))
    return EquationSystem(1, d, ((0,),), (sampler,), name="constant")


def identity_system(d=1):
    """X = X: every law is a fixed point."""
    sampler = finite_law_sampler([1.0], np.eye(d)[None, None], np.zeros((1, d)))
    return EquationSystem(1, d, ((0,),), (sampler,), name="identity")


@pytest.fixture(scope="session")
def quicksort_solution():
    """Quicksort limit law at N = 2e5 (seed 0) with the wall time it took."""
    t0 = time.perf_counter()
    pools, diag = solve(build({"model": "quicksort"}), 200_000, max_iters=60, seed=0)
    return pools, diag, time.perf_counter() - t0


@pytest.fixture(scope="session")
def quicksort_pool(quicksort_solution):
    return quicksort_solution[0][0]


@pytest.fixture(scope="session")
def quicksort_pool_seed1():
    pools, _ = solve(build({"model": "quicksort"}), 200_000, max_iters=60, seed=1)
    return pools[0]


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_criterion(k: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
