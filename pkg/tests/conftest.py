import functools

import pytest
from hypothesis import settings

from zgkn import ModelParams, WindingTarget, solve_pair

settings.register_profile("zgkn", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("zgkn")


@functools.lru_cache(maxsize=None)
def solved(a, gamma, kappa, n_theta, n_omega, tol=1e-8):
    """Cached bound-state solve shared between test modules."""
    return solve_pair(ModelParams(a, gamma, kappa), WindingTarget(n_theta, n_omega), tol=tol)


@pytest.fixture(scope="session")
def solve():
    return solved


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
