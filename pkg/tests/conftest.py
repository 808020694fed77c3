import time
from functools import lru_cache

import pytest

from wandering.approximation import EntireMap, fit_approximant, target_profile, verify_mapping
from wandering.geometry import build_set
from wandering.symbolic import generator_table

TARGET = {"f": "alpha", "g": "beta", "h": "gamma"}


@lru_cache(maxsize=None)
def fitted(letter, N=1, T=2.0, degree=300):
    """Fit one generator and verify it against its table; returns (fit, map, report, seconds)."""
    t0 = time.perf_counter()
    cset = build_set(3, N, T)
    fit = fit_approximant(cset, target_profile(TARGET[letter], cset), degree)
    F = EntireMap(fit.approximant, letter)
    report = verify_mapping(F, cset, generator_table(letter))
    return fit, F, report, time.perf_counter() - t0


@pytest.fixture(scope="session")
def fits():
    return fitted


ACCEPTANCE = []  # (criterion, passed, detail) in run order


@pytest.fixture
def criterion():
    def record(label, passed, detail=""):
        ACCEPTANCE.append((label, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {label}: {detail}")
