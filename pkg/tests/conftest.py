import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tomolab import (catalog, mu_axis, nu_axis, p_axis, pacs_optical_tomogram,
                     pacs_symplectic_field, pacs_wigner, q_axis, theta_axis, x_axis)

settings.register_profile(
    "repo", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("repo")

CRITERIA = []


def record(number, passed, detail):
    """Log one acceptance line; printed again in the terminal summary."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
    print(line)
    CRITERIA.append(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


class Grids:
    X = x_axis()
    theta = theta_axis()
    q = q_axis()
    p = p_axis()
    mu = mu_axis()
    nu = nu_axis()


@pytest.fixture(scope="session")
def grids():
    return Grids


@pytest.fixture(scope="session")
def states():
    return catalog()


@functools.lru_cache(maxsize=None)
def optical(state, t=0.0):
    return pacs_optical_tomogram(state, t, Grids.X, Grids.theta)


@functools.lru_cache(maxsize=None)
def symplectic(state, t=0.0):
    return pacs_symplectic_field(state, t, Grids.X, Grids.mu, Grids.nu)


@functools.lru_cache(maxsize=None)
def wigner(state, t=0.0):
    return pacs_wigner(state, t, Grids.q, Grids.p)


def sup(a, b=0.0):
    a = getattr(a, "values", a)
    b = getattr(b, "values", b)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
