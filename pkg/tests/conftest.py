import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=15,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def operator_matrix(coeffs) -> np.ndarray:
    """Dense lower-triangular map ``M[t, t-j] = phi[t, j]`` (zero-padded history)."""
    c = np.asarray(coeffs)
    T, width = c.shape
    m = np.zeros((T, T))
    for t in range(T):
        for j in range(min(width, t + 1)):
            m[t, t - j] = c[t, j]
    return m


def coeffs_from_matrix(m, order) -> np.ndarray:
    """Read ``phi[t, j] = M[t, t-j]`` back, NaN where ``t - j < 0``."""
    T = m.shape[0]
    out = np.full((T, order + 1), np.nan)
    for t in range(T):
        for j in range(min(order, t) + 1):
            out[t, j] = m[t, t - j]
    return out


def dominant_operator(rng, T, p, margin=0.9):
    """Random operator with ``|phi[t,0]| > sum_j |phi[t+j, j]|`` everywhere."""
    lead = rng.uniform(1.0, 2.0, T) * rng.choice([-1.0, 1.0], T)
    rest = rng.uniform(-1.0, 1.0, (T, p)) * margin / p
    return np.column_stack([lead, rest])


def decreasing_operator(rng, T, p):
    """Random operator with ``phi[t,0] > phi[t+1,1] > ... > phi[t+p,p] >= 0``."""
    return np.column_stack([0.6**j * rng.uniform(0.8, 1.0, T) for j in range(p + 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(mod.RESULTS, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(mod.RESULTS[name])
