import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def ar1_loop(phi, n, noise_std=1.0, mean=0.0, seed=0, burn=500):
    """Plain-loop AR(1) used as an oracle independent of the filtering code."""
    rng = np.random.default_rng(seed)
    e = rng.normal(0.0, noise_std, n + burn)
    x = np.empty(n + burn)
    x[0] = e[0]
    for t in range(1, n + burn):
        x[t] = phi * x[t - 1] + e[t]
    return x[burn:] + mean


@pytest.fixture
def ar1():
    return ar1_loop


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
