import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# filled by test_acceptance.py, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_instance(rng, n, k, zeros=False):
    mu = rng.random(n)
    nu = rng.random(k)
    if zeros and n > 1:
        mu[rng.integers(n)] = 0.0
    if zeros and k > 1:
        nu[rng.integers(k)] = 0.0
    return mu / mu.sum(), nu / nu.sum(), rng.random((n, k))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def metric2():
    """mu = nu = [0.5, 0.5] with the 2-point metric; the closed-form instance."""
    return np.array([0.5, 0.5]), np.array([0.5, 0.5]), np.array([[0.0, 1.0], [1.0, 0.0]])
