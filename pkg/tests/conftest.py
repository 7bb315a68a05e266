import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def taylor_expi(h, s, terms=30):
    """exp(i h s) by scaling and squaring a truncated Taylor series."""
    x = 1j * s * np.asarray(h, dtype=np.complex128)
    norm = np.linalg.norm(x, 2)
    squarings = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0.5 else 0
    x = x / 2 ** squarings
    out = np.eye(x.shape[0], dtype=np.complex128)
    term = np.eye(x.shape[0], dtype=np.complex128)
    for k in range(1, terms + 1):
        term = term @ x / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
