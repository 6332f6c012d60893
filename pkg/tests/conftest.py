import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("wavecrest", max_examples=30, deadline=None)
settings.load_profile("wavecrest")


def band_limited(rng, n, kmax, holomorphic=False, mean_zero=True, decay=2.0):
    """Random trigonometric polynomial with |k| <= kmax and algebraic decay."""
    k = np.fft.fftfreq(n, 1.0 / n)
    mask = np.abs(k) <= kmax
    if mean_zero:
        mask &= k != 0
    if holomorphic:
        mask &= k < 0
    c = np.zeros(n, dtype=complex)
    m = int(mask.sum())
    c[mask] = (rng.normal(size=m) + 1j * rng.normal(size=m)) / (1.0 + np.abs(k[mask])) ** decay
    return np.fft.ifft(c) * n


def nodes(n):
    return 2.0 * np.pi * np.arange(n) / n


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
