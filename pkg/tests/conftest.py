from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def unit(rng, dim, complex_=False):
    v = rng.normal(size=dim)
    if complex_:
        v = v + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: stated acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.REPORT, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
