import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=50, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running reproduction (minutes)")


@pytest.fixture
def record_criterion():
    """Collect ``(criterion, passed, detail)`` lines for the terminal summary."""

    def rec(label, passed, detail):
        _ACCEPTANCE.append((label, bool(passed), detail))
        return passed

    return rec


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(_ACCEPTANCE, key=lambda r: _order(r[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")


def _order(label):
    head = re.match(r"\d*", label).group()
    return (int(head) if head else 0, label)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
