import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class Criterion:
    """Result holder for one acceptance criterion; recorded on exit, also on error."""

    def __init__(self, store, number, name):
        self.store, self.number, self.name = store, number, name
        self.passed = False
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self.passed = False
            self.detail = f"{exc_type.__name__}: {exc}"[:200]
        line = f"criterion {self.number} {self.name}: {'PASS' if self.passed else 'FAIL'}"
        if self.detail:
            line += f" ({self.detail})"
        self.store[(self.number, self.name)] = line
        print(line)
        return False


_ACCEPTANCE: dict[tuple[int, str], str] = {}


@pytest.fixture
def criterion():
    return lambda number, name: Criterion(_ACCEPTANCE, number, name)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[key])
