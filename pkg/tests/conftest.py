import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ymren", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("ymren")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one pass/fail line for the acceptance summary (also printed inline)."""

    def record(label: str, ok: bool, detail: str, status: str = "") -> None:
        line = f"{label}: {status or ('PASS' if ok else 'FAIL')}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
