import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def reference_map(p=3):
    from padic_zeta.dynamics import RationalMapSpec

    return RationalMapSpec.polynomial([0, Fraction(-1, p), Fraction(1, p)])


@pytest.fixture(scope="session")
def ref3():
    from padic_zeta.markov import build_partition
    from padic_zeta.padic import PadicContext

    f = reference_map(3)
    ctx = PadicContext(3, 30)
    return f, build_partition(f, ctx, 1)
