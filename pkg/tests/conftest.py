import pytest
from hypothesis import HealthCheck, settings

from ncprob import gen_ideal_twin

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def twin_beam():
    return gen_ideal_twin(8.86, 80)


@pytest.fixture(scope="session")
def small_twin():
    return gen_ideal_twin(1.0, 2, cutoff=12)
