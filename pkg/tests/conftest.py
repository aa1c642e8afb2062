from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from qbirthdeath.qcore import default_window, make_params
from qbirthdeath.qfourier import transform_matrix

settings.register_profile(
    "repo", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

# (q, nu) sets every suite runs on
SUITE_PARAMS = [(0.5, 0), (0.5, 1.5), (0.4, -0.5)]

_ACCEPTANCE = pytest.StashKey[list]()


@lru_cache(maxsize=None)
def kernel(q, nu):
    """Default-window transform matrix, built once per session."""
    p = make_params(q, nu)
    return transform_matrix(default_window(p), p)


@pytest.fixture(params=SUITE_PARAMS, ids=lambda qn: f"q{qn[0]}-nu{qn[1]}")
def suite_kernel(request):
    return kernel(*request.param)


@pytest.fixture
def acceptance_log(request):
    """Record a one-line criterion verdict; all lines are repeated in the terminal summary."""
    lines = request.config.stash[_ACCEPTANCE]

    def log(line: str) -> None:
        lines.append(line)
        print(line)

    return log


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
