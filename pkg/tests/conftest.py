import sys
from pathlib import Path

import pytest

from khow import clinic as load_clinic
from khow.harness import ModelParams, random_pr_model

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def clinic():
    return load_clinic()


@pytest.fixture(scope="session")
def small_models():
    """A fixed corpus of random perfect-recall models with at most six states."""
    out = []
    for seed in range(60):
        params = ModelParams(n_states=1 + seed % 6, n_agents=1 + seed % 2, density=0.3)
        out.append(random_pr_model(params, seed))
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call_passed = rep.passed
