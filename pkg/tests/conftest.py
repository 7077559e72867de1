import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pcpriv.config import ExperimentConfig
from pcpriv.harness import run_experiment

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def desk_config(tmp_path_factory) -> ExperimentConfig:
    """The default desk-scale configuration (4 x 8 x 512, e_max 60)."""
    out = tmp_path_factory.mktemp("desk_run")
    return ExperimentConfig().with_output_dir(out)


@pytest.fixture(scope="session")
def desk_run(desk_config):
    """One full experiment run shared by every test that needs real records."""
    return run_experiment(desk_config)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker:
        _ACCEPTANCE_RESULTS.append((marker.args[0], report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        status = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}")
