import pytest

from semgkit.core import WindowSpec
from semgkit.dataset import (DEFAULT_PROFILE, SessionProtocol, SynthConfig, profile_gap,
                             synth_recording)


def synth(seed, noise_frac=0.25, profile=DEFAULT_PROFILE, protocol=SessionProtocol(), **kw):
    """Default-protocol recording with noise at ``noise_frac`` of the profile gap."""
    cfg = SynthConfig(seed=seed, profile=profile, noise_std=noise_frac * profile_gap(profile),
                      **kw)
    return synth_recording(protocol, cfg)


@pytest.fixture(scope="session")
def train_rec():
    return synth(1)


@pytest.fixture(scope="session")
def test_rec():
    return synth(2)


@pytest.fixture(scope="session")
def short_pair():
    """Two short recordings (2 reps, 75 s) for quick pipeline tests."""
    p = SessionProtocol(reps=2)
    return synth(11, protocol=p), synth(12, protocol=p)


@pytest.fixture
def wspec():
    return WindowSpec(51, 25)


# one PASS/FAIL line per acceptance criterion at the end of the run
_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_criteria):
        name = nodeid.split("::")[-1][len("test_criterion_"):]
        number, _, title = name.partition("_")
        verdict = "PASS" if _criteria[nodeid] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {int(number):2d} {verdict}  {title.replace('_', ' ')}")
