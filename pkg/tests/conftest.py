import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from rootextract import synth  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def tube():
    return synth.generate(synth.straight_tube_spec())


@pytest.fixture(scope="session")
def gapped_tube():
    return synth.generate(synth.straight_tube_spec(gap=4))


@pytest.fixture(scope="session")
def y_junction():
    return synth.generate(synth.y_junction_spec())


@pytest.fixture(scope="session")
def noisy_tube():
    spec = synth.straight_tube_spec()
    spec.blobs = [synth.Blob([10, 10, 40], 3.0, 1.0), synth.Blob([50, 45, 20], 2.0, 0.8)]
    return synth.generate(spec)
