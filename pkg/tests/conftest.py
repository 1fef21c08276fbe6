import math
import os

import pytest
from hypothesis import settings

from fockecho import EvolutionConfig, le_trace
from fockecho.model import default_params

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

#: lines collected by the acceptance module and echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []

REFERENCE_E0 = 200.5


@pytest.fixture(scope="session")
def reference_params():
    alpha = math.sqrt(REFERENCE_E0 - 0.5)
    return default_params().with_cutoff_for(REFERENCE_E0, (alpha,))


@pytest.fixture(scope="session")
def reference_trace(reference_params):
    """Coherent-packet echo at e0 = 200.5 up to t = 40 (a few seconds)."""
    alpha = math.sqrt(REFERENCE_E0 - 0.5)
    return le_trace("coherent", alpha, reference_params, EvolutionConfig(t_max=40.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
