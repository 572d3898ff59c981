import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from planewave_flows.core import ModelParams
from planewave_flows.residuals import SamplerSpec

# derandomized so every run draws the same examples
settings.register_profile(
    "deterministic",
    derandomize=True,
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")

# lines recorded by the acceptance tests, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def sample_points():
    """100 seeded (t, x) points in [0, 1] x [-pi, pi]^n, keyed by n."""

    def draw(n, count=100, seed=5):
        r = np.random.default_rng(seed)
        return r.uniform(0.0, 1.0, count), r.uniform(-math.pi, math.pi, (count, n))

    return draw


@pytest.fixture
def small_sampler():
    return SamplerSpec(count=200, seed=11)


@pytest.fixture
def ns3():
    return ModelParams(dim=3, nu=0.1)
