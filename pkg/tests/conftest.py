import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from gaussgeom.chart import ChartPoint

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

xs = st.floats(-5.0, 5.0)
ys = st.floats(math.log(0.1), math.log(10.0)).map(math.exp)
points = st.builds(ChartPoint, xs, ys)
alphas = st.floats(-3.0, 3.0)
lambdas = st.floats(0.3, 4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_points(rng, n):
    """Log-uniform y in [0.1, 10], uniform x in [-5, 5]."""
    return [ChartPoint(rng.uniform(-5, 5), math.exp(rng.uniform(math.log(0.1), math.log(10.0)))) for _ in range(n)]


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.format_line(n))
