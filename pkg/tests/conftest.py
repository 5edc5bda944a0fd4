import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from orlicz_dynamics import IntegerLine, SimpleFunction, YoungFunction, dual_ball_oracle, orlicz_norm

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile (or load from cache) the jitted kernels once, outside any timed test."""
    f = SimpleFunction(IntegerLine(), [(0,), (1,)], [1.0, 2.0])
    for phi in (YoungFunction.power(2.0), YoungFunction.power_log(2.0)):
        orlicz_norm(f, phi)
        dual_ball_oracle(f, phi)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
