import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quasiharmonic.geometry import ShapeDescriptor, sample_shape

settings.register_profile(
    "pkg", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("pkg")


@pytest.fixture(scope="session")
def unit_disk():
    return sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.1, "K")


@pytest.fixture(scope="session")
def ring_scene():
    """Inner circle E, middle circle K, outer disk D."""
    E = sample_shape(ShapeDescriptor.circle((0, 0), 0.5), 0.05, "E")
    K = sample_shape(ShapeDescriptor.circle((0, 0), 0.6), 0.05, "K")
    D = sample_shape(ShapeDescriptor.disk((0, 0), 2.0), 0.1, "D")
    return E, K, D


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one summary line per acceptance criterion."""
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[0][2:])):
        terminalreporter.write_line(line)
