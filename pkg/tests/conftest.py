import pytest
from hypothesis import HealthCheck, settings

from stakewheel import _kernels

# Kernel compilation (or cache loading) must not be billed to whichever
# test happens to run first, and must not trip hypothesis deadlines.
settings.register_profile(
    "stakewheel",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("stakewheel")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    _kernels.warm_up()
