import pytest
from hypothesis import HealthCheck, settings

from crcsearch.toy import toy_network
from crcsearch.wcf_index import build

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def toy():
    return toy_network()


@pytest.fixture(scope="session")
def toy_index(toy):
    return build(toy)
