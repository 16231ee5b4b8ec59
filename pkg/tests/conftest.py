import pytest
from hypothesis import HealthCheck, settings

import iws

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def small_ds():
    """Desk-size corpus shared by session and server tests."""
    return iws.make_synthetic_corpus(n_train=500, n_test=150, vocab_size=80, seed=3)


@pytest.fixture(scope="session")
def small_ctx(small_ds):
    return iws.build_context(small_ds)
