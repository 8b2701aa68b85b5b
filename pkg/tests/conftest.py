"""Shared fixtures for the PhiGamma test suite."""
import random

import pytest

from config.settings import DEFAULT_SEED
from utils.caching import clear_caches


@pytest.fixture(autouse=True)
def fresh_caches():
    clear_caches()
    yield
    clear_caches()


@pytest.fixture
def rng():
    return random.Random(DEFAULT_SEED)


@pytest.fixture(params=[2, 3])
def prime(request):
    return request.param
