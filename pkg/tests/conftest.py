import random

import pytest


@pytest.fixture
def rng():
    """Deterministic entropy source so every test run is reproducible."""
    return random.Random(0xA5C710)
