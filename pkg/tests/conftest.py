"""
Shared pytest configuration for Phononet tests.
"""

import numpy as np
import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical checks (deselect with -m 'not slow')")


@pytest.fixture
def rng():
    """Seeded generator so sampled tests are reproducible."""
    return np.random.default_rng(2024)
