"""
Common test fixtures and configuration for qsim tests.
"""
import math

import numpy as np
import pytest

from qsim.qstate import StateVector, from_amplitudes, random_state

SQRT_HALF = 1.0 / math.sqrt(2.0)


@pytest.fixture
def rng():
    """Fixture that provides a seeded random generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def phi_plus():
    """(|00> + |11>)/sqrt2."""
    return from_amplitudes([SQRT_HALF, 0, 0, SQRT_HALF])


@pytest.fixture
def ghz_state():
    return from_amplitudes([SQRT_HALF, 0, 0, 0, 0, 0, 0, SQRT_HALF])


@pytest.fixture
def w_state():
    c = 1.0 / math.sqrt(3.0)
    return from_amplitudes([0, c, c, 0, c, 0, 0, 0])


@pytest.fixture
def random_qubit(rng) -> StateVector:
    return random_state(1, rng)


@pytest.fixture
def random_states(rng):
    """Fixture that provides a factory of Haar-random states."""

    def make(qubit_count, count):
        return [random_state(qubit_count, rng) for _ in range(count)]

    return make
