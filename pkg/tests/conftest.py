"""Global fixtures for the YIG magnetometer tests."""

import math

import numpy as np
import pytest

from yig_magnetometer.physics.models import LeesonModel, ResonatorModel, SphereSpec

from .const import MOCK_KAPPAS_HZ, MOCK_LEESON


# The resonator of the working oscillator: a 1 mm sphere at 0.178 T with the
# coupling rates extracted from its transmission and reflection sweeps.
@pytest.fixture(name="resonator")
def resonator_fixture():
    """Resonator at the measured working point."""
    kappa0, kappa1, kappa2 = (2 * math.pi * k for k in MOCK_KAPPAS_HZ)
    return ResonatorModel(kappa0=kappa0, kappa1=kappa1, kappa2=kappa2)


@pytest.fixture(name="leeson")
def leeson_fixture():
    """Leeson model fitted to the oscillator phase noise."""
    return LeesonModel(**MOCK_LEESON)


@pytest.fixture(name="sphere")
def sphere_fixture():
    """1 mm sphere at room temperature."""
    return SphereSpec()


# Seeded so that property-style checks draw the same inputs on every run.
@pytest.fixture(name="rng")
def rng_fixture():
    """Deterministic random generator."""
    return np.random.default_rng(12345)
