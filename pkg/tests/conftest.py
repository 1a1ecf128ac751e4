import math

import pytest

from sebalab.lib.secular import ScattererConfig
from sebalab.lib.spectrum import RectangleGeometry, Spectrum, generate_rectangle_odd

GOLDEN = (1 + math.sqrt(5)) / 2


def _toy(energies, amplitudes=None, **kwargs) -> Spectrum:
    if amplitudes is None:
        amplitudes = [1.0] * len(energies)
    return Spectrum.from_levels(energies, amplitudes, **kwargs)


@pytest.fixture
def bare():
    """Theta = pi without the Weyl tail: the finite rank-one problem."""
    return ScattererConfig(math.pi, tail_correction=False)


@pytest.fixture
def tailed():
    return ScattererConfig(math.pi)


@pytest.fixture(scope='session')
def golden_geometry():
    return RectangleGeometry(1.0, GOLDEN)


@pytest.fixture(scope='session')
def golden(golden_geometry):
    return generate_rectangle_odd(golden_geometry, 2000.0)


@pytest.fixture(scope='session')
def golden_deep(golden_geometry):
    return generate_rectangle_odd(golden_geometry, 20000.0)


@pytest.fixture
def toy():
    """Build a small spectrum from levels, unit amplitudes by default."""
    return _toy
