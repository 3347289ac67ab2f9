import numpy as np
import pytest

import config
from crystal import HarmonicTrap
from trap_model import SR88, ElectrodePolygon, circular_ring_layout, elliptical_ring_layout, secular_frequencies


@pytest.fixture(autouse=True)
def no_progress_bars(monkeypatch):
    monkeypatch.setattr(config, "SHOW_PROGRESS", False)


@pytest.fixture
def sr88():
    return SR88


@pytest.fixture
def measured_trap():
    """Compensated frequencies of the millimetre trap."""
    return HarmonicTrap(177e3, 141e3, 414e3, SR88)


@pytest.fixture
def unit_square():
    """Square of side 2 m centred on the origin."""
    return ElectrodePolygon(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]), "square")


@pytest.fixture(scope="session")
def ring_layout():
    return circular_ring_layout(1e-3, 2e-3, 256)


@pytest.fixture(scope="session")
def ring_modes(ring_layout):
    return secular_frequencies(ring_layout, SR88)


@pytest.fixture(scope="session")
def elliptical_modes():
    return secular_frequencies(elliptical_ring_layout(), SR88)
