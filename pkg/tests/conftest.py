"""Pytest fixtures for pdcoag tests."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from pdcoag.numerics import RngStream
from pdcoag.partitions import MassPartition, Params, Tail

# (alpha, theta) pairs covering alpha = 0, negative theta and alpha near 1
GRID = [(0.0, 1.0), (0.5, 0.5), (0.3, -0.2), (0.9, 2.0)]


@pytest.fixture
def rng():
    """Fixed random stream."""
    return RngStream(20240601, 0)


@pytest.fixture(params=GRID, ids=lambda p: f"a{p[0]}-t{p[1]}")
def grid_params(request):
    """Every (alpha, theta) of the test grid."""
    return Params(*request.param)


@pytest.fixture
def half_params():
    """(alpha, theta) = (1/2, 1/2), the tree and urn test point."""
    return Params(0.5, 0.5)


@pytest.fixture
def three_atoms():
    """Finite partition (0.5, 0.3, 0.2) with no residual."""
    return MassPartition(np.array([0.5, 0.3, 0.2]))


@pytest.fixture
def opaque_partition():
    """Two atoms and a residual with no known law."""
    return MassPartition(np.array([0.6, 0.3]), residual=0.1)


@pytest.fixture
def tailed_partition():
    """Two atoms and a residual described by a GEM(0.5, 1.5) tail."""
    return MassPartition(np.array([0.6, 0.3]), residual=0.1, tails=(Tail(0.1, 0.1, 0.5, 1.5),))
