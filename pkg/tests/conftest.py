import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sdfshrink.ingest import mesh_to_grid_sdf  # noqa: E402
from sdfshrink.mesh import icosphere  # noqa: E402
from sdfshrink.sdf import box, capsule, sphere  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_sphere():
    return sphere(1.0)


@pytest.fixture
def rounded_box():
    return box((0.7, 0.5, 0.4), 0.1)


@pytest.fixture
def capsule_field():
    return capsule((-0.6, 0.0, 0.0), (0.6, 0.0, 0.0), 0.4)


@pytest.fixture(scope="session")
def ico3():
    return icosphere(3)


@pytest.fixture(scope="session")
def ico3_grid(ico3):
    """The 3-subdivision icosphere ingested at 32^3 (shared; takes a few seconds)."""
    return mesh_to_grid_sdf(ico3, resolution=32)
