import numpy as np
import pytest

from ncwalk import geometry


@pytest.fixture(scope="session")
def unit_box():
    return geometry.Box(lo=np.zeros(2), hi=np.ones(2))


@pytest.fixture(scope="session")
def unit_disk():
    return geometry.Ball(center=np.zeros(2), radius=1.0)


@pytest.fixture(scope="session")
def spiral_bundle():
    return geometry.spiral_map(1.2)


@pytest.fixture(scope="session")
def corridor_bundle():
    return geometry.corridor_map(2.0)


def mpl_membership(space):
    """Independent point-in-polygon oracle built on matplotlib."""
    from matplotlib.path import Path

    outer = Path(space.outer)
    holes = [Path(h) for h in space.holes]

    def inside(pts):
        pts = np.atleast_2d(pts)
        ok = outer.contains_points(pts, radius=1e-9)
        for h in holes:
            ok &= ~h.contains_points(pts, radius=-1e-9)
        return ok

    return inside
