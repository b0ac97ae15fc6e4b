import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from loveres.jost import JostEvaluator
from loveres.profile import PotentialProfile
from loveres.resonances import COARSE_STEP_FACTOR, Rectangle, find_zeros


def _step_potential(v0, n=2001):
    grid = np.linspace(0.0, 1.0, n)
    return PotentialProfile(grid=grid, values=np.full(n, float(v0)),
                            x_i=1.0, h=0.0,
                            v_func=lambda x: np.full(np.shape(x), float(v0)))


@pytest.fixture(scope="session")
def free_pot():
    grid = np.linspace(0.0, 1.0, 41)
    return PotentialProfile(grid=grid, values=np.zeros(41), x_i=1.0, h=1.0,
                            v_func=lambda x: np.zeros(np.shape(x)))


@pytest.fixture(scope="session")
def barrier_pot():
    return _step_potential(4.0)


@pytest.fixture(scope="session")
def well_pot():
    return _step_potential(-60.0)


@pytest.fixture(scope="session")
def barrier_fine(barrier_pot):
    return JostEvaluator(barrier_pot, 0.0)


@pytest.fixture(scope="session")
def barrier_coarse(barrier_pot):
    return JostEvaluator(barrier_pot, 0.0, step_factor=COARSE_STEP_FACTOR)


@pytest.fixture(scope="session")
def barrier_set_r100(barrier_fine, barrier_coarse):
    """All barrier zeros over a region spanning |Re k| <= 102 (covers the
    r = 100 disk down to Im k = -8; the completeness buffer below is checked
    separately by the Levinson criterion)."""
    region = Rectangle(-102.0, 102.0, -8.0, 1.0)
    return find_zeros(barrier_fine, barrier_fine.derivative, region,
                      tol=1e-10, fh_count=barrier_coarse)
