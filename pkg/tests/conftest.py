"""Shared fixtures: the expensive solves are session-scoped."""

import numpy as np
import pytest

from nlac import (FractionalKernel, SymmetricPowerWell, GridFunction,
                  minimize_profile)


@pytest.fixture(scope="session")
def solve_std():
    """Reference minimizer: s = 0.5, quartic well, R = 100, h = 0.05."""
    kern = FractionalKernel(0.5)
    pot = SymmetricPowerWell(p=2.0)
    res = minimize_profile(kern, pot, 100.0, 0.05)
    assert res.converged
    return res


@pytest.fixture(scope="session")
def solve_small():
    """Cheap minimizer on a deliberately small window (R = 30)."""
    kern = FractionalKernel(0.5)
    pot = SymmetricPowerWell(p=2.0)
    res = minimize_profile(kern, pot, 30.0, 0.1)
    assert res.converged
    return res


def random_profile(rng, R=10.0, h=0.25, monotone=False):
    """A random profile in [-1, 1] with matching tails."""
    n = int(round(2.0 * R / h))
    vals = rng.uniform(-1.0, 1.0, n + 1)
    if monotone:
        vals = np.sort(vals)
    vals[0], vals[-1] = -1.0, 1.0
    return GridFunction(R, h, vals, left_tail=-1.0, right_tail=1.0)
