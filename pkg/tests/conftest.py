import math

import numpy as np
import pytest

from biphoton_fwm.lattice import Lattice, make_gaussian_envelope, separable_input


def explicit_dft2(grid, dz):
    """Mode coefficients by the defining double sum, centered k order."""
    M = grid.shape[0]
    ks = np.arange(M) - M // 2
    out = np.zeros((M, M), complex)
    for a, k in enumerate(ks):
        for b, kp in enumerate(ks):
            acc = 0j
            for l in range(M):
                for lp in range(M):
                    acc += grid[l, lp] * np.exp(-2j * np.pi * (k * l + kp * lp) / M)
            out[a, b] = acc * dz / M
    return out


def explicit_idft2(coef, dz):
    M = coef.shape[0]
    ks = np.arange(M) - M // 2
    out = np.zeros((M, M), complex)
    for l in range(M):
        for lp in range(M):
            acc = 0j
            for a, k in enumerate(ks):
                for b, kp in enumerate(ks):
                    acc += coef[a, b] * np.exp(2j * np.pi * (k * l + kp * lp) / M)
            out[l, lp] = acc / (dz * M)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ring45():
    return Lattice(45)


@pytest.fixture
def gaussian_pair(ring45):
    env = make_gaussian_envelope(ring45, 22, 4)
    return env, separable_input(env, env)


@pytest.fixture
def kappa45():
    return math.pi / 45
