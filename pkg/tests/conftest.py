import numpy as np
import pytest

from infbeltrami import Constant, Disk, DiskGrid, PolyZZbar


@pytest.fixture(scope="session")
def grid():
    return DiskGrid(n_rad=64, n_ang=256)


@pytest.fixture(scope="session")
def coarse():
    return DiskGrid(n_rad=24, n_ang=64)


@pytest.fixture
def unit():
    return Disk.unit()


def zbar(domain=None):
    return PolyZZbar(domain or Disk.unit(), ((0, 1, 1.0),))


def const(c, domain=None):
    return Constant(domain or Disk.unit(), c)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
