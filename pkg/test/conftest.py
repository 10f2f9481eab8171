# -*- coding: utf-8 -*-
import pytest

import mabound
from mabound.geometry import Ball, PowerCup, box_constraints


@pytest.fixture(scope='session')
def disk():
    return mabound.ConvexDomain([Ball((0.0, 0.0), 1.0)])


@pytest.fixture(scope='session')
def square():
    return mabound.ConvexDomain(box_constraints((-1.0, -1.0), (1.0, 1.0)))


@pytest.fixture(scope='session')
def quartic():
    """The region x_1 > x_0^4 cut off by a box; flat to fourth order at the origin."""
    constraints = [PowerCup((1.0,), (4.0,)), *box_constraints((-2.0, -1.0), (2.0, 1.0))]
    return mabound.ConvexDomain(constraints)


@pytest.fixture(scope='session')
def trough():
    """A three-dimensional parabolic trough, strictly convex in one direction only."""
    constraints = [PowerCup((1.0,), (2.0,)), *box_constraints((-1.5, -1.0, -1.0), (1.5, 1.0, 1.0))]
    return mabound.ConvexDomain(constraints)


@pytest.fixture(scope='session')
def hyperbolic_2d():
    return mabound.RhsModel.pure_hyperbolic(2)


@pytest.fixture(scope='session')
def disk_certificate(disk):
    return mabound.certify_k_convexity(disk, (0.0, -1.0), 1, (2.0,), (0.5,))


@pytest.fixture(scope='session')
def disk_barrier(disk_certificate, hyperbolic_2d):
    return mabound.find_eps_M(disk_certificate, hyperbolic_2d)
