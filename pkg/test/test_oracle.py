# -*- coding: utf-8 -*-
import pytest

import math

import numpy as np

from mabound import exceptions as exc
from mabound.oracle import (
    ExactSolution,
    exact_ball,
    exact_cone,
    exact_cylinder,
    fd_gradient,
    fd_hessian,
    interior_sample,
    natural_distance,
    pde_residual,
)


def test_exact_values():
    assert exact_ball(2).value((0.0, 0.0)) == pytest.approx(-1.0)
    assert exact_ball(2).value((0.6, 0.0)) == pytest.approx(-0.8)
    assert exact_cylinder(2).value((0.0, 1.0)) == pytest.approx(-math.sqrt(3.0) * 2.0 ** (-1 / 3))
    assert exact_cone(2).value((0.0, 1.0)) == pytest.approx(-(27 / 4) ** (1 / 3))
    assert exact_cone(2).cone_constant == pytest.approx(27 / 4)


def test_natural_domains():
    assert natural_distance(exact_ball(2), (0.6, 0.0)) == pytest.approx(0.4)
    assert natural_distance(exact_cylinder(2), (0.5, 0.25)) == pytest.approx(0.25)
    cone = exact_cone(2)
    assert cone.contains((0.0, 0.1))
    assert not cone.contains((1.0, 0.1))
    with pytest.raises(exc.DomainError):
        exact_ball(2).value((1.0, 0.5))
    with pytest.raises(exc.DomainError):
        exact_cylinder(3).value((0.0, 0.0, -1.0))
    with pytest.raises(exc.DomainError):
        exact_ball(2).value((0.0, 0.0, 0.0))


def test_dimension_must_be_at_least_two():
    with pytest.raises(exc.DomainError):
        ExactSolution('ball', 1)


@pytest.mark.parametrize('n', [2, 3])
def test_ball_residual(n):
    solution = exact_ball(n)
    points = interior_sample(solution, 1000, np.random.default_rng(n))
    assert max(abs(pde_residual(solution, p)) for p in points) <= 1e-8


@pytest.mark.parametrize('solution', [exact_cylinder(2), exact_cone(2)], ids=['cylinder', 'cone'])
def test_residual_by_finite_differences(solution):
    points = interior_sample(solution, 1000, np.random.default_rng(11))
    assert all(solution.natural_distance(p) >= 0.1 for p in points)
    assert max(abs(pde_residual(solution, p)) for p in points) <= 1e-6


@pytest.mark.parametrize(
    'solution', [exact_ball(3), exact_cylinder(3), exact_cone(3)], ids=['ball', 'cylinder', 'cone'],
)
def test_closed_form_gradient(solution):
    for p in interior_sample(solution, 50, np.random.default_rng(5)):
        expected = fd_gradient(solution.value, p, h=1e-6)
        np.testing.assert_allclose(solution.gradient(p), expected, rtol=1e-6, atol=1e-6)


def test_fd_hessian_of_quadratic():
    quadratic = np.array([[2.0, 0.5], [0.5, 1.0]])

    def f(x):
        return float(x @ quadratic @ x)

    np.testing.assert_allclose(fd_hessian(f, (0.3, -0.7), h=1e-2), 2.0 * quadratic, atol=1e-10)
    linear = fd_hessian(lambda x: float(3.0 * x[0] - x[1]), (1.0, 2.0), h=1e-2)
    np.testing.assert_allclose(linear, np.zeros((2, 2)), atol=1e-10)


def test_fd_hessian_richardson():
    ball = exact_ball(2)
    hessian = fd_hessian(ball.value, (0.0, 0.0), h=1e-3, richardson=True)
    np.testing.assert_allclose(hessian, np.eye(2), atol=1e-8)
    np.testing.assert_allclose(ball.hessian((0.0, 0.0)), np.eye(2), atol=1e-14)
