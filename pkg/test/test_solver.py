# -*- coding: utf-8 -*-
import pytest

import json

import numpy as np

import mabound
from mabound import exceptions as exc
from mabound.analysis import check_bound, fit_rate, ray_profile
from mabound.barrier import BarrierFunction
from mabound.exponents import GrowthParams
from mabound.geometry import certify_k_convexity
from mabound.oracle import exact_ball
from mabound.rhs import RhsModel
from mabound.solver import (
    DIRECTIONS,
    GridField,
    SolveConfig,
    build_grid,
    discrete_comparison_check,
    ma_ws,
    solve,
)


def paraboloid(points):
    return 0.5 * (np.sum(points * points, axis=1) - 1.0)


@pytest.fixture(scope='module')
def unit_rhs():
    return RhsModel.power_law(GrowthParams(n=2, alpha=0.0, beta=3.0))


@pytest.fixture(scope='module')
def paraboloid_state(disk, unit_rhs):
    return solve(disk, unit_rhs, SolveConfig(h=1 / 8, tol=1e-10))


@pytest.fixture(scope='module')
def coarse_hyperbolic_state(disk, hyperbolic_2d, disk_barrier):
    return solve(disk, hyperbolic_2d, SolveConfig(h=1 / 8, tol=1e-8), init=disk_barrier)


@pytest.fixture(scope='module')
def fine_hyperbolic_state(disk, hyperbolic_2d, disk_barrier):
    config = SolveConfig(h=1 / 64, stencil_width=3, tol=1e-6, levels=2)
    return solve(disk, hyperbolic_2d, config, init=disk_barrier)


def test_build_grid(disk, square):
    grid = build_grid(disk, 1 / 4)
    assert grid.size == 45
    assert build_grid(square, 1 / 2).size == 9
    lengths = np.linalg.norm(np.asarray(DIRECTIONS, dtype=float), axis=1)
    assert np.all(grid.legs > 0.0)
    assert np.all(grid.legs <= grid.h * lengths[None, :, None] * (1.0 + 1e-12))
    assert np.allclose(np.linalg.norm(grid.boundary_points(), axis=1), 1.0, atol=1e-9)
    assert set(np.unique(grid.colors)) <= {0, 1, 2, 3}


def test_build_grid_errors(disk, trough):
    with pytest.raises(exc.ResolutionError):
        build_grid(disk, 0.6)
    with pytest.raises(exc.ResolutionError):
        build_grid(trough, 0.1)


@pytest.mark.parametrize('width', [1, 2, 3])
def test_ma_ws_is_exact_on_quadratics(disk, width):
    grid = build_grid(disk, 1 / 8)
    used = 2 * width if width < 3 else len(DIRECTIONS)
    full = np.all(grid.neighbors[:, :used, :] >= 0, axis=(1, 2))
    assert np.any(full)
    values = ma_ws(grid, paraboloid(grid.points), stencil_width=width)
    np.testing.assert_allclose(values[full], 1.0, atol=1e-9)
    linear = 0.3 * grid.points[:, 0] - 0.2 * grid.points[:, 1] - 1.0
    assert np.all(ma_ws(grid, linear, stencil_width=width)[full] < 1e-12)
    node = int(np.flatnonzero(full)[0])
    assert ma_ws(grid, paraboloid(grid.points), node, width) == pytest.approx(1.0, abs=1e-9)


def test_ma_ws_is_monotone(disk):
    grid = build_grid(disk, 1 / 8)
    rng = np.random.default_rng(3)
    for _ in range(1000):
        u = -rng.uniform(0.0, 1.0, grid.size)
        node = int(rng.integers(grid.size))
        width = int(rng.integers(1, 4))
        base = ma_ws(grid, u, node, width)
        neighbors = grid.neighbors[node][grid.neighbors[node] >= 0]
        raised = u.copy()
        raised[neighbors[rng.integers(neighbors.size)]] += rng.uniform(0.0, 1.0)
        assert ma_ws(grid, raised, node, width) >= base
        lifted = u.copy()
        lifted[node] += rng.uniform(0.0, 1.0)
        assert ma_ws(grid, lifted, node, width) <= base


def test_ma_ws_consistency_on_exact_ball(disk):
    grid = build_grid(disk, 1 / 64)
    u = exact_ball(2).values(grid.points)
    interior = grid.distances() > 0.2
    approximate = ma_ws(grid, u, stencil_width=3)[interior]
    expected = np.abs(u[interior]) ** -4
    assert np.max(np.abs(approximate / expected - 1.0)) <= 0.1


def test_solve_paraboloid(paraboloid_state):
    state = paraboloid_state
    assert state.converged
    np.testing.assert_allclose(state.u, paraboloid(state.grid.points), atol=1e-6)
    assert np.max(np.abs(state.residual)) <= 2e-6
    assert state.history[-1] < 1e-10
    assert len(state.rows()) == state.grid.size
    assert set(state.rows()[0]) == {'x', 'y', 'u', 'residual', 'd_x'}
    summary = json.loads(json.dumps(state.to_dict()))
    assert summary['nodes'] == state.grid.size
    assert summary['iterations'] == state.iterations


def test_field_interpolation(paraboloid_state, disk):
    field = paraboloid_state.field
    assert field.interpolate([[0.05, 0.05]])[0] == pytest.approx(paraboloid(np.array([[0.05, 0.05]]))[0], abs=1e-2)
    np.testing.assert_allclose(field.interpolate(field.grid.points), field.values, atol=1e-12)
    with pytest.raises(exc.DomainError):
        field.interpolate([[2.0, 0.0]])
    fine = field.prolongate(build_grid(disk, 1 / 16))
    assert np.all(fine.values <= 0.0)
    np.testing.assert_allclose(fine.values, paraboloid(fine.grid.points), atol=2e-2)
    with pytest.raises(exc.ResolutionError):
        GridField(field.grid, np.zeros(3))


def test_solve_iteration_limit(disk, unit_rhs):
    with pytest.raises(exc.IterationLimitExceeded) as info:
        solve(disk, unit_rhs, SolveConfig(h=1 / 8, tol=1e-10, max_iters=1))
    assert info.value.iterations == 1
    assert len(info.value.history) == 1
    assert info.value.residual > 0.0


def test_solve_rejects_bad_input(disk, trough):
    decreasing = RhsModel('power_law', GrowthParams(n=2, alpha=-1.0, beta=3.0), allow_negative_alpha=True)
    with pytest.raises(exc.ParameterDomainError):
        solve(disk, decreasing)
    with pytest.raises(exc.ResolutionError):
        solve(trough, RhsModel.pure_hyperbolic(3))
    grid = build_grid(disk, 1 / 8)
    with pytest.raises(exc.ResolutionError):
        solve(disk, RhsModel.pure_hyperbolic(2), SolveConfig(h=1 / 8), init=np.zeros(grid.size + 1))


def test_solve_config():
    config = SolveConfig.from_dict({'h': 0.0625, 'stencil_width': 3})
    assert config.h == 0.0625
    assert SolveConfig.from_dict(config.to_dict()).stencil_width == 3
    with pytest.raises(exc.ParameterDomainError):
        SolveConfig.from_dict({'h': 0.1, 'smoothing': 2})
    with pytest.raises(exc.ParameterDomainError):
        SolveConfig(damping=0.0)
    with pytest.raises(exc.ParameterDomainError):
        SolveConfig(tol=-1.0)
    with pytest.raises(exc.ParameterDomainError):
        SolveConfig(z_floor=0.0)
    assert SolveConfig().clamp_for(RhsModel.pure_hyperbolic(2)) == 1e-8
    assert SolveConfig(z_floor=0.25).clamp_for(RhsModel.pure_hyperbolic(2)) == 0.25


def test_solve_uses_model_clamp_floor(disk, disk_barrier, coarse_hyperbolic_state):
    clamped_model = RhsModel.from_dict({'kind': 'pure_hyperbolic', 'n': 2, 'clamp_floor': 0.5})
    assert clamped_model.clamp_floor == 0.5
    clamped = solve(disk, clamped_model, SolveConfig(h=1 / 8, tol=1e-8), init=disk_barrier)
    plain = coarse_hyperbolic_state
    assert not np.array_equal(clamped.u, plain.u)
    # a smaller right-hand side gives a shallower solution
    assert np.mean(clamped.u) > np.mean(plain.u)

    overridden = solve(
        disk, RhsModel.pure_hyperbolic(2), SolveConfig(h=1 / 8, tol=1e-8, z_floor=0.5), init=disk_barrier,
    )
    np.testing.assert_array_equal(overridden.u, clamped.u)


def test_comparison_with_barrier(coarse_hyperbolic_state, disk_barrier):
    state = coarse_hyperbolic_state
    assert np.all(state.u < 0.0)
    report = discrete_comparison_check(state, disk_barrier)
    assert report.passed
    assert report.tol == pytest.approx(np.sqrt(1 / 8))
    assert report.to_dict()['passed']
    params = disk_barrier.params
    weak = BarrierFunction(params.with_M(params.M / 2 ** 20))
    report = discrete_comparison_check(state, weak)
    assert not report.passed
    assert not report.lower_passed
    assert report.upper_passed
    assert report.worst_gap < 0.0


@pytest.mark.slow
def test_fine_solution_matches_ball(fine_hyperbolic_state):
    state = fine_hyperbolic_state
    exact = exact_ball(2).values(state.grid.points)
    interior = state.grid.distances() >= 4 * state.grid.h
    relative = np.abs(state.u[interior] - exact[interior]) / np.abs(exact[interior])
    assert np.max(relative) <= 5e-2


@pytest.mark.slow
def test_error_decreases_with_spacing(disk, hyperbolic_2d, disk_barrier, fine_hyperbolic_state):
    coarse = solve(disk, hyperbolic_2d, SolveConfig(h=1 / 32, stencil_width=3, tol=1e-6, levels=1), init=disk_barrier)
    fine = fine_hyperbolic_state
    lookup = {tuple(2 * index): i for i, index in enumerate(coarse.grid.index)}
    pairs = [(lookup[tuple(index)], j) for j, index in enumerate(fine.grid.index) if tuple(index) in lookup]
    coarse_nodes = np.array([i for i, _ in pairs])
    fine_nodes = np.array([j for _, j in pairs])
    keep = coarse.grid.distances()[coarse_nodes] >= 0.125
    exact = exact_ball(2).values(coarse.grid.points[coarse_nodes][keep])
    coarse_error = np.max(np.abs(coarse.u[coarse_nodes][keep] - exact))
    fine_error = np.max(np.abs(fine.u[fine_nodes][keep] - exact))
    assert coarse_error > fine_error


@pytest.mark.slow
def test_fine_solution_rate(fine_hyperbolic_state, disk, disk_barrier):
    state = fine_hyperbolic_state
    assert discrete_comparison_check(state, disk_barrier).passed
    profile = ray_profile(state.field, disk_barrier.frame, disk)
    assert profile.shape[0] == 10
    report = fit_rate(profile, disk_barrier.exponent)
    assert report.mu_fitted == pytest.approx(0.5, abs=0.05)
    assert report.mu_theory == pytest.approx(0.5)


@pytest.mark.slow
def test_quartic_rate(quartic, hyperbolic_2d):
    certificate = certify_k_convexity(quartic, (0.0, 0.0), 1, (4.0,), (1.0,))
    barrier = mabound.find_eps_M(certificate, hyperbolic_2d)
    config = SolveConfig(h=1 / 32, stencil_width=3, tol=1e-6, levels=1)
    state = solve(quartic, hyperbolic_2d, config, init=barrier)
    assert discrete_comparison_check(state, barrier).passed
    profile = ray_profile(state.field, barrier.frame, quartic, near_layers=2, far_fraction=0.25)
    report = fit_rate(profile, barrier.exponent)
    assert check_bound(profile, 5 / 12, 1.1 * report.C_fitted).passed
