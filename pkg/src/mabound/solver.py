"""Monotone wide-stencil solver for det D^2 u = F(x, u, Du), u = 0 on the boundary, in two dimensions.

The determinant is approximated at an interior node by

    ma_ws(u) = min over orthogonal lattice pairs (v, w) of max(D_v u, 0) max(D_w u, 0),

where D_v is the centred second difference along the unit vector v/|v|,
with legs shortened to the boundary cut (where u = 0) whenever the
neighbouring lattice node lies outside the domain. ma_ws is non-decreasing
in every neighbouring value and non-increasing in the node's own value, so
the one-node equation ma_ws = F can be solved by bisection and swept with
nonlinear Gauss-Seidel.
"""
from __future__ import annotations

__all__ = (
    "DIRECTIONS",
    "ComparisonReport",
    "Grid",
    "GridField",
    "SolveConfig",
    "SolverState",
    "build_grid",
    "discrete_comparison_check",
    "ma_ws",
    "solve",
)

import math
import typing as t

import attr
import numpy as np
from loguru import logger
from scipy.interpolate import LinearNDInterpolator, griddata

from .exceptions import DomainError, IterationLimitExceeded, ParameterDomainError, ResolutionError
from .stopwatch import Stopwatch

if t.TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from .barrier import BarrierFunction
    from .geometry import ConvexDomain
    from .rhs import RhsModel

    Array = NDArray[np.float64]
    IntArray = NDArray[np.int64]

#: lattice directions; consecutive entries form orthogonal pairs
DIRECTIONS: tuple[tuple[int, int], ...] = ((1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, -1), (2, 1), (1, -2))
_PAIRS: dict[int, tuple[tuple[int, int], ...]] = {
    1: ((0, 1),),
    2: ((0, 1), (2, 3)),
    3: ((0, 1), (2, 3), (4, 5), (6, 7)),
}
_CUT_STEPS = 60
_BISECTION_STEPS = 60
_MIN_LEG = 1e-12
_COLORS = 4
_LOG_EVERY = 500


@attr.s(frozen=True, eq=False, slots=True, auto_attribs=True)
class SolveConfig:
    """Parameters of a solve.

    Attributes
    ----------
    h: float
        The lattice spacing of the finest level.
    stencil_width: int
        1 uses the axes, 2 adds the diagonals, 3 adds (1, +-2) and (2, +-1).
    damping: float
        The fraction of each one-node correction that is applied, in (0, 1].
    tol: float
        Iteration stops once the sup-norm of a sweep's update falls below tol.
    max_iters: int
        The maximum number of sweeps per level.
    z_floor: float, optional
        F is evaluated at min(u, -z_floor). Defaults to the clamp_floor of the
        right-hand side being solved.
    levels: int
        The number of coarser levels (spacing h 2^j) solved first and prolongated.
    comparison_constant: float
        The constant C of the comparison tolerance C h^(1/2).
    """
    h: float = attr.ib(default=1.0 / 32.0, converter=float)
    stencil_width: int = attr.ib(default=2, converter=int, validator=attr.validators.in_((1, 2, 3)))
    damping: float = attr.ib(default=1.0, converter=float)
    tol: float = attr.ib(default=1e-7, converter=float)
    max_iters: int = attr.ib(default=20000, converter=int)
    z_floor: float | None = attr.ib(default=None, converter=attr.converters.optional(float))
    levels: int = attr.ib(default=0, converter=int)
    comparison_constant: float = attr.ib(default=1.0, converter=float)

    def __attrs_post_init__(self) -> None:
        problems: list[str] = []
        if self.h <= 0.0:
            problems.append("h > 0")
        if not 0.0 < self.damping <= 1.0:
            problems.append("0 < damping <= 1")
        if self.tol <= 0.0:
            problems.append("tol > 0")
        if self.max_iters < 1:
            problems.append("max_iters >= 1")
        if self.z_floor is not None and self.z_floor <= 0.0:
            problems.append("z_floor > 0")
        if self.levels < 0:
            problems.append("levels >= 0")
        if self.comparison_constant <= 0.0:
            problems.append("comparison_constant > 0")
        if problems:
            raise ParameterDomainError(tuple(problems))

    def clamp_for(self, model: RhsModel) -> float:
        """The floor on |z| used when evaluating the given right-hand side."""
        return model.clamp_floor if self.z_floor is None else self.z_floor

    def to_dict(self) -> dict[str, t.Any]:
        return attr.asdict(self)

    @classmethod
    def from_dict(cls, d: t.Mapping[str, t.Any]) -> SolveConfig:
        known = {a.name for a in attr.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ParameterDomainError(tuple(f"unknown solver option: {name}" for name in sorted(unknown)))
        return cls(**d)


@attr.s(frozen=True, eq=False, auto_attribs=True)
class Grid:
    """The interior lattice nodes of a domain with their stencil legs.

    Attributes
    ----------
    domain: ConvexDomain
        The discretised domain.
    h: float
        The lattice spacing.
    index: numpy.ndarray
        (N, 2) integer lattice coordinates of the interior nodes.
    points: numpy.ndarray
        (N, 2) node positions, h * index.
    neighbors: numpy.ndarray
        (N, D, 2) index of the node at the end of the forward and backward leg
        along each direction, or -1 where the leg ends on the boundary.
    legs: numpy.ndarray
        (N, D, 2) length of each leg.
    colors: numpy.ndarray
        (N,) lattice-parity class (i mod 2) + 2 (j mod 2).
    """
    domain: ConvexDomain
    h: float
    index: IntArray
    points: Array
    neighbors: IntArray
    legs: Array
    colors: IntArray
    _distance_cache: dict[str, Array] = attr.ib(factory=dict, init=False, repr=False)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def distances(self) -> Array:
        """The distance to the boundary at every node, computed once."""
        if "d" not in self._distance_cache:
            self._distance_cache["d"] = self.domain.distances(self.points)
        return self._distance_cache["d"]

    def boundary_points(self) -> Array:
        """The boundary cut points at the end of every leg that leaves the lattice."""
        cut = self.neighbors < 0
        node, direction, side = np.nonzero(cut)
        vectors = np.asarray(DIRECTIONS, dtype=float)
        units = vectors / np.linalg.norm(vectors, axis=1)[:, None]
        sign = np.where(side == 0, 1.0, -1.0)
        return self.points[node] + (sign * self.legs[node, direction, side])[:, None] * units[direction]


def _boundary_cuts(domain: ConvexDomain, origins: Array, steps: Array) -> Array:
    """Bisects each segment origin -> origin + step for the point where the domain ends."""
    far = origins + steps
    if np.any(domain.contains(far)):
        raise ResolutionError(float(np.linalg.norm(steps[0])), "lattice does not cover the domain")
    lo = np.zeros(origins.shape[0])
    hi = np.ones(origins.shape[0])
    for _ in range(_CUT_STEPS):
        mid = 0.5 * (lo + hi)
        inside = domain.contains(origins + mid[:, None] * steps)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def build_grid(domain: ConvexDomain, h: float) -> Grid:
    """Classifies the lattice h Z^2 against the domain and computes the boundary cuts.

    Raises
    ------
    ResolutionError
        If the domain is not two-dimensional, h exceeds a quarter of the
        diameter, or no lattice node lies inside the domain.
    """
    if domain.n != 2:  # noqa: PLR2004
        raise ResolutionError(h, f"the solver supports n = 2 only (got n = {domain.n})")
    if h <= 0.0 or h > domain.diameter / 4.0:
        raise ResolutionError(h, f"spacing must lie in (0, diameter/4 = {domain.diameter / 4.0:.6g}]")
    lo, hi = domain.bbox
    pad = 2
    i_min = math.floor(lo[0] / h) - pad
    j_min = math.floor(lo[1] / h) - pad
    i_count = math.ceil(hi[0] / h) + pad - i_min + 1
    j_count = math.ceil(hi[1] / h) + pad - j_min + 1
    ii, jj = np.meshgrid(np.arange(i_count) + i_min, np.arange(j_count) + j_min, indexing="ij")
    lattice = np.stack([ii.ravel(), jj.ravel()], axis=1)
    inside = domain.contains(h * lattice.astype(float))
    index = lattice[inside]
    if index.shape[0] == 0:
        raise ResolutionError(h, "no lattice node lies inside the domain")

    lookup = np.full((i_count, j_count), -1, dtype=np.int64)
    lookup[index[:, 0] - i_min, index[:, 1] - j_min] = np.arange(index.shape[0])
    points = h * index.astype(float)

    count = index.shape[0]
    neighbors = np.full((count, len(DIRECTIONS), 2), -1, dtype=np.int64)
    legs = np.empty((count, len(DIRECTIONS), 2))
    for d, vector in enumerate(DIRECTIONS):
        v = np.asarray(vector)
        length = h * float(np.linalg.norm(v))
        for side, sign in enumerate((1, -1)):
            target = index + sign * v - np.array([i_min, j_min])
            valid = (
                (target[:, 0] >= 0) & (target[:, 0] < i_count) & (target[:, 1] >= 0) & (target[:, 1] < j_count)
            )
            nbr = np.full(count, -1, dtype=np.int64)
            nbr[valid] = lookup[target[valid, 0], target[valid, 1]]
            neighbors[:, d, side] = nbr
            legs[:, d, side] = length
            cut = nbr < 0
            if np.any(cut):
                fraction = _boundary_cuts(domain, points[cut], np.broadcast_to(sign * h * v, (int(cut.sum()), 2)))
                legs[cut, d, side] = np.maximum(fraction * length, _MIN_LEG)
    colors = (index[:, 0] % 2) + 2 * (index[:, 1] % 2)
    logger.debug(f"grid h = {h:.6g}: {count} interior nodes, {int(np.sum(neighbors < 0))} boundary cuts")
    return Grid(domain, float(h), index, points, neighbors, legs, colors.astype(np.int64))


@attr.s(frozen=True, eq=False, auto_attribs=True)
class GridField:
    """Values attached to the interior nodes of a grid, with u = 0 on the boundary."""
    grid: Grid
    values: Array

    def __attrs_post_init__(self) -> None:
        if self.values.shape != (self.grid.size,):
            raise ResolutionError(self.grid.h, "field size does not match the grid")

    def _scattered(self) -> tuple[Array, Array]:
        boundary = self.grid.boundary_points()
        points = np.concatenate([self.grid.points, boundary])
        values = np.concatenate([self.values, np.zeros(boundary.shape[0])])
        return points, values

    def interpolate(self, points: ArrayLike) -> Array:
        """Piecewise-linear interpolation of the field (with u = 0 on the boundary cuts).

        Raises
        ------
        DomainError
            If some point lies outside the convex hull of nodes and cuts.
        """
        nodes, values = self._scattered()
        query = np.atleast_2d(np.asarray(points, dtype=float))
        result = np.asarray(LinearNDInterpolator(nodes, values)(query), dtype=float)
        if np.any(np.isnan(result)):
            bad = query[np.isnan(result)][0]
            raise DomainError("interpolation point outside the discretised domain", tuple(bad))
        return result

    def prolongate(self, grid: Grid) -> GridField:
        """Transfers the field to another grid of the same domain."""
        nodes, values = self._scattered()
        fine = np.asarray(griddata(nodes, values, grid.points, method="linear"), dtype=float)
        missing = np.isnan(fine)
        if np.any(missing):
            logger.warning(f"prolongation: {int(missing.sum())} nodes outside the coarse hull; using nearest values")
            fine[missing] = griddata(nodes, values, grid.points[missing], method="nearest")
        return GridField(grid, np.minimum(fine, 0.0))


def _gather(grid: Grid, u: Array, nodes: IntArray | slice) -> Array:
    nbr = grid.neighbors[nodes]
    return np.where(nbr >= 0, u[np.maximum(nbr, 0)], 0.0)


def _second_difference_terms(grid: Grid, u: Array, nodes: IntArray | slice) -> tuple[Array, Array]:
    """Splits each second difference as A - c u_node, returning (A, c) with shape (m, D)."""
    values = _gather(grid, u, nodes)
    legs = grid.legs[nodes]
    plus, minus = legs[..., 0], legs[..., 1]
    coupling = 2.0 / (plus + minus) * (values[..., 0] / plus + values[..., 1] / minus)
    diagonal = 2.0 / (plus * minus)
    return coupling, diagonal


def _pair_min(second: Array, width: int) -> Array:
    positive = np.maximum(second, 0.0)
    products = [positive[:, a] * positive[:, b] for a, b in _PAIRS[width]]
    return np.min(np.stack(products, axis=1), axis=1)


def ma_ws(grid: Grid, u: ArrayLike, node: int | None = None, stencil_width: int = 2) -> t.Any:
    """Evaluates the wide-stencil Monge-Ampere operator.

    Parameters
    ----------
    grid: Grid
        The lattice.
    u: ArrayLike
        Values at the interior nodes; u = 0 is used on the boundary.
    node: int, optional
        A single node; every node when omitted.
    stencil_width: int
        1, 2 or 3.
    """
    if stencil_width not in _PAIRS:
        raise ParameterDomainError(("stencil_width in {1, 2, 3}",))
    values = np.asarray(u, dtype=float)
    nodes: IntArray | slice = slice(None) if node is None else np.array([node])
    coupling, diagonal = _second_difference_terms(grid, values, nodes)
    own = values[nodes]
    result = _pair_min(coupling - diagonal * own[:, None], stencil_width)
    return float(result[0]) if node is not None else result


def _gradient_norm_sq(grid: Grid, u: Array, nodes: IntArray | slice) -> Array:
    """Squared norm of the three-point gradient along the axes (non-uniform at cuts)."""
    values = _gather(grid, u, nodes)[:, :2, :]
    legs = grid.legs[nodes][:, :2, :]
    own = u[nodes][:, None]
    plus, minus = legs[..., 0], legs[..., 1]
    grad = (
        values[..., 0] * minus * minus - values[..., 1] * plus * plus - own * (minus * minus - plus * plus)
    ) / (plus * minus * (plus + minus))
    return np.sum(grad * grad, axis=1)


@attr.s(frozen=True, eq=False, auto_attribs=True)
class _NodeProblem:
    """The one-node equations ma_ws(z) = F(x, min(z, -z_floor), q) for a set of nodes."""
    coupling: Array
    diagonal: Array
    q_norm_sq: Array
    distances: Array | None
    model: RhsModel
    config: SolveConfig

    def residual(self, z: Array) -> Array:
        second = self.coupling - self.diagonal * z[:, None]
        clamped = np.minimum(z, -self.config.clamp_for(self.model))
        return _pair_min(second, self.config.stencil_width) - self.model.evaluate_norm(
            clamped, self.q_norm_sq, self.distances,
        )

    def solve(self, floor: float) -> Array:
        count = self.coupling.shape[0]
        hi = np.zeros(count)
        at_zero = self.residual(hi) >= 0.0
        lo = np.full(count, floor)
        low_value = self.residual(lo)
        widenings = 0
        while np.any(low_value < 0.0) and widenings < _BISECTION_STEPS:
            lo[low_value < 0.0] *= 2.0
            low_value = self.residual(lo)
            widenings += 1
        if widenings:
            logger.warning(f"one-node bracket widened {widenings} times (lower end {float(np.min(lo)):.6g})")
        precision = 1e-3 * self.config.tol
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            above = self.residual(mid) >= 0.0
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if float(np.max(hi - lo)) < precision:
                break
        root = 0.5 * (lo + hi)
        root[at_zero] = 0.0
        return root


@attr.s(frozen=True, eq=False, auto_attribs=True)
class SolverState:
    """The outcome of a solve.

    Attributes
    ----------
    field: GridField
        The computed values at the interior nodes of the finest grid.
    config: SolveConfig
        The configuration of the solve.
    iterations: int
        The number of sweeps on the finest level.
    last_update: float
        The sup-norm of the last sweep's update.
    residual: numpy.ndarray
        ma_ws(u) - F(x, min(u, -z_floor), D_h u) at every node.
    history: tuple[float, ...]
        The sup-norm update of every sweep, over all levels.
    duration: float
        Wall-clock seconds spent in the solve.
    converged: bool
        Whether the last level met the tolerance.
    """
    field: GridField
    config: SolveConfig
    iterations: int
    last_update: float
    residual: Array
    history: tuple[float, ...]
    duration: float
    converged: bool

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def u(self) -> Array:
        return self.field.values

    def rows(self) -> list[dict[str, float]]:
        """One record per node with the columns x, y, u, residual, d_x."""
        distances = self.grid.distances()
        return [
            {"x": float(p[0]), "y": float(p[1]), "u": float(v), "residual": float(r), "d_x": float(d)}
            for p, v, r, d in zip(self.grid.points, self.u, self.residual, distances, strict=True)
        ]

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "config": self.config.to_dict(),
            "nodes": self.grid.size,
            "iterations": self.iterations,
            "converged": self.converged,
            "last_update": self.last_update,
            "max_residual": float(np.max(np.abs(self.residual))),
            "min_u": float(np.min(self.u)),
            "history": list(self.history),
        }


def _residual(grid: Grid, model: RhsModel, config: SolveConfig, u: Array, distances: Array | None) -> Array:
    coupling, diagonal = _second_difference_terms(grid, u, slice(None))
    q_norm_sq = _gradient_norm_sq(grid, u, slice(None)) if model.params.gamma != 0.0 else np.zeros(grid.size)
    problem = _NodeProblem(coupling, diagonal, q_norm_sq, distances, model, config)
    return problem.residual(u)


def _sweep(
    grid: Grid,
    model: RhsModel,
    config: SolveConfig,
    u: Array,
    color_nodes: list[IntArray],
    distances: Array | None,
) -> float:
    """One Gauss-Seidel sweep over the colour classes; returns the sup-norm update."""
    update = 0.0
    for nodes in color_nodes:
        coupling, diagonal = _second_difference_terms(grid, u, nodes)
        if model.params.gamma != 0.0:
            q_norm_sq = _gradient_norm_sq(grid, u, nodes)
        else:
            q_norm_sq = np.zeros(nodes.size)
        problem = _NodeProblem(
            coupling, diagonal, q_norm_sq, None if distances is None else distances[nodes], model, config,
        )
        floor = min(2.0 * float(np.min(u)), -1.0)
        root = problem.solve(floor)
        old = u[nodes]
        new = old + config.damping * (root - old)
        update = max(update, float(np.max(np.abs(new - old))))
        u[nodes] = new
    return update


def _level_spacings(domain: ConvexDomain, config: SolveConfig) -> list[float]:
    spacings = []
    for level in range(config.levels, 0, -1):
        h = config.h * 2.0 ** level
        if h <= domain.diameter / 4.0:
            spacings.append(h)
        else:
            logger.debug(f"skipping coarse level h = {h:.6g}: coarser than diameter/4")
    spacings.append(config.h)
    return spacings


def _initial_values(grid: Grid, init: BarrierFunction | ArrayLike | None) -> Array:
    if init is None:
        return np.zeros(grid.size)
    if hasattr(init, "evaluate_world"):
        barrier = t.cast("BarrierFunction", init)
        value, _, _ = barrier.evaluate_world(grid.points)
        return np.minimum(value, 0.0)
    values = np.asarray(init, dtype=float)
    if values.shape != (grid.size,):
        raise ResolutionError(grid.h, "initial values do not match the grid")
    return np.minimum(values, 0.0)


def solve(
    domain: ConvexDomain,
    model: RhsModel,
    config: SolveConfig | None = None,
    init: BarrierFunction | ArrayLike | None = None,
) -> SolverState:
    """Solves det D^2 u = F(x, u, Du), u = 0 on the boundary, by nonlinear Gauss-Seidel.

    Parameters
    ----------
    domain: ConvexDomain
        A bounded convex domain in the plane.
    model: RhsModel
        The right-hand side; must be non-decreasing in z.
    config: SolveConfig, optional
        Solver parameters; defaults to ``SolveConfig()``.
    init: BarrierFunction | ArrayLike, optional
        The initial field on the coarsest level: a barrier (sampled at the
        nodes), explicit node values, or zero when omitted.

    Raises
    ------
    ResolutionError
        If the domain is not planar or the grid cannot be built.
    ParameterDomainError
        If the model is not monotone in z.
    IterationLimitExceeded
        If some level does not reach the tolerance within max_iters sweeps.
    """
    config = config or SolveConfig()
    if domain.n != 2:  # noqa: PLR2004
        raise ResolutionError(config.h, f"the solver supports n = 2 only (got n = {domain.n})")
    if not model.is_monotone:
        raise ParameterDomainError(("F must be non-decreasing in z (alpha >= 0)",))

    stopwatch = Stopwatch()
    stopwatch.start()
    history: list[float] = []
    field: GridField | None = None
    iterations = 0
    update = math.inf
    for h in _level_spacings(domain, config):
        grid = build_grid(domain, h)
        u = _initial_values(grid, init) if field is None else field.prolongate(grid).values.copy()
        distances = grid.distances() if model.needs_distance else None
        color_nodes = [np.flatnonzero(grid.colors == c) for c in range(_COLORS)]
        color_nodes = [nodes for nodes in color_nodes if nodes.size]

        iterations = 0
        update = math.inf
        while update >= config.tol:
            if iterations >= config.max_iters:
                residual = _residual(grid, model, config, u, distances)
                raise IterationLimitExceeded(iterations, tuple(history), float(np.max(np.abs(residual))))
            update = _sweep(grid, model, config, u, color_nodes, distances)
            iterations += 1
            history.append(update)
            if iterations % _LOG_EVERY == 0:
                logger.debug(f"h = {h:.6g}: sweep {iterations}, update {update:.3e}")
        stopwatch.lap(f"h = {h:.6g}")
        logger.debug(f"h = {h:.6g}: converged after {iterations} sweeps ({grid.size} nodes)")
        field = GridField(grid, u)

    stopwatch.stop()
    assert field is not None
    residual = _residual(field.grid, model, config, field.values, distances)
    logger.info(
        f"solver converged: {iterations} sweeps on the finest level, "
        f"max residual {float(np.max(np.abs(residual))):.3e}, {stopwatch}",
    )
    return SolverState(
        field=field,
        config=config,
        iterations=iterations,
        last_update=update,
        residual=residual,
        history=tuple(history),
        duration=stopwatch.duration,
        converged=True,
    )


@attr.s(frozen=True, eq=False, auto_attribs=True)
class ComparisonReport:
    """The outcome of checking W - tol (1 + |W|) <= u <= 0 at every node.

    ``worst_gap`` is the smallest value of u - W + tol (1 + |W|); it is
    negative exactly when the lower comparison fails.
    """
    passed: bool
    lower_passed: bool
    upper_passed: bool
    tol: float
    worst_gap: float
    worst_node: Array
    max_u: float

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "passed": self.passed,
            "lower_passed": self.lower_passed,
            "upper_passed": self.upper_passed,
            "tol": self.tol,
            "worst_gap": self.worst_gap,
            "worst_node": self.worst_node.tolist(),
            "max_u": self.max_u,
        }


def discrete_comparison_check(
    state: SolverState,
    barrier: BarrierFunction,
    tol_geom: float | None = None,
) -> ComparisonReport:
    """Checks that the computed field lies between the barrier and zero.

    The tolerance defaults to C h^(1/2) with C the comparison constant of the
    solve configuration.
    """
    tol = state.config.comparison_constant * math.sqrt(state.grid.h) if tol_geom is None else tol_geom
    w, _, _ = barrier.evaluate_world(state.grid.points)
    gap = state.u - w + tol * (1.0 + np.abs(w))
    worst = int(np.argmin(gap))
    max_u = float(np.max(state.u))
    lower = bool(gap[worst] >= 0.0)
    upper = max_u <= 0.0
    if not lower:
        logger.info(f"comparison fails at {state.grid.points[worst].tolist()}: gap {float(gap[worst]):.3e}")
    return ComparisonReport(
        passed=lower and upper,
        lower_passed=lower,
        upper_passed=upper,
        tol=tol,
        worst_gap=float(gap[worst]),
        worst_node=state.grid.points[worst].copy(),
        max_u=max_u,
    )
