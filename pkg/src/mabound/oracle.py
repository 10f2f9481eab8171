"""Closed-form solutions of det D^2 u = |u|^(-(n+2)) and finite-difference checks.

Three exact solutions vanish on the boundary of their natural domains:

* ``ball``: u = -sqrt(1 - |x|^2) on the unit ball;
* ``cylinder``: u = -c x_n^(1/(n+1)) (1 - |x'|^2)^(n/(2(n+1))) with
  c = sqrt(n+1) n^(-n/(2(n+1))), on {|x'| < 1, x_n > 0};
* ``cone``: u = -(K x_n^2 - |x'|^2)^(n/(2(n+1))) with K = (n+1)^(n+1)/n^n,
  on {x_n > |x'| / sqrt(K)}.
"""
from __future__ import annotations

__all__ = (
    "BALL",
    "CONE",
    "CYLINDER",
    "ExactSolution",
    "exact_ball",
    "exact_cone",
    "exact_cylinder",
    "fd_gradient",
    "fd_hessian",
    "interior_sample",
    "natural_distance",
    "pde_residual",
)

import math
import typing as t

import attr
import numpy as np

from .exceptions import DomainError

if t.TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    Array = NDArray[np.float64]

BALL = "ball"
CYLINDER = "cylinder"
CONE = "cone"


def _point(x: ArrayLike, n: int) -> Array:
    point = np.asarray(x, dtype=float)
    if point.shape != (n,):
        raise DomainError(f"expected a point with {n} coordinates", tuple(np.ravel(point)))
    return point


@attr.s(frozen=True, slots=True, auto_attribs=True)
class ExactSolution:
    """An exact solution on its natural domain.

    Attributes
    ----------
    kind: str
        One of ``"ball"``, ``"cylinder"`` or ``"cone"``.
    n: int
        The dimension.
    """
    kind: str = attr.ib(validator=attr.validators.in_((BALL, CYLINDER, CONE)))
    n: int = attr.ib(converter=int)

    @n.validator
    def _check_n(self, attribute: attr.Attribute[int], value: int) -> None:
        if value < 2:  # noqa: PLR2004
            raise DomainError(f"dimension must be at least 2 (got {value})")

    @property
    def cylinder_constant(self) -> float:
        n = self.n
        return math.sqrt(n + 1.0) * n ** (-n / (2.0 * (n + 1.0)))

    @property
    def cone_constant(self) -> float:
        n = self.n
        return (n + 1.0) ** (n + 1.0) / n ** n

    @property
    def half_power(self) -> float:
        return self.n / (2.0 * (self.n + 1.0))

    def natural_distance(self, x: ArrayLike) -> float:
        """The distance from x to the boundary of the natural domain; nonpositive outside."""
        point = _point(x, self.n)
        tangential = float(np.linalg.norm(point[:-1]))
        last = float(point[-1])
        if self.kind == BALL:
            return 1.0 - float(np.linalg.norm(point))
        if self.kind == CYLINDER:
            return min(last, 1.0 - tangential)
        slope = 1.0 / math.sqrt(self.cone_constant)
        return (last - slope * tangential) / math.sqrt(1.0 + slope * slope)

    def contains(self, x: ArrayLike) -> bool:
        return self.natural_distance(x) > 0.0

    def _require_inside(self, point: Array) -> None:
        if not self.contains(point):
            raise DomainError(f"point is outside the natural domain of the {self.kind} solution", tuple(point))

    def value(self, x: ArrayLike) -> float:
        """Evaluates u at x.

        Raises
        ------
        DomainError
            If x is not strictly inside the natural domain.
        """
        point = _point(x, self.n)
        self._require_inside(point)
        tangential_sq = float(point[:-1] @ point[:-1])
        if self.kind == BALL:
            return -math.sqrt(1.0 - float(point @ point))
        if self.kind == CYLINDER:
            return -self.cylinder_constant * point[-1] ** (1.0 / (self.n + 1.0)) * (
                1.0 - tangential_sq
            ) ** self.half_power
        return -((self.cone_constant * point[-1] ** 2 - tangential_sq) ** self.half_power)

    def values(self, points: ArrayLike) -> Array:
        """Evaluates u at every row of an (m, n) array."""
        return np.array([self.value(p) for p in np.atleast_2d(points)])

    def gradient(self, x: ArrayLike) -> Array:
        """Evaluates Du at x in closed form."""
        point = _point(x, self.n)
        self._require_inside(point)
        tangential = point[:-1]
        tangential_sq = float(tangential @ tangential)
        grad = np.empty(self.n)
        if self.kind == BALL:
            return point / math.sqrt(1.0 - float(point @ point))
        q = self.half_power
        if self.kind == CYLINDER:
            c, p, last = self.cylinder_constant, 1.0 / (self.n + 1.0), float(point[-1])
            rest = 1.0 - tangential_sq
            grad[:-1] = 2.0 * c * q * last ** p * rest ** (q - 1.0) * tangential
            grad[-1] = -c * p * last ** (p - 1.0) * rest ** q
            return grad
        big_k = self.cone_constant
        bracket = big_k * point[-1] ** 2 - tangential_sq
        grad[:-1] = 2.0 * q * bracket ** (q - 1.0) * tangential
        grad[-1] = -2.0 * q * big_k * point[-1] * bracket ** (q - 1.0)
        return grad

    def hessian(self, x: ArrayLike) -> Array:
        """Evaluates D^2 u at x.

        The ball Hessian is exact; the others use Richardson-extrapolated
        central differences with a step proportional to the natural distance.
        """
        point = _point(x, self.n)
        self._require_inside(point)
        if self.kind == BALL:
            w_sq = 1.0 - float(point @ point)
            w = math.sqrt(w_sq)
            return np.eye(self.n) / w + np.outer(point, point) / (w * w_sq)
        step = 4e-3 * min(1.0, self.natural_distance(point))
        return fd_hessian(self.value, point, h=step, richardson=True)


def exact_ball(n: int) -> ExactSolution:
    return ExactSolution(BALL, n)


def exact_cylinder(n: int) -> ExactSolution:
    return ExactSolution(CYLINDER, n)


def exact_cone(n: int) -> ExactSolution:
    return ExactSolution(CONE, n)


def natural_distance(solution: ExactSolution, x: ArrayLike) -> float:
    return solution.natural_distance(x)


def _default_step(point: Array) -> float:
    return 1e-5 * max(1.0, float(np.linalg.norm(point)))


def fd_gradient(
    f: t.Callable[[Array], float],
    x: ArrayLike,
    h: float | None = None,
) -> Array:
    """Central-difference gradient of a scalar function."""
    point = np.asarray(x, dtype=float)
    step = _default_step(point) if h is None else h
    grad = np.empty(point.size)
    for i in range(point.size):
        e = np.zeros(point.size)
        e[i] = step
        grad[i] = (f(point + e) - f(point - e)) / (2.0 * step)
    return grad


def _central_hessian(f: t.Callable[[Array], float], point: Array, step: float) -> Array:
    n = point.size
    basis = np.eye(n) * step
    centre = f(point)
    hess = np.empty((n, n))
    for i in range(n):
        hess[i, i] = (f(point + basis[i]) - 2.0 * centre + f(point - basis[i])) / (step * step)
        for j in range(i + 1, n):
            mixed = (
                f(point + basis[i] + basis[j])
                - f(point + basis[i] - basis[j])
                - f(point - basis[i] + basis[j])
                + f(point - basis[i] - basis[j])
            ) / (4.0 * step * step)
            hess[i, j] = hess[j, i] = mixed
    return hess


def fd_hessian(
    f: t.Callable[[Array], float],
    x: ArrayLike,
    h: float | None = None,
    richardson: bool = False,
) -> Array:
    """Central-difference Hessian of a scalar function.

    Parameters
    ----------
    f: Callable[[numpy.ndarray], float]
        The function to differentiate.
    x: ArrayLike
        The evaluation point.
    h: float, optional
        The step; defaults to 1e-5 max(1, |x|).
    richardson: bool
        Combines steps h and 2h to cancel the leading error term.
    """
    point = np.asarray(x, dtype=float)
    step = _default_step(point) if h is None else h
    fine = _central_hessian(f, point, step)
    if not richardson:
        return fine
    coarse = _central_hessian(f, point, 2.0 * step)
    return (4.0 * fine - coarse) / 3.0


def pde_residual(solution: ExactSolution, x: ArrayLike) -> float:
    """Computes det D^2 u(x) |u(x)|^(n+2) - 1, which vanishes for an exact solution."""
    point = _point(x, solution.n)
    u = solution.value(point)
    return float(np.linalg.det(solution.hessian(point)) * abs(u) ** (solution.n + 2) - 1.0)


def interior_sample(
    solution: ExactSolution,
    count: int,
    rng: np.random.Generator | None = None,
    margin: float = 0.1,
    height: float = 2.0,
) -> Array:
    """Draws points at natural distance at least ``margin`` from the boundary.

    The cylinder and the cone are truncated at x_n <= ``height``.
    """
    rng = rng or np.random.default_rng(0)
    n = solution.n
    if solution.kind == BALL:
        lo, hi = -np.ones(n), np.ones(n)
    else:
        radius = 1.0 if solution.kind == CYLINDER else height / math.sqrt(solution.cone_constant)
        lo = np.concatenate([-radius * np.ones(n - 1), [0.0]])
        hi = np.concatenate([radius * np.ones(n - 1), [height]])
    chunks: list[Array] = []
    found = 0
    while found < count:
        candidates = rng.uniform(lo, hi, size=(4 * count, n))
        keep = np.array([solution.natural_distance(p) >= margin for p in candidates])
        chunks.append(candidates[keep])
        found += int(keep.sum())
    return np.concatenate(chunks)[:count]
