"""Bounded convex domains given as intersections of convex constraints.

A domain is {x : g_j(x) < 0 for every j}. Besides membership, this module
answers the geometric questions needed by the barrier and solver modules:
distance to the boundary, ray exits, boundary sampling, canonical frames at
boundary points, and sample-based certificates of k-strict convexity.
"""
from __future__ import annotations

__all__ = (
    "Ball",
    "BoundaryFrame",
    "Constraint",
    "ConvexDomain",
    "ConvexityCertificate",
    "ConvexityFailure",
    "Halfspace",
    "PowerCup",
    "Superellipse",
    "box_constraints",
    "certify_k_convexity",
    "constraint_from_dict",
    "distance_to_boundary",
    "inward_ray",
)

import abc
import math
import typing as t

import attr
import numpy as np
from loguru import logger
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

from .exceptions import DomainError, FrameError, ParameterDomainError

if t.TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    Array = NDArray[np.float64]

_BISECTION_STEPS = 60
_BOUNDARY_TOL = 1e-8
_DIRECTIONS_2D = 720
_DIRECTIONS_ND = 4096


def _vector(values: ArrayLike) -> Array:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def _points(x: ArrayLike) -> tuple[Array, bool]:
    array = np.asarray(x, dtype=float)
    single = array.ndim == 1
    return np.atleast_2d(array), single


class Constraint(abc.ABC):
    """A convex function g whose sublevel set {g < 0} is one side of a domain."""

    @property
    @abc.abstractmethod
    def dim(self) -> int | None:
        """The ambient dimension, or None if the constraint fits any dimension."""

    @abc.abstractmethod
    def value(self, x: Array) -> Array:
        """Evaluates g at an (m, n) array of points."""

    @abc.abstractmethod
    def gradient(self, x: Array) -> Array:
        """Evaluates the gradient of g at an (m, n) array of points."""

    @abc.abstractmethod
    def to_dict(self) -> dict[str, t.Any]:
        ...

    def bounds(self, n: int) -> tuple[Array, Array]:
        """An axis-aligned box, possibly unbounded, containing {g < 0}."""
        return np.full(n, -np.inf), np.full(n, np.inf)

    def distance(self, x: Array) -> Array | None:
        """The distance from interior points to {g = 0}, when known in closed form."""
        return None


@attr.s(frozen=True, eq=False, auto_attribs=True)
class Halfspace(Constraint):
    """The open halfspace {x : normal . x < offset}."""
    normal: Array = attr.ib(converter=_vector)
    offset: float = attr.ib(converter=float)

    @property
    def dim(self) -> int:
        return int(self.normal.size)

    def value(self, x: Array) -> Array:
        return x @ self.normal - self.offset

    def gradient(self, x: Array) -> Array:
        return np.broadcast_to(self.normal, x.shape).copy()

    def bounds(self, n: int) -> tuple[Array, Array]:
        lo, hi = super().bounds(n)
        nonzero = np.flatnonzero(self.normal)
        if nonzero.size == 1:
            j = int(nonzero[0])
            limit = self.offset / self.normal[j]
            if self.normal[j] > 0:
                hi[j] = limit
            else:
                lo[j] = limit
        return lo, hi

    def distance(self, x: Array) -> Array:
        return (self.offset - x @ self.normal) / np.linalg.norm(self.normal)

    def to_dict(self) -> dict[str, t.Any]:
        return {"type": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}


@attr.s(frozen=True, eq=False, auto_attribs=True)
class Ball(Constraint):
    """The open ball of a given radius around a given center."""
    center: Array = attr.ib(converter=_vector)
    radius: float = attr.ib(converter=float)

    @radius.validator
    def _check_radius(self, attribute: attr.Attribute[float], value: float) -> None:
        if value <= 0.0:
            raise ParameterDomainError(("ball radius > 0",))

    @property
    def dim(self) -> int:
        return int(self.center.size)

    def value(self, x: Array) -> Array:
        return np.linalg.norm(x - self.center, axis=-1) - self.radius

    def gradient(self, x: Array) -> Array:
        offset = x - self.center
        norm = np.linalg.norm(offset, axis=-1, keepdims=True)
        return np.divide(offset, norm, out=np.zeros_like(offset), where=norm > 0)

    def bounds(self, n: int) -> tuple[Array, Array]:
        return self.center - self.radius, self.center + self.radius

    def distance(self, x: Array) -> Array:
        return self.radius - np.linalg.norm(x - self.center, axis=-1)

    def to_dict(self) -> dict[str, t.Any]:
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


@attr.s(frozen=True, eq=False, auto_attribs=True)
class Superellipse(Constraint):
    """The set sum_i |(x_i - c_i) / s_i|^(p_i) < 1 with every p_i >= 1."""
    powers: Array = attr.ib(converter=_vector)
    scales: Array = attr.ib(converter=_vector)
    center: Array | None = attr.ib(default=None)

    def __attrs_post_init__(self) -> None:
        if self.powers.shape != self.scales.shape:
            raise ParameterDomainError(("superellipse powers and scales must have equal length",))
        if np.any(self.powers < 1.0) or np.any(self.scales <= 0.0):
            raise ParameterDomainError(("superellipse powers >= 1 and scales > 0",))
        center = np.zeros_like(self.powers) if self.center is None else _vector(self.center)
        object.__setattr__(self, "center", center)

    @property
    def _center(self) -> Array:
        assert self.center is not None
        return self.center

    @property
    def dim(self) -> int:
        return int(self.powers.size)

    def value(self, x: Array) -> Array:
        scaled = np.abs((x - self._center) / self.scales)
        return np.sum(scaled ** self.powers, axis=-1) - 1.0

    def gradient(self, x: Array) -> Array:
        shifted = (x - self._center) / self.scales
        return self.powers / self.scales * np.sign(shifted) * np.abs(shifted) ** (self.powers - 1.0)

    def bounds(self, n: int) -> tuple[Array, Array]:
        return self._center - self.scales, self._center + self.scales

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "type": "superellipse",
            "powers": self.powers.tolist(),
            "scales": self.scales.tolist(),
            "center": self._center.tolist(),
        }


@attr.s(frozen=True, eq=False, auto_attribs=True)
class PowerCup(Constraint):
    """The region above a power cup, x_k > sum_{i<k} eta_i |x_i|^(a_i), k = len(eta).

    Coordinates are zero-based, so the cup opens along axis ``len(eta)``;
    the coordinates after that axis are unconstrained.
    """
    eta: Array = attr.ib(converter=_vector)
    a: Array = attr.ib(converter=_vector)

    def __attrs_post_init__(self) -> None:
        if self.eta.shape != self.a.shape:
            raise ParameterDomainError(("power cup eta and a must have equal length",))
        if np.any(self.a < 1.0) or np.any(self.eta <= 0.0):
            raise ParameterDomainError(("power cup a_i >= 1 and eta_i > 0",))

    @property
    def axis(self) -> int:
        return int(self.eta.size)

    @property
    def dim(self) -> None:
        return None

    def value(self, x: Array) -> Array:
        k = self.axis
        return np.sum(self.eta * np.abs(x[..., :k]) ** self.a, axis=-1) - x[..., k]

    def gradient(self, x: Array) -> Array:
        k = self.axis
        grad = np.zeros_like(x)
        head = x[..., :k]
        grad[..., :k] = self.eta * self.a * np.sign(head) * np.abs(head) ** (self.a - 1.0)
        grad[..., k] = -1.0
        return grad

    def bounds(self, n: int) -> tuple[Array, Array]:
        lo, hi = super().bounds(n)
        lo[self.axis] = 0.0
        return lo, hi

    def to_dict(self) -> dict[str, t.Any]:
        return {"type": "power_cup", "eta": self.eta.tolist(), "a": self.a.tolist()}


def box_constraints(lo: t.Sequence[float], hi: t.Sequence[float]) -> list[Constraint]:
    """The 2n halfspaces describing the open box lo < x < hi."""
    n = len(lo)
    constraints: list[Constraint] = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        constraints.append(Halfspace(-e, -float(lo[j])))
        constraints.append(Halfspace(e, float(hi[j])))
    return constraints


def constraint_from_dict(d: t.Mapping[str, t.Any]) -> list[Constraint]:
    """Builds the constraint(s) described by one entry of a domain description."""
    kind = str(d.get("type", "")).replace("-", "_").lower()
    try:
        if kind == "halfspace":
            return [Halfspace(d["normal"], d["offset"])]
        if kind == "ball":
            return [Ball(d["center"], d["radius"])]
        if kind == "superellipse":
            return [Superellipse(d["powers"], d["scales"], d.get("center"))]
        if kind == "power_cup":
            return [PowerCup(d["eta"], d["a"])]
        if kind == "box":
            return box_constraints(d["lo"], d["hi"])
    except KeyError as err:
        raise DomainError(f"constraint of type {kind!r} is missing field {err}") from err
    raise DomainError(f"unknown constraint type: {d.get('type')!r}")


def _bisect_exit(
    fn: t.Callable[[Array], Array],
    origin: Array,
    directions: Array,
    t_max: float,
) -> Array:
    """Finds where each ray origin + s * direction leaves {fn < 0}, or inf."""
    m = directions.shape[0]
    lo = np.zeros(m)
    hi = np.full(m, t_max)
    leaves = fn(origin + hi[:, None] * directions) >= 0.0
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        inside = fn(origin + mid[:, None] * directions) < 0.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    exit_length = 0.5 * (lo + hi)
    exit_length[~leaves] = np.inf
    return exit_length


def _unit_directions(n: int, count: int, seed: int = 0) -> Array:
    if n == 2:  # noqa: PLR2004
        theta = (np.arange(count) + 0.5) * (2.0 * math.pi / count)
        return np.column_stack((np.cos(theta), np.sin(theta)))
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((count, n))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


@attr.s(frozen=True, eq=False, slots=False)
class ConvexDomain:
    """A bounded convex domain given as an intersection of convex constraints.

    Attributes
    ----------
    constraints: tuple[Constraint, ...]
        The constraints whose strict sublevel sets are intersected.
    n: int
        The ambient dimension.
    bbox: tuple[numpy.ndarray, numpy.ndarray]
        An axis-aligned box that contains the domain.
    center: numpy.ndarray
        The centroid of the domain, from which boundary rays are cast.
    diameter: float
        The diameter of the domain, estimated from a dense boundary sample.

    Raises
    ------
    DomainError
        If the constraints do not describe a bounded, nonempty domain.
    ParameterDomainError
        If some constraint fails a midpoint-convexity spot check.
    """
    constraints: tuple[Constraint, ...] = attr.ib(converter=tuple)
    bbox_hint: tuple[ArrayLike, ArrayLike] | None = attr.ib(default=None, kw_only=True)
    center_hint: ArrayLike | None = attr.ib(default=None, kw_only=True)
    n: int = attr.ib(init=False)
    bbox: tuple[Array, Array] = attr.ib(init=False)
    center: Array = attr.ib(init=False)
    diameter: float = attr.ib(init=False)

    def __attrs_post_init__(self) -> None:
        dims = {c.dim for c in self.constraints if c.dim is not None}
        if not self.constraints or len(dims) != 1:
            raise DomainError("constraints must fix a single ambient dimension")
        n = dims.pop()
        object.__setattr__(self, "n", n)

        if self.bbox_hint is not None:
            lo, hi = (np.asarray(b, dtype=float) for b in self.bbox_hint)
        else:
            lo, hi = np.full(n, -np.inf), np.full(n, np.inf)
            for constraint in self.constraints:
                c_lo, c_hi = constraint.bounds(n)
                lo, hi = np.maximum(lo, c_lo), np.minimum(hi, c_hi)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("domain is unbounded: constraints do not determine a finite bounding box")
        if np.any(hi <= lo):
            raise DomainError("domain is empty: bounding box has no volume")
        object.__setattr__(self, "bbox", (lo, hi))
        failing = self.spot_check_convexity()
        if failing:
            raise ParameterDomainError(tuple(f"constraint {index} is not convex" for index in failing))

        if self.center_hint is not None:
            center = np.asarray(self.center_hint, dtype=float)
            if not self.contains(center):
                raise DomainError("declared center lies outside the domain", tuple(center))
        else:
            center = self._centroid()
        object.__setattr__(self, "center", center)

        count = 2048 if n == 2 else 4096  # noqa: PLR2004
        boundary = self.boundary_sample(count)
        hull = ConvexHull(boundary)
        diameter = float(np.max(pdist(boundary[hull.vertices])))
        object.__setattr__(self, "diameter", diameter)
        logger.debug(f"built {n}-dimensional domain with {len(self.constraints)} constraints, diameter {diameter:.6g}")

    def _centroid(self) -> Array:
        lo, hi = self.bbox
        per_axis = max(8, min(64, int(200_000 ** (1.0 / self.n))))
        axes = [np.linspace(lo[j], hi[j], per_axis + 2)[1:-1] for j in range(self.n)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.n)
        inside = grid[self.contains(grid)]
        if inside.shape[0] == 0:
            raise DomainError("domain is empty: no interior point found in the bounding box")
        return inside.mean(axis=0)

    @property
    def bbox_diagonal(self) -> float:
        lo, hi = self.bbox
        return float(np.linalg.norm(hi - lo))

    def value(self, x: ArrayLike) -> Array:
        """Evaluates max_j g_j, which is negative exactly inside the domain."""
        points, single = _points(x)
        values = np.max(np.stack([c.value(points) for c in self.constraints]), axis=0)
        return values[0] if single else values

    def contains(self, x: ArrayLike) -> Array:
        return np.asarray(self.value(x) < 0.0)

    def ray_exit(self, origin: ArrayLike, directions: ArrayLike) -> Array:
        """Computes where rays from an interior point leave the domain.

        Parameters
        ----------
        origin: ArrayLike
            An interior point.
        directions: ArrayLike
            An (m, n) array of unit directions.

        Returns
        -------
        numpy.ndarray
            The distance travelled along each ray before hitting the boundary.
        """
        origin = np.asarray(origin, dtype=float)
        if not self.contains(origin):
            raise DomainError("ray origin is not inside the domain", tuple(origin))
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        return _bisect_exit(self.value, origin, dirs, 1.01 * self.bbox_diagonal)

    def boundary_sample(self, count: int, seed: int = 0) -> Array:
        """Samples boundary points by casting rays from the centroid."""
        directions = _unit_directions(self.n, count, seed)
        lengths = self.ray_exit(self.center, directions)
        return self.center + lengths[:, None] * directions

    def spot_check_convexity(self, pairs: int = 256, seed: int = 0) -> list[int]:
        """Returns the indices of constraints that fail midpoint convexity on random pairs."""
        rng = np.random.default_rng(seed)
        lo, hi = self.bbox
        span = hi - lo
        x = rng.uniform(lo - 0.25 * span, hi + 0.25 * span, size=(pairs, self.n))
        y = rng.uniform(lo - 0.25 * span, hi + 0.25 * span, size=(pairs, self.n))
        failing: list[int] = []
        for index, constraint in enumerate(self.constraints):
            gx, gy = constraint.value(x), constraint.value(y)
            gm = constraint.value(0.5 * (x + y))
            slack = 0.5 * (gx + gy) - gm
            if np.any(slack < -1e-12 * (1.0 + np.abs(gx) + np.abs(gy))):
                failing.append(index)
        return failing

    def distances(self, points: ArrayLike) -> Array:
        """Vectorised :func:`distance_to_boundary` over an (m, n) array of points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if not np.all(self.contains(pts)):
            bad = pts[~self.contains(pts)][0]
            raise DomainError("point is not strictly inside the domain", tuple(bad))
        best = np.full(pts.shape[0], np.inf)
        for constraint in self.constraints:
            closed = constraint.distance(pts)
            if closed is None:
                closed = np.array([_ray_min_distance(constraint, p, self.bbox_diagonal) for p in pts])
            best = np.minimum(best, closed)
        return best

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "constraints": [c.to_dict() for c in self.constraints],
            "bbox": {"lo": self.bbox[0].tolist(), "hi": self.bbox[1].tolist()},
            "center": self.center.tolist(),
        }

    @classmethod
    def from_dict(cls, d: t.Mapping[str, t.Any] | t.Sequence[t.Mapping[str, t.Any]]) -> ConvexDomain:
        if not isinstance(d, t.Mapping):
            d = {"constraints": list(d)}
        constraints: list[Constraint] = []
        for entry in d.get("constraints", []):
            constraints.extend(constraint_from_dict(entry))
        bbox = d.get("bbox")
        return cls(
            constraints,
            bbox_hint=(bbox["lo"], bbox["hi"]) if bbox else None,
            center_hint=d.get("center"),
        )


def _ray_min_distance(constraint: Constraint, x: Array, t_max: float) -> float:
    """Distance from x to {g = 0} as the shortest exit over all ray directions."""
    n = x.size

    def fn(points: Array) -> Array:
        return constraint.value(np.atleast_2d(points))

    def exit_length(direction: Array) -> float:
        v = direction / np.linalg.norm(direction)
        if fn(x + t_max * v)[0] < 0.0:
            return math.inf
        return float(brentq(lambda s: fn(x + s * v)[0], 0.0, t_max, xtol=1e-15, rtol=1e-15))

    count = _DIRECTIONS_2D if n == 2 else _DIRECTIONS_ND  # noqa: PLR2004
    directions = _unit_directions(n, count)
    lengths = _bisect_exit(fn, x, directions, t_max)
    best = int(np.argmin(lengths))
    if not math.isfinite(lengths[best]):
        return math.inf
    coarse = float(lengths[best])

    if n == 2:  # noqa: PLR2004
        theta0 = math.atan2(directions[best, 1], directions[best, 0])
        width = 3.0 * math.pi / count
        result = minimize_scalar(
            lambda th: exit_length(np.array([math.cos(th), math.sin(th)])),
            bounds=(theta0 - width, theta0 + width),
            method="bounded",
            options={"xatol": 1e-12},
        )
    else:
        result = minimize(
            exit_length,
            directions[best],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000},
        )
    return min(coarse, float(result.fun))


def distance_to_boundary(domain: ConvexDomain, x: ArrayLike) -> float:
    """Computes d_x, the distance from an interior point to the boundary.

    Halfspaces and balls are handled in closed form; every other constraint
    by minimising the ray-exit length over directions.

    Raises
    ------
    DomainError
        If x is not strictly inside the domain.
    """
    return float(domain.distances(np.asarray(x, dtype=float)[None, :])[0])


@attr.s(frozen=True, eq=False, auto_attribs=True)
class BoundaryFrame:
    """A rigid frame in which a boundary point sits at the origin.

    The inward normal at the origin is mapped to coordinate ``axis`` so the
    domain lies on the side where that coordinate is positive. Frame
    coordinates are ``y = rotation @ (x - origin)``.
    """
    origin: Array = attr.ib(converter=_vector)
    rotation: Array = attr.ib(converter=_vector)
    axis: int = attr.ib(converter=int)

    def __attrs_post_init__(self) -> None:
        n = self.origin.size
        if self.rotation.shape != (n, n) or not 0 <= self.axis < n:
            raise FrameError(tuple(self.origin), "rotation must be square and axis in range")
        defect = np.max(np.abs(self.rotation.T @ self.rotation - np.eye(n)))
        if defect > 1e-12:  # noqa: PLR2004
            raise FrameError(tuple(self.origin), f"rotation is not orthogonal (defect {defect:.3e})")

    @property
    def n(self) -> int:
        return int(self.origin.size)

    @property
    def normal(self) -> Array:
        """The inward unit normal, in world coordinates."""
        return self.rotation[self.axis]

    @classmethod
    def identity(cls, n: int, axis: int) -> BoundaryFrame:
        return cls(np.zeros(n), np.eye(n), axis)

    @classmethod
    def at(
        cls,
        domain: ConvexDomain,
        x0: ArrayLike,
        axis: int,
        tangents: t.Sequence[ArrayLike] | None = None,
    ) -> BoundaryFrame:
        """Erects the canonical frame at a boundary point.

        Parameters
        ----------
        domain: ConvexDomain
            The domain whose boundary contains x0.
        x0: ArrayLike
            The contact point.
        axis: int
            The frame coordinate that carries the inward normal.
        tangents: Sequence[ArrayLike], optional
            Preferred tangent directions, placed first in the frame.

        Raises
        ------
        DomainError
            If x0 is not on the boundary.
        FrameError
            If every active constraint has a vanishing gradient at x0.
        """
        point = np.asarray(x0, dtype=float)
        n = domain.n
        if point.size != n:
            raise DomainError(f"contact point must have {n} coordinates", tuple(point))
        values = np.array([float(c.value(point[None, :])[0]) for c in domain.constraints])
        if abs(float(np.max(values))) > _BOUNDARY_TOL:
            raise DomainError("contact point does not lie on the boundary", tuple(point))

        normal = np.zeros(n)
        for constraint, value in zip(domain.constraints, values, strict=True):
            if abs(value) <= _BOUNDARY_TOL:
                grad = constraint.gradient(point[None, :])[0]
                norm = float(np.linalg.norm(grad))
                if norm > 0.0:
                    normal -= grad / norm
        norm = float(np.linalg.norm(normal))
        if norm < 1e-12:  # noqa: PLR2004
            raise FrameError(tuple(point), "active constraints have a degenerate normal")
        normal /= norm

        basis = [normal]
        candidates = [np.asarray(v, dtype=float) for v in (tangents or ())] + list(np.eye(n))
        for candidate in candidates:
            if len(basis) == n:
                break
            w = candidate.copy()
            for _ in range(2):
                for b in basis:
                    w -= (w @ b) * b
            if np.linalg.norm(w) > 1e-8:  # noqa: PLR2004
                basis.append(w / np.linalg.norm(w))
        tangent_rows = basis[1:]
        rows = [*tangent_rows[:axis], normal, *tangent_rows[axis:]]
        return cls(point, np.vstack(rows), axis)

    def to_frame(self, points: ArrayLike) -> Array:
        return (np.asarray(points, dtype=float) - self.origin) @ self.rotation.T

    def to_world(self, points: ArrayLike) -> Array:
        return np.asarray(points, dtype=float) @ self.rotation + self.origin

    def to_dict(self) -> dict[str, t.Any]:
        return {"origin": self.origin.tolist(), "rotation": self.rotation.tolist(), "axis": self.axis}

    @classmethod
    def from_dict(cls, d: t.Mapping[str, t.Any]) -> BoundaryFrame:
        return cls(d["origin"], d["rotation"], d["axis"])


def inward_ray(frame: BoundaryFrame, t: float) -> Array:
    """The world point at distance t from the contact point along the inward normal."""
    y = np.zeros(frame.n)
    y[frame.axis] = t
    return frame.to_world(y)


@attr.s(frozen=True, eq=False, auto_attribs=True)
class ConvexityCertificate:
    """Evidence that a domain lies above a power cup at a contact point.

    Attributes
    ----------
    domain: ConvexDomain
        The certified domain.
    frame: BoundaryFrame
        The canonical frame at the contact point.
    k: int
        The number of strictly convex directions.
    a: tuple[float, ...]
        The certified powers.
    eta: tuple[float, ...]
        The certified moduli.
    margin: float
        The smallest slack found over the verification sample.
    sample_count: int
        The number of boundary points that were checked.
    """
    domain: ConvexDomain
    frame: BoundaryFrame
    k: int
    a: tuple[float, ...]
    eta: tuple[float, ...]
    margin: float
    sample_count: int

    @property
    def passed(self) -> bool:
        return True

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "passed": True,
            "frame": self.frame.to_dict(),
            "k": self.k,
            "a": list(self.a),
            "eta": list(self.eta),
            "margin": self.margin,
            "sample_count": self.sample_count,
            "diameter": self.domain.diameter,
        }


@attr.s(frozen=True, eq=False, auto_attribs=True)
class ConvexityFailure:
    """A boundary sample that violates the power-cup containment."""
    frame: BoundaryFrame
    worst_point: Array
    slack: float
    violations: int
    sample_count: int

    @property
    def passed(self) -> bool:
        return False

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "passed": False,
            "frame": self.frame.to_dict(),
            "worst_point": self.worst_point.tolist(),
            "slack": self.slack,
            "violations": self.violations,
            "sample_count": self.sample_count,
        }


def certify_k_convexity(
    domain: ConvexDomain,
    x0: ArrayLike,
    k: int,
    a: t.Sequence[float],
    eta: t.Sequence[float],
    sample_count: int | None = None,
    seed: int = 0,
) -> ConvexityCertificate | ConvexityFailure:
    """Checks, on a dense boundary sample, that the domain lies above a power cup.

    In the frame erected at x0 every sampled boundary point y must satisfy
    y_k >= sum_{i<k} eta_i |y_i|^(a_i) (zero-based coordinates).

    Raises
    ------
    ParameterDomainError
        If the powers or moduli are inadmissible.
    DomainError
        If x0 is not on the boundary.
    FrameError
        If no normal can be determined at x0.
    """
    powers = np.asarray(a, dtype=float)
    moduli = np.asarray(eta, dtype=float)
    if powers.size != k or moduli.size != k or not 0 <= k < domain.n:
        raise ParameterDomainError((f"a and eta must have length k = {k} with 0 <= k < n",))
    if np.any(powers < 1.0) or np.any(moduli <= 0.0):
        raise ParameterDomainError(("a_i >= 1", "eta_i > 0"))

    if sample_count is None:
        sample_count = 4096 if domain.n == 2 else 16384  # noqa: PLR2004
    frame = BoundaryFrame.at(domain, x0, axis=k)
    boundary = domain.boundary_sample(sample_count, seed)
    y = frame.to_frame(boundary)
    slack = y[:, k] - np.sum(moduli * np.abs(y[:, :k]) ** powers, axis=1)
    tol = 1e-9 * domain.diameter
    worst = int(np.argmin(slack))
    if slack[worst] < -tol:
        violations = int(np.count_nonzero(slack < -tol))
        logger.info(f"k-convexity fails at {boundary[worst]} with slack {slack[worst]:.3e} ({violations} violations)")
        return ConvexityFailure(frame, boundary[worst], float(slack[worst]), violations, sample_count)
    margin = max(float(slack[worst]), 0.0)
    logger.info(f"certified {k}-strict convexity at {frame.origin} with a={tuple(powers)}, eta={tuple(moduli)}")
    return ConvexityCertificate(domain, frame, k, tuple(powers.tolist()), tuple(moduli.tolist()), margin, sample_count)
