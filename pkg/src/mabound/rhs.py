"""Right-hand sides F(x, z, q) of det D^2 u = F(x, u, Du)."""
from __future__ import annotations

__all__ = (
    "POWER_LAW",
    "PURE_HYPERBOLIC",
    "VIOLATION_MONOTONICITY",
    "VIOLATION_POSITIVITY",
    "VIOLATION_ROTATION",
    "RhsModel",
    "StructuredRhs",
    "check_structure",
    "eval_F",
)

import typing as t

import attr
import numpy as np
from loguru import logger
from scipy.stats import special_ortho_group

from .exceptions import DomainError, ParameterDomainError, SingularityError
from .exponents import GrowthParams
from .geometry import ConvexDomain

if t.TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    Array = NDArray[np.float64]

POWER_LAW = "power_law"
PURE_HYPERBOLIC = "pure_hyperbolic"

VIOLATION_MONOTONICITY = "monotonicity"
VIOLATION_ROTATION = "rotation_invariance"
VIOLATION_POSITIVITY = "positivity"


@t.runtime_checkable
class StructuredRhs(t.Protocol):
    """Anything that can be evaluated like a right-hand side."""

    @property
    def n(self) -> int:
        ...

    @property
    def domain(self) -> ConvexDomain | None:
        ...

    def evaluate(
        self,
        points: ArrayLike,
        z: ArrayLike,
        q: ArrayLike,
        distances: ArrayLike | None = None,
    ) -> Array:
        ...


@attr.s(frozen=True, eq=False, auto_attribs=True)
class RhsModel:
    """A right-hand side of power-law type.

    ``power_law`` evaluates A d_x^(beta-(n+1)) |z|^(-alpha) (1+|q|^2)^(gamma/2);
    ``pure_hyperbolic`` evaluates |z|^(-(n+2)).

    Attributes
    ----------
    kind: str
        Either ``"power_law"`` or ``"pure_hyperbolic"``.
    params: GrowthParams
        The structure constants of the model.
    domain: ConvexDomain, optional
        The domain supplying d_x; required by a power law whose d_x factor
        is not identically one.
    clamp_floor: float
        The solver evaluates F at min(z, -clamp_floor).
    allow_negative_alpha: bool
        Whether alpha < 0 is accepted. Such models violate monotonicity in z
        and are refused by the solver, but can still drive a barrier search.
    """
    kind: str = attr.ib(validator=attr.validators.in_((POWER_LAW, PURE_HYPERBOLIC)))
    params: GrowthParams
    domain: ConvexDomain | None = attr.ib(default=None)
    clamp_floor: float = attr.ib(default=1e-8, converter=float)
    allow_negative_alpha: bool = attr.ib(default=False)

    def __attrs_post_init__(self) -> None:
        p = self.params
        problems: list[str] = []
        if self.clamp_floor <= 0.0:
            problems.append("clamp_floor > 0")
        if p.A <= 0.0:
            problems.append("A > 0")
        if self.kind == POWER_LAW and p.alpha < 0.0 and not self.allow_negative_alpha:
            problems.append("alpha >= 0 (F must be non-decreasing in z)")
        if self.kind == POWER_LAW and p.beta != p.n + 1 and self.domain is None:
            problems.append("power law with beta != n+1 needs a domain for d_x")
        if self.domain is not None and self.domain.n != p.n:
            problems.append(f"domain dimension {self.domain.n} differs from n = {p.n}")
        if problems:
            raise ParameterDomainError(tuple(problems))

    @classmethod
    def pure_hyperbolic(cls, n: int, domain: ConvexDomain | None = None) -> RhsModel:
        return cls(PURE_HYPERBOLIC, GrowthParams.pure_hyperbolic(n), domain)

    @classmethod
    def power_law(cls, params: GrowthParams, domain: ConvexDomain | None = None) -> RhsModel:
        return cls(POWER_LAW, params, domain)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def is_monotone(self) -> bool:
        return self.kind == PURE_HYPERBOLIC or self.params.alpha >= 0.0

    @property
    def needs_distance(self) -> bool:
        return self.kind == POWER_LAW and self.params.beta != self.params.n + 1

    def evaluate_norm(self, z: Array, q_norm_sq: Array, distances: Array | None = None) -> Array:
        """Evaluates F given z, |q|^2 and (when needed) d_x, all as arrays."""
        p = self.params
        if self.kind == PURE_HYPERBOLIC:
            return np.abs(z) ** (-(p.n + 2.0))
        value = p.A * np.abs(z) ** (-p.alpha)
        if p.gamma != 0.0:
            value = value * (1.0 + q_norm_sq) ** (0.5 * p.gamma)
        if self.needs_distance:
            if distances is None:
                raise DomainError("power law needs distances to the boundary")
            value = value * distances ** (p.beta - (p.n + 1.0))
        return value

    def evaluate(
        self,
        points: ArrayLike,
        z: ArrayLike,
        q: ArrayLike,
        distances: ArrayLike | None = None,
    ) -> Array:
        """Vectorised evaluation at (m, n) points with values z and gradients q.

        Raises
        ------
        SingularityError
            If some z is nonnegative.
        DomainError
            If d_x is needed and some point is not strictly inside the domain.
        """
        zs = np.asarray(z, dtype=float)
        if np.any(zs >= 0.0):
            raise SingularityError(float(np.max(zs)))
        qs = np.atleast_2d(np.asarray(q, dtype=float))
        q_norm_sq = np.sum(qs * qs, axis=-1)
        dist: Array | None = None
        if self.needs_distance:
            if distances is not None:
                dist = np.asarray(distances, dtype=float)
            else:
                assert self.domain is not None
                dist = self.domain.distances(points)
        return self.evaluate_norm(zs, q_norm_sq, dist)

    def to_dict(self) -> dict[str, t.Any]:
        return {"kind": self.kind, "growth_params": self.params.to_dict(), "clamp_floor": self.clamp_floor}

    @classmethod
    def from_dict(cls, d: t.Mapping[str, t.Any], domain: ConvexDomain | None = None) -> RhsModel:
        kind = str(d.get("kind", ""))
        clamp_floor = float(d.get("clamp_floor", 1e-8))
        if kind == PURE_HYPERBOLIC and "growth_params" not in d:
            if domain is None and "n" not in d:
                raise ParameterDomainError(("pure_hyperbolic model needs n or a domain",))
            n = int(d.get("n", domain.n if domain is not None else 0))
            return cls(kind, GrowthParams.pure_hyperbolic(n), domain, clamp_floor)
        return cls(kind, GrowthParams.from_dict(d["growth_params"]), domain, clamp_floor)


def eval_F(model: RhsModel, x: ArrayLike, z: float, q: ArrayLike) -> float:
    """Evaluates the right-hand side at a single interior point.

    Raises
    ------
    SingularityError
        If z >= 0.
    DomainError
        If x lies on or outside the model's domain.
    """
    point = np.asarray(x, dtype=float)
    if z >= 0.0:
        raise SingularityError(float(z))
    if model.domain is not None and not model.domain.contains(point):
        raise DomainError("right-hand side evaluated outside the domain", tuple(point))
    return float(model.evaluate(point[None, :], np.array([z]), np.atleast_2d(q))[0])


def _sample_points(model: StructuredRhs, count: int, rng: np.random.Generator) -> Array:
    domain = model.domain
    if domain is None:
        return rng.standard_normal((count, model.n))
    lo, hi = domain.bbox
    chunks: list[Array] = []
    found = 0
    while found < count:
        candidates = rng.uniform(lo, hi, size=(2 * count, domain.n))
        inside = candidates[domain.contains(candidates)]
        chunks.append(inside)
        found += inside.shape[0]
    return np.concatenate(chunks)[:count]


def check_structure(model: StructuredRhs, sample_count: int = 1000, seed: int = 0) -> list[str]:
    """Randomly tests positivity, monotonicity in z and rotation invariance in q.

    Returns
    -------
    list[str]
        The names of the violated properties; empty if none was violated.
    """
    rng = np.random.default_rng(seed)
    n = model.n
    points = _sample_points(model, sample_count, rng)
    distances = model.domain.distances(points) if model.domain is not None else None
    z_hi = -np.exp(rng.standard_normal(sample_count))
    z_lo = z_hi - np.exp(rng.standard_normal(sample_count))
    q = 2.0 * rng.standard_normal((sample_count, n))
    rotations = np.reshape(special_ortho_group.rvs(n, size=sample_count, random_state=rng), (sample_count, n, n))
    rotated = np.einsum("mij,mj->mi", rotations, q)

    f_lo = model.evaluate(points, z_lo, q, distances)
    f_hi = model.evaluate(points, z_hi, q, distances)
    f_rot = model.evaluate(points, z_lo, rotated, distances)

    violations: list[str] = []
    if np.any(~np.isfinite(f_lo)) or np.any(f_lo <= 0.0) or np.any(f_hi <= 0.0):
        violations.append(VIOLATION_POSITIVITY)
    if np.any(f_lo > f_hi * (1.0 + 1e-12)):
        violations.append(VIOLATION_MONOTONICITY)
    if np.any(np.abs(f_rot - f_lo) > 1e-12 * np.abs(f_lo)):
        violations.append(VIOLATION_ROTATION)
    if violations:
        logger.info(f"right-hand side violates {violations} on {sample_count} samples")
    else:
        logger.debug(f"right-hand side passed {sample_count} structure samples")
    return violations
