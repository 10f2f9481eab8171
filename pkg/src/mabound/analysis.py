"""Boundary-rate fits, bound checks and Hölder seminorms of computed fields."""
from __future__ import annotations

__all__ = (
    "FAR_FRACTION",
    "NEAR_LAYERS",
    "BoundCheck",
    "RateReport",
    "check_bound",
    "empirical_holder_seminorm",
    "exact_ray_profile",
    "fit_rate",
    "holder_constant",
    "ray_profile",
)

import math
import typing as t

import attr
import numpy as np
from loguru import logger
from scipy.stats import linregress

from .exceptions import InsufficientData, ParameterDomainError
from .oracle import BALL, CYLINDER

if t.TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from .geometry import BoundaryFrame, ConvexDomain
    from .oracle import ExactSolution
    from .solver import GridField

    Array = NDArray[np.float64]

MIN_POINTS = 8
MIN_OCTAVES = 2.0
NEAR_LAYERS = 2
FAR_FRACTION = 0.1


def _pairs(values: ArrayLike) -> tuple[Array, Array]:
    data = np.asarray(values, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:  # noqa: PLR2004
        raise ParameterDomainError(("values must be a sequence of (d, |u|) pairs",))
    d, magnitude = data[:, 0], np.abs(data[:, 1])
    if np.any(d <= 0.0) or np.any(magnitude <= 0.0):
        raise ParameterDomainError(("all d > 0 and all |u| > 0",))
    return d, magnitude


@attr.s(frozen=True, auto_attribs=True)
class RateReport:
    """A least-squares fit log|u| = log C + mu log d.

    Attributes
    ----------
    mu_theory: float
        The predicted exponent, or nan when none was supplied.
    mu_fitted: float
        The fitted slope.
    C_fitted: float
        The fitted constant exp(intercept).
    fit_range: tuple[float, float]
        The smallest and largest d used.
    residual_rms: float
        The root-mean-square residual of the fit in log space.
    bound_slack: float
        The smallest value of C_fitted d^mu_fitted - |u| over the data.
    count: int
        The number of points used.
    """
    mu_theory: float
    mu_fitted: float
    C_fitted: float
    fit_range: tuple[float, float]
    residual_rms: float
    bound_slack: float
    count: int

    def to_dict(self) -> dict[str, t.Any]:
        d = attr.asdict(self)
        d["fit_range"] = list(self.fit_range)
        return d

    @classmethod
    def from_dict(cls, d: t.Mapping[str, t.Any]) -> RateReport:
        lo, hi = d["fit_range"]
        return cls(
            mu_theory=float(d["mu_theory"]),
            mu_fitted=float(d["mu_fitted"]),
            C_fitted=float(d["C_fitted"]),
            fit_range=(float(lo), float(hi)),
            residual_rms=float(d["residual_rms"]),
            bound_slack=float(d["bound_slack"]),
            count=int(d["count"]),
        )


def fit_rate(values: ArrayLike, mu_theory: float | None = None) -> RateReport:
    """Regresses log|u| on log d.

    Raises
    ------
    InsufficientData
        If there are fewer than 8 points or they span less than two octaves of d.
    """
    d, magnitude = _pairs(values)
    octaves = math.log2(float(np.max(d)) / float(np.min(d))) if d.size else 0.0
    if d.size < MIN_POINTS or octaves < MIN_OCTAVES:
        raise InsufficientData(int(d.size), octaves)
    log_d, log_u = np.log(d), np.log(magnitude)
    fit = linregress(log_d, log_u)
    slope, intercept = float(fit.slope), float(fit.intercept)
    residual_rms = float(np.sqrt(np.mean((log_u - (intercept + slope * log_d)) ** 2)))
    constant = math.exp(intercept)
    slack = float(np.min(constant * d ** slope - magnitude))
    logger.debug(f"rate fit over {d.size} points, d in [{np.min(d):.3e}, {np.max(d):.3e}]: mu = {slope:.6g}")
    return RateReport(
        mu_theory=math.nan if mu_theory is None else float(mu_theory),
        mu_fitted=slope,
        C_fitted=constant,
        fit_range=(float(np.min(d)), float(np.max(d))),
        residual_rms=residual_rms,
        bound_slack=slack,
        count=int(d.size),
    )


@attr.s(frozen=True, auto_attribs=True)
class BoundCheck:
    """The outcome of checking |u| <= C d^mu at every data point."""
    passed: bool
    mu: float
    C: float
    worst_ratio: float
    worst_pair: tuple[float, float]
    count: int

    def to_dict(self) -> dict[str, t.Any]:
        d = attr.asdict(self)
        d["worst_pair"] = list(self.worst_pair)
        return d


def check_bound(values: ArrayLike, mu_theory: float, C: float) -> BoundCheck:
    """Checks |u| <= C d^mu_theory pointwise and reports the largest ratio |u| / (C d^mu)."""
    d, magnitude = _pairs(values)
    ratio = magnitude / (C * d ** mu_theory)
    worst = int(np.argmax(ratio))
    passed = bool(ratio[worst] <= 1.0 + 1e-12)
    if not passed:
        logger.info(f"bound |u| <= {C:.6g} d^{mu_theory:.6g} fails at d = {d[worst]:.3e} (ratio {ratio[worst]:.6g})")
    return BoundCheck(
        passed=passed,
        mu=float(mu_theory),
        C=float(C),
        worst_ratio=float(ratio[worst]),
        worst_pair=(float(d[worst]), float(magnitude[worst])),
        count=int(d.size),
    )


def holder_constant(C: float, mu: float, diameter: float) -> float:
    """The global Hölder bound C (1 + diam^mu) implied by a boundary bound with constant C."""
    if not 0.0 < mu <= 1.0 or C <= 0.0 or diameter < 0.0:
        raise ParameterDomainError(("0 < mu <= 1, C > 0 and diameter >= 0",))
    return C * (1.0 + diameter ** mu)


def empirical_holder_seminorm(field: GridField, mu: float, pairs: int = 100_000, seed: int = 0) -> float:
    """The largest |u(x) - u(y)| / |x - y|^mu over random pairs of distinct nodes."""
    points, values = field.grid.points, field.values
    count = points.shape[0]
    if count < 2:  # noqa: PLR2004
        return 0.0
    rng = np.random.default_rng(seed)
    first = rng.integers(0, count, size=pairs)
    second = rng.integers(0, count, size=pairs)
    distinct = first != second
    first, second = first[distinct], second[distinct]
    separation = np.linalg.norm(points[first] - points[second], axis=1)
    quotient = np.abs(values[first] - values[second]) / separation ** mu
    return float(np.max(quotient)) if quotient.size else 0.0


def ray_profile(
    field: GridField,
    frame: BoundaryFrame,
    domain: ConvexDomain,
    near_layers: int = NEAR_LAYERS,
    far_fraction: float = FAR_FRACTION,
) -> Array:
    """Samples (d, |u|) along the inward normal ray of a contact point.

    Points are taken at every multiple of the grid spacing along the ray, up
    to ``far_fraction`` of the diameter from the contact point; those within
    ``near_layers`` spacings of the boundary are dropped. On the unit disk
    at h = 1/64 the default window is d in [3h, 12h], two octaves.
    """
    h = field.grid.h
    normal = frame.normal
    exit_length = float(domain.ray_exit(frame.origin + 1e-9 * normal, normal[None, :])[0])
    reach = min(exit_length, far_fraction * domain.diameter)
    steps = np.arange(1, int(reach / h) + 1) * h
    points = frame.origin + steps[:, None] * normal
    points = points[domain.contains(points)]
    d = domain.distances(points)
    keep = d > near_layers * h
    magnitude = np.abs(field.interpolate(points[keep]))
    logger.debug(f"ray profile: {int(keep.sum())} of {points.shape[0]} ray samples kept")
    return np.stack([d[keep], magnitude], axis=1)


def exact_ray_profile(solution: ExactSolution, distances: ArrayLike) -> Array:
    """Samples (d, |u|) of an exact solution along the ray where its boundary rate is sharp.

    The ball is sampled along a radius, the cylinder along its axis from the
    flat bottom and the cone along its axis from the vertex.
    """
    n = solution.n
    d = np.asarray(distances, dtype=float)
    points = np.zeros((d.size, n))
    if solution.kind == BALL:
        points[:, -1] = d - 1.0
    elif solution.kind == CYLINDER:
        points[:, -1] = d
    else:
        slope_sq = 1.0 / solution.cone_constant
        points[:, -1] = d * math.sqrt(1.0 + slope_sq)
    natural = np.array([solution.natural_distance(p) for p in points])
    return np.stack([natural, np.abs(solution.values(points))], axis=1)
