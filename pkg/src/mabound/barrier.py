"""Explicit subsolution barriers at a boundary contact point.

All evaluations take points in the canonical frame of the contact point, in
which the contact point is the origin, coordinates ``0..k-1`` are the strictly
convex directions, coordinate ``k`` is the inward normal (written s below)
and coordinates ``k+1..n-1`` are flat. The anisotropic barrier is

    W = M (H + G),
    H = - sum_i [ (s/eps)^(2/a_i) - y_i^2 ]^(1/b_i),
    G = - (s/eps)^mu sqrt(Lambda^2 - sum_{j>k} y_j^2),   Lambda^2 = 2 d^2 + 1,

and the flat barrier, erected with the normal on the last axis, is

    W = - M s^mu0 (N^2 - sum_{i<n-1} y_i^2),   N^2 = 2 d^2 + 1.

A barrier is certified on a finite sample by checking
F[W] = det D^2 W / F(x, W, DW) > 1 + margin at every sample point.
"""
from __future__ import annotations

__all__ = (
    "ANISOTROPIC",
    "FLAT",
    "BarrierDiagnostics",
    "BarrierFunction",
    "BarrierParams",
    "SubsolutionCertificate",
    "certify_subsolution",
    "delta_eps",
    "diagnostics",
    "eval_G",
    "eval_H",
    "eval_W",
    "find_eps_M",
    "flat_barrier",
    "fw_lower_bound",
    "gradient_bounds_G",
    "sample_ladder",
    "sample_FW",
    "schur_det_lower_bound",
    "tau1_limit",
)

import math
import typing as t
from concurrent.futures import ThreadPoolExecutor

import attr
import numpy as np
from loguru import logger

from .exceptions import (
    BoundUnavailable,
    FrameError,
    OutsideBarrierDomain,
    ParameterDomainError,
    SearchFailure,
)
from .exponents import GrowthParams, abar, b_coeffs, mu, mu_flat, validate
from .geometry import BoundaryFrame, ConvexDomain, ConvexityCertificate, inward_ray

if t.TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from .rhs import RhsModel

    Array = NDArray[np.float64]
    Evaluation = tuple[Array, Array, Array]

ANISOTROPIC = "anisotropic"
FLAT = "flat"

_MAX_HALVINGS = 60
_MAX_DOUBLINGS = 128


def _as_points(x: ArrayLike) -> tuple[Array, bool]:
    array = np.asarray(x, dtype=float)
    return np.atleast_2d(array), array.ndim == 1


def _unbatch(evaluation: Evaluation, single: bool) -> t.Any:
    if not single:
        return evaluation
    value, grad, hess = evaluation
    return float(value[0]), grad[0], hess[0]


@attr.s(frozen=True, eq=False, auto_attribs=True)
class BarrierParams:
    """The constants of a barrier at one contact point.

    Attributes
    ----------
    growth: GrowthParams
        The structure constants, including the certified convexity data.
    frame: BoundaryFrame
        The canonical frame at the contact point.
    epsilon: float, optional
        The scale of the anisotropic barrier; unused by the flat barrier.
    M: float
        The amplitude. Searches only produce M >= 1; smaller values are
        accepted so that under-scaled barriers can be evaluated.
    d: float
        The diameter of the domain.
    Lambda: float
        sqrt(2 d^2 + 1), derived.
    mu: float
        The boundary exponent (mu0 for a flat contact point), derived.
    b: tuple[float, ...]
        The barrier powers b_i, derived.

    Raises
    ------
    ParameterDomainError
        If the growth parameters are inadmissible or epsilon, M, d are out of range.
    """
    growth: GrowthParams
    frame: BoundaryFrame
    epsilon: float | None
    M: float = attr.ib(default=1.0, converter=float)
    d: float = attr.ib(default=1.0, converter=float)
    Lambda: float = attr.ib(init=False)
    mu: float = attr.ib(init=False)
    b: tuple[float, ...] = attr.ib(init=False)

    def __attrs_post_init__(self) -> None:
        g = self.growth
        problems = list(validate(g))
        if self.M <= 0.0:
            problems.append("M > 0")
        if self.d <= 0.0:
            problems.append("d > 0")
        if self.frame.n != g.n:
            problems.append("frame dimension must equal n")
        if g.k >= 1:
            if self.epsilon is None or not 0.0 < self.epsilon < min(1.0, self.d, *g.eta):
                problems.append("0 < epsilon < min{1, d, min eta_i}")
            if self.frame.axis != g.k:
                problems.append("frame axis must equal k")
        elif self.frame.axis != g.n - 1:
            problems.append("flat barrier needs the normal on the last axis")
        if problems:
            raise ParameterDomainError(tuple(problems))
        object.__setattr__(self, "Lambda", math.sqrt(2.0 * self.d * self.d + 1.0))
        if g.k >= 1:
            object.__setattr__(self, "mu", mu(g))
            object.__setattr__(self, "b", b_coeffs(g))
        else:
            object.__setattr__(self, "mu", mu_flat(g))
            object.__setattr__(self, "b", ())

    @property
    def eps(self) -> float:
        if self.epsilon is None:
            raise ParameterDomainError(("epsilon is undefined for a flat barrier",))
        return self.epsilon

    def with_M(self, M: float) -> BarrierParams:
        return attr.evolve(self, M=M)

    def with_epsilon(self, epsilon: float) -> BarrierParams:
        return attr.evolve(self, epsilon=epsilon)


def delta_eps(params: BarrierParams) -> float:
    """Computes delta(eps) = max_i (eps / eta_i)^(2 / a_i), or zero when k = 0."""
    g = params.growth
    if g.k == 0:
        return 0.0
    return max((params.eps / eta) ** (2.0 / a) for a, eta in zip(g.a, g.eta, strict=True))


def _normal_coordinate(params: BarrierParams, y: Array) -> Array:
    s = y[:, params.frame.axis]
    if np.any(s <= 0.0):
        bad = y[np.argmin(s)]
        raise OutsideBarrierDomain(tuple(bad), "normal coordinate must be positive")
    return s


def _h_parts(params: BarrierParams, y: Array) -> Evaluation:
    g = params.growth
    k, eps = g.k, params.eps
    m, n = y.shape
    s = _normal_coordinate(params, y)
    ratio = s / eps
    value = np.zeros(m)
    grad = np.zeros((m, n))
    hess = np.zeros((m, n, n))
    for i, (a, b) in enumerate(zip(g.a, params.b, strict=True)):
        p = 1.0 / b
        yi = y[:, i]
        bracket = ratio ** (2.0 / a) - yi * yi
        if np.any(bracket <= 0.0):
            bad = y[np.argmin(bracket)]
            raise OutsideBarrierDomain(tuple(bad), f"bracket of H_{i} is not positive")
        dbracket = (2.0 / a) * ratio ** (2.0 / a - 1.0) / eps
        d2bracket = (2.0 / a) * (2.0 / a - 1.0) * ratio ** (2.0 / a - 2.0) / (eps * eps)
        pow0 = bracket ** p
        pow1 = bracket ** (p - 1.0)
        pow2 = bracket ** (p - 2.0)
        value -= pow0
        grad[:, i] += 2.0 * p * yi * pow1
        grad[:, k] -= p * pow1 * dbracket
        hess[:, i, i] += 2.0 * p * pow1 - 4.0 * p * (p - 1.0) * yi * yi * pow2
        mixed = 2.0 * p * (p - 1.0) * yi * pow2 * dbracket
        hess[:, i, k] += mixed
        hess[:, k, i] += mixed
        hess[:, k, k] += -p * (p - 1.0) * pow2 * dbracket * dbracket - p * pow1 * d2bracket
    return value, grad, hess


def _g_parts(params: BarrierParams, y: Array) -> Evaluation:
    k, eps, mu_, lam = params.growth.k, params.eps, params.mu, params.Lambda
    m, n = y.shape
    s = _normal_coordinate(params, y)
    ratio = s / eps
    flat = y[:, k + 1:]
    radicand = lam * lam - np.sum(flat * flat, axis=1)
    if np.any(radicand <= 0.0):
        bad = y[np.argmin(radicand)]
        raise OutsideBarrierDomain(tuple(bad), "flat coordinates exceed Lambda")
    root = np.sqrt(radicand)
    t0 = ratio ** mu_
    t1 = ratio ** (mu_ - 1.0)
    t2 = ratio ** (mu_ - 2.0)

    value = -t0 * root
    grad = np.zeros((m, n))
    grad[:, k] = -(mu_ / eps) * t1 * root
    grad[:, k + 1:] = (t0 / root)[:, None] * flat
    hess = np.zeros((m, n, n))
    hess[:, k, k] = mu_ * (1.0 - mu_) / (eps * eps) * t2 * root
    coupling = ((mu_ / eps) * t1 / root)[:, None] * flat
    hess[:, k, k + 1:] = coupling
    hess[:, k + 1:, k] = coupling
    block = (t0 / root)[:, None, None] * np.eye(n - k - 1) + (t0 / root ** 3)[:, None, None] * (
        flat[:, :, None] * flat[:, None, :]
    )
    hess[:, k + 1:, k + 1:] = block
    return value, grad, hess


def _flat_parts(params: BarrierParams, y: Array) -> Evaluation:
    n, mu0, big_m = params.growth.n, params.mu, params.M
    m = y.shape[0]
    s = _normal_coordinate(params, y)
    tangential = y[:, : n - 1]
    q = params.Lambda ** 2 - np.sum(tangential * tangential, axis=1)
    t0 = s ** mu0
    t1 = s ** (mu0 - 1.0)
    t2 = s ** (mu0 - 2.0)

    value = -big_m * t0 * q
    grad = np.zeros((m, n))
    grad[:, : n - 1] = (2.0 * big_m * t0)[:, None] * tangential
    grad[:, n - 1] = -big_m * mu0 * t1 * q
    hess = np.zeros((m, n, n))
    hess[:, : n - 1, : n - 1] = (2.0 * big_m * t0)[:, None, None] * np.eye(n - 1)
    coupling = (2.0 * big_m * mu0 * t1)[:, None] * tangential
    hess[:, : n - 1, n - 1] = coupling
    hess[:, n - 1, : n - 1] = coupling
    hess[:, n - 1, n - 1] = big_m * mu0 * (1.0 - mu0) * t2 * q
    return value, grad, hess


def eval_H(params: BarrierParams, x: ArrayLike) -> t.Any:
    """Evaluates H and its closed-form gradient and Hessian at frame point(s) x.

    Raises
    ------
    OutsideBarrierDomain
        If x_k <= 0 or some bracket (x_k/eps)^(2/a_i) - x_i^2 is not positive.
    """
    y, single = _as_points(x)
    return _unbatch(_h_parts(params, y), single)


def eval_G(params: BarrierParams, x: ArrayLike) -> t.Any:
    """Evaluates G and its closed-form gradient and Hessian at frame point(s) x."""
    y, single = _as_points(x)
    return _unbatch(_g_parts(params, y), single)


@attr.s(frozen=True, eq=False, auto_attribs=True)
class SubsolutionCertificate:
    """The outcome of evaluating F[W] on a sample set.

    Attributes
    ----------
    passed: bool
        Whether min F[W] exceeds 1 + margin.
    min_FW: float
        The smallest value of F[W] over the sample.
    worst_point: numpy.ndarray
        The frame coordinates of the minimising sample.
    margin: float
        The certification margin.
    sample_count: int
        The number of samples that were evaluated.
    """
    passed: bool
    min_FW: float
    worst_point: Array
    margin: float
    sample_count: int

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "passed": self.passed,
            "min_FW": self.min_FW,
            "worst_point": self.worst_point.tolist(),
            "margin": self.margin,
            "sample_count": self.sample_count,
        }


@attr.s(frozen=True, eq=False, auto_attribs=True)
class BarrierFunction:
    """A barrier W together with the certificate that it is a strict subsolution.

    Attributes
    ----------
    params: BarrierParams
        The barrier constants.
    kind: str
        ``"anisotropic"`` for W = M(H+G), ``"flat"`` for the flat-boundary barrier.
    certificate: SubsolutionCertificate, optional
        The certificate issued for this barrier, if any.
    """
    params: BarrierParams
    kind: str = attr.ib(default=ANISOTROPIC, validator=attr.validators.in_((ANISOTROPIC, FLAT)))
    certificate: SubsolutionCertificate | None = attr.ib(default=None)

    def __attrs_post_init__(self) -> None:
        k = self.params.growth.k
        if (self.kind == ANISOTROPIC) != (k >= 1):
            raise ParameterDomainError(("anisotropic barriers need k >= 1 and flat barriers k = 0",))

    @property
    def frame(self) -> BoundaryFrame:
        return self.params.frame

    @property
    def exponent(self) -> float:
        return self.params.mu

    @property
    def mu0(self) -> float:
        return self.params.mu

    @property
    def N(self) -> float:
        return self.params.Lambda

    def evaluate(self, y: ArrayLike) -> Evaluation:
        """Batched value, gradient and Hessian at (m, n) frame points."""
        points, _ = _as_points(y)
        if self.kind == FLAT:
            return _flat_parts(self.params, points)
        h_val, h_grad, h_hess = _h_parts(self.params, points)
        g_val, g_grad, g_hess = _g_parts(self.params, points)
        big_m = self.params.M
        return big_m * (h_val + g_val), big_m * (h_grad + g_grad), big_m * (h_hess + g_hess)

    def evaluate_world(self, points: ArrayLike) -> Evaluation:
        """Batched value, gradient and Hessian at (m, n) world points."""
        rotation = self.frame.rotation
        value, grad, hess = self.evaluate(self.frame.to_frame(np.atleast_2d(points)))
        return value, grad @ rotation, np.einsum("ji,mjk,kl->mil", rotation, hess, rotation)

    def to_dict(self) -> dict[str, t.Any]:
        p = self.params
        d: dict[str, t.Any] = {
            "kind": self.kind,
            "growth_params": p.growth.to_dict(),
            "frame": p.frame.to_dict(),
            "epsilon": p.epsilon,
            "M": p.M,
            "d": p.d,
            "mu": p.mu,
        }
        d["N" if self.kind == FLAT else "Lambda"] = p.Lambda
        if self.certificate is not None:
            d["min_FW"] = self.certificate.min_FW
            d["worst_point"] = self.certificate.worst_point.tolist()
            d["margin"] = self.certificate.margin
            d["sample_count"] = self.certificate.sample_count
        return d

    @classmethod
    def from_dict(cls, d: t.Mapping[str, t.Any]) -> BarrierFunction:
        params = BarrierParams(
            GrowthParams.from_dict(d["growth_params"]),
            BoundaryFrame.from_dict(d["frame"]),
            d.get("epsilon"),
            d["M"],
            d["d"],
        )
        certificate = None
        if "min_FW" in d:
            certificate = SubsolutionCertificate(
                passed=d["min_FW"] > 1.0 + d.get("margin", 1e-6),
                min_FW=float(d["min_FW"]),
                worst_point=np.asarray(d["worst_point"], dtype=float),
                margin=float(d.get("margin", 1e-6)),
                sample_count=int(d.get("sample_count", 0)),
            )
        return cls(params, d["kind"], certificate)


def eval_W(barrier: BarrierFunction, x: ArrayLike) -> t.Any:
    """Evaluates the barrier and its closed-form gradient and Hessian at frame point(s) x."""
    y, single = _as_points(x)
    return _unbatch(barrier.evaluate(y), single)


@attr.s(frozen=True, auto_attribs=True)
class BarrierDiagnostics:
    """The scalar constants that control the determinant and gradient bounds.

    ``c`` holds c_1..c_k followed by c_{k+1}; ``c`` and ``c_tilde`` are the
    worst cases over the admissible range of every xi_i, so that
    det D^2 W >= M^n Lambda^(k+1-n) eps^-2 tau1 (s/eps)^(n mu - abar - 2).
    """
    delta_eps: float
    xi: tuple[float, ...]
    xi_range: tuple[tuple[float, float], ...]
    c: tuple[float, ...]
    c_tilde: tuple[float, ...]
    tau1: float
    tau2: float
    tau3: float
    a_hat: float
    a_check: float
    xibar_range: tuple[float, float]

    def to_dict(self) -> dict[str, t.Any]:
        return attr.asdict(
            self, recurse=False, value_serializer=lambda _i, _a, v: list(v) if isinstance(v, tuple) else v,
        )


def _min_c_normal(b: float, mu_: float, lo: float) -> float:
    """Minimum over xi in [lo, 1] of (1/mu - b) xi^(1-b) + (b - 1) xi^(1-2b)."""
    def f(xi: float) -> float:
        return (1.0 / mu_ - b) * xi ** (1.0 - b) + (b - 1.0) * xi ** (1.0 - 2.0 * b)

    candidates = [lo, 1.0]
    slope = 1.0 / mu_ - b
    if b != 1.0 and slope != 0.0:
        ratio = (1.0 - 2.0 * b) / slope
        if ratio > 0.0:
            stationary = ratio ** (1.0 / b)
            if lo < stationary < 1.0:
                candidates.append(stationary)
    return min(f(xi) for xi in candidates)


def diagnostics(params: BarrierParams, x: ArrayLike | None = None) -> BarrierDiagnostics:
    """Computes delta(eps), the c constants, tau1, tau2, tau3 and, at x, the xi_i."""
    g = params.growth
    if g.k == 0:
        return BarrierDiagnostics(0.0, (), (), (), (), math.nan, 0.0, 1.0, math.nan, math.nan, (math.nan, math.nan))
    eps, mu_, lam, gamma = params.eps, params.mu, params.Lambda, g.gamma
    delta = delta_eps(params)
    one_minus = 1.0 - delta

    xi_range = tuple((one_minus ** (1.0 / b), 1.0) for b in params.b)
    c_conv = tuple(
        (2.0 / b) * (
            min(one_minus ** ((1.0 - b) / b), 1.0)
            - delta * (2.0 * abs(b - 1.0) / b) * max(one_minus ** ((1.0 - 2.0 * b) / b), 1.0)
        )
        for b in params.b
    )
    c_normal = mu_ * mu_ * sum(
        _min_c_normal(b, mu_, lo) for b, (lo, _) in zip(params.b, xi_range, strict=True)
    )
    c_tilde = tuple(
        4.0 * abs(b - 1.0) / (a * b * b) * max(one_minus ** ((1.0 - 2.0 * b) / b), 1.0)
        for a, b in zip(g.a, params.b, strict=True)
    )
    if all(c > 0.0 for c in c_conv):
        schur = c_normal - delta * sum(ct * ct / c for ct, c in zip(c_tilde, c_conv, strict=True))
        tau1 = math.prod(c_conv) * schur
    else:
        tau1 = -math.inf

    a_hat = max(g.a)
    a_check = 1.0 / a_hat
    tau2 = a_hat * eps ** a_check * math.sqrt(delta) * params.d ** (1.0 - a_check)

    powers = [(lo ** (1.0 - b), 1.0) for b, (lo, _) in zip(params.b, xi_range, strict=True)]
    xibar_lo = mu_ * sum(min(pair) for pair in powers)
    xibar_hi = mu_ * sum(max(pair) for pair in powers)
    sqrt2 = math.sqrt(2.0)
    first = min(min(1.0, (2.0 + 2.0 * sqrt2 * lam / xb) ** (-gamma)) for xb in (xibar_lo, xibar_hi))
    second = min(1.0, (1.0 + tau2) ** (-gamma))
    third = min(xb ** (-gamma) for xb in (xibar_lo, xibar_hi))
    tau3 = first * second * third

    xi: tuple[float, ...] = ()
    if x is not None:
        y = np.asarray(x, dtype=float)
        s = float(y[g.k])
        if s <= 0.0:
            raise OutsideBarrierDomain(tuple(y), "normal coordinate must be positive")
        ratio = s / eps
        values = []
        for i, (a, b) in enumerate(zip(g.a, params.b, strict=True)):
            bracket = ratio ** (2.0 / a) - y[i] * y[i]
            if bracket <= 0.0:
                raise OutsideBarrierDomain(tuple(y), f"bracket of H_{i} is not positive")
            values.append(bracket ** (1.0 / b) / ratio ** mu_)
        xi = tuple(values)

    return BarrierDiagnostics(
        delta_eps=delta,
        xi=xi,
        xi_range=xi_range,
        c=(*c_conv, c_normal),
        c_tilde=c_tilde,
        tau1=tau1,
        tau2=tau2,
        tau3=tau3,
        a_hat=a_hat,
        a_check=a_check,
        xibar_range=(xibar_lo, xibar_hi),
    )


def tau1_limit(growth: GrowthParams) -> float:
    """The limit of tau1 as eps tends to zero: k a_1...a_k mu^(k+1) (1 - mu)."""
    mu_ = mu(growth)
    return growth.k * math.prod(growth.a) * mu_ ** (growth.k + 1) * (1.0 - mu_)


def schur_det_lower_bound(params: BarrierParams, x: ArrayLike) -> t.Any:
    """The analytic lower bound for det D^2 W at frame point(s) x.

    Raises
    ------
    BoundUnavailable
        If tau1 <= 0 at this epsilon.
    """
    g = params.growth
    y, single = _as_points(x)
    tau1 = diagnostics(params).tau1
    if not tau1 > 0.0:
        raise BoundUnavailable(params.eps, tau1)
    s = _normal_coordinate(params, y)
    eps = params.eps
    exponent = g.n * params.mu - abar(g) - 2.0
    bound = (
        params.M ** g.n
        * params.Lambda ** (g.k + 1 - g.n)
        * eps ** -2.0
        * tau1
        * (s / eps) ** exponent
    )
    return float(bound[0]) if single else bound


def gradient_bounds_G(params: BarrierParams, x: ArrayLike) -> tuple[t.Any, t.Any]:
    """Lower and upper bounds for |DG|^2 at frame point(s) x."""
    y, single = _as_points(x)
    s = _normal_coordinate(params, y)
    eps, mu_ = params.eps, params.mu
    base = (s / eps) ** (2.0 * (mu_ - 1.0))
    lower = (mu_ / eps) ** 2 * base
    upper = (2.0 * params.Lambda / eps) ** 2 * base
    if single:
        return float(lower[0]), float(upper[0])
    return lower, upper


def fw_lower_bound(params: BarrierParams) -> float:
    """The analytic lower bound for F[W] implied by tau1 and tau3."""
    g = params.growth
    diag = diagnostics(params)
    return (
        params.M ** (g.n + g.alpha - g.gamma)
        * params.eps ** (g.n - 1.0 - g.beta + g.gamma)
        * params.Lambda ** (g.k + 1 - g.n)
        * min(1.0, (params.Lambda + g.k) ** g.alpha)
        * diag.tau1
        * diag.tau3
        / g.A
    )


def _fw_values(
    barrier: BarrierFunction,
    model: RhsModel,
    y: Array,
    distances: Array | None,
) -> Array:
    value, grad, hess = barrier.evaluate(y)
    eig = np.linalg.eigvalsh(hess)
    scale = np.max(np.abs(eig), axis=1)
    convex = eig[:, 0] >= -1e-9 * scale
    det = np.prod(eig, axis=1)
    negative = value < 0.0
    fw = np.full(y.shape[0], -np.inf)
    if np.any(negative):
        world = barrier.frame.to_world(y[negative])
        dist = distances[negative] if distances is not None else None
        rhs = model.evaluate(world, value[negative], grad[negative], dist)
        fw[negative] = det[negative] / rhs
    fw[~convex] = -np.inf
    return fw


def sample_FW(
    barrier: BarrierFunction,
    model: RhsModel,
    samples: ArrayLike,
    distances: ArrayLike | None = None,
) -> Array:
    """Evaluates F[W] at every frame sample point; -inf where D^2 W is not positive semidefinite."""
    y = np.atleast_2d(np.asarray(samples, dtype=float))
    dist = None if distances is None else np.asarray(distances, dtype=float)
    if model.needs_distance and dist is None:
        assert model.domain is not None
        dist = model.domain.distances(barrier.frame.to_world(y))
    return _fw_values(barrier, model, y, dist)


def certify_subsolution(
    barrier: BarrierFunction,
    model: RhsModel,
    samples: ArrayLike,
    margin: float = 1e-6,
    distances: ArrayLike | None = None,
    workers: int = 1,
) -> SubsolutionCertificate:
    """Evaluates F[W] = det D^2 W / F(x, W, DW) at every frame sample point.

    Parameters
    ----------
    barrier: BarrierFunction
        The barrier to certify.
    model: RhsModel
        The right-hand side.
    samples: ArrayLike
        An (m, n) array of frame points strictly inside the domain.
    margin: float
        The certificate requires min F[W] > 1 + margin.
    distances: ArrayLike, optional
        Precomputed d_x at the samples, for models that need them.
    workers: int
        The number of threads over which the samples are split.

    Raises
    ------
    OutsideBarrierDomain
        If some sample lies outside the barrier's domain of definition.
    """
    y = np.atleast_2d(np.asarray(samples, dtype=float))
    dist = None if distances is None else np.asarray(distances, dtype=float)
    if model.needs_distance and dist is None:
        assert model.domain is not None
        dist = model.domain.distances(barrier.frame.to_world(y))
    chunks = np.array_split(np.arange(y.shape[0]), max(1, workers))
    chunks = [c for c in chunks if c.size]

    def run(indices: Array) -> Array:
        return _fw_values(barrier, model, y[indices], None if dist is None else dist[indices])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    fw = np.concatenate(parts)
    worst = int(np.argmin(fw))
    min_fw = float(fw[worst])
    return SubsolutionCertificate(
        passed=bool(min_fw > 1.0 + margin),
        min_FW=min_fw,
        worst_point=y[worst].copy(),
        margin=margin,
        sample_count=int(y.shape[0]),
    )


def sample_ladder(
    domain: ConvexDomain,
    frame: BoundaryFrame,
    k: int,
    a: t.Sequence[float],
    eta: t.Sequence[float],
    levels: int = 24,
    per_axis: int = 5,
    rng: np.random.Generator | None = None,
) -> Array:
    """Builds the default certification sample: a dyadic ladder in the normal coordinate.

    At every level s_j = 0.9 s_top 2^-j, tangential coordinates form a tensor
    grid scaled by the width of the power cup (for strictly convex directions)
    or by the diameter (for flat directions); only points strictly inside the
    domain are kept. Frame coordinates are returned.
    """
    n, axis, d = domain.n, frame.axis, domain.diameter
    start = 1e-6 * d
    s_top = start + float(domain.ray_exit(inward_ray(frame, start), frame.normal[None, :])[0])
    if rng is None:
        fractions = np.linspace(-0.9, 0.9, per_axis)
        grids = [fractions] * (n - 1)
    else:
        grids = [rng.uniform(-0.95, 0.95, per_axis) for _ in range(n - 1)]
    tangential = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, n - 1)
    tangent_axes = [j for j in range(n) if j != axis]

    blocks = []
    for j in range(levels):
        s = 0.9 * s_top * 2.0 ** (-j)
        widths = np.array([
            (s / eta[i]) ** (1.0 / a[i]) if i < k else d
            for i in tangent_axes
        ])
        y = np.zeros((tangential.shape[0], n))
        y[:, tangent_axes] = tangential * widths
        y[:, axis] = s
        blocks.append(y[domain.contains(frame.to_world(y))])
    samples = np.concatenate(blocks)
    logger.debug(f"certification ladder: {samples.shape[0]} samples over {levels} levels (s_top = {s_top:.6g})")
    return samples


def _search_M(
    params: BarrierParams,
    kind: str,
    model: RhsModel,
    samples: Array,
    margin: float,
    distances: Array | None,
    workers: int,
) -> BarrierFunction | None:
    """Finds the smallest power of two M for which the barrier is certified."""
    g = params.growth
    start = 0
    if g.gamma == 0.0:
        unit_run = certify_subsolution(
            BarrierFunction(params.with_M(1.0), kind), model, samples, margin, distances, workers,
        )
        if unit_run.passed:
            return BarrierFunction(params.with_M(1.0), kind, unit_run)
        if not (math.isfinite(unit_run.min_FW) and unit_run.min_FW > 0.0):
            return None
        # F[W] is homogeneous of degree n + alpha in M when gamma = 0
        needed = math.log2((1.0 + margin) / unit_run.min_FW) / (g.n + g.alpha)
        start = max(0, math.ceil(needed) - 2)

    previous = -math.inf
    for exponent in range(start, _MAX_DOUBLINGS + 1):
        barrier = BarrierFunction(params.with_M(2.0 ** exponent), kind)
        certificate = certify_subsolution(barrier, model, samples, margin, distances, workers)
        logger.debug(f"M = 2^{exponent}: min F[W] = {certificate.min_FW:.6g}")
        if certificate.passed:
            return attr.evolve(barrier, certificate=certificate)
        if not math.isfinite(certificate.min_FW) or certificate.min_FW <= previous:
            return None
        previous = certificate.min_FW
    return None


def find_eps_M(
    cert: ConvexityCertificate,
    model: RhsModel,
    samples: ArrayLike | None = None,
    margin: float = 1e-6,
    workers: int = 1,
) -> BarrierFunction:
    """Searches for (eps, M) such that W = M(H+G) is a certified subsolution.

    eps runs down the ladder eps_max 2^-j (eps_max = min{1, d, min eta_i} / 2)
    until tau1 and tau3 are positive (and, when gamma != 0, |DH| >= 1 on the
    sample); for that eps, M is the smallest power of two that passes
    :func:`certify_subsolution`.

    Raises
    ------
    ParameterDomainError
        If the growth parameters combined with the certificate are inadmissible.
    SearchFailure
        If the ladder is exhausted.
    """
    growth = model.params.with_geometry(cert.k, cert.a, cert.eta)
    violations = validate(growth)
    if violations:
        raise ParameterDomainError(tuple(violations))
    if cert.k == 0:
        raise ParameterDomainError(("k >= 1 (use flat_barrier for a flat contact point)",))
    domain, frame = cert.domain, cert.frame
    d = domain.diameter
    if samples is None:
        points = sample_ladder(domain, frame, cert.k, cert.a, cert.eta)
    else:
        points = np.atleast_2d(np.asarray(samples, dtype=float))
    distances = domain.distances(frame.to_world(points)) if model.needs_distance else None

    eps_max = min(1.0, d, *cert.eta) / 2.0
    tried: list[dict[str, float]] = []
    for j in range(_MAX_HALVINGS + 1):
        eps = eps_max * 2.0 ** (-j)
        params = BarrierParams(growth, frame, eps, 1.0, d)
        diag = diagnostics(params)
        tried.append({"epsilon": eps, "tau1": diag.tau1, "tau3": diag.tau3})
        if not (diag.tau1 > 0.0 and diag.tau3 > 0.0):
            logger.debug(f"eps = {eps:.6g}: tau1 = {diag.tau1:.6g}, tau3 = {diag.tau3:.6g}; halving")
            continue
        if growth.gamma != 0.0:
            _, h_grad, _ = _h_parts(params, points)
            if np.min(np.linalg.norm(h_grad, axis=1)) < 1.0:
                logger.debug(f"eps = {eps:.6g}: |DH| < 1 on the sample; halving")
                continue
        barrier = _search_M(params, ANISOTROPIC, model, points, margin, distances, workers)
        if barrier is not None:
            assert barrier.certificate is not None
            logger.info(
                f"certified barrier: eps = {eps:.6g}, M = {barrier.params.M:.6g}, "
                f"min F[W] = {barrier.certificate.min_FW:.6g} on {points.shape[0]} samples",
            )
            return barrier
        logger.debug(f"eps = {eps:.6g}: no admissible M; halving")
    raise SearchFailure("epsilon ladder exhausted", {"ladder": tried, "samples": int(points.shape[0])})


def flat_barrier(
    domain: ConvexDomain,
    model: RhsModel,
    frame: BoundaryFrame,
    samples: ArrayLike | None = None,
    margin: float = 1e-6,
    workers: int = 1,
) -> BarrierFunction:
    """Builds and certifies the flat barrier W = -M s^mu0 (N^2 - |y'|^2).

    Raises
    ------
    FrameError
        If the frame does not carry the normal on its last axis.
    ParameterDomainError
        If the growth parameters are inadmissible for a flat contact point.
    SearchFailure
        If no power of two M certifies the barrier.
    """
    n = domain.n
    if frame.axis != n - 1:
        raise FrameError(tuple(frame.origin), "flat barrier needs the normal on the last axis")
    growth = model.params.with_geometry(0, (), ())
    params = BarrierParams(growth, frame, None, 1.0, domain.diameter)
    if samples is None:
        points = sample_ladder(domain, frame, 0, (), ())
    else:
        points = np.atleast_2d(np.asarray(samples, dtype=float))
    distances = domain.distances(frame.to_world(points)) if model.needs_distance else None
    barrier = _search_M(params, FLAT, model, points, margin, distances, workers)
    if barrier is None:
        raise SearchFailure("no power of two M certifies the flat barrier", {"mu0": params.mu, "N": params.Lambda})
    assert barrier.certificate is not None
    logger.info(f"certified flat barrier: mu0 = {params.mu:.6g}, M = {barrier.params.M:.6g}")
    return barrier
