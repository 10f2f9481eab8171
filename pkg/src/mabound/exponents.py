"""Structure constants of the right-hand side and the boundary exponent calculus.

A right-hand side F belongs to the structure class when

    0 < F(x, z, q) <= A d_x^(beta - (n + 1)) |z|^(-alpha) (1 + |q|^2)^(gamma / 2)

and the domain is k-strictly convex with powers a_1..a_k and moduli
eta_1..eta_k at the contact point of interest. The solution then satisfies
|u(x)| <= C d_x^mu with

    mu = (abar + beta - n - gamma + 1) / (n + alpha - gamma),   abar = sum 2 / a_i.
"""
from __future__ import annotations

__all__ = (
    "GrowthParams",
    "VIOLATION_A",
    "VIOLATION_ETA",
    "VIOLATION_A_CONSTANT",
    "VIOLATION_BETA",
    "VIOLATION_MU_POSITIVE",
    "VIOLATION_MU_BELOW_ONE",
    "abar",
    "b_coeffs",
    "holder_exponent",
    "mu",
    "mu_flat",
    "validate",
)

import typing as t

import attr

from .exceptions import ParameterDomainError

VIOLATION_A = "a_i >= 1"
VIOLATION_ETA = "eta_i > 0"
VIOLATION_A_CONSTANT = "A > 0"
VIOLATION_BETA = "beta >= n+1"
VIOLATION_MU_POSITIVE = "0 < abar+beta-n-gamma+1"
VIOLATION_MU_BELOW_ONE = "abar+beta-n-gamma+1 < n+alpha-gamma"


def _as_float_tuple(values: t.Iterable[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@attr.s(frozen=True, slots=True, auto_attribs=True)
class GrowthParams:
    """The structure constants of a right-hand side and of the contact geometry.

    Construction only checks the shape of the record (n >= 2, 0 <= k <= n-1,
    and len(a) == len(eta) == k); the admissibility inequalities are checked
    by :func:`validate`, so that inadmissible records can still be built and
    diagnosed.

    Attributes
    ----------
    n: int
        The dimension.
    k: int
        The number of strictly convex directions at the contact point.
    a: tuple[float, ...]
        The convexity power of each strictly convex direction.
    eta: tuple[float, ...]
        The convexity modulus of each strictly convex direction.
    alpha: float
        The singularity power in |z|.
    beta: float
        The degeneracy power in d_x.
    gamma: float
        The gradient power.
    A: float
        The structure constant.
    """
    n: int
    k: int = attr.ib(default=0)
    a: tuple[float, ...] = attr.ib(default=(), converter=_as_float_tuple)
    eta: tuple[float, ...] = attr.ib(default=(), converter=_as_float_tuple)
    alpha: float = attr.ib(default=0.0, converter=float)
    beta: float = attr.ib(default=0.0, converter=float)
    gamma: float = attr.ib(default=0.0, converter=float)
    A: float = attr.ib(default=1.0, converter=float)

    def __attrs_post_init__(self) -> None:
        problems: list[str] = []
        if int(self.n) != self.n or self.n < 2:  # noqa: PLR2004
            problems.append(f"n must be an integer >= 2 (got {self.n})")
        if int(self.k) != self.k or not 0 <= self.k <= self.n - 1:
            problems.append(f"k must be an integer in [0, n-1] (got {self.k})")
        if len(self.a) != self.k or len(self.eta) != self.k:
            problems.append(f"a and eta must have length k = {self.k}")
        if problems:
            raise ParameterDomainError(tuple(problems))

    @classmethod
    def pure_hyperbolic(cls, n: int) -> GrowthParams:
        """The constants of F = |z|^(-(n+2)) with a flat contact point."""
        return cls(n=n, alpha=n + 2, beta=n + 1, gamma=0.0, A=1.0)

    def with_geometry(
        self,
        k: int,
        a: t.Sequence[float],
        eta: t.Sequence[float],
    ) -> GrowthParams:
        """Returns a copy whose convexity data are replaced by the given ones."""
        return attr.evolve(self, k=k, a=tuple(a), eta=tuple(eta))

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "n": self.n,
            "k": self.k,
            "a": list(self.a),
            "eta": list(self.eta),
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "A": self.A,
        }

    @classmethod
    def from_dict(cls, d: t.Mapping[str, t.Any]) -> GrowthParams:
        a = tuple(d.get("a", ()))
        return cls(
            n=int(d["n"]),
            k=int(d.get("k", len(a))),
            a=a,
            eta=tuple(d.get("eta", ())),
            alpha=d.get("alpha", 0.0),
            beta=d.get("beta", 0.0),
            gamma=d.get("gamma", 0.0),
            A=d.get("A", 1.0),
        )


def abar(params: GrowthParams) -> float:
    """Computes the anisotropy sum abar = sum_i 2 / a_i (zero when k = 0)."""
    if any(ai < 1.0 for ai in params.a):
        raise ParameterDomainError((VIOLATION_A,))
    return sum(2.0 / ai for ai in params.a)


def _numerator(params: GrowthParams, abar_value: float) -> float:
    return abar_value + params.beta - params.n - params.gamma + 1.0


def _denominator(params: GrowthParams) -> float:
    return params.n + params.alpha - params.gamma


def _violations(params: GrowthParams, abar_value: float) -> list[str]:
    violations: list[str] = []
    if any(ai < 1.0 for ai in params.a):
        violations.append(VIOLATION_A)
    if any(ei <= 0.0 for ei in params.eta):
        violations.append(VIOLATION_ETA)
    if params.A <= 0.0:
        violations.append(VIOLATION_A_CONSTANT)
    if params.beta < params.n + 1:
        violations.append(VIOLATION_BETA)
    numerator = _numerator(params, abar_value)
    if not numerator > 0.0:
        violations.append(VIOLATION_MU_POSITIVE)
    if not numerator < _denominator(params):
        violations.append(VIOLATION_MU_BELOW_ONE)
    return violations


def validate(params: GrowthParams) -> list[str]:
    """Returns every violated admissibility condition; empty when admissible."""
    abar_value = sum(2.0 / ai for ai in params.a if ai > 0.0)
    return _violations(params, abar_value)


def mu(params: GrowthParams) -> float:
    """Computes the boundary exponent mu, which lies in (0, 1).

    Raises
    ------
    ParameterDomainError
        If the parameters are inadmissible.
    """
    violations = validate(params)
    if violations:
        raise ParameterDomainError(tuple(violations))
    return _numerator(params, abar(params)) / _denominator(params)


def mu_flat(params: GrowthParams) -> float:
    """Computes the flat-boundary exponent mu0, i.e., mu with abar = 0."""
    violations = _violations(params, 0.0)
    if violations:
        raise ParameterDomainError(tuple(violations))
    return _numerator(params, 0.0) / _denominator(params)


def b_coeffs(params: GrowthParams) -> tuple[float, ...]:
    """Computes the barrier powers b_i, which satisfy mu * a_i * b_i = 2.

    Raises
    ------
    ParameterDomainError
        If the parameters are inadmissible or k = 0.
    """
    if params.k == 0:
        raise ParameterDomainError(("k >= 1 (no strictly convex direction to build b_i for)",))
    violations = validate(params)
    if violations:
        raise ParameterDomainError(tuple(violations))
    ratio = _denominator(params) / (abar(params) + 1.0 + params.beta - params.n - params.gamma)
    return tuple((2.0 / ai) * ratio for ai in params.a)


def holder_exponent(params: GrowthParams) -> float:
    """The global Hölder exponent of the solution: mu when k >= 1, mu0 otherwise."""
    if params.k == 0:
        return mu_flat(params)
    return mu(params)
