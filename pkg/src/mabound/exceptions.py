from __future__ import annotations

__all__ = (
    "MaboundException",
    "ParameterDomainError",
    "DomainError",
    "FrameError",
    "SingularityError",
    "OutsideBarrierDomain",
    "BoundUnavailable",
    "SearchFailure",
    "ResolutionError",
    "IterationLimitExceeded",
    "InsufficientData",
    "ConfigError",
)

import typing as t

import attr as _attr


def _fmt_point(point: t.Sequence[float] | None) -> str:
    if point is None:
        return "?"
    return "(" + ", ".join(f"{x:.6g}" for x in point) + ")"


class MaboundException(Exception):
    """Used by all exceptions that are thrown by mabound."""


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class ParameterDomainError(MaboundException):
    """One or more structure constants or numeric arguments are inadmissible.

    Attributes
    ----------
    violations: tuple[str, ...]
        The names of the violated conditions.
    """
    violations: tuple[str, ...]

    def __str__(self) -> str:
        return "inadmissible parameters: " + "; ".join(self.violations)


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class DomainError(MaboundException):
    """A point lies on or outside a domain, or the domain itself is invalid."""
    reason: str
    point: tuple[float, ...] | None = _attr.ib(default=None)

    def __str__(self) -> str:
        if self.point is None:
            return f"domain error: {self.reason}"
        return f"domain error at {_fmt_point(self.point)}: {self.reason}"


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class FrameError(MaboundException):
    """No canonical boundary frame can be erected at a given point."""
    point: tuple[float, ...]
    reason: str

    def __str__(self) -> str:
        return f"cannot build boundary frame at {_fmt_point(self.point)}: {self.reason}"


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class SingularityError(MaboundException):
    """The right-hand side was evaluated at a nonnegative value of z."""
    z: float

    def __str__(self) -> str:
        return f"right-hand side is singular at z = {self.z!r} (z must be negative)"


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class OutsideBarrierDomain(MaboundException):
    """A barrier was evaluated where its closed form is undefined."""
    point: tuple[float, ...]
    reason: str

    def __str__(self) -> str:
        return f"barrier undefined at frame point {_fmt_point(self.point)}: {self.reason}"


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class BoundUnavailable(MaboundException):
    """The analytic determinant bound is not available for this epsilon.

    Attributes
    ----------
    epsilon: float
        The barrier scale at which the bound was requested.
    tau1: float
        The (nonpositive) value of the Schur constant at that scale.
    """
    epsilon: float
    tau1: float

    def __str__(self) -> str:
        return f"determinant bound unavailable at epsilon = {self.epsilon:.6g} (tau1 = {self.tau1:.6g}); shrink epsilon"


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class SearchFailure(MaboundException):
    """The search for a certified barrier was exhausted."""
    reason: str
    diagnostics: t.Mapping[str, t.Any] = _attr.ib(factory=dict)

    def __str__(self) -> str:
        return f"barrier search failed: {self.reason}"


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class ResolutionError(MaboundException):
    """A grid cannot be built, or the solver cannot run, at a given spacing."""
    h: float
    reason: str

    def __str__(self) -> str:
        return f"unusable grid spacing h = {self.h:.6g}: {self.reason}"


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class IterationLimitExceeded(MaboundException):
    """The solver did not converge within its iteration limit.

    Attributes
    ----------
    iterations: int
        The number of sweeps that were performed.
    history: tuple[float, ...]
        The sup-norm update of every sweep.
    residual: float
        The sup-norm of the scheme residual when the solver gave up.
    """
    iterations: int
    history: tuple[float, ...]
    residual: float = _attr.ib(default=float("nan"))

    def __str__(self) -> str:
        last = self.history[-1] if self.history else float("nan")
        return (f"solver did not converge after {self.iterations} sweeps "
                f"(last update {last:.3e}, residual {self.residual:.3e})")


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class InsufficientData(MaboundException):
    """Too few samples, or too narrow a range, to fit a boundary rate."""
    count: int
    octaves: float

    def __str__(self) -> str:
        return (f"insufficient data for a rate fit: {self.count} points "
                f"spanning {self.octaves:.2f} octaves (need >= 8 points and >= 2 octaves)")


@_attr.s(frozen=True, auto_exc=True, auto_attribs=True)
class ConfigError(MaboundException):
    """A run configuration is malformed or inconsistent."""
    reason: str

    def __str__(self) -> str:
        return f"invalid configuration: {self.reason}"
