"""Batch command-line interface.

Every run reads a JSON configuration, executes one command and writes its
artifacts, together with ``manifest.json``, into the output directory.

Exit codes:
  0  success
  2  configuration error (nothing is written)
  3  parameter-domain error (also domain, frame and resolution errors)
  4  barrier search failure or failed k-convexity certificate
  5  solver non-convergence
  6  bound violation
"""
from __future__ import annotations

__all__ = (
    "COMMANDS",
    "EXIT_BOUND",
    "EXIT_CONFIG",
    "EXIT_NONCONVERGENCE",
    "EXIT_OK",
    "EXIT_PARAMETER",
    "EXIT_SEARCH",
    "RunConfig",
    "load_config",
    "main",
    "run",
)

import argparse
import json
import sys
import typing as t
from pathlib import Path

import attr
import numpy as np
from loguru import logger

from . import analysis, barrier, exponents, geometry, oracle, rhs, solver
from .artifacts import ArtifactWriter, canonical_json, config_digest
from .exceptions import (
    BoundUnavailable,
    ConfigError,
    IterationLimitExceeded,
    MaboundException,
    ParameterDomainError,
    SearchFailure,
)
from .stopwatch import Stopwatch
from .version import __version__

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARAMETER = 3
EXIT_SEARCH = 4
EXIT_NONCONVERGENCE = 5
EXIT_BOUND = 6

COMMANDS = ("exponent", "certify", "barrier", "solve", "rate", "verify-examples")

_RESIDUAL_TOL = 1e-6
_RATE_TOL = 0.01
_EXAMPLE_SAMPLES = 1000

_EPILOG = """\
exit codes:
  0  success
  2  configuration error (nothing is written)
  3  parameter-domain, domain, frame or resolution error
  4  barrier search failure or failed k-convexity certificate
  5  solver non-convergence
  6  bound violation
"""


def _mapping(value: t.Any) -> dict[str, t.Any] | None:
    if value is None:
        return None
    if not isinstance(value, t.Mapping):
        raise ConfigError(f"expected an object, got {type(value).__name__}")
    return dict(value)


@attr.s(frozen=True, kw_only=True, auto_attribs=True)
class RunConfig:
    """A run configuration as read from JSON.

    Attributes
    ----------
    command: str
        One of ``exponent``, ``certify``, ``barrier``, ``solve``, ``rate`` and
        ``verify-examples``.
    domain: dict, optional
        The domain JSON (see :meth:`ConvexDomain.from_dict`).
    growth_params: dict, optional
        The structure constants (see :meth:`GrowthParams.from_dict`).
    rhs: dict, optional
        The right-hand side JSON (see :meth:`RhsModel.from_dict`).
    contact: dict, optional
        The contact point: ``point``, ``k``, ``a``, ``eta`` and optionally
        ``samples`` (boundary samples for the convexity certificate).
    solver: dict
        :class:`SolveConfig` fields.
    analysis: dict
        ``near_layers``, ``far_fraction``, ``bound_inflation`` and ``holder_pairs``.
    seed: int
        The seed of every random sample drawn during the run.
    threads: int
        The number of worker threads for barrier certification.
    """
    command: str = attr.ib(validator=attr.validators.in_(COMMANDS))
    domain: dict[str, t.Any] | None = attr.ib(default=None, converter=_mapping)
    growth_params: dict[str, t.Any] | None = attr.ib(default=None, converter=_mapping)
    rhs: dict[str, t.Any] | None = attr.ib(default=None, converter=_mapping)
    contact: dict[str, t.Any] | None = attr.ib(default=None, converter=_mapping)
    solver: dict[str, t.Any] = attr.ib(factory=dict, converter=lambda v: _mapping(v) or {})
    analysis: dict[str, t.Any] = attr.ib(factory=dict, converter=lambda v: _mapping(v) or {})
    seed: int = attr.ib(default=0, converter=int)
    threads: int = attr.ib(default=1, converter=int)

    def to_dict(self) -> dict[str, t.Any]:
        return {k: v for k, v in attr.asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: t.Mapping[str, t.Any]) -> RunConfig:
        """Builds a configuration, rejecting unknown keys.

        Raises
        ------
        ConfigError
            If a key is unknown, the command is missing or a value has the wrong type.
        """
        known = {a.name for a in attr.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(unknown)}")
        if "command" not in d:
            raise ConfigError("missing key: command")
        try:
            return cls(**d)
        except (TypeError, ValueError) as err:
            raise ConfigError(str(err)) from err

    @property
    def digest(self) -> str:
        return config_digest(self.to_dict())


def load_config(path: str | Path, command: str | None = None) -> RunConfig:
    """Reads a configuration file; ``command`` overrides the file's command.

    Raises
    ------
    ConfigError
        If the file is missing, is not valid JSON or does not describe a configuration.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"malformed JSON in {path}: {err.msg} (line {err.lineno})") from err
    if not isinstance(payload, dict):
        raise ConfigError("the configuration must be a JSON object")
    if command is not None:
        payload["command"] = command
    return RunConfig.from_dict(payload)


@attr.s(frozen=True, auto_attribs=True)
class _Setup:
    """The library objects a configuration describes, built before anything is written."""
    config: RunConfig
    domain: geometry.ConvexDomain | None
    model: rhs.RhsModel | None
    growth: exponents.GrowthParams | None
    solve_config: solver.SolveConfig

    def require_domain(self) -> geometry.ConvexDomain:
        if self.domain is None:
            raise ConfigError(f"command {self.config.command} needs a domain")
        return self.domain

    def require_model(self) -> rhs.RhsModel:
        if self.model is None:
            raise ConfigError(f"command {self.config.command} needs an rhs")
        return self.model

    def contact(self) -> dict[str, t.Any]:
        if self.config.contact is None or "point" not in self.config.contact:
            raise ConfigError(f"command {self.config.command} needs a contact point")
        contact = dict(self.config.contact)
        contact.setdefault("a", [])
        contact.setdefault("eta", [])
        contact.setdefault("k", len(contact["a"]))
        return contact


def _setup(config: RunConfig) -> _Setup:
    try:
        domain = geometry.ConvexDomain.from_dict(config.domain) if config.domain is not None else None
        model = rhs.RhsModel.from_dict(config.rhs, domain) if config.rhs is not None else None
        if config.growth_params is not None:
            growth = exponents.GrowthParams.from_dict(config.growth_params)
        else:
            growth = model.params if model is not None else None
        solve_config = solver.SolveConfig.from_dict(config.solver)
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"cannot interpret configuration: {err!r}") from err
    unknown = set(config.analysis) - {"near_layers", "far_fraction", "bound_inflation", "holder_pairs"}
    if unknown:
        raise ConfigError(f"unknown analysis keys: {', '.join(sorted(unknown))}")
    return _Setup(config, domain, model, growth, solve_config)


def _exponent(setup: _Setup, writer: ArtifactWriter) -> int:
    growth = setup.growth
    if growth is None:
        raise ConfigError("command exponent needs growth_params")
    violations = exponents.validate(growth)
    report: dict[str, t.Any] = {
        "growth_params": growth.to_dict(),
        "abar": sum(2.0 / a for a in growth.a if a > 0.0),
        "violations": violations,
        "admissible": not violations,
    }
    if not violations:
        report["mu"] = exponents.mu(growth)
        report["b"] = list(exponents.b_coeffs(growth)) if growth.k >= 1 else []
        report["holder_exponent"] = exponents.holder_exponent(growth)
    try:
        report["mu_flat"] = exponents.mu_flat(growth)
    except ParameterDomainError:
        report["mu_flat"] = None
    writer.write_json("exponent.json", report)
    print(canonical_json(report))
    return EXIT_OK if not violations else EXIT_PARAMETER


def _certificate(setup: _Setup) -> geometry.ConvexityCertificate | geometry.ConvexityFailure:
    domain = setup.require_domain()
    contact = setup.contact()
    return geometry.certify_k_convexity(
        domain,
        contact["point"],
        int(contact["k"]),
        contact["a"],
        contact["eta"],
        sample_count=contact.get("samples"),
        seed=setup.config.seed,
    )


def _certify(setup: _Setup, writer: ArtifactWriter) -> int:
    result = _certificate(setup)
    writer.write_json("certificate.json", result.to_dict())
    return EXIT_OK if result.passed else EXIT_SEARCH


def _build_barrier(setup: _Setup) -> barrier.BarrierFunction:
    domain = setup.require_domain()
    model = setup.require_model()
    contact = setup.contact()
    if int(contact["k"]) == 0:
        frame = geometry.BoundaryFrame.at(domain, contact["point"], axis=domain.n - 1)
        return barrier.flat_barrier(domain, model, frame, workers=setup.config.threads)
    result = _certificate(setup)
    if not isinstance(result, geometry.ConvexityCertificate):
        raise SearchFailure("the contact point is not k-strictly convex", result.to_dict())
    return barrier.find_eps_M(result, model, workers=setup.config.threads)


def _barrier(setup: _Setup, writer: ArtifactWriter) -> int:
    domain = setup.require_domain()
    model = setup.require_model()
    built = _build_barrier(setup)
    params = built.params
    samples = barrier.sample_ladder(domain, params.frame, params.growth.k, params.growth.a, params.growth.eta)
    fw = barrier.sample_FW(built, model, samples)
    value, _, _ = built.evaluate(samples)
    report = built.to_dict()
    if built.kind == barrier.ANISOTROPIC:
        report["diagnostics"] = barrier.diagnostics(params).to_dict()
        report["fw_lower_bound"] = barrier.fw_lower_bound(params)
    writer.write_json("barrier.json", report)
    n = domain.n
    columns = [f"y{i}" for i in range(n)] + ["W", "FW"]
    rows = (
        {**{f"y{i}": float(y[i]) for i in range(n)}, "W": float(w), "FW": float(f)}
        for y, w, f in zip(samples, value, fw, strict=True)
    )
    writer.write_csv("barrier_samples.csv", columns, rows)
    return EXIT_OK


_SOLUTION_COLUMNS = ("x", "y", "u", "residual", "d_x")


def _run_solver(
    setup: _Setup,
    writer: ArtifactWriter,
) -> tuple[solver.SolverState | None, barrier.BarrierFunction | None]:
    domain = setup.require_domain()
    model = setup.require_model()
    init = _build_barrier(setup) if setup.config.contact is not None else None
    try:
        state = solver.solve(domain, model, setup.solve_config, init)
    except IterationLimitExceeded as err:
        writer.write_json(
            "convergence.json",
            {
                "config": setup.solve_config.to_dict(),
                "converged": False,
                "iterations": err.iterations,
                "history": list(err.history),
                "max_residual": err.residual,
            },
        )
        raise
    writer.write_csv("solution.csv", _SOLUTION_COLUMNS, state.rows())
    writer.write_json("convergence.json", state.to_dict())
    return state, init


def _solve(setup: _Setup, writer: ArtifactWriter) -> int:
    state, init = _run_solver(setup, writer)
    assert state is not None
    if init is None:
        return EXIT_OK
    report = solver.discrete_comparison_check(state, init)
    writer.write_json("comparison.json", report.to_dict())
    return EXIT_OK if report.passed else EXIT_BOUND


def _rate(setup: _Setup, writer: ArtifactWriter) -> int:
    if setup.config.contact is None:
        raise ConfigError("command rate needs a contact point")
    domain = setup.require_domain()
    model = setup.require_model()
    state, init = _run_solver(setup, writer)
    assert state is not None and init is not None
    options = setup.config.analysis
    pairs = analysis.ray_profile(
        state.field,
        init.frame,
        domain,
        near_layers=int(options.get("near_layers", analysis.NEAR_LAYERS)),
        far_fraction=float(options.get("far_fraction", analysis.FAR_FRACTION)),
    )
    growth = init.params.growth
    mu_theory = exponents.holder_exponent(growth)
    report = analysis.fit_rate(pairs, mu_theory)
    inflation = float(options.get("bound_inflation", 1.1))
    bound = analysis.check_bound(pairs, mu_theory, inflation * report.C_fitted)
    seminorm = analysis.empirical_holder_seminorm(
        state.field, mu_theory, int(options.get("holder_pairs", 100_000)), setup.config.seed,
    )
    comparison = solver.discrete_comparison_check(state, init)
    writer.write_csv("rate_pairs.csv", ("d", "abs_u"), ({"d": float(d), "abs_u": float(u)} for d, u in pairs))
    writer.write_json(
        "rate.json",
        {
            "rate": report.to_dict(),
            "bound": bound.to_dict(),
            "comparison": comparison.to_dict(),
            "holder_constant": analysis.holder_constant(bound.C, mu_theory, domain.diameter),
            "empirical_holder_seminorm": seminorm,
            "model": model.to_dict(),
        },
    )
    return EXIT_OK if bound.passed and comparison.passed else EXIT_BOUND


def _verify_examples(setup: _Setup, writer: ArtifactWriter) -> int:
    n = setup.growth.n if setup.growth is not None else 2
    rng = np.random.default_rng(setup.config.seed)
    distances = np.geomspace(1e-4, 1e-1, 16)
    rows = []
    failed = False
    for solution in (oracle.exact_ball(n), oracle.exact_cylinder(n), oracle.exact_cone(n)):
        points = oracle.interior_sample(solution, _EXAMPLE_SAMPLES, rng)
        residual = max(abs(oracle.pde_residual(solution, p)) for p in points)
        expected = {oracle.BALL: 0.5, oracle.CYLINDER: 1.0 / (n + 1.0), oracle.CONE: n / (n + 1.0)}[solution.kind]
        fit = analysis.fit_rate(analysis.exact_ray_profile(solution, distances), expected)
        ok = residual <= _RESIDUAL_TOL and abs(fit.mu_fitted - expected) <= _RATE_TOL
        failed = failed or not ok
        rows.append({
            "kind": solution.kind,
            "n": n,
            "max_residual": float(residual),
            "mu_fitted": fit.mu_fitted,
            "mu_expected": expected,
            "passed": ok,
        })
        logger.info(
            f"{solution.kind}: max residual {residual:.3e}, "
            f"fitted rate {fit.mu_fitted:.6g} (expected {expected:.6g})",
        )
    writer.write_json("examples.json", {"examples": rows})
    writer.write_csv("examples.csv", ("kind", "n", "max_residual", "mu_fitted", "mu_expected", "passed"), rows)
    return EXIT_BOUND if failed else EXIT_OK


_HANDLERS: dict[str, t.Callable[[_Setup, ArtifactWriter], int]] = {
    "exponent": _exponent,
    "certify": _certify,
    "barrier": _barrier,
    "solve": _solve,
    "rate": _rate,
    "verify-examples": _verify_examples,
}


def _exit_code(error: MaboundException) -> int:
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, (SearchFailure, BoundUnavailable)):
        return EXIT_SEARCH
    if isinstance(error, IterationLimitExceeded):
        return EXIT_NONCONVERGENCE
    return EXIT_PARAMETER


def run(config: RunConfig, out: str | Path) -> int:
    """Executes one command and writes its artifacts and manifest under ``out``.

    Returns
    -------
    int
        The exit status; see the module documentation.
    """
    try:
        setup = _setup(config)
    except MaboundException as error:
        logger.error(str(error))
        return _exit_code(error)

    writer = ArtifactWriter(Path(out))
    with Stopwatch() as stopwatch:
        try:
            code = _HANDLERS[config.command](setup, writer)
        except MaboundException as error:
            logger.error(str(error))
            code = _exit_code(error)
    if code == EXIT_CONFIG and not writer.files:
        return code
    writer.write_manifest(config.command, config.digest, config.seed, code)
    logger.info(f"{config.command} finished with exit code {code} in {stopwatch}")
    return code


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mabound",
        description="Certified boundary barriers and boundary rates for singular Monge-Ampere equations.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="overrides the command of the config file")
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, default=None, help="overrides the seed of the config file")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for barrier certification")
    parser.add_argument("--log-level", default="INFO", help="log level of the stderr sink (default: INFO)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv: t.Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logger.remove()
    logger.add(sys.stderr, level=args.log_level.upper())
    logger.enable("mabound")

    try:
        config = load_config(args.config, args.command)
        overrides: dict[str, t.Any] = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.threads is not None:
            overrides["threads"] = args.threads
        if overrides:
            config = RunConfig.from_dict({**config.to_dict(), **overrides})
    except ConfigError as error:
        logger.error(str(error))
        return EXIT_CONFIG
    return run(config, args.out)


if __name__ == "__main__":
    sys.exit(main())
