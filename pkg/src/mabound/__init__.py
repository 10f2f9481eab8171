__all__ = (
    "BarrierFunction",
    "BarrierParams",
    "BoundaryFrame",
    "ConvexDomain",
    "ExactSolution",
    "GridField",
    "GrowthParams",
    "RateReport",
    "RhsModel",
    "SolveConfig",
    "SolverState",
    "Stopwatch",
    "analysis",
    "barrier",
    "certify_k_convexity",
    "exceptions",
    "exponents",
    "find_eps_M",
    "fit_rate",
    "flat_barrier",
    "geometry",
    "mu",
    "mu_flat",
    "oracle",
    "rhs",
    "solve",
    "solver",
)

from loguru import logger as _logger

from . import analysis, barrier, exceptions, exponents, geometry, oracle, rhs, solver
from .analysis import RateReport, fit_rate
from .barrier import BarrierFunction, BarrierParams, find_eps_M, flat_barrier
from .exponents import GrowthParams, mu, mu_flat
from .geometry import BoundaryFrame, ConvexDomain, certify_k_convexity
from .oracle import ExactSolution
from .rhs import RhsModel
from .solver import GridField, SolverState, SolveConfig, solve
from .stopwatch import Stopwatch
from .version import __version__

_logger.disable("mabound")
