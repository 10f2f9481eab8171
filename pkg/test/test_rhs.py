# -*- coding: utf-8 -*-
import pytest

import attr
import numpy as np

from mabound import exceptions as exc
from mabound.exponents import GrowthParams
from mabound.rhs import (
    VIOLATION_MONOTONICITY,
    RhsModel,
    StructuredRhs,
    check_structure,
    eval_F,
)


@attr.s(frozen=True, auto_attribs=True)
class DecreasingInZ:
    """F = |z|^2, which decreases as z increases towards zero."""
    n: int = 2
    domain: None = None

    def evaluate(self, points, z, q, distances=None):
        return np.abs(np.asarray(z, dtype=float)) ** 2


def test_pure_hyperbolic_values():
    model = RhsModel.pure_hyperbolic(2)
    assert eval_F(model, (0.0, 0.0), -1.0, (3.0, -4.0)) == pytest.approx(1.0)
    assert eval_F(model, (0.0, 0.0), -0.5, (0.0, 0.0)) == pytest.approx(16.0)


def test_constant_power_law():
    model = RhsModel.power_law(GrowthParams(n=2, alpha=0.0, beta=3.0))
    points = np.random.default_rng(0).uniform(-1.0, 1.0, size=(20, 2))
    values = model.evaluate(points, -np.linspace(0.1, 5.0, 20), points)
    assert values == pytest.approx(np.ones(20))
    assert not model.needs_distance


def test_power_law_with_distance(disk):
    model = RhsModel.power_law(GrowthParams(n=2, alpha=1.0, beta=4.0, gamma=2.0, A=2.0), disk)
    assert model.needs_distance
    # A d^(beta-n-1) |z|^-alpha (1+|q|^2)^(gamma/2) = 2 * 0.5 * 1 * 2
    assert eval_F(model, (0.5, 0.0), -1.0, (1.0, 0.0)) == pytest.approx(2.0, rel=1e-9)


def test_eval_errors(disk):
    model = RhsModel.pure_hyperbolic(2, disk)
    with pytest.raises(exc.SingularityError):
        eval_F(model, (0.0, 0.0), 0.0, (0.0, 0.0))
    with pytest.raises(exc.DomainError):
        eval_F(model, (2.0, 0.0), -1.0, (0.0, 0.0))


def test_model_validation(disk):
    with pytest.raises(exc.ParameterDomainError):
        RhsModel.power_law(GrowthParams(n=2, alpha=-1.0, beta=3.0))
    with pytest.raises(exc.ParameterDomainError):
        RhsModel.power_law(GrowthParams(n=2, alpha=4.0, beta=4.0))
    with pytest.raises(exc.ParameterDomainError):
        RhsModel.pure_hyperbolic(3, disk)
    relaxed = RhsModel('power_law', GrowthParams(n=2, alpha=-1.0, beta=3.0), allow_negative_alpha=True)
    assert not relaxed.is_monotone


def test_check_structure_passes(disk):
    assert check_structure(RhsModel.pure_hyperbolic(2), sample_count=1000) == []
    assert check_structure(RhsModel.pure_hyperbolic(3), sample_count=1000) == []
    power_law = RhsModel.power_law(GrowthParams(n=2, alpha=4.0, beta=3.5, gamma=1.0, A=3.0), disk)
    assert check_structure(power_law, sample_count=1000) == []


def test_check_structure_detects_decreasing_model():
    model = DecreasingInZ()
    assert isinstance(model, StructuredRhs)
    assert VIOLATION_MONOTONICITY in check_structure(model, sample_count=1000)


def test_model_dict(disk):
    model = RhsModel.power_law(GrowthParams(n=2, alpha=2.0, beta=3.0, gamma=1.0))
    rebuilt = RhsModel.from_dict(model.to_dict())
    assert rebuilt.params == model.params
    assert rebuilt.kind == model.kind
    assert RhsModel.from_dict({'kind': 'pure_hyperbolic'}, disk).n == 2
