# -*- coding: utf-8 -*-
import pytest

import mabound
from mabound import exceptions as exc
from mabound.exponents import (
    VIOLATION_BETA,
    VIOLATION_MU_BELOW_ONE,
    GrowthParams,
    abar,
    b_coeffs,
    holder_exponent,
    mu,
    mu_flat,
    validate,
)


def ball_params(**overrides):
    values = dict(n=2, k=1, a=(2.0,), eta=(1.0,), alpha=4.0, beta=3.0, gamma=0.0, A=1.0)
    values.update(overrides)
    return GrowthParams(**values)


def test_abar():
    assert abar(GrowthParams(n=2)) == 0.0
    assert abar(ball_params()) == 1.0
    assert abar(GrowthParams(n=3, k=2, a=(1.0, 1.0), eta=(1.0, 1.0))) == 4.0


def test_validate():
    assert validate(ball_params()) == []
    assert VIOLATION_BETA in validate(ball_params(beta=2.0))
    assert VIOLATION_MU_BELOW_ONE in validate(ball_params(alpha=-4.0))


def test_mu_reproduces_exact_rates():
    assert mu(ball_params()) == pytest.approx(1 / 2, abs=1e-12)
    cylinder = GrowthParams(n=3, k=1, a=(2.0,), eta=(1.0,), alpha=5.0, beta=4.0)
    assert mu(cylinder) == pytest.approx(3 / 8, abs=1e-12)
    assert mu(ball_params(a=(1.0,))) == pytest.approx(2 / 3, abs=1e-12)


def test_mu_flat():
    assert mu_flat(GrowthParams(n=2, alpha=4.0, beta=3.0)) == pytest.approx(1 / 3, abs=1e-12)
    assert mu_flat(GrowthParams(n=3, alpha=5.0, beta=4.0)) == pytest.approx(1 / 4, abs=1e-12)
    flat = GrowthParams.pure_hyperbolic(4)
    assert mu(flat) == mu_flat(flat)
    assert holder_exponent(flat) == mu_flat(flat)


def test_mu_rejects_inadmissible():
    with pytest.raises(exc.ParameterDomainError) as info:
        mu(ball_params(beta=2.0))
    assert VIOLATION_BETA in info.value.violations
    with pytest.raises(exc.ParameterDomainError):
        abar(ball_params(a=(0.5,)))


def test_b_coeffs():
    assert b_coeffs(ball_params()) == pytest.approx((2.0,))
    assert b_coeffs(ball_params(a=(1.0,))) == pytest.approx((3.0,))
    params = GrowthParams(n=3, k=2, a=(2.0, 2.0), eta=(1.0, 1.0), alpha=5.0, beta=4.0)
    assert b_coeffs(params) == pytest.approx((2.0, 2.0))
    for p in (ball_params(), ball_params(a=(3.0,)), params):
        assert all(mu(p) * a * b == pytest.approx(2.0) for a, b in zip(p.a, b_coeffs(p)))
    with pytest.raises(exc.ParameterDomainError):
        b_coeffs(GrowthParams.pure_hyperbolic(2))


def test_growth_params_shape():
    with pytest.raises(exc.ParameterDomainError):
        GrowthParams(n=1)
    with pytest.raises(exc.ParameterDomainError):
        GrowthParams(n=2, k=2, a=(2.0, 2.0), eta=(1.0, 1.0))
    with pytest.raises(exc.ParameterDomainError):
        GrowthParams(n=2, k=1, a=(2.0,))


def test_growth_params_dict():
    params = ball_params(gamma=0.5)
    assert GrowthParams.from_dict(params.to_dict()) == params
    assert GrowthParams.from_dict({'n': 2, 'a': [2.0], 'eta': [1.0]}).k == 1
    assert mabound.GrowthParams.pure_hyperbolic(3).alpha == 5.0
