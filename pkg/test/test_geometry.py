# -*- coding: utf-8 -*-
import pytest

import numpy as np

import mabound
from mabound import exceptions as exc
from mabound.geometry import (
    Ball,
    BoundaryFrame,
    Constraint,
    ConvexDomain,
    ConvexityCertificate,
    ConvexityFailure,
    Halfspace,
    Superellipse,
    certify_k_convexity,
    distance_to_boundary,
    inward_ray,
)


class RootDisk(Constraint):
    """The unit disk described by the non-convex function sqrt|x| - 1."""

    @property
    def dim(self):
        return 2

    def value(self, x):
        return np.sqrt(np.linalg.norm(x, axis=-1)) - 1.0

    def gradient(self, x):
        norm = np.linalg.norm(x, axis=-1, keepdims=True)
        return 0.5 * x / norm ** 1.5

    def to_dict(self):
        return {'type': 'root_disk'}

    def bounds(self, n):
        return np.full(n, -1.0), np.full(n, 1.0)


def test_distance_to_boundary(disk, square):
    assert distance_to_boundary(disk, (0.0, 0.0)) == pytest.approx(1.0)
    assert distance_to_boundary(disk, (0.5, 0.0)) == pytest.approx(0.5)
    assert distance_to_boundary(square, (0.25, 0.5)) == pytest.approx(0.5)
    with pytest.raises(exc.DomainError):
        distance_to_boundary(disk, (1.0, 0.0))


def test_distance_without_closed_form():
    domain = ConvexDomain([Superellipse((2.0, 2.0), (1.0, 1.0))])
    assert distance_to_boundary(domain, (0.5, 0.0)) == pytest.approx(0.5, abs=1e-6)
    assert distance_to_boundary(domain, (0.0, -0.25)) == pytest.approx(0.75, abs=1e-6)


def test_domain_properties(disk, square):
    assert disk.n == 2
    assert disk.diameter == pytest.approx(2.0, abs=1e-6)
    assert square.diameter == pytest.approx(2.0 * np.sqrt(2.0), abs=1e-2)
    assert np.allclose(disk.center, 0.0, atol=1e-9)
    assert disk.spot_check_convexity() == []
    lengths = disk.ray_exit((0.0, 0.0), [[1.0, 0.0], [0.0, -1.0]])
    assert lengths == pytest.approx([1.0, 1.0], abs=1e-12)


def test_domain_errors():
    with pytest.raises(exc.DomainError):
        ConvexDomain([Halfspace((1.0, 0.0), 1.0)])
    with pytest.raises(exc.DomainError):
        ConvexDomain([Ball((0.0, 0.0), 1.0), Ball((0.0, 0.0, 0.0), 1.0)])
    with pytest.raises(exc.ParameterDomainError):
        ConvexDomain([Ball((0.0, 0.0), 1.0), RootDisk()])
    with pytest.raises(exc.DomainError):
        ConvexDomain.from_dict({'constraints': [{'type': 'triangle'}]})


def test_domain_from_dict(square):
    domain = ConvexDomain.from_dict([{'type': 'box', 'lo': [-1.0, -1.0], 'hi': [1.0, 1.0]}])
    assert domain.n == 2
    assert domain.diameter == pytest.approx(square.diameter)
    rebuilt = ConvexDomain.from_dict(square.to_dict())
    assert rebuilt.contains((0.99, -0.99))
    assert not rebuilt.contains((1.0, 0.0))


def test_frame_at_disk_contact(disk):
    frame = BoundaryFrame.at(disk, (0.0, -1.0), axis=1)
    assert frame.normal == pytest.approx([0.0, 1.0])
    assert np.allclose(frame.to_world(frame.to_frame([[0.3, -0.2]])), [[0.3, -0.2]])
    with pytest.raises(exc.DomainError):
        BoundaryFrame.at(disk, (0.0, -0.5), axis=1)


def test_frame_rejects_non_orthogonal():
    with pytest.raises(exc.FrameError):
        BoundaryFrame((0.0, 0.0), [[1.0, 0.0], [1.0, 1.0]], 1)


def test_inward_ray(disk):
    frame = BoundaryFrame.at(disk, (0.0, -1.0), axis=1)
    assert inward_ray(frame, 0.3) == pytest.approx([0.0, -0.7])
    assert inward_ray(frame, 0.0) == pytest.approx([0.0, -1.0])
    assert inward_ray(BoundaryFrame.identity(2, 1), 0.25) == pytest.approx([0.0, 0.25])


def test_certify_disk(disk_certificate):
    assert isinstance(disk_certificate, ConvexityCertificate)
    assert disk_certificate.passed
    assert disk_certificate.k == 1
    assert disk_certificate.frame.axis == 1
    assert disk_certificate.margin >= 0.0
    assert disk_certificate.to_dict()['passed']


def test_certify_flat_side_fails(square):
    result = certify_k_convexity(square, (0.0, -1.0), 1, (2.0,), (0.1,))
    assert isinstance(result, ConvexityFailure)
    assert not result.passed
    assert result.violations > 0
    assert result.slack < 0.0


def test_certify_quartic(quartic):
    result = certify_k_convexity(quartic, (0.0, 0.0), 1, (4.0,), (1.0,))
    assert result.passed
    assert result.margin >= 0.0
    # too strong a modulus for a quartic cup
    assert not certify_k_convexity(quartic, (0.0, 0.0), 1, (2.0,), (1.0,)).passed


def test_certify_rejects_bad_powers(disk):
    with pytest.raises(exc.ParameterDomainError):
        certify_k_convexity(disk, (0.0, -1.0), 1, (0.5,), (0.5,))
    with pytest.raises(exc.ParameterDomainError):
        certify_k_convexity(disk, (0.0, -1.0), 1, (2.0, 2.0), (0.5, 0.5))


def test_package_exports():
    assert mabound.certify_k_convexity is certify_k_convexity
    assert mabound.ConvexDomain is ConvexDomain
