"""
Unit tests for closed target sets.
"""
import math

import numpy as np
import pytest

from sets import (
    ConeSet,
    FullSpaceSet,
    LogSpiralSet,
    OriginSphereSet,
    PointCloudSet,
    RadialRaySet,
    SetFactory,
    UnionSet,
    validate_meets_every_sphere,
)
from utils.error_handler import ConfigError, DomainError, SetValidationError


def test_factory_lists_every_kind():
    assert SetFactory.list_kinds() == sorted([
        "full-space", "radial-ray", "log-spiral", "cone", "sphere", "point-cloud", "union",
    ])


def test_factory_rejects_unknown_kind():
    with pytest.raises(ConfigError) as excinfo:
        SetFactory.create({"kind": "torus"}, 2)
    assert excinfo.value.fields == ["set.kind"]


def test_ray_distance():
    ray = RadialRaySet([1.0, 0.0], 2)
    assert ray.distance_to_set([3.0, 4.0]) == pytest.approx(4.0)
    assert ray.distance_to_set([-3.0, 4.0]) == pytest.approx(5.0)
    assert ray.membership([2.0, 0.0])
    assert ray.contains_origin()


def test_ray_direction_must_be_nonzero():
    with pytest.raises(ConfigError):
        RadialRaySet([0.0, 0.0], 2)


def test_spiral_points_are_members():
    spiral = LogSpiralSet(1.0)
    pts = spiral.point_at(np.array([0.01, 0.5, 1.0, 7.0, 40.0]))
    assert np.all(spiral.membership(pts))
    assert spiral.contains_origin()


def test_spiral_distance_matches_brute_force():
    spiral = LogSpiralSet(1.0)
    x = np.array([[2.0, 1.0], [-0.3, 0.4], [5.0, -5.0]])
    fine = spiral.point_at(np.exp(np.linspace(-12.0, 3.0, 400001)))
    brute = np.min(np.linalg.norm(x[:, None, :] - fine[None, :, :], axis=2), axis=1)
    assert np.allclose(spiral.distance_to_set(x), brute, atol=1e-4)


def test_spiral_section_is_one_point():
    section = LogSpiralSet(1.0).sphere_section(3.0, 128)
    assert len(section) == 1
    assert np.linalg.norm(section.points[0]) == pytest.approx(3.0)


def test_spiral_is_planar():
    with pytest.raises(ConfigError):
        LogSpiralSet(1.0, dimension=3)


def test_cone_distance_and_polar_flag():
    cone = ConeSet([0.0, 0.0, 1.0], math.pi / 4, 3)
    assert cone.is_polar
    assert cone.distance_to_set([0.0, 0.0, 2.0]) == 0.0
    # 45 degrees beyond the boundary at distance 2: 2 sin(pi/4)
    assert cone.distance_to_set([2.0, 0.0, 0.0]) == pytest.approx(2.0 * math.sin(math.pi / 4))
    assert cone.distance_to_set([0.0, 0.0, -2.0]) == pytest.approx(2.0)


def test_cone_half_angle_range():
    with pytest.raises(ConfigError):
        ConeSet([0.0, 1.0], 0.0, 2)


def test_sphere_set_fails_validation_at_origin():
    sphere = OriginSphereSet(2.0, 2)
    assert not sphere.contains_origin()
    report = validate_meets_every_sphere(sphere, [1.0, 2.0])
    assert not report.passed
    assert {c.radius for c in report.failures} == {0.0, 1.0}
    with pytest.raises(SetValidationError):
        sphere.sphere_section(1.0, 64)


def test_full_space_section_and_validation():
    full = FullSpaceSet(3)
    assert len(full.sphere_section(2.0, 100)) == 100
    assert validate_meets_every_sphere(full, np.geomspace(0.1, 20.0, 10), 256).passed


def test_validation_rejects_negative_radius():
    with pytest.raises(DomainError):
        validate_meets_every_sphere(FullSpaceSet(2), [-1.0, 1.0])


def test_spiral_meets_every_sphere():
    assert validate_meets_every_sphere(LogSpiralSet(2.0), np.geomspace(0.1, 20.0, 50)).passed


def test_sphere_section_at_zero_radius():
    section = RadialRaySet([0.0, 1.0], 2).sphere_section(0.0, 64)
    assert np.allclose(section.points, 0.0)
    with pytest.raises(DomainError):
        RadialRaySet([0.0, 1.0], 2).sphere_section(-1.0, 64)


def test_point_cloud_adds_origin_and_answers_sections():
    cloud = PointCloudSet(np.array([[1.0, 0.0], [0.0, 2.0]]), resolution=0.05)
    assert cloud.contains_origin()
    section = cloud.sphere_section(2.02, 64)
    assert np.allclose(section.points, [[0.0, 2.02]])
    assert cloud.distance_to_set([1.0, 1.0]) == pytest.approx(1.0)


def test_point_cloud_from_csv(tmp_path):
    path = tmp_path / "cloud.csv"
    path.write_text("# x,y\n1.0,0.0\n0.0,2.0\n", encoding="utf-8")
    cloud = SetFactory.create({"kind": "point-cloud", "csv": str(path), "resolution": 0.1}, 2)
    assert cloud.points.shape == (3, 2)
    assert cloud.describe()["source"] == str(path)
    with pytest.raises(ConfigError):
        SetFactory.create({"kind": "point-cloud", "csv": str(path)}, 3)


def test_union_takes_minimum_distance():
    union = SetFactory.create({
        "kind": "union",
        "children": [
            {"kind": "radial-ray", "direction": [1.0, 0.0]},
            {"kind": "radial-ray", "direction": [0.0, 1.0]},
        ],
    }, 2)
    assert isinstance(union, UnionSet)
    assert union.distance_to_set([3.0, 1.0]) == pytest.approx(1.0)
    assert union.distance_to_set([1.0, 3.0]) == pytest.approx(1.0)
    assert len(union.sphere_section(2.0, 64)) == 2


def test_dimension_mismatch_is_domain_error():
    with pytest.raises(DomainError):
        RadialRaySet([1.0, 0.0], 2).distance_to_set([1.0, 0.0, 0.0])
