"""
Unit tests for maximum modulus estimation, M-set extraction, comparison
with the target and the distortion / Lipschitz probes.
"""
import math

import numpy as np
import pytest

from growth_transcend import GrowthSchedule
from map_expr import MapExpr, identity_map
from sets import FullSpaceSet, LogSpiralSet, RadialRaySet
from shrink import PullbackSet, ShrinkMap
from utils.error_handler import DomainError, ValidationError
from verify import (
    SphereBudget,
    circle_degree,
    compare_to_target,
    distortion_probe,
    extract_mms,
    lipschitz_probe,
    max_modulus,
)
from zorich import PowerMap, ZorichMap


def _polynomial_over(target, degree=2):
    zorich = ZorichMap(target.dimension)
    shrink = ShrinkMap(PullbackSet(target, zorich))
    power = PowerMap(zorich, degree)
    return power.as_expr().compose(shrink.h1_expr(), name="P o h1")


def test_budget_validation():
    with pytest.raises(ValidationError):
        SphereBudget(samples=0)
    with pytest.raises(ValidationError):
        SphereBudget(argmax_rtol=1.0)


def test_max_modulus_identity():
    result = max_modulus(identity_map(2), 5.0)
    assert result.m_est == pytest.approx(5.0)
    assert result.argmax_count >= 2048


def test_max_modulus_power_map():
    power = PowerMap(ZorichMap(2), 2).as_expr()
    assert max_modulus(power, 3.0).m_est == pytest.approx(9.0)


def test_max_modulus_at_zero_and_negative_radius():
    result = max_modulus(identity_map(3), 0.0)
    assert result.m_est == 0.0
    assert result.argmax_count == 1
    with pytest.raises(DomainError):
        max_modulus(identity_map(3), -1.0)


def test_max_modulus_refines_between_samples():
    # |f| peaks at angle 0.001 rad, between grid samples
    def fn(x):
        theta = np.arctan2(x[:, 1], x[:, 0])
        scale = 2.0 - np.cos(theta - 0.001)
        return x * scale[:, None]

    result = max_modulus(MapExpr("bump", 2, fn), 1.0, SphereBudget(samples=64))
    assert result.m_est == pytest.approx(3.0, abs=1e-12)
    assert result.refined >= 1
    best = result.argmax[-1]
    assert math.atan2(best[1], best[0]) == pytest.approx(math.pi + 0.001, abs=1e-6) or \
        math.atan2(best[1], best[0]) == pytest.approx(-math.pi + 0.001, abs=1e-6)


def test_max_modulus_refines_in_a_sphere_chart():
    target = np.array([0.0, 0.6, 0.8])

    def fn(x):
        u = x / np.linalg.norm(x, axis=1, keepdims=True)
        return x * (2.0 + u @ target)[:, None]

    result = max_modulus(MapExpr("bump3", 3, fn), 2.0, SphereBudget(samples=500))
    assert result.m_est == pytest.approx(6.0, rel=1e-9)


def test_extract_mms_is_sorted_and_thread_independent():
    fn = _polynomial_over(RadialRaySet([1.0, 0.0], 2))
    grid = [3.0, 0.5, 1.0]
    serial = extract_mms(fn, grid, SphereBudget(samples=256), workers=1)
    threaded = extract_mms(fn, grid, SphereBudget(samples=256), workers=3)
    assert serial.radii.tolist() == [0.5, 1.0, 3.0]
    assert [r.m_est for r in serial.results] == [r.m_est for r in threaded.results]
    assert np.array_equal(serial.points, threaded.points)


def test_extract_mms_empty_grid():
    extract = extract_mms(identity_map(2), [])
    assert len(extract) == 0


def test_extract_mms_flags_exceptional_radii():
    schedule = GrowthSchedule.exp_exp(3, 0.5)
    extract = extract_mms(identity_map(2), [5.0, 10.0], SphereBudget(samples=32), schedule, workers=1)
    assert extract.exceptional.tolist() == [False, True]


def test_ray_mms_matches_target():
    ray = RadialRaySet([1.0, 0.0], 2)
    fn = _polynomial_over(ray, degree=3)
    extract = extract_mms(fn, np.geomspace(0.1, 10.0, 12), SphereBudget(samples=1024), workers=1)
    report = compare_to_target(extract, ray)
    assert report.passed
    for res in extract.results:
        assert res.m_est == pytest.approx(res.radius ** 3, rel=1e-9)


def test_spiral_mms_within_resolution_bound():
    spiral = LogSpiralSet(1.0)
    fn = _polynomial_over(spiral)
    radii = np.geomspace(0.1, 20.0, 10)
    extract = extract_mms(fn, radii, SphereBudget(samples=2048), workers=1)
    report = compare_to_target(extract, spiral)
    for row in report.rows:
        assert row.hausdorff <= 2.0 * 2.0 * math.pi * row.radius / 2048 + 1e-12 * max(1.0, row.radius)
    assert report.passed


def test_compare_skips_exceptional_radii():
    schedule = GrowthSchedule.exp_exp(3, 0.5)
    extract = extract_mms(identity_map(2), [5.0, 10.0], SphereBudget(samples=64), schedule, workers=1)
    report = compare_to_target(extract, FullSpaceSet(2), exclude_exceptional=True)
    assert [row.skipped for row in report.rows] == [False, True]
    assert report.passed
    assert report.to_dict()["checked"] == 1


def test_distortion_of_linear_map():
    matrix = np.array([[3.0, 0.0], [0.0, 1.0]])
    fn = MapExpr("linear", 2, lambda x: x @ matrix.T)
    points = np.array([[1.0, 0.0], [0.0, 2.0], [-1.0, 1.0]])
    for mode in ("jacobian", "roundness"):
        report = distortion_probe(fn, points, 1e-4, mode)
        assert np.allclose(report.values, 3.0, rtol=1e-3)
    assert report.upper_stretch.max() == pytest.approx(3.0, rel=1e-6)
    assert report.lower_stretch.min() == pytest.approx(1.0, rel=1e-3)


def test_distortion_excludes_nonsmooth_points():
    zorich = ZorichMap(3)
    expr = zorich.as_expr()
    points = np.array([[1.0, 0.3, 0.0], [0.2, 0.3, 0.0]])
    report = distortion_probe(expr, points, 1e-5)
    assert report.excluded == [0]
    assert report.values.shape == (1,)


def test_distortion_flags_degenerate_jacobian():
    fn = MapExpr("collapse", 2, lambda x: np.column_stack([x[:, 0], np.zeros(len(x))]))
    report = distortion_probe(fn, np.array([[1.0, 1.0]]), 1e-4)
    assert report.degenerate == [0]
    assert math.isinf(report.values[0])


def test_distortion_unknown_mode():
    with pytest.raises(ValidationError):
        distortion_probe(identity_map(2), np.array([[1.0, 0.0]]), 1e-4, mode="area")


def test_lipschitz_probe_examples():
    assert lipschitz_probe(lambda x: 2.0 * x, np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]])) == pytest.approx(2.0)
    assert lipschitz_probe(lambda x: x[:, 0], np.array([[0.0, 0.0]]), np.array([[0.0, 0.0]])) == 0.0
    ray = RadialRaySet([1.0, 0.0], 2)
    rng = np.random.default_rng(3)
    a = rng.standard_normal((5000, 2)) * 4.0
    b = a + rng.standard_normal((5000, 2)) * 0.5
    assert lipschitz_probe(ray.distance_to_set, a, b) <= 1.0 + 1e-12


def test_circle_degree():
    power = PowerMap(ZorichMap(2), 3).as_expr()
    assert circle_degree(identity_map(2), 1.0) == 1
    assert circle_degree(power, 2.0) == 3
    with pytest.raises(DomainError):
        circle_degree(identity_map(3), 1.0)
