"""
Unit tests for growth schedules, the exceptional set and the annulus gluing.
"""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from core_geom import StarSurface
from growth_transcend import (
    AnnulusGluing,
    GrowthSchedule,
    smooth_conjugate,
    smoothstep,
    transcendental_composite,
)
from map_expr import MapKind, sup_square_map
from sets import FullSpaceSet, LogSpiralSet
from shrink import PullbackSet, ShrinkMap
from utils.error_handler import ConfigError, DomainError, ScopeError
from verify import circle_degree
from zorich import ZorichMap


@pytest.fixture
def explicit_schedule():
    return GrowthSchedule.explicit([2.0, 5.0, 13.0, 34.0], 0.5)


def test_exp_exp_radii():
    schedule = GrowthSchedule.exp_exp(3)
    assert schedule.radii == pytest.approx((math.exp(math.e), math.exp(math.e ** 2), math.exp(math.e ** 3)))
    assert schedule.levels == (1.0, 2.0, 3.0)


def test_schedule_validation_collects_problems():
    with pytest.raises(ConfigError) as excinfo:
        GrowthSchedule.explicit([3.0, 2.0], 1.5)
    message = str(excinfo.value)
    assert "strictly increasing" in message
    assert "epsilon" in message


def test_schedule_rejects_overlapping_exceptional_intervals():
    with pytest.raises(ConfigError):
        GrowthSchedule.explicit([2.0, 3.0], 0.5)


def test_exp_exp_overflow_is_config_error():
    with pytest.raises(ConfigError):
        GrowthSchedule.exp_exp(8)


def test_nu_interpolates_nodes(explicit_schedule):
    assert explicit_schedule.nu(5.0) == pytest.approx(2.0)
    assert explicit_schedule.nu(3.5) == pytest.approx(1.5)
    assert explicit_schedule.nu(1.0) == pytest.approx(1.0)
    assert explicit_schedule.nu(100.0) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        explicit_schedule.nu(0.0)


def test_log_psi_matches_quadrature(explicit_schedule):
    for r in (1.0, 1.7, 5.0, 9.3, 40.0, 200.0):
        expected, _ = quad(lambda t: explicit_schedule.nu(t) / t, 1.0, r,
                           points=[x for x in explicit_schedule.radii if x < r], limit=200)
        assert abs(explicit_schedule.log_psi(r) - expected) <= 1e-8


def test_constant_nu_gives_power_growth():
    schedule = GrowthSchedule.constant(2.0)
    assert schedule.psi(4.0) == pytest.approx(16.0)
    assert schedule.psi(1.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        schedule.log_psi(0.5)


def test_exceptional_membership():
    schedule = GrowthSchedule.exp_exp(5, 0.5)
    assert schedule.in_exceptional(10.0) is True
    assert schedule.in_exceptional(schedule.radii[0]) is False
    assert schedule.in_exceptional(0.5 * schedule.radii[0]) is False
    assert schedule.in_exceptional(np.array([10.0, 3.0])).tolist() == [True, False]
    assert schedule.in_exceptional_shell([6.0, 8.0]) is True


def test_logarithmic_density_decreases_along_nodes():
    schedule = GrowthSchedule.exp_exp(5, 0.5)
    densities = [schedule.exceptional_density(r, logarithmic=True) for r in schedule.radii[1:4]]
    assert densities[0] > densities[1] > densities[2]


def test_linear_density(explicit_schedule):
    # intervals (1, 2) and (2.5, 5) below R = 5
    assert explicit_schedule.exceptional_density(5.0) == pytest.approx(3.5 / 5.0)
    with pytest.raises(DomainError):
        explicit_schedule.exceptional_density(1.0, logarithmic=True)


def test_smoothstep():
    assert np.allclose(smoothstep(np.array([-1.0, 0.0, 0.5, 1.0, 2.0])), [0.0, 0.0, 0.5, 1.0, 1.0])


# =============================================================================
# Annulus gluing
# =============================================================================

def test_gluing_needs_two_radii():
    with pytest.raises(ConfigError):
        AnnulusGluing(GrowthSchedule.explicit([2.0], 0.5))


def test_gluing_is_power_on_good_annuli(explicit_schedule):
    gluing = AnnulusGluing(explicit_schedule)
    assert gluing.degree_at(1.0) == 1
    assert gluing.degree_at(6.0) == 2
    assert gluing.degree_at(100.0) == 4
    with pytest.raises(DomainError):
        gluing.degree_at(4.0)
    # a_2 = 1 / 5, so D~(6) = 36 / 5
    assert np.allclose(gluing.evaluate([6.0, 0.0]), [36.0 / 5.0, 0.0])
    assert np.allclose(gluing.evaluate([0.0, 0.0]), [0.0, 0.0])


def test_gluing_is_continuous_across_blend(explicit_schedule):
    gluing = AnnulusGluing(explicit_schedule)
    for edge in (2.5, 5.0, 6.5, 13.0):
        direction = np.array([math.cos(0.3), math.sin(0.3)])
        z = np.vstack([edge * (1 - 1e-10) * direction, edge * (1 + 1e-10) * direction])
        values = gluing.evaluate(z)
        assert np.allclose(values[0], values[1], rtol=1e-7)


def test_gluing_max_modulus_in_log_form(explicit_schedule):
    gluing = AnnulusGluing(explicit_schedule)
    r = np.array([0.5, 3.0, 6.0, 20.0, 100.0])
    theta = 2.0 * np.pi * np.arange(4096) / 4096
    for radius, logm in zip(r, gluing.log_max_modulus(r)):
        circle = radius * np.column_stack([np.cos(theta), np.sin(theta)])
        sampled = np.max(np.linalg.norm(gluing.evaluate(circle), axis=1))
        assert math.log(sampled) == pytest.approx(logm, abs=1e-9)


def test_gluing_evaluate_log_scale(explicit_schedule):
    gluing = AnnulusGluing(explicit_schedule)
    z = np.array([[30.0, 4.0]])
    assert np.allclose(gluing.evaluate(z, log_scale=2.0), gluing.evaluate(z) * math.exp(-2.0))


def test_blend_zero_radius_is_a_zero(explicit_schedule):
    gluing = AnnulusGluing(explicit_schedule)
    for index in (1, 2, 3):
        r0 = gluing.blend_zero_radius(index)
        outer = explicit_schedule.radii[index]
        assert 0.5 * outer < r0 < outer
        assert np.linalg.norm(gluing.evaluate([-r0, 0.0])) <= 1e-9 * gluing.max_modulus_exact(r0)
    with pytest.raises(DomainError):
        gluing.blend_zero_radius(4)


def test_winding_number_increases_by_one(explicit_schedule):
    gluing = AnnulusGluing(explicit_schedule)
    expr = gluing.as_expr()
    assert expr.kind == MapKind.TRANSCENDENTAL
    for r in (1.0, 3.5, 8.0, 20.0, 60.0):
        assert circle_degree(expr, r) == gluing.circle_degree_expected(r)
    assert [circle_degree(expr, r) for r in (1.0, 8.0, 20.0, 60.0)] == [1, 2, 3, 4]


def test_gluing_is_planar(explicit_schedule):
    with pytest.raises(ScopeError):
        AnnulusGluing(explicit_schedule).evaluate([1.0, 0.0, 0.0])


def test_transcendental_composite_scope(explicit_schedule):
    gluing = AnnulusGluing(explicit_schedule)
    z3 = ZorichMap(3)
    shrink3 = ShrinkMap(PullbackSet(FullSpaceSet(3), z3))
    with pytest.raises(ScopeError):
        transcendental_composite(gluing, shrink3, z3)


def test_transcendental_composite_keeps_spiral_maxima(explicit_schedule):
    zorich = ZorichMap(2)
    spiral = LogSpiralSet(1.0)
    shrink = ShrinkMap(PullbackSet(spiral, zorich))
    composite = transcendental_composite(AnnulusGluing(explicit_schedule), shrink, zorich)
    assert composite.kind == MapKind.TRANSCENDENTAL
    radii = np.array([1.5, 6.0, 14.0, 50.0])
    on_spiral = spiral.point_at(radii)
    assert np.allclose(
        np.linalg.norm(composite(on_spiral), axis=1),
        AnnulusGluing(explicit_schedule).max_modulus_exact(radii),
        rtol=1e-9,
    )


def test_smooth_conjugate_of_sup_square_maps_spheres():
    cube = StarSurface.sup_norm_cube(2)
    conj = smooth_conjugate(sup_square_map(2), cube, cube)
    theta = np.linspace(0.0, 2.0 * np.pi, 50)
    circle = 3.0 * np.column_stack([np.cos(theta), np.sin(theta)])
    assert np.allclose(np.linalg.norm(conj(circle), axis=1), 9.0)
