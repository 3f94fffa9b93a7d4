"""
Unit tests for the Zorich map, its group, path lifting and the power map.
"""
import math

import numpy as np
import pytest

from utils.error_handler import BranchSetError, DomainError
from zorich import PowerMap, ZorichMap, distance_to_odd, fold_coordinates


@pytest.fixture
def z2():
    return ZorichMap(2)


@pytest.fixture
def z3():
    return ZorichMap(3)


def test_fold_coordinates_tent_rule():
    folded = fold_coordinates(np.array([[0.5, 1.5], [2.0, -1.0], [4.5, 3.0]]))
    assert np.allclose(folded.xi, [[0.5, 0.5], [0.0, -1.0], [0.5, -1.0]])
    assert folded.reflections.tolist() == [[False, True], [True, False], [False, False]]
    assert folded.parity.tolist() == [1, 1, 0]


def test_distance_to_odd():
    assert np.allclose(distance_to_odd(np.array([0.0, 1.0, 1.25, -2.9])), [1.0, 0.0, 0.25, 0.1])


def test_zorich_planar_values(z2):
    assert np.allclose(z2.evaluate([0.0, 0.0]), [0.0, 1.0])
    assert np.allclose(z2.evaluate([1.0, 0.0]), [1.0, 0.0])
    assert np.allclose(z2.evaluate([2.0, math.log(3.0)]), [0.0, -3.0])


def test_zorich_modulus_is_exp_of_last_coordinate(z3, rng):
    x = rng.uniform(-5.0, 5.0, (200, 3))
    assert np.allclose(np.linalg.norm(z3.evaluate(x), axis=1), np.exp(x[:, -1]))


def test_zorich_group_invariance(z3, rng):
    x = rng.uniform(-4.0, 4.0, (500, 3))
    base = z3.evaluate(x)
    assert len(z3.group_generators()) == 3
    for g in z3.group_generators():
        assert np.allclose(z3.evaluate(g.apply(x)), base, rtol=1e-12, atol=1e-12)


def test_planar_group_has_translation_only(z2):
    assert [g.kind for g in z2.group_generators()] == ["translation"]


@pytest.mark.parametrize("dimension", [2, 3, 4])
def test_invert_is_right_inverse(dimension, rng):
    zorich = ZorichMap(dimension)
    y = rng.standard_normal((300, dimension)) * rng.uniform(0.1, 10.0, (300, 1))
    assert np.allclose(zorich.evaluate(zorich.invert(y)), y, rtol=1e-12, atol=1e-12)


def test_invert_canonical_cells(z3):
    north = z3.invert([0.3, 0.2, 0.5])
    south = z3.invert([0.3, 0.2, -0.5])
    assert np.all(np.abs(north[:-1]) <= 1.0)
    assert 1.0 <= south[0] <= 3.0


def test_invert_origin_is_domain_error(z2):
    with pytest.raises(DomainError):
        z2.invert([0.0, 0.0])


def test_canonical_representative_keeps_image(z3, rng):
    x = rng.uniform(-9.0, 9.0, (100, 3))
    rep = z3.canonical_representative(x)
    assert np.allclose(z3.evaluate(rep), z3.evaluate(x))


def test_branch_distance(z2, z3):
    assert z2.branch_distance([0.3, 0.0]) == math.inf
    assert z3.branch_distance([1.0, 1.0, 0.0]) == pytest.approx(0.0)
    assert z3.branch_distance([0.0, 0.0, 0.0]) == pytest.approx(math.sqrt(2.0))


def test_local_preimage_count(z2):
    # orbit of s = 0 is {4k}: three points within distance 4.5 of the origin
    assert z2.local_preimage_count([0.0, 0.0], 4.5) == 3
    assert z2.local_preimage_count([0.0, 0.0], 1.0) == 1


def test_lift_constant_path(z2):
    path = np.tile([0.0, 1.0], (5, 1))
    lift = z2.lift_path(path, np.array([0.0, 0.0]))
    assert np.allclose(lift.points, 0.0)


def test_lift_counterclockwise_circle_ends_one_period_away(z2):
    theta = np.linspace(0.0, 2.0 * math.pi, 65)
    path = np.column_stack([-np.sin(theta), np.cos(theta)])
    lift = z2.lift_path(path, np.array([0.0, 0.0]))
    assert np.allclose(lift.points[-1], [-4.0, 0.0], atol=1e-9)
    assert np.allclose(z2.evaluate(lift.points), path, atol=1e-9)


def test_lift_radial_path_is_vertical(z2):
    path = np.column_stack([np.zeros(11), np.linspace(1.0, math.e, 11)])
    lift = z2.lift_path(path, np.array([0.0, 0.0]))
    assert np.allclose(lift.points[:, 0], 0.0)
    assert lift.points[-1, 1] == pytest.approx(1.0)


def test_lift_coarse_path_refines(z2):
    theta = np.linspace(0.0, 2.0 * math.pi, 4)
    path = np.column_stack([-np.sin(theta), np.cos(theta)])
    lift = z2.lift_path(path, np.array([0.0, 0.0]))
    assert lift.refinements > 0
    assert np.allclose(lift.points[-1], [-4.0, 0.0], atol=1e-9)


def test_lift_rejects_wrong_start(z2):
    with pytest.raises(DomainError):
        z2.lift_path(np.array([[0.0, 1.0], [0.0, 2.0]]), np.array([0.5, 0.0]))


def test_lift_through_branch_image_raises(z3):
    # Z(1, 1, 0) lies on the image of the branch set
    branch_image = z3.evaluate([1.0, 1.0, 0.0])
    start = np.array([0.0, 0.0, 0.0])
    path = np.vstack([z3.evaluate(start), branch_image, z3.evaluate([0.5, 1.5, 0.0])])
    with pytest.raises(BranchSetError):
        z3.lift_path(path, start)


def test_power_map_sphere_law():
    power = PowerMap(ZorichMap(2), 3)
    y = power.evaluate([2.0, 0.0])
    assert np.linalg.norm(y) == pytest.approx(8.0)
    assert np.allclose(power.evaluate([0.0, 0.0]), 0.0)


@pytest.mark.parametrize("dimension, degree", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_power_map_preimage_count(dimension, degree, rng):
    power = PowerMap(ZorichMap(dimension), degree)
    assert power.topological_degree == degree ** (dimension - 1)
    for _ in range(5):
        y = rng.standard_normal(dimension) * 2.0
        pre = power.preimages(y)
        assert len(pre) == degree ** (dimension - 1)
        assert np.allclose(power.evaluate(pre.points), np.tile(y, (len(pre), 1)), rtol=1e-9, atol=1e-9)


def test_power_map_preimage_of_origin():
    pre = PowerMap(ZorichMap(3), 2).preimages([0.0, 0.0, 0.0])
    assert pre.degenerate
    assert len(pre) == 1


def test_power_map_even_degree_center():
    assert np.allclose(PowerMap(ZorichMap(3), 2).center, [1.0, 1.0, 0.0])
    assert np.allclose(PowerMap(ZorichMap(3), 3).center, 0.0)
    assert np.allclose(PowerMap(ZorichMap(2), 2).center, 0.0)


def test_power_map_schroder_identity(rng):
    power = PowerMap(ZorichMap(3), 2)
    x = rng.uniform(-3.0, 3.0, (300, 3))
    lhs = power.evaluate(power.zorich.evaluate(x))
    rhs = power.zorich.evaluate(power.dilate(x))
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-12)


def test_power_map_rejects_small_degree():
    with pytest.raises(DomainError):
        PowerMap(ZorichMap(2), 1)


def test_zorich_reference_values(z2):
    assert np.allclose(z2.evaluate([1.0, math.log(2.0)]), [2.0, 0.0])
    assert np.allclose(z2.evaluate([2.5, 0.0]), [-math.sin(math.pi / 4), -math.cos(math.pi / 4)])
    assert np.allclose(z2.invert([0.0, math.e]), [0.0, 1.0])
    assert np.allclose(z2.invert([2.0, 0.0]), [1.0, math.log(2.0)])


def test_fold_reference_values(z3):
    folded = z3.fold([2.5, 0.2])
    assert np.allclose(folded.xi, [-0.5, 0.2])
    assert int(folded.parity) == 1
    folded = z3.fold([5.0, -3.0])
    assert np.allclose(folded.xi, [1.0, 1.0])
    assert int(folded.parity) == 0
    assert np.allclose(z3.evaluate([5.0, -3.0, 0.3]), z3.evaluate([1.0, 1.0, 0.3]))
