"""
Unit tests for the geometry primitives.
"""

import math
import os
import sys
import pytest
import numpy as np

# Add project root to path
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, project_root)

from src.core.cloud import PointCloud
from src.core.geometry import (
    ProjectiveDirection,
    Rotation,
    UnitDirection,
    angle_to_projective,
    apply_rotation,
    canonicalize_rows,
    nearest_distances,
    pair_direction,
    projective_canonical,
    projective_distance,
    rotation_to_pole,
    rp1_angle,
)
from src.errors import CoincidentPoints, DimensionMismatch, InputValidationError


# --- pair_direction ---

def test_pair_direction_three_four_five():
    """Test the exact 3-4-5 direction."""
    u = pair_direction([0, 0], [3, 4])
    assert u.coords.tolist() == [0.6, 0.8]


def test_pair_direction_reversed_pair_is_antipode():
    """Test that reversing the pair negates the direction."""
    u = pair_direction([1, 1], [0, 0])
    np.testing.assert_allclose(u.coords, [-math.sqrt(0.5), -math.sqrt(0.5)], atol=1e-15)
    np.testing.assert_array_equal(pair_direction([0, 0], [1, 1]).coords, -u.coords)


def test_pair_direction_axis_aligned():
    """Test an axis-aligned pair in R^3."""
    assert pair_direction([0, 0, 0], [0, 0, 2]).coords.tolist() == [0.0, 0.0, 1.0]


def test_pair_direction_coincident():
    """Test that coincident points are refused."""
    with pytest.raises(CoincidentPoints):
        pair_direction([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(CoincidentPoints):
        pair_direction([0.0, 0.0], [1e-13, 0.0])


def test_pair_direction_dimension_mismatch():
    """Test that points of different dimensions are refused."""
    with pytest.raises(DimensionMismatch):
        pair_direction([0, 0], [1, 1, 1])


def test_unit_direction_rejects_non_unit():
    """Test that UnitDirection validates its norm."""
    with pytest.raises(ValueError):
        UnitDirection(coords=[1.0, 1.0])
    assert UnitDirection(coords=[0.0, 1.0]).dim == 2


# --- projective_canonical ---

@pytest.mark.parametrize(
    "u, rep",
    [
        ([-0.6, -0.8], [0.6, 0.8]),
        ([0.0, -1.0], [0.0, 1.0]),
        ([0.6, 0.8], [0.6, 0.8]),
        ([1e-13, -1.0], [-1e-13, 1.0]),
    ],
)
def test_projective_canonical(u, rep):
    """Test the canonical sign rule, including a leading coordinate below the threshold."""
    assert projective_canonical(u).rep.tolist() == rep


def test_projective_direction_rejects_non_canonical():
    """Test that a negative leading coordinate is refused."""
    with pytest.raises(ValueError):
        ProjectiveDirection(rep=[-0.6, 0.8])


def test_canonicalize_rows_maps_antipodes_to_same_bits():
    """Test that v and -v canonicalize to bitwise-equal rows."""
    rng = np.random.Generator(np.random.PCG64(1))
    v = rng.normal(size=(50, 4))
    np.testing.assert_array_equal(canonicalize_rows(v), canonicalize_rows(-v))


# --- projective_distance ---

def test_projective_distance_examples():
    """Test orthogonal, identical and 45-degree lines."""
    assert projective_distance([1, 0], [0, 1]) == pytest.approx(math.pi / 2, abs=1e-15)
    assert projective_distance([1, 0], projective_canonical([-1.0, 0.0])) == 0.0
    assert projective_distance([1, 0], [math.sqrt(0.5), math.sqrt(0.5)]) == pytest.approx(math.pi / 4, abs=1e-15)


def test_projective_distance_antipodal_arguments():
    """Test that the metric ignores orientation."""
    assert projective_distance([0.6, 0.8], [-0.6, -0.8]) == 0.0


def test_projective_distance_tiny_angles_keep_accuracy():
    """Test that a 1e-10 rad separation is resolved (arccos would round it to 0)."""
    theta = 1e-10
    d = projective_distance([1.0, 0.0], [math.cos(theta), math.sin(theta)])
    assert d == pytest.approx(theta, rel=1e-6)


def test_projective_distance_dimension_mismatch():
    """Test that mixed dimensions are refused."""
    with pytest.raises(DimensionMismatch):
        projective_distance([1, 0], [1, 0, 0])


# --- RP^1 helpers ---

def test_rp1_angle_and_back():
    """Test the RP^1 angle chart on axis classes."""
    assert rp1_angle([1.0, 0.0]) == 0.0
    assert rp1_angle(projective_canonical([0.0, -1.0])) == pytest.approx(math.pi / 2)
    assert angle_to_projective(math.pi / 2).rep.tolist() == [0.0, 1.0]
    assert angle_to_projective(0.0).rep.tolist() == [1.0, 0.0]


def test_rp1_angle_in_half_open_range():
    """Test that angles lie in [0, pi)."""
    assert 0.0 <= rp1_angle(projective_canonical([-1.0, 1e-17])) < math.pi


# --- nearest_distances ---

def test_nearest_distances_uses_antipodes():
    """Test that the nearest class is found through either antipode."""
    reps = np.array([[1.0, 0.0], [0.0, 1.0]])
    centers = np.array([[-math.cos(0.01), math.sin(0.01)], [math.sqrt(0.5), math.sqrt(0.5)]])
    distances, idx = nearest_distances(centers, reps)
    assert idx[0] == 0
    assert distances[0] == pytest.approx(0.01, rel=1e-9)
    assert distances[1] == pytest.approx(math.pi / 4, rel=1e-12)


# --- rotation_to_pole / apply_rotation ---

def test_rotation_to_pole_identity():
    """Test that the pole itself gives the identity."""
    np.testing.assert_array_equal(rotation_to_pole([0.0, 0.0, 1.0]).matrix, np.eye(3))


def test_rotation_to_pole_planar_e1():
    """Test that e1 in the plane is sent to e2 by the +pi/2 rotation."""
    r = rotation_to_pole([1.0, 0.0])
    np.testing.assert_allclose(r.matrix @ [1.0, 0.0], [0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(r.matrix, [[0.0, -1.0], [1.0, 0.0]], atol=1e-15)


def test_rotation_to_pole_negative_pole():
    """Test the diagonal rotation used for -e_d."""
    r = rotation_to_pole([0.0, 0.0, -1.0])
    np.testing.assert_array_equal(np.diag(r.matrix), [1.0, -1.0, -1.0])


@pytest.mark.parametrize("d", [2, 3, 5])
def test_rotation_to_pole_random_units(d):
    """Test R·u = e_d and det R = +1 for seeded unit vectors."""
    rng = np.random.Generator(np.random.PCG64(d))
    pole = np.zeros(d)
    pole[-1] = 1.0
    for v in rng.normal(size=(1000, d)):
        u = v / np.linalg.norm(v)
        r = rotation_to_pole(u)
        assert np.max(np.abs(r.matrix @ u - pole)) <= 1e-10
        assert abs(np.linalg.det(r.matrix) - 1.0) <= 1e-10


def test_rotation_rejects_reflection():
    """Test that a determinant -1 matrix is not a Rotation."""
    with pytest.raises(ValueError):
        Rotation(matrix=np.diag([1.0, -1.0]))


def test_apply_rotation_round_trip_and_distances():
    """Test that R then R^T restores the cloud and distances are kept."""
    rng = np.random.Generator(np.random.PCG64(3))
    cloud = PointCloud.from_points(rng.normal(size=(30, 3)))
    u = rng.normal(size=3)
    r = rotation_to_pole(u / np.linalg.norm(u))

    rotated = apply_rotation(r, cloud)
    back = apply_rotation(Rotation(matrix=r.matrix.T), rotated)
    np.testing.assert_allclose(back.points, cloud.points, atol=1e-9)

    before = np.linalg.norm(cloud.points[:, None] - cloud.points[None], axis=-1)
    after = np.linalg.norm(rotated.points[:, None] - rotated.points[None], axis=-1)
    np.testing.assert_allclose(after, before, rtol=1e-9, atol=1e-12)


def test_apply_rotation_identity_and_mismatch():
    """Test the identity action and the dimension check."""
    cloud = PointCloud.from_points([[0.0, 1.0], [2.0, 3.0]])
    np.testing.assert_array_equal(apply_rotation(Rotation(matrix=np.eye(2)), cloud).points, cloud.points)
    with pytest.raises(DimensionMismatch):
        apply_rotation(Rotation(matrix=np.eye(3)), cloud)


# --- PointCloud ---

def test_point_cloud_rejects_duplicates_unless_allowed():
    """Test exact duplicate handling."""
    with pytest.raises(InputValidationError, match="duplicate"):
        PointCloud.from_points([[0, 0], [0, 0], [1, 1]])
    cloud = PointCloud.from_points([[0, 0], [0, 0], [1, 1]], allow_duplicates=True)
    assert cloud.n == 3


def test_point_cloud_rejects_non_finite_and_low_dimension():
    """Test the coordinate checks."""
    with pytest.raises(InputValidationError, match="non-finite"):
        PointCloud.from_points([[0, 0], [np.nan, 1]])
    with pytest.raises(InputValidationError, match="dimension"):
        PointCloud.from_points([[0], [1]])
