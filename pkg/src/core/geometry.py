"""
Geometry primitives: pair directions, the projective quotient, its metric and
rotations to the pole.

Directions are unit vectors on S^{d-1}. A projective direction is an antipodal
class in RP^{d-1}, stored through a canonical representative whose first
coordinate of magnitude above CANONICAL_TOL is positive.
"""

import math
from typing import Any, Tuple, Union

import numpy as np
from pydantic import BaseModel, field_validator
from scipy.spatial import KDTree

from ..config import CANONICAL_TOL, DELTA_MIN
from ..errors import CoincidentPoints, DimensionMismatch
from ..utils.logging import get_logger
from ..utils.parallel import resolve_threads
from .cloud import PointCloud

logger = get_logger(__name__)

# A point is one row of a PointCloud; an angle is a float in radians.
Point = np.ndarray
Angle = float

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _unit_array(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.size < 2:
        raise ValueError(f"direction needs at least 2 coordinates, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("direction has a non-finite coordinate")
    norm = math.sqrt(float(arr @ arr))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"direction is not unit length (norm {norm!r})")
    return arr


class UnitDirection(BaseModel):
    """A point of S^{d-1}: the direction of the ray from x to y."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    coords: np.ndarray

    @field_validator("coords", mode="before")
    @classmethod
    def _validate(cls, value: Any) -> np.ndarray:
        return _frozen(_unit_array(value))

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    def __neg__(self) -> "UnitDirection":
        return UnitDirection(coords=-self.coords)


class ProjectiveDirection(BaseModel):
    """An antipodal class of RP^{d-1}, held by its canonical representative."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    rep: np.ndarray

    @field_validator("rep", mode="before")
    @classmethod
    def _validate(cls, value: Any) -> np.ndarray:
        arr = _unit_array(value)
        lead = np.flatnonzero(np.abs(arr) > CANONICAL_TOL)
        if lead.size and arr[lead[0]] < 0:
            raise ValueError("representative is not canonical (leading coordinate negative)")
        return _frozen(arr)

    @property
    def dim(self) -> int:
        return int(self.rep.size)

    def to_list(self) -> list:
        return self.rep.tolist()


class Rotation(BaseModel):
    """A proper rotation of R^d (orthogonal, determinant +1)."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _validate(cls, value: Any) -> np.ndarray:
        m = np.array(value, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"rotation must be square, got shape {m.shape}")
        defect = np.max(np.abs(m.T @ m - np.eye(m.shape[0])))
        if defect > ORTHO_TOL:
            raise ValueError(f"matrix is not orthogonal (defect {defect:.3e})")
        det = float(np.linalg.det(m))
        if abs(det - 1.0) > ORTHO_TOL:
            raise ValueError(f"determinant is {det!r}, expected +1")
        return _frozen(m)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


DirectionLike = Union[UnitDirection, ProjectiveDirection, np.ndarray, list, tuple]


def as_vector(u: DirectionLike) -> np.ndarray:
    """Coordinates of a direction-like value as a 1-D float array."""
    if isinstance(u, UnitDirection):
        return u.coords
    if isinstance(u, ProjectiveDirection):
        return u.rep
    return np.asarray(u, dtype=float).reshape(-1)


def row_norms(vectors: np.ndarray) -> np.ndarray:
    """Euclidean norms of the rows; identical for v and -v."""
    return np.sqrt(np.einsum("ij,ij->i", vectors, vectors))


def canonicalize_rows(vectors: np.ndarray) -> np.ndarray:
    """
    Apply the canonical sign rule to every row.

    The first coordinate with magnitude above CANONICAL_TOL is made positive;
    a row and its negation map to bitwise-equal results.
    """
    v = np.array(vectors, dtype=float, ndmin=2)
    mask = np.abs(v) > CANONICAL_TOL
    first = np.argmax(mask, axis=1)
    lead = v[np.arange(len(v)), first]
    sign = np.where(mask.any(axis=1) & (lead < 0), -1.0, 1.0)
    return v * sign[:, None]


def snap_unit(v: np.ndarray) -> np.ndarray:
    """Zero coordinates below CANONICAL_TOL and renormalize, so axis classes are exact."""
    out = np.where(np.abs(v) <= CANONICAL_TOL, 0.0, v)
    return out / math.sqrt(float(out @ out))


def pair_direction(x: Point, y: Point, delta_min: float = DELTA_MIN) -> UnitDirection:
    """
    Unit direction of the ray from x to y.

    Raises:
        DimensionMismatch: If x and y have different lengths.
        CoincidentPoints: If |y - x| <= delta_min.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != y.size:
        raise DimensionMismatch(f"points have dimensions {x.size} and {y.size}")
    diff = y - x
    norm = row_norms(diff[None, :])[0]
    if norm <= delta_min:
        raise CoincidentPoints(f"points are {norm!r} apart (threshold {delta_min!r})")
    return UnitDirection(coords=diff / norm)


def projective_canonical(u: DirectionLike) -> ProjectiveDirection:
    """Canonical representative of the antipodal class of u."""
    return ProjectiveDirection(rep=canonicalize_rows(as_vector(u))[0])


def line_angles(vectors: np.ndarray, p: np.ndarray) -> np.ndarray:
    """
    Projective distance from each unit row to the unit vector p.

    Uses 2·atan2(|a - s·p|, |a + s·p|) with s the sign of a·p, which is exactly
    symmetric and keeps full accuracy for tiny angles.
    """
    a = np.array(vectors, dtype=float, ndmin=2)
    sign = np.where(a @ p >= 0, 1.0, -1.0)[:, None]
    minus = row_norms(a - sign * p)
    plus = row_norms(a + sign * p)
    return 2.0 * np.arctan2(minus, plus)


def projective_distance(p: DirectionLike, q: DirectionLike) -> Angle:
    """
    Angle between the lines of p and q, in [0, pi/2].

    Raises:
        DimensionMismatch: If p and q have different dimensions.
    """
    a = as_vector(p)
    b = as_vector(q)
    if a.size != b.size:
        raise DimensionMismatch(f"directions have dimensions {a.size} and {b.size}")
    return float(line_angles(a[None, :], b)[0])


def rp1_angles(reps: np.ndarray) -> np.ndarray:
    """Angles in [0, pi) of planar projective classes."""
    reps = np.array(reps, dtype=float, ndmin=2)
    if reps.shape[1] != 2:
        raise DimensionMismatch(f"RP^1 angles need d = 2, got d = {reps.shape[1]}")
    theta = np.arctan2(reps[:, 1], reps[:, 0])
    theta = np.where(theta < 0, theta + math.pi, theta)
    theta = np.where(theta >= math.pi, theta - math.pi, theta)
    return theta + 0.0


def rp1_angle(p: DirectionLike) -> Angle:
    """Angle in [0, pi) of a planar projective class."""
    return float(rp1_angles(as_vector(p)[None, :])[0])


def angle_to_projective(theta: Angle) -> ProjectiveDirection:
    """Projective class of the planar line at angle theta."""
    v = np.array([math.cos(theta), math.sin(theta)])
    return projective_canonical(snap_unit(v))


def nearest_distances(
    centers: np.ndarray, reps: np.ndarray, threads: Union[int, None] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Projective distance from each center to its nearest representative.

    The representatives are doubled antipodally into a KD-tree; the chord c to
    the nearest point converts to the angle 2·asin(c/2).

    Returns:
        (distances, indices into reps)
    """
    centers = np.array(centers, dtype=float, ndmin=2)
    reps = np.array(reps, dtype=float, ndmin=2)
    if centers.shape[1] != reps.shape[1]:
        raise DimensionMismatch(f"centers have d = {centers.shape[1]}, directions d = {reps.shape[1]}")
    tree = KDTree(np.vstack([reps, -reps]))
    chord, idx = tree.query(centers, k=1, workers=resolve_threads(threads))
    angles = 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    return angles, idx % len(reps)


def rotation_to_pole(u: DirectionLike) -> Rotation:
    """
    Rotation R with R·u = e_d, built from two reflections.

    A Householder reflection sends u to -e_d (when u_d >= 0) or e_d (when
    u_d < 0), choosing the sign that avoids cancellation; a coordinate flip
    restores determinant +1. u = e_d gives the identity and u = -e_d the
    diagonal rotation negating the last two coordinates.
    """
    u = as_vector(u)
    d = u.size
    pole = np.zeros(d)
    pole[-1] = 1.0

    if np.array_equal(u, pole):
        return Rotation(matrix=np.eye(d))
    if np.array_equal(u, -pole):
        m = np.eye(d)
        m[-2, -2] = -1.0
        m[-1, -1] = -1.0
        return Rotation(matrix=m)

    flip = np.eye(d)
    if u[-1] >= 0:
        v = u + pole
        flip[-1, -1] = -1.0
    else:
        v = u - pole
        flip[0, 0] = -1.0
    householder = np.eye(d) - 2.0 * np.outer(v, v) / (v @ v)
    return Rotation(matrix=flip @ householder)


def apply_rotation(rotation: Rotation, cloud: PointCloud) -> PointCloud:
    """
    Rotate every point of the cloud.

    Raises:
        DimensionMismatch: If the rotation and cloud dimensions differ.
    """
    if rotation.dim != cloud.dim:
        raise DimensionMismatch(f"rotation is {rotation.dim}-D, cloud is {cloud.dim}-D")
    return cloud.with_points(cloud.points @ rotation.matrix.T)
