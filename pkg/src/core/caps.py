"""
Empty caps and epsilon-coverage in RP^{d-1}.

Projective classes are doubled antipodally onto S^{d-1}; a cap of RP^{d-1}
is then an ordinary spherical cap around either antipode of its center.

- d = 2: the largest empty arc is exact (sorted circular gap scan).
- d = 3: candidate centers are the vertices of the spherical Voronoi diagram of
  the doubled classes; the best vertex is optimal.
- d > 3 or on request: seeded scrambled-Halton candidates mapped to the sphere,
  followed by one local refinement pass; the result is a lower bound.
"""

import functools
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel
from scipy.spatial import KDTree, SphericalVoronoi
from scipy.special import ndtri
from scipy.stats import qmc

from .. import config
from ..config import DEFAULT_SAMPLED_K
from ..errors import BadTolerance, CapVerificationError, DimensionMismatch, EmptyInput, MalformedInput, NetTooLarge
from ..utils.logging import get_logger, log_duration
from .direction_set import DirectionSet, merge_projective
from .geometry import (
    Angle,
    ProjectiveDirection,
    angle_to_projective,
    canonicalize_rows,
    nearest_distances,
    projective_canonical,
    rotation_to_pole,
    rp1_angles,
    snap_unit,
)

logger = get_logger(__name__)

EMPTINESS_SLACK = 1e-9
TIE_TOL = 1e-12
VORONOI_MERGE_TOL = 1e-6

# Fibonacci sphere of FIBONACCI_DENSITY / h^2 points has covering radius close to h
FIBONACCI_DENSITY = 6.0
FIBONACCI_MARGIN = 1.05

Directions = Union[DirectionSet, Sequence[ProjectiveDirection], np.ndarray]


class CapReport(BaseModel):
    """A direction-free cap: every input class is at least `radius` from `center`."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    center: ProjectiveDirection
    radius: float
    method: str
    quality: str
    k: Optional[int] = None
    seed: Optional[int] = None
    n_directions: int = 0

    def to_record(self) -> Dict[str, Any]:
        return {
            "center": self.center.to_list(),
            "radius": self.radius,
            "method": self.method,
            "quality": self.quality,
            "k": self.k,
            "seed": self.seed,
            "n_directions": self.n_directions,
            "dim": self.center.dim,
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "CapReport":
        """
        Rebuild a cap from its JSON record.

        Raises:
            MalformedInput: If required keys are missing or malformed.
        """
        try:
            return cls(
                center=ProjectiveDirection(rep=record["center"]),
                radius=float(record["radius"]),
                method=str(record["method"]),
                quality=str(record["quality"]),
                k=record.get("k"),
                seed=record.get("seed"),
                n_directions=int(record.get("n_directions", 0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedInput(f"Not a cap record: {e}") from e


class CoverageCertificate(BaseModel):
    """Result of testing whether the classes form an eps-cover of RP^{d-1}."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    eps: float
    net_density: float
    covering_radius: float
    covered: bool
    witness: Optional[ProjectiveDirection] = None
    witness_distance: Optional[float] = None
    net_size: int
    covered_fraction: float

    def to_record(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "net_density": self.net_density,
            "covering_radius": self.covering_radius,
            "covered": self.covered,
            "witness": None if self.witness is None else self.witness.to_list(),
            "witness_distance": self.witness_distance,
            "net_size": self.net_size,
            "covered_fraction": self.covered_fraction,
        }


class Net(BaseModel):
    """Deterministic net of RP^{d-1} with a certified covering radius."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    points: np.ndarray
    covering_radius: float
    construction: str


def as_reps(dirs: Directions, dim: Optional[int] = None) -> Tuple[np.ndarray, int]:
    """
    Canonical representatives of the input classes as an (m, d) array.

    Raises:
        DimensionMismatch: If dim disagrees with the data.
        EmptyInput: If no dimension can be inferred.
    """
    if isinstance(dirs, DirectionSet):
        reps, inferred = np.array(dirs.projective), dirs.dim
    elif isinstance(dirs, np.ndarray):
        reps = dirs
        inferred = dirs.shape[1] if dirs.ndim == 2 and dirs.shape[0] else None
    else:
        items = list(dirs)
        if items and isinstance(items[0], ProjectiveDirection):
            reps = np.array([p.rep for p in items])
        else:
            reps = np.array(items, dtype=float)
        inferred = reps.shape[1] if reps.ndim == 2 and reps.shape[0] else None

    if dim is None:
        dim = inferred
    if dim is None:
        raise EmptyInput("no directions given and no dimension specified")
    if inferred is not None and inferred != dim:
        raise DimensionMismatch(f"directions are {inferred}-D, expected {dim}-D")
    reps = np.array(reps, dtype=float).reshape(-1, dim)
    return canonicalize_rows(reps) if len(reps) else reps, int(dim)


def verify_cap(center: np.ndarray, radius: float, reps: np.ndarray) -> None:
    """
    Check that no class lies strictly inside the cap.

    Raises:
        CapVerificationError: If a class is closer than radius - 1e-9.
    """
    nearest, idx = nearest_distances(center[None, :], reps)
    if nearest[0] < radius - EMPTINESS_SLACK:
        raise CapVerificationError(
            f"cap of radius {radius!r} contains class {int(idx[0])} at distance {float(nearest[0])!r}",
            details={"radius": radius, "distance": float(nearest[0])},
        )


def _best_candidate(candidates: np.ndarray, distances: np.ndarray) -> int:
    """Index of the largest distance; ties go to the lexicographically smallest canonical center."""
    best = float(np.max(distances))
    tied = np.flatnonzero(distances >= best - TIE_TOL)
    if tied.size == 1:
        return int(tied[0])
    order = np.lexsort(candidates[tied].T[::-1])
    return int(tied[order[0]])


def largest_empty_arc(dirs: Directions) -> CapReport:
    """
    Exact largest empty arc of RP^1.

    Classes are mapped to angles in [0, pi) and sorted; the largest circular gap
    of the pi-periodic circle gives the cap (center at the gap midpoint, radius
    half the gap). Equal gaps go to the smaller center angle.

    Raises:
        EmptyInput: If no directions are given.
        DimensionMismatch: If the directions are not planar.
    """
    reps, dim = as_reps(dirs, 2 if not isinstance(dirs, DirectionSet) else None)
    if dim != 2:
        raise DimensionMismatch(f"largest_empty_arc needs d = 2, got d = {dim}")
    if len(reps) == 0:
        raise EmptyInput("largest_empty_arc needs at least one direction")

    angles = np.sort(rp1_angles(reps))
    gaps = np.diff(np.append(angles, angles[0] + math.pi))
    centers = np.mod(angles + gaps / 2.0, math.pi)
    widest = float(np.max(gaps))
    tied = np.flatnonzero(gaps >= widest - TIE_TOL)
    pick = int(tied[np.argmin(centers[tied])])

    center = angle_to_projective(float(centers[pick]))
    radius = float(gaps[pick]) / 2.0
    verify_cap(center.rep, radius, reps)
    logger.debug(f"Largest empty arc: radius {radius!r} at angle {float(centers[pick])!r}")
    return CapReport(
        center=center, radius=radius, method="exact_gap_2d", quality="exact", n_directions=len(reps)
    )


def _degenerate_cap(reps: np.ndarray) -> CapReport:
    """All classes lie in a plane through the origin: the plane normal is pi/2 from all."""
    _, _, vt = np.linalg.svd(reps)
    center = projective_canonical(snap_unit(vt[-1]))
    nearest, _ = nearest_distances(center.rep[None, :], reps)
    radius = min(float(nearest[0]), math.pi / 2)
    logger.info("Directions span at most a plane; cap centered on its normal")
    return CapReport(center=center, radius=radius, method="voronoi_3d", quality="exact", n_directions=len(reps))


def _voronoi_cap(reps: np.ndarray, threads: Optional[int]) -> CapReport:
    singular = np.linalg.svd(reps, compute_uv=False)
    if len(reps) < 3 or singular[-1] <= 1e-9 * singular[0]:
        return _degenerate_cap(reps)

    generators = merge_projective(reps, VORONOI_MERGE_TOL)
    doubled = np.vstack([generators, -generators])
    diagram = SphericalVoronoi(doubled, radius=1.0, center=np.zeros(3))
    vertices = diagram.vertices / np.linalg.norm(diagram.vertices, axis=1)[:, None]
    candidates = canonicalize_rows(np.array([snap_unit(v) for v in vertices]))

    distances, _ = nearest_distances(candidates, reps, threads)
    pick = _best_candidate(candidates, distances)
    center = ProjectiveDirection(rep=candidates[pick])
    radius = float(distances[pick])
    verify_cap(center.rep, radius, reps)
    logger.debug(f"Voronoi cap over {len(candidates)} vertices: radius {radius!r}")
    return CapReport(center=center, radius=radius, method="voronoi_3d", quality="exact", n_directions=len(reps))


def sphere_candidates(dim: int, k: int, seed: int) -> np.ndarray:
    """
    k seeded low-discrepancy points of S^{d-1}.

    Scrambled Halton points are pushed through the inverse normal CDF and
    normalized; the first k points do not depend on k, so candidate sets are
    nested in k.
    """
    engine = qmc.Halton(d=dim, scramble=True, seed=seed)
    uniform = np.clip(engine.random(k), 1e-12, 1.0 - 1e-12)
    gauss = ndtri(uniform)
    norms = np.maximum(np.linalg.norm(gauss, axis=1), 1e-300)
    return canonicalize_rows(gauss / norms[:, None])


def _refine(center: np.ndarray, radius: float, reps: np.ndarray, threads: Optional[int]) -> Tuple[np.ndarray, float]:
    """Deterministic pattern search over the tangent directions at the center."""
    step = max(radius, 1e-3) / 2.0
    for _ in range(200):
        if step < 1e-9:
            break
        frame = rotation_to_pole(center).matrix.T[:, :-1]
        tangents = np.hstack([frame, -frame]).T
        trials = math.cos(step) * center + math.sin(step) * tangents
        trials = canonicalize_rows(trials / np.linalg.norm(trials, axis=1)[:, None])
        distances, _ = nearest_distances(trials, reps, threads)
        best = int(np.argmax(distances))
        if distances[best] > radius:
            center, radius = trials[best], float(distances[best])
        else:
            step /= 2.0
    return center, radius


def _sampled_cap(reps: np.ndarray, dim: int, k: int, seed: int, refine: bool, threads: Optional[int]) -> CapReport:
    if k < 1:
        raise BadTolerance(f"k must be positive, got {k}")
    candidates = sphere_candidates(dim, k, seed)
    distances, _ = nearest_distances(candidates, reps, threads)
    pick = _best_candidate(candidates, distances)
    center, radius = candidates[pick], float(distances[pick])
    if refine:
        center, radius = _refine(center, radius, reps, threads)
    verify_cap(center, radius, reps)
    logger.debug(f"Sampled cap (k={k}, seed={seed}, refine={refine}): radius {radius!r}")
    return CapReport(
        center=ProjectiveDirection(rep=center),
        radius=radius,
        method="sampled",
        quality="lower_bound",
        k=k,
        seed=seed,
        n_directions=len(reps),
    )


def largest_empty_cap(
    dirs: Directions,
    dim: Optional[int] = None,
    method: str = "auto",
    k: int = DEFAULT_SAMPLED_K,
    seed: int = 0,
    refine: bool = True,
    threads: Optional[int] = None,
) -> CapReport:
    """
    Largest direction-free cap of RP^{d-1}.

    Args:
        dirs: The classes (DirectionSet, ProjectiveDirection list or (m, d) array).
        dim: Dimension d (inferred when omitted).
        method: "auto" (exact for d <= 3) or "sampled".
        k: Number of sampled candidate centers.
        seed: Seed of the candidate scrambling.
        refine: Run the local refinement pass after sampling.
        threads: Worker threads for nearest-class queries.

    Raises:
        EmptyInput: If no directions are given.
    """
    reps, dim = as_reps(dirs, dim)
    if len(reps) == 0:
        raise EmptyInput("largest_empty_cap needs at least one direction")
    if method not in ("auto", "sampled"):
        raise BadTolerance(f"unknown cap method '{method}'")

    if method == "auto" and dim == 2:
        return largest_empty_arc(reps)
    if method == "auto" and dim == 3:
        try:
            return _voronoi_cap(reps, threads)
        except ValueError as e:
            logger.warning(f"Spherical Voronoi failed ({e}); falling back to sampled candidates")
    return _sampled_cap(reps, dim, k, seed, refine, threads)


def _fibonacci_sphere(samples: int) -> np.ndarray:
    offset = 2.0 / samples
    increment = math.pi * (3.0 - math.sqrt(5.0))
    i = np.arange(samples)
    y = i * offset - 1.0 + offset / 2.0
    r = np.sqrt(np.clip(1.0 - y * y, 0.0, 1.0))
    phi = i * increment
    return np.column_stack([np.cos(phi) * r, y, np.sin(phi) * r])


def _spherical_covering_radius(points: np.ndarray) -> float:
    """Spherical covering radius: the farthest Voronoi vertex from its generators."""
    diagram = SphericalVoronoi(points, radius=1.0, center=np.zeros(3))
    vertices = diagram.vertices / np.linalg.norm(diagram.vertices, axis=1)[:, None]
    chord, _ = KDTree(points).query(vertices, k=1)
    return float(np.max(2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))))


def _check_net_size(size: int) -> None:
    if size > config.NET_SIZE_LIMIT:
        raise NetTooLarge(f"net of {size} points exceeds the limit of {config.NET_SIZE_LIMIT}")


@functools.lru_cache(maxsize=32)
def build_net(dim: int, net_density: Angle) -> Net:
    """
    Deterministic net of RP^{d-1} with covering radius <= net_density.

    d = 2: m uniform angles (i + 1/2)·pi/m, covering radius pi/(2m).
    d = 3: Fibonacci sphere, folded to canonical classes; its spherical covering
    radius is measured on the Voronoi diagram. A miss regrows the sphere by the
    squared ratio of measured to target radius.
    d >= 4: grid of spacing s on the positive faces of the cube [-1, 1]^d,
    radially projected; covering radius at most (pi/2)·s·sqrt(d-1)/2.

    Raises:
        BadTolerance: If net_density is not positive.
        NetTooLarge: If the net would exceed NET_SIZE_LIMIT points.
    """
    if net_density <= 0:
        raise BadTolerance(f"net_density must be positive, got {net_density}")

    if dim == 2:
        m = int(math.ceil(math.pi / (2.0 * net_density)))
        _check_net_size(m)
        angles = (np.arange(m) + 0.5) * math.pi / m
        points = canonicalize_rows(np.column_stack([np.cos(angles), np.sin(angles)]))
        return Net(points=points, covering_radius=math.pi / (2 * m), construction="uniform_rp1")

    if dim == 3:
        samples = max(16, int(math.ceil(FIBONACCI_DENSITY / net_density**2)))
        while True:
            _check_net_size(samples)
            sphere = _fibonacci_sphere(samples)
            radius = _spherical_covering_radius(sphere)
            if radius <= net_density:
                break
            # covering radius scales like 1/sqrt(samples)
            grown = int(math.ceil(samples * (radius / net_density) ** 2 * FIBONACCI_MARGIN))
            samples = max(samples + 1, grown)
        logger.debug(f"Fibonacci net: {samples} points, covering radius {radius!r}")
        return Net(points=canonicalize_rows(sphere), covering_radius=radius, construction="fibonacci")

    spacing_target = 4.0 * net_density / (math.pi * math.sqrt(dim - 1))
    per_axis = int(math.ceil(2.0 / spacing_target)) + 1
    _check_net_size(dim * per_axis ** (dim - 1))
    grid = np.linspace(-1.0, 1.0, per_axis)
    face = np.stack(np.meshgrid(*([grid] * (dim - 1)), indexing="ij"), axis=-1).reshape(-1, dim - 1)
    faces: List[np.ndarray] = []
    for axis in range(dim):
        pts = np.insert(face, axis, 1.0, axis=1)
        faces.append(pts)
    cube = np.vstack(faces)
    points = canonicalize_rows(cube / np.linalg.norm(cube, axis=1)[:, None])
    spacing = 2.0 / (per_axis - 1)
    radius = (math.pi / 2.0) * spacing * math.sqrt(dim - 1) / 2.0
    return Net(points=points, covering_radius=radius, construction="cube_faces")


def _net_distances(reps: np.ndarray, dim: int, net: Net, threads: Optional[int]) -> np.ndarray:
    if len(reps) == 0:
        return np.full(len(net.points), np.inf)
    distances, _ = nearest_distances(net.points, reps, threads)
    return distances


def eps_cover_test(
    dirs: Directions,
    eps: Angle,
    net_density: Optional[Angle] = None,
    dim: Optional[int] = None,
    threads: Optional[int] = None,
) -> CoverageCertificate:
    """
    Test whether the classes are an eps-cover of RP^{d-1} on a certified net.

    covered=True guarantees every class of RP^{d-1} is within eps + net_density
    of an input direction; covered=False returns the net point farthest from the
    input, which is more than eps from every direction.

    Raises:
        BadTolerance: If eps <= 0 or net_density is outside (0, eps/2].
    """
    if eps <= 0:
        raise BadTolerance(f"eps must be positive, got {eps}")
    if net_density is None:
        net_density = eps / 4.0
    if net_density <= 0 or net_density > eps / 2.0:
        raise BadTolerance(f"net_density must lie in (0, eps/2], got {net_density} for eps {eps}")

    reps, dim = as_reps(dirs, dim)
    net = build_net(dim, float(net_density))
    with log_duration(logger, f"cover test on {len(net.points)} net points"):
        distances = _net_distances(reps, dim, net, threads)
    inside = distances <= eps + TIE_TOL
    covered = bool(np.all(inside))

    witness = None
    witness_distance = None
    if not covered:
        far = int(np.argmax(distances))
        witness = ProjectiveDirection(rep=net.points[far])
        witness_distance = float(distances[far]) if np.isfinite(distances[far]) else None

    logger.info(f"eps-cover test (eps {eps!r}, net {len(net.points)}): covered={covered}")
    return CoverageCertificate(
        eps=eps,
        net_density=net_density,
        covering_radius=net.covering_radius,
        covered=covered,
        witness=witness,
        witness_distance=witness_distance,
        net_size=len(net.points),
        covered_fraction=float(np.mean(inside)),
    )


def coverage_fraction(
    dirs: Directions,
    eps: Angle,
    net_density: Optional[Angle] = None,
    dim: Optional[int] = None,
    threads: Optional[int] = None,
) -> float:
    """Fraction of the deterministic net within eps of some direction."""
    if eps <= 0:
        raise BadTolerance(f"eps must be positive, got {eps}")
    if net_density is None:
        net_density = eps / 4.0
    reps, dim = as_reps(dirs, dim)
    net = build_net(dim, float(net_density))
    distances = _net_distances(reps, dim, net, threads)
    return float(np.mean(distances <= eps + TIE_TOL))
