"""
Trichotomy classification at finite resolution.

A cloud is classified by its projective direction set D(E):

- class_i: a cap of radius >= eps_hole misses D(E). The cloud is then the graph
  of a Lipschitz function over the hyperplane orthogonal to the cap center, and
  the witness carries the rotation, the samples and the exact Lipschitz constant.
- class_iii: D(E) is an eps_cover-cover of RP^{d-1} on a certified net.
- class_ii: neither; reported with a refinement note.
"""

import math
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, model_validator

from .. import config
from ..config import DEFAULT_EPS_COVER, DEFAULT_EPS_HOLE, DEFAULT_SAMPLED_K, DEFAULT_TOL, DELTA_MIN
from ..errors import (
    BadTolerance,
    CoincidentBasePoints,
    DimensionMismatch,
    GraphExtractionFailed,
    NetTooLarge,
    NotAGraph,
    TooFewPoints,
)
from ..utils.logging import get_logger, log_duration
from ..utils.parallel import map_blocks, split_blocks
from .caps import CapReport, CoverageCertificate, eps_cover_test, largest_empty_cap
from .cloud import PointCloud
from .direction_set import pair_indices, unoriented_directions
from .geometry import (
    Angle,
    DirectionLike,
    ProjectiveDirection,
    Rotation,
    as_vector,
    line_angles,
    projective_canonical,
    rotation_to_pole,
    row_norms,
)

logger = get_logger(__name__)

RECONSTRUCTION_TOL = 1e-9
BOUND_SLACK = 1e-6

Pair = Tuple[int, int]


class Verdict(str, Enum):
    """The three regimes of the trichotomy."""

    CLASS_I = "class_i"
    CLASS_II = "class_ii"
    CLASS_III = "class_iii"


class VerticalLineVerdict(BaseModel):
    """Outcome of the vertical line test in one direction."""

    graph: bool
    clearance: float
    witness: Optional[Pair] = None


class GraphWitness(BaseModel):
    """The cloud written as a graph over the hyperplane orthogonal to a pole."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    pole: ProjectiveDirection
    rotation: Rotation
    base_points: np.ndarray
    values: np.ndarray
    lipschitz_constant: float
    lipschitz_pair: Optional[Pair] = None
    bound: float
    clearance: float

    @property
    def n(self) -> int:
        return int(len(self.values))

    def to_record(self, inline: bool = True) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "pole": self.pole.to_list(),
            "rotation": self.rotation.matrix.tolist(),
            "lipschitz_constant": self.lipschitz_constant,
            "lipschitz_pair": None if self.lipschitz_pair is None else list(self.lipschitz_pair),
            "bound": self.bound,
            "clearance": self.clearance,
            "n": self.n,
        }
        if inline:
            record["base_points"] = self.base_points.tolist()
            record["values"] = self.values.tolist()
        return record


class RefinementNote(BaseModel):
    """Evidence for the middle regime: neither a big hole nor a cover was certified."""

    cap_radius: float
    coverage_fraction: Optional[float] = None
    message: str


class Classification(BaseModel):
    """Verdict plus the evidence that supports it."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    verdict: Verdict
    eps_hole: float
    eps_cover: float
    tol: float
    dim: int
    n_points: int
    n_classes: int
    pair_budget: Optional[int] = None
    seed: int = 0
    cap: CapReport
    graph: Optional[GraphWitness] = None
    certificate: Optional[CoverageCertificate] = None
    note: Optional[RefinementNote] = None

    @model_validator(mode="after")
    def _check_evidence(self) -> "Classification":
        if self.verdict is Verdict.CLASS_I:
            if self.graph is None or self.cap.radius < self.eps_hole:
                raise ValueError("class_i needs a graph witness and a cap of radius >= eps_hole")
        elif self.verdict is Verdict.CLASS_III:
            if self.certificate is None or not self.certificate.covered:
                raise ValueError("class_iii needs a covering certificate")
        elif self.note is None:
            raise ValueError("class_ii needs a refinement note")
        return self

    def to_record(self, graph_inline: bool = True) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "thresholds": {"eps_hole": self.eps_hole, "eps_cover": self.eps_cover, "tol": self.tol},
            "dim": self.dim,
            "n_points": self.n_points,
            "n_classes": self.n_classes,
            "pair_budget": self.pair_budget,
            "seed": self.seed,
            "cap": self.cap.to_record(),
            "graph": None if self.graph is None else self.graph.to_record(inline=graph_inline),
            "certificate": None if self.certificate is None else self.certificate.to_record(),
            "note": None if self.note is None else self.note.model_dump(),
        }


def _pole_vector(pole: DirectionLike, dim: int) -> np.ndarray:
    p = as_vector(pole)
    if p.size != dim:
        raise DimensionMismatch(f"pole is {p.size}-D, cloud is {dim}-D")
    return p


def pole_clearance(
    cloud: PointCloud, pole: DirectionLike, threads: Optional[int] = None
) -> Tuple[Angle, Optional[Pair]]:
    """
    Smallest projective distance between a pair direction and the pole.

    Every pair is examined; the first pair attaining the minimum (in row-major
    pair order) is returned with it.

    Raises:
        TooFewPoints: If the cloud has fewer than two points.
    """
    if cloud.n < 2:
        raise TooFewPoints(f"need at least 2 points, cloud '{cloud.label}' has {cloud.n}")
    p = _pole_vector(pole, cloud.dim)
    points = cloud.points
    i, j = pair_indices(cloud.n)

    def work(start: int, stop: int) -> Tuple[float, int]:
        diff = points[j[start:stop]] - points[i[start:stop]]
        norms = row_norms(diff)
        angles = np.full(len(diff), np.inf)
        keep = norms > DELTA_MIN
        angles[keep] = line_angles(diff[keep] / norms[keep, None], p)
        k = int(np.argmin(angles))
        return float(angles[k]), k + start

    best, where = math.inf, -1
    for angle, k in map_blocks(work, split_blocks(len(i)), threads):
        if angle < best:
            best, where = angle, k
    if where < 0:
        return math.pi / 2, None
    return best, (int(i[where]), int(j[where]))


def vertical_line_test(
    cloud: PointCloud, direction: DirectionLike, tol: Angle = DEFAULT_TOL, threads: Optional[int] = None
) -> VerticalLineVerdict:
    """
    Vertical line test in the given direction.

    The cloud fails (not a graph) iff some pair direction is within tol of the
    direction; the closest such pair is the witness.
    """
    clearance, pair = pole_clearance(cloud, direction, threads)
    if clearance <= tol:
        logger.debug(f"Vertical line test failed: pair {pair} at {clearance!r}")
        return VerticalLineVerdict(graph=False, clearance=clearance, witness=pair)
    return VerticalLineVerdict(graph=True, clearance=clearance)


def lipschitz_constant(
    base: np.ndarray,
    values: np.ndarray,
    delta_min: float = DELTA_MIN,
    threads: Optional[int] = None,
    return_pair: bool = False,
) -> Any:
    """
    Exact maximum secant slope |f(a) - f(b)| / |a - b| over all pairs.

    Args:
        base: (n,) or (n, k) base points.
        values: (n,) function values.
        delta_min: Base points closer than this are coincident.
        threads: Worker threads.
        return_pair: Also return the first pair attaining the maximum.

    Raises:
        TooFewPoints: If fewer than two samples are given.
        CoincidentBasePoints: If two base points coincide.
    """
    base = np.asarray(base, dtype=float)
    values = np.asarray(values, dtype=float).reshape(-1)
    if base.ndim == 1:
        base = base[:, None]
    n = len(values)
    if n < 2:
        raise TooFewPoints(f"lipschitz_constant needs at least 2 samples, got {n}")
    if len(base) != n:
        raise DimensionMismatch(f"{len(base)} base points for {n} values")

    rows = max(1, config.BLOCK_SIZE // n)
    cols = np.arange(n)

    def work(start: int, stop: int) -> Tuple[float, Optional[Pair]]:
        block = np.arange(start, stop)
        if base.shape[1] == 1:
            dist = np.abs(base[start:stop, 0][:, None] - base[None, :, 0])
        else:
            delta = base[start:stop, None, :] - base[None, :, :]
            dist = np.sqrt(np.einsum("ijk,ijk->ij", delta, delta))
        upper = cols[None, :] > block[:, None]
        close = upper & (dist <= delta_min)
        if np.any(close):
            r, c = np.argwhere(close)[0]
            raise CoincidentBasePoints(
                f"base points {start + int(r)} and {int(c)} coincide", details={"pair": [start + int(r), int(c)]}
            )
        rise = np.abs(values[start:stop, None] - values[None, :])
        slopes = np.where(upper, rise / np.where(upper, dist, 1.0), -np.inf)
        flat = int(np.argmax(slopes))
        r, c = divmod(flat, n)
        if not np.isfinite(slopes[r, c]):
            return -math.inf, None
        return float(slopes[r, c]), (start + r, c)

    with log_duration(logger, f"Lipschitz constant over {n} samples"):
        blocks = map_blocks(work, split_blocks(n, rows), threads)
    best, pair = -math.inf, None
    for slope, where in blocks:
        if slope > best:
            best, pair = slope, where
    return (best, pair) if return_pair else best


def extract_graph(
    cloud: PointCloud,
    pole: DirectionLike,
    tol: Angle = DEFAULT_TOL,
    hole: Optional[Angle] = None,
    threads: Optional[int] = None,
) -> GraphWitness:
    """
    Write the cloud as the graph of a function over the hyperplane orthogonal to pole.

    The cloud is rotated so the pole becomes e_d; the first d-1 coordinates are
    the base points and the last one the values. The Lipschitz bound is
    tan(pi/2 - hole), with hole defaulting to the measured pole clearance.

    Raises:
        NotAGraph: If some pair direction is within tol of the pole, or two
            points project to the same base point.
        GraphExtractionFailed: If the reconstruction or the Lipschitz bound check fails.
    """
    pole_dir = projective_canonical(_pole_vector(pole, cloud.dim))
    test = vertical_line_test(cloud, pole_dir, tol, threads)
    if not test.graph:
        raise NotAGraph(
            f"pair {test.witness} is {test.clearance!r} from the pole (tol {tol!r})",
            details={"witness": list(test.witness) if test.witness else None, "clearance": test.clearance},
        )

    rotation = rotation_to_pole(pole_dir)
    rotated = cloud.points @ rotation.matrix.T
    base, values = rotated[:, :-1], rotated[:, -1]

    scale = max(1.0, float(np.max(np.abs(cloud.points))))
    error = float(np.max(np.abs(rotated @ rotation.matrix - cloud.points)))
    if error > RECONSTRUCTION_TOL * scale:
        raise GraphExtractionFailed(f"graph reconstruction error {error!r} exceeds {RECONSTRUCTION_TOL * scale!r}")

    try:
        lipschitz, pair = lipschitz_constant(base, values, threads=threads, return_pair=True)
    except CoincidentBasePoints as e:
        witness = e.details.get("pair")
        raise NotAGraph(
            f"pair {witness} shares a base point over the pole ({e})",
            details={"witness": witness, "clearance": test.clearance},
        ) from e
    angle = test.clearance if hole is None else hole
    bound = math.tan(math.pi / 2 - angle) if angle < math.pi / 2 else 0.0
    if lipschitz > bound + BOUND_SLACK * max(1.0, bound):
        raise GraphExtractionFailed(
            f"Lipschitz constant {lipschitz!r} exceeds the bound {bound!r}",
            details={"lipschitz_constant": lipschitz, "bound": bound},
        )

    logger.debug(f"Graph extracted over pole {pole_dir.to_list()}: L = {lipschitz!r}, bound {bound!r}")
    return GraphWitness(
        pole=pole_dir,
        rotation=rotation,
        base_points=base,
        values=values,
        lipschitz_constant=lipschitz,
        lipschitz_pair=pair,
        bound=bound,
        clearance=test.clearance,
    )


def restricted_lipschitz(
    witness: GraphWitness,
    line_point: np.ndarray,
    line_direction: np.ndarray,
    tol: float = 1e-9,
) -> float:
    """
    Lipschitz constant of the witness function restricted to an affine line of the base.

    Base points within tol of the line {line_point + t·line_direction} are kept;
    fewer than two such points give 0.
    """
    base = witness.base_points
    point = np.asarray(line_point, dtype=float).reshape(-1)
    direction = np.asarray(line_direction, dtype=float).reshape(-1)
    if point.size != base.shape[1] or direction.size != base.shape[1]:
        raise DimensionMismatch(f"line lives in {point.size}-D, base points in {base.shape[1]}-D")
    direction = direction / np.linalg.norm(direction)

    offsets = base - point
    along = offsets @ direction
    off_line = row_norms(offsets - along[:, None] * direction)
    on_line = np.flatnonzero(off_line <= tol)
    if on_line.size < 2:
        return 0.0
    return lipschitz_constant(along[on_line], witness.values[on_line])


def classify(
    cloud: PointCloud,
    eps_hole: Angle = DEFAULT_EPS_HOLE,
    eps_cover: Angle = DEFAULT_EPS_COVER,
    tol: Angle = DEFAULT_TOL,
    pair_budget: Optional[int] = None,
    seed: int = 0,
    net_density: Optional[Angle] = None,
    method: str = "auto",
    k: int = DEFAULT_SAMPLED_K,
    threads: Optional[int] = None,
) -> Classification:
    """
    Classify a cloud into exactly one regime of the trichotomy.

    Args:
        cloud: The point cloud.
        eps_hole: Cap radius that certifies a Lipschitz graph.
        eps_cover: Covering radius that certifies a dense direction set.
        tol: Dedup and vertical-line tolerance.
        pair_budget: Sample this many pairs for D(E) (None = all pairs).
        seed: Seed for pair sampling and sampled caps.
        net_density: Net density for the cover test (default eps_cover/4).
        method: Cap method ("auto" or "sampled").
        k: Candidates for the sampled cap.
        threads: Worker threads.

    Raises:
        BadTolerance: Unless 0 < eps_cover <= eps_hole.
        TooFewPoints: If the cloud has fewer than two points.
        GraphExtractionFailed: If a certified hole does not yield a graph.
    """
    if not (0 < eps_cover <= eps_hole):
        raise BadTolerance(f"need 0 < eps_cover <= eps_hole, got eps_cover={eps_cover}, eps_hole={eps_hole}")
    if cloud.n < 2:
        raise TooFewPoints(f"need at least 2 points, cloud '{cloud.label}' has {cloud.n}")

    dirs = unoriented_directions(cloud, tol, pair_budget, seed, threads)
    cap = largest_empty_cap(dirs, method=method, k=k, seed=seed, threads=threads)
    common: Dict[str, Any] = dict(
        eps_hole=eps_hole,
        eps_cover=eps_cover,
        tol=tol,
        dim=cloud.dim,
        n_points=cloud.n,
        n_classes=len(dirs),
        pair_budget=pair_budget,
        seed=seed,
        cap=cap,
    )

    sampled_pairs = pair_budget is not None and pair_budget < cloud.n * (cloud.n - 1) // 2
    if cap.radius >= eps_hole:
        try:
            graph = extract_graph(cloud, cap.center, tol, hole=eps_hole, threads=threads)
            logger.info(f"Cloud '{cloud.label}': class_i (cap {cap.radius!r}, L = {graph.lipschitz_constant!r})")
            return Classification(verdict=Verdict.CLASS_I, graph=graph, **common)
        except (NotAGraph, GraphExtractionFailed) as e:
            if not sampled_pairs:
                raise GraphExtractionFailed(f"empty cap of radius {cap.radius!r} did not yield a graph: {e}") from e
            logger.warning(f"Sampled pairs missed a direction inside the cap ({e}); testing coverage instead")

    try:
        certificate = eps_cover_test(dirs, eps_cover, net_density, threads=threads)
    except NetTooLarge as e:
        logger.warning(f"Cover test skipped: {e}")
        note = RefinementNote(
            cap_radius=cap.radius,
            message=f"No hole of radius {eps_hole!r}; the eps_cover net is too large to certify a cover",
        )
        return Classification(verdict=Verdict.CLASS_II, note=note, **common)

    if certificate.covered:
        logger.info(f"Cloud '{cloud.label}': class_iii at eps_cover {eps_cover!r}")
        return Classification(verdict=Verdict.CLASS_III, certificate=certificate, **common)

    note = RefinementNote(
        cap_radius=cap.radius,
        coverage_fraction=certificate.covered_fraction,
        message=(
            f"Largest hole {cap.radius!r} < eps_hole and {certificate.covered_fraction:.4f} of the net covered; "
            "refine the sample to separate the regimes"
        ),
    )
    logger.info(f"Cloud '{cloud.label}': class_ii (cap {cap.radius!r})")
    return Classification(verdict=Verdict.CLASS_II, certificate=certificate, note=note, **common)

