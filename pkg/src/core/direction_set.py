"""
Direction set enumeration.

Enumerates the oriented direction set of a cloud (both orientations of every
examined pair) and its projective quotient, deduplicated at a tolerance, and
provides the finite counting checks: collinearity and the number of distinct
directions.
"""

import bisect
import math
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, field_validator

from ..config import CANONICAL_TOL, DEFAULT_TOL, DELTA_MIN
from ..errors import BadTolerance, InputValidationError, MalformedInput, TooFewPoints
from ..utils.logging import get_logger, log_duration
from ..utils.parallel import map_blocks, split_blocks
from .cloud import PointCloud
from .geometry import (
    Angle,
    ProjectiveDirection,
    canonicalize_rows,
    line_angles,
    nearest_distances,
    pair_direction,
    projective_canonical,
    row_norms,
    rp1_angles,
)

logger = get_logger(__name__)


class PairDirections(NamedTuple):
    """Directions of the examined pairs, one orientation (x_i -> x_j, i < j)."""

    directions: np.ndarray
    i: np.ndarray
    j: np.ndarray
    pairs_examined: int
    skipped_coincident: int


class DirectionSet(BaseModel):
    """Projective direction set D(E) of a cloud, with optional oriented set."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    dim: int
    n_points: int
    projective: np.ndarray
    oriented: Optional[np.ndarray] = None
    pair_count_examined: int
    skipped_coincident: int = 0
    dedup_tolerance: float = DEFAULT_TOL
    pair_budget: Optional[int] = None
    seed: int = 0
    label: str = ""

    @field_validator("projective", "oriented", mode="before")
    @classmethod
    def _as_array(cls, value: Any) -> Any:
        if value is None:
            return None
        arr = np.array(value, dtype=float, ndmin=2)
        arr.setflags(write=False)
        return arr

    def __len__(self) -> int:
        return int(len(self.projective))

    def classes(self) -> List[ProjectiveDirection]:
        """The projective classes as ProjectiveDirection records."""
        return [ProjectiveDirection(rep=row) for row in self.projective]

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "dim": self.dim,
            "n_points": self.n_points,
            "label": self.label,
            "pairs_examined": self.pair_count_examined,
            "skipped_coincident": self.skipped_coincident,
            "tol": self.dedup_tolerance,
            "pair_budget": self.pair_budget,
            "seed": self.seed,
            "n_classes": len(self),
            "projective": self.projective.tolist(),
            "oriented_included": self.oriented is not None,
        }
        if self.oriented is not None:
            record["oriented"] = self.oriented.tolist()
        return record

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "DirectionSet":
        """
        Rebuild a direction set from its JSON record.

        Raises:
            MalformedInput: If required keys are missing or malformed.
        """
        try:
            dim = int(record["dim"])
            projective = np.array(record["projective"], dtype=float).reshape(-1, dim)
            oriented = record.get("oriented")
            return cls(
                dim=dim,
                n_points=int(record["n_points"]),
                projective=projective,
                oriented=None if oriented is None else np.array(oriented, dtype=float).reshape(-1, dim),
                pair_count_examined=int(record["pairs_examined"]),
                skipped_coincident=int(record.get("skipped_coincident", 0)),
                dedup_tolerance=float(record.get("tol", DEFAULT_TOL)),
                pair_budget=record.get("pair_budget"),
                seed=int(record.get("seed", 0)),
                label=str(record.get("label", "")),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedInput(f"Not a direction set record: {e}") from e


class CollinearityVerdict(BaseModel):
    """Outcome of collinearity_test."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    collinear: bool
    point: Optional[List[float]] = None
    direction: Optional[ProjectiveDirection] = None
    witness: Optional[Tuple[int, int, int]] = None


def _require_points(cloud: PointCloud, minimum: int = 2) -> None:
    if cloud.n < minimum:
        raise TooFewPoints(f"need at least {minimum} points, cloud '{cloud.label}' has {cloud.n}")


def _row_starts(n: int) -> np.ndarray:
    rows = np.arange(n, dtype=np.int64)
    return rows * (n - 1) - rows * (rows - 1) // 2


def pair_indices(n: int, pair_budget: Optional[int] = None, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Deterministic pair index set (i < j).

    Exhaustive row-major order unless pair_budget is below the number of
    unordered pairs, in which case pair_budget pairs are drawn uniformly without
    replacement (numpy PCG64 seeded by seed) and returned in row-major order.
    """
    total = n * (n - 1) // 2
    if pair_budget is None or pair_budget >= total:
        i, j = np.triu_indices(n, k=1)
        return i.astype(np.int64), j.astype(np.int64)
    if pair_budget < 1:
        raise InputValidationError(f"pair_budget must be positive, got {pair_budget}")

    rng = np.random.Generator(np.random.PCG64(seed))
    linear = np.sort(rng.choice(total, size=pair_budget, replace=False)).astype(np.int64)
    starts = _row_starts(n)
    i = np.searchsorted(starts, linear, side="right") - 1
    j = linear - starts[i] + i + 1
    logger.info(f"Sampled {pair_budget} of {total} pairs (seed {seed})")
    return i, j


def enumerate_pairs(
    cloud: PointCloud,
    pair_budget: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
    delta_min: float = DELTA_MIN,
) -> PairDirections:
    """Unit directions x_i -> x_j of the examined pairs, skipping coincident pairs."""
    _require_points(cloud)
    points = cloud.points
    i, j = pair_indices(cloud.n, pair_budget, seed)

    def work(start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
        diff = points[j[start:stop]] - points[i[start:stop]]
        norms = row_norms(diff)
        keep = norms > delta_min
        return diff[keep] / norms[keep, None], keep

    parts = map_blocks(work, split_blocks(len(i)), threads)
    directions = np.concatenate([p[0] for p in parts]) if parts else np.empty((0, cloud.dim))
    keep = np.concatenate([p[1] for p in parts]) if parts else np.empty(0, dtype=bool)
    skipped = int(len(keep) - keep.sum())
    if skipped:
        logger.warning(f"Skipped {skipped} coincident pair(s) in cloud '{cloud.label}'")
    return PairDirections(directions, i[keep], j[keep], int(len(i)), skipped)


def oriented_directions(
    cloud: PointCloud,
    pair_budget: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> np.ndarray:
    """
    Oriented direction set: both orientations of every examined pair.

    Returns:
        (2m, d) array; row 2k is the direction of pair k, row 2k+1 its negation.

    Raises:
        TooFewPoints: If the cloud has fewer than two points.
    """
    pairs = enumerate_pairs(cloud, pair_budget, seed, threads)
    out = np.empty((2 * len(pairs.directions), cloud.dim))
    out[0::2] = pairs.directions
    out[1::2] = -pairs.directions
    return out


def _lex_order(reps: np.ndarray) -> np.ndarray:
    return np.lexsort(reps.T[::-1])


def merge_projective(reps: np.ndarray, tol: Angle = DEFAULT_TOL) -> np.ndarray:
    """
    Canonicalize, sort and tolerance-merge projective representatives.

    d = 2: single-link merge along the sorted RP^1 angles, closing the circle.
    d > 2: greedy sweep over lexicographically sorted reps; a rep joins the
    first earlier anchor within tol (anchors are searched in a first-coordinate
    window that provably contains every such anchor), otherwise it becomes an
    anchor. The output is sorted lexicographically.
    """
    if tol < 0:
        raise BadTolerance(f"tol must be >= 0, got {tol}")
    reps = canonicalize_rows(reps)
    if len(reps) == 0:
        return reps

    if reps.shape[1] == 2:
        angles = rp1_angles(reps)
        order = np.argsort(angles, kind="stable")
        angles = angles[order]
        starts = np.concatenate([[True], np.diff(angles) > tol])
        merged = reps[order][starts]
        if len(merged) > 1 and angles[0] + math.pi - angles[-1] <= tol:
            merged = merged[:-1]
    else:
        unique = np.unique(reps, axis=0)
        window = 2.0 * tol + 4.0 * CANONICAL_TOL
        anchors: List[int] = []
        firsts: List[float] = []
        for k, row in enumerate(unique):
            lo = bisect.bisect_left(firsts, row[0] - window)
            if lo < len(anchors):
                near = line_angles(unique[anchors[lo:]], row)
                if np.any(near <= tol):
                    continue
            anchors.append(k)
            firsts.append(float(row[0]))
        merged = unique[anchors]

    return merged[_lex_order(merged)]


def unoriented_directions(
    cloud: PointCloud,
    tol: Angle = DEFAULT_TOL,
    pair_budget: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
    include_oriented: bool = False,
) -> DirectionSet:
    """
    Projective direction set D(E): canonicalized, sorted, tolerance-merged.

    Raises:
        TooFewPoints: If the cloud has fewer than two points.
    """
    with log_duration(logger, f"direction set of {cloud.n} points"):
        pairs = enumerate_pairs(cloud, pair_budget, seed, threads)
        projective = merge_projective(pairs.directions, tol)
    oriented = None
    if include_oriented:
        oriented = np.empty((2 * len(pairs.directions), cloud.dim))
        oriented[0::2] = pairs.directions
        oriented[1::2] = -pairs.directions

    logger.info(
        f"Cloud '{cloud.label}': {pairs.pairs_examined} pairs -> {len(projective)} projective classes (tol {tol})"
    )
    return DirectionSet(
        dim=cloud.dim,
        n_points=cloud.n,
        projective=projective,
        oriented=oriented,
        pair_count_examined=pairs.pairs_examined,
        skipped_coincident=pairs.skipped_coincident,
        dedup_tolerance=tol,
        pair_budget=pair_budget,
        seed=seed,
        label=cloud.label,
    )


def count_distinct_directions(
    cloud: PointCloud,
    tol: Angle = DEFAULT_TOL,
    pair_budget: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> int:
    """Number of projective classes of the cloud at tolerance tol."""
    return len(unoriented_directions(cloud, tol, pair_budget, seed, threads))


def collinearity_test(cloud: PointCloud, tol: Angle = DEFAULT_TOL, threads: Optional[int] = None) -> CollinearityVerdict:
    """
    Decide whether every pair direction lies within tol of one projective class.

    The reference class is the direction from point 0 to the first point not
    coincident with it. When some pair (a, b) deviates, the witness is a, b and
    the first of (0, reference point) not already among them.

    Raises:
        TooFewPoints: If fewer than two distinct points exist.
    """
    _require_points(cloud)
    points = cloud.points
    offsets = row_norms(points - points[0])
    far = np.flatnonzero(offsets > DELTA_MIN)
    if far.size == 0:
        raise TooFewPoints(f"all points of cloud '{cloud.label}' coincide")
    ref_index = int(far[0])
    reference = projective_canonical(pair_direction(points[0], points[ref_index]))

    pairs = enumerate_pairs(cloud, threads=threads)

    def work(start: int, stop: int) -> Optional[int]:
        bad = np.flatnonzero(line_angles(pairs.directions[start:stop], reference.rep) > tol)
        return int(bad[0]) + start if bad.size else None

    hits = [h for h in map_blocks(work, split_blocks(len(pairs.directions)), threads) if h is not None]
    if not hits:
        return CollinearityVerdict(collinear=True, point=points[0].tolist(), direction=reference)

    a, b = int(pairs.i[hits[0]]), int(pairs.j[hits[0]])
    third = 0 if 0 not in (a, b) else ref_index
    if third in (a, b):
        third = next(k for k in range(cloud.n) if k not in (a, b))
    witness = tuple(sorted((a, b, third)))
    logger.debug(f"Cloud '{cloud.label}' is not collinear, witness {witness}")
    return CollinearityVerdict(collinear=False, witness=witness)


def match_projective_sets(a: np.ndarray, b: np.ndarray, tol: Angle = 1e-9) -> bool:
    """True if every class of a has a partner in b within tol and vice versa."""
    a = np.array(a, dtype=float, ndmin=2)
    b = np.array(b, dtype=float, ndmin=2)
    if len(a) != len(b) or a.shape[1] != b.shape[1]:
        return False
    if len(a) == 0:
        return True
    forward, _ = nearest_distances(a, b)
    backward, _ = nearest_distances(b, a)
    return bool(np.all(forward <= tol) and np.all(backward <= tol))
