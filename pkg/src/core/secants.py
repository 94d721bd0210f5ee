"""
Secant slopes of one-variable samples.

The slope chart identifies RP^1 minus the vertical class with the real line
(the direction (1, s) has slope s), so the secant slopes of samples of f are
the direction set of its graph. This module computes slope sets, exact fill
radii of [-M, M] and refinement studies over nested dyadic grids.
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from .. import config
from ..errors import BadTolerance, EmptyInput, LengthMismatch, TooFewPoints, UnsortedDomain
from ..registry import get_profile
from ..utils.logging import get_logger, log_duration
from ..utils.parallel import map_blocks, split_blocks
from .cloud import PointCloud
from .direction_set import enumerate_pairs

logger = get_logger(__name__)


class SlopeSet(BaseModel):
    """Sorted secant slopes of n samples over the domain [a, b]."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    slopes: np.ndarray
    n_samples: int
    domain: Tuple[float, float]
    deduplicated: bool = False

    def __len__(self) -> int:
        return int(len(self.slopes))


class FillVerdict(BaseModel):
    """Whether [-M, M] lies within eps of the slope set."""

    filled: bool
    fill_eps: float
    M: float
    eps: float
    witness: Optional[float] = None


class SlopeHull(BaseModel):
    """Convex hull of a slope set and its largest internal gap."""

    low: float
    high: float
    max_gap: float
    gap_at: Optional[float] = None


class RefinementRow(BaseModel):
    """One depth of a refinement study."""

    depth: int
    n: int
    max_abs_slope: float
    fill_eps: float
    M: float
    eps: float
    filled_bound: float

    def to_record(self) -> Dict[str, Any]:
        return self.model_dump()


def _check_samples(xs: Any, ys: Any) -> Tuple[np.ndarray, np.ndarray]:
    xs = np.asarray(xs, dtype=float).reshape(-1)
    ys = np.asarray(ys, dtype=float).reshape(-1)
    if len(xs) != len(ys):
        raise LengthMismatch(f"{len(xs)} abscissae for {len(ys)} values")
    if len(xs) < 2:
        raise TooFewPoints(f"need at least 2 samples, got {len(xs)}")
    steps = np.diff(xs)
    if np.any(steps <= 0):
        bad = int(np.flatnonzero(steps <= 0)[0])
        raise UnsortedDomain(
            f"abscissae must be strictly increasing: x[{bad}] = {xs[bad]!r}, x[{bad + 1}] = {xs[bad + 1]!r}"
        )
    return xs, ys


def secant_slopes(xs: Sequence[float], ys: Sequence[float], dedup: bool = False, threads: Optional[int] = None) -> SlopeSet:
    """
    All pairwise secant slopes (y_j - y_i)/(x_j - x_i), sorted.

    Raises:
        LengthMismatch: If xs and ys differ in length.
        TooFewPoints: If fewer than two samples are given.
        UnsortedDomain: If xs is not strictly increasing.
    """
    xs, ys = _check_samples(xs, ys)
    n = len(xs)
    rows = max(1, config.BLOCK_SIZE // n)
    cols = np.arange(n)

    def work(start: int, stop: int) -> np.ndarray:
        upper = cols[None, :] > np.arange(start, stop)[:, None]
        dx = xs[None, :] - xs[start:stop, None]
        dy = ys[None, :] - ys[start:stop, None]
        return dy[upper] / dx[upper]

    with log_duration(logger, f"secant slopes of {n} samples"):
        slopes = np.concatenate(map_blocks(work, split_blocks(n, rows), threads))
    slopes = np.unique(slopes) if dedup else np.sort(slopes)
    logger.debug(f"{n} samples -> {len(slopes)} secant slopes")
    return SlopeSet(slopes=slopes, n_samples=n, domain=(float(xs[0]), float(xs[-1])), deduplicated=dedup)


def _sorted_slopes(s: Any) -> np.ndarray:
    slopes = s.slopes if isinstance(s, SlopeSet) else np.sort(np.asarray(s, dtype=float).reshape(-1))
    if len(slopes) == 0:
        raise EmptyInput("slope set is empty")
    return slopes


def _fill(slopes: np.ndarray, M: float) -> Tuple[float, float]:
    mids = (slopes[:-1] + slopes[1:]) / 2.0
    mids = mids[(mids > -M) & (mids < M)]
    candidates = np.concatenate([[-M], mids, [M]])
    right = np.clip(np.searchsorted(slopes, candidates), 0, len(slopes) - 1)
    left = np.clip(right - 1, 0, len(slopes) - 1)
    distance = np.minimum(np.abs(candidates - slopes[left]), np.abs(candidates - slopes[right]))
    k = int(np.argmax(distance))
    return float(distance[k]), float(candidates[k])


def fill_radius(s: Any, M: float) -> float:
    """
    Smallest eps for which every point of [-M, M] is within eps of a slope.

    The farthest point of [-M, M] from a finite sorted set is an endpoint or
    the midpoint of two consecutive slopes, so the sweep is exact.
    """
    if M <= 0:
        raise BadTolerance(f"M must be positive, got {M}")
    return _fill(_sorted_slopes(s), M)[0]


def slope_fill_test(s: Any, M: float, eps: float) -> FillVerdict:
    """
    Test whether [-M, M] is filled by the slopes at resolution eps.

    The witness of a gap is the point of [-M, M] farthest from every slope
    (the smallest such point on ties).
    """
    if M <= 0 or eps <= 0:
        raise BadTolerance(f"M and eps must be positive, got M={M}, eps={eps}")
    fill_eps, farthest = _fill(_sorted_slopes(s), M)
    if fill_eps <= eps:
        return FillVerdict(filled=True, fill_eps=fill_eps, M=M, eps=eps)
    return FillVerdict(filled=False, fill_eps=fill_eps, M=M, eps=eps, witness=farthest)


def slope_connected_hull(s: Any) -> SlopeHull:
    """
    Hull [min, max] of the slopes and the largest gap between consecutive slopes.

    For a continuous function the limiting slope set is an interval, so the
    largest gap is a connectedness defect that shrinks under refinement.
    """
    slopes = _sorted_slopes(s)
    if len(slopes) == 1:
        return SlopeHull(low=float(slopes[0]), high=float(slopes[0]), max_gap=0.0)
    gaps = np.diff(slopes)
    k = int(np.argmax(gaps))
    return SlopeHull(
        low=float(slopes[0]),
        high=float(slopes[-1]),
        max_gap=float(gaps[k]),
        gap_at=float((slopes[k] + slopes[k + 1]) / 2.0),
    )


def symmetric_filled_bound(s: Any, eps: float, M: float) -> float:
    """Largest m <= M such that [-m, m] lies within eps of the slopes (0 if 0 itself does not)."""
    if M <= 0 or eps <= 0:
        raise BadTolerance(f"M and eps must be positive, got M={M}, eps={eps}")
    slopes = _sorted_slopes(s)
    k = int(np.searchsorted(slopes, 0.0))
    near = [i for i in (k - 1, k) if 0 <= i < len(slopes) and abs(slopes[i]) <= eps]
    if not near:
        return 0.0
    start = near[0]
    breaks = np.flatnonzero(np.diff(slopes) > 2.0 * eps)
    before = breaks[breaks < start]
    after = breaks[breaks >= start]
    lo = int(before[-1]) + 1 if before.size else 0
    hi = int(after[0]) if after.size else len(slopes) - 1
    reach = min(-(slopes[lo] - eps), slopes[hi] + eps, M)
    return float(max(reach, 0.0))


def slope_to_angle(s: float) -> float:
    """RP^1 angle in [0, pi) of the line with slope s; infinite slopes map to pi/2."""
    if math.isinf(s):
        return math.pi / 2
    theta = math.atan(s)
    return theta + math.pi if theta < 0 else theta + 0.0


def angle_to_slope(theta: float) -> float:
    """Slope of the line at RP^1 angle theta; the vertical class has slope +inf."""
    theta = math.fmod(theta, math.pi)
    if theta < 0:
        theta += math.pi
    if theta == math.pi / 2:
        return math.inf
    return math.tan(theta)


def missed_vertical(xs: Sequence[float], ys: Sequence[float], threads: Optional[int] = None) -> bool:
    """
    True if no pair direction of the samples is the vertical class.

    Raises:
        UnsortedDomain: If xs is not strictly increasing.
    """
    xs, ys = _check_samples(xs, ys)
    cloud = PointCloud.from_points(np.column_stack([xs, ys]), label="samples")
    pairs = enumerate_pairs(cloud, threads=threads)
    return bool(np.all(pairs.directions[:, 0] != 0.0))


def refinement_study(
    fgen: str,
    params: Optional[Dict[str, Any]] = None,
    depths: Sequence[int] = (4, 5, 6, 7, 8),
    M: float = 10.0,
    eps: float = 0.1,
    threads: Optional[int] = None,
) -> List[RefinementRow]:
    """
    Secant statistics of a function profile over nested dyadic grids.

    Args:
        fgen: Registered function profile name.
        params: Profile parameters.
        depths: Grid depths k (grid of 2^k + 1 points); sorted and deduplicated.
        M: Half-width of the slope window that must be filled.
        eps: Resolution used for filled_bound.
        threads: Worker threads.

    Raises:
        UnknownGenerator: If fgen is not a registered profile.
        BadSpec: If the parameters do not validate.
    """
    profile = get_profile(fgen)
    if M <= 0 or eps <= 0:
        raise BadTolerance(f"M and eps must be positive, got M={M}, eps={eps}")
    depths = sorted(set(int(d) for d in depths))
    if not depths or depths[0] < 1:
        raise BadTolerance(f"depths must be positive integers, got {depths}")

    rows: List[RefinementRow] = []
    for depth in depths:
        xs, ys = profile(depth, **(params or {}))
        s = secant_slopes(xs, ys, threads=threads)
        row = RefinementRow(
            depth=depth,
            n=len(xs),
            max_abs_slope=float(max(abs(s.slopes[0]), abs(s.slopes[-1]))),
            fill_eps=fill_radius(s, M),
            M=M,
            eps=eps,
            filled_bound=symmetric_filled_bound(s, eps, M),
        )
        logger.info(f"{fgen} depth {depth}: n={row.n}, max |slope| {row.max_abs_slope!r}, fill eps {row.fill_eps!r}")
        rows.append(row)
    return rows
