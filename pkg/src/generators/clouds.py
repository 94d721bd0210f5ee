"""
Fixture point clouds.

Every generator takes its validated parameter model and a seed and returns a
PointCloud. Randomness comes from numpy's PCG64 bit generator, so a generator spec and a
seed determine the cloud bytes.
"""

import math

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..core.cloud import PointCloud
from .profiles import WeierstrassParams, cantor_values, check_depth, dyadic_grid, weierstrass_values

LIPSCHITZ_MARGIN = 1e-6


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator."""
    return np.random.Generator(np.random.PCG64(seed))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


class LipschitzRandomParams(BaseModel):
    model_config = {"extra": "forbid"}

    C: float = Field(1.0, gt=0.0)
    n: int = Field(100, ge=2)
    x_min: float = 0.0
    x_max: float = 1.0

    @model_validator(mode="after")
    def _domain(self) -> "LipschitzRandomParams":
        if self.x_max <= self.x_min:
            raise ValueError(f"x_max must exceed x_min, got [{self.x_min}, {self.x_max}]")
        return self


class WeierstrassCloudParams(WeierstrassParams):
    depth: int = Field(10, ge=1, le=24)


class AbsoluteValueParams(BaseModel):
    model_config = {"extra": "forbid"}

    n: int = Field(201, ge=2)
    half_width: float = Field(1.0, gt=0.0)


class LineParams(BaseModel):
    model_config = {"extra": "forbid"}

    n: int = Field(10, ge=2)
    dim: int = Field(2, ge=2)
    spacing: float = Field(1.0, gt=0.0)


class CircleParams(BaseModel):
    model_config = {"extra": "forbid"}

    n: int = Field(8, ge=2)
    radius: float = Field(1.0, gt=0.0)


class CollinearPlusPointParams(BaseModel):
    model_config = {"extra": "forbid"}

    k: int = Field(10, ge=2)
    dim: int = Field(2, ge=2)


class RandomBallParams(BaseModel):
    model_config = {"extra": "forbid"}

    n: int = Field(100, ge=2)
    dim: int = Field(3, ge=2)
    radius: float = Field(1.0, gt=0.0)


class CantorGraphParams(BaseModel):
    model_config = {"extra": "forbid"}

    depth: int = Field(6, ge=1, le=12)


class PlaneSliceParams(BaseModel):
    model_config = {"extra": "forbid"}

    grid: int = Field(11, ge=2)
    wx: float = 0.5
    wy: float = 0.5
    extent: float = Field(1.0, gt=0.0)


def lipschitz_random(params: LipschitzRandomParams, seed: int) -> PointCloud:
    """
    Graph samples with every secant slope strictly inside [-C, C].

    Increments satisfy |dy| <= (1 - 1e-6)·C·dx, so the bound holds for every
    pair by telescoping.
    """
    rng = make_rng(seed)
    spacings = 0.5 + rng.random(params.n - 1)
    ticks = np.concatenate([[0.0], np.cumsum(spacings)]) / np.sum(spacings)
    xs = params.x_min + (params.x_max - params.x_min) * ticks
    u = rng.uniform(-1.0, 1.0, params.n - 1) * (1.0 - LIPSCHITZ_MARGIN)
    ys = np.concatenate([[0.0], np.cumsum(params.C * u * np.diff(xs))])
    return PointCloud.from_points(np.column_stack([xs, ys]), label=f"lipschitz_random(C={params.C!r})")


def weierstrass(params: WeierstrassCloudParams, seed: int) -> PointCloud:
    i, xs = dyadic_grid(check_depth(params.depth))
    ys = weierstrass_values(i, params.depth, params.a, params.b)
    return PointCloud.from_points(np.column_stack([xs, ys]), label=f"weierstrass(a={params.a!r},b={params.b})")


def absolute_value(params: AbsoluteValueParams, seed: int) -> PointCloud:
    xs = np.linspace(-params.half_width, params.half_width, params.n)
    return PointCloud.from_points(np.column_stack([xs, np.abs(xs)]), label="absolute_value")


def line(params: LineParams, seed: int) -> PointCloud:
    rng = make_rng(seed)
    origin = rng.normal(size=params.dim)
    direction = _unit(rng.normal(size=params.dim))
    t = np.arange(params.n) * params.spacing
    return PointCloud.from_points(origin + t[:, None] * direction, label="line")


def circle(params: CircleParams, seed: int) -> PointCloud:
    theta = 2.0 * math.pi * np.arange(params.n) / params.n
    points = params.radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return PointCloud.from_points(points, label=f"circle({params.n})")


def collinear_plus_point(params: CollinearPlusPointParams, seed: int) -> PointCloud:
    """k points on a seeded line followed by one point off it (index k)."""
    rng = make_rng(seed)
    origin = rng.normal(size=params.dim)
    direction = _unit(rng.normal(size=params.dim))
    normal = rng.normal(size=params.dim)
    normal = _unit(normal - (normal @ direction) * direction)
    t = np.arange(params.k, dtype=float)
    on_line = origin + t[:, None] * direction
    extra = origin + normal + 0.37 * direction
    return PointCloud.from_points(np.vstack([on_line, extra]), label=f"collinear_plus_point({params.k})")


def random_ball(params: RandomBallParams, seed: int) -> PointCloud:
    rng = make_rng(seed)
    gauss = rng.normal(size=(params.n, params.dim))
    radii = params.radius * rng.random(params.n) ** (1.0 / params.dim)
    points = gauss / np.linalg.norm(gauss, axis=1)[:, None] * radii[:, None]
    return PointCloud.from_points(points, label=f"random_ball({params.n},{params.dim})")


def cantor_graph(params: CantorGraphParams, seed: int) -> PointCloud:
    """Cantor staircase on the triadic grid i/3^depth."""
    q = 3**params.depth
    i = np.arange(q + 1, dtype=np.int64)
    points = np.column_stack([i / float(q), cantor_values(i, q)])
    return PointCloud.from_points(points, label=f"cantor_graph({params.depth})")


def plane_slice(params: PlaneSliceParams, seed: int) -> PointCloud:
    """Grid samples of the plane z = wx·x + wy·y over [-extent, extent]^2."""
    axis = np.linspace(-params.extent, params.extent, params.grid)
    x, y = np.meshgrid(axis, axis, indexing="ij")
    x, y = x.reshape(-1), y.reshape(-1)
    points = np.column_stack([x, y, params.wx * x + params.wy * y])
    return PointCloud.from_points(points, label="plane_slice")
