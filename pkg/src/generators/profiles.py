"""
Function profiles sampled on nested dyadic grids.

A profile maps a depth k to samples (xs, ys) of a function on the grid of
2^k + 1 points of its domain. Grids of successive depths are nested and the
shared points carry bit-identical values, so secant statistics are monotone in
the depth.
"""

import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

MAX_DEPTH = 24
TAIL_TOL = 1e-12

Samples = Tuple[np.ndarray, np.ndarray]


class NoParams(BaseModel):
    model_config = {"extra": "forbid"}


class WeierstrassParams(BaseModel):
    """Parameters of W(x) = sum_n a^n cos(b^n pi x)."""

    model_config = {"extra": "forbid"}

    a: float = Field(0.5, gt=0.0, lt=1.0)
    b: int = Field(3, ge=3)

    @field_validator("b")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"b must be odd, got {value}")
        return value

    @model_validator(mode="after")
    def _rough(self) -> "WeierstrassParams":
        if self.a * self.b <= 1.0:
            raise ValueError(f"a*b must exceed 1, got {self.a * self.b!r}")
        return self


def check_depth(depth: int) -> int:
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must lie in [0, {MAX_DEPTH}], got {depth}")
    return int(depth)


def dyadic_grid(depth: int, low: float = 0.0, high: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Integer indices i and points low + (high - low)·i/2^depth."""
    i = np.arange(2**depth + 1, dtype=np.int64)
    return i, low + (high - low) * (i / float(2**depth))


def weierstrass_terms(a: float) -> int:
    """Smallest N with a^N at most TAIL_TOL·(1 - a); the tail after term N is then below TAIL_TOL."""
    return int(math.ceil(math.log(TAIL_TOL * (1.0 - a)) / math.log(a)))


def weierstrass_values(i: np.ndarray, depth: int, a: float, b: int) -> np.ndarray:
    """
    W(i/2^depth) for integer i.

    b^n·i is reduced modulo 2^(depth+1), the period of cos(pi·m/2^depth) in m,
    before the cosine is taken.
    """
    modulus = 2 ** (depth + 1)
    total = np.zeros(len(i))
    for n in range(weierstrass_terms(a) + 1):
        phase = (pow(b, n, modulus) * i) % modulus
        total += a**n * np.cos(np.pi * phase / 2**depth)
    return total


def cantor_values(p: np.ndarray, q: int) -> np.ndarray:
    """Cantor staircase at p/q for integers 0 <= p <= q, from the ternary digits of p/q."""
    p = np.array(p, dtype=np.int64)
    values = np.zeros(len(p))
    endpoint = p == q
    active = ~endpoint
    weight = 0.5
    for _ in range(60):
        if not np.any(active):
            break
        p = p * 3
        digit = p // q
        p = p % q
        values += np.where(active & (digit >= 1), weight, 0.0)
        active &= digit != 1
        weight /= 2.0
    values[endpoint] = 1.0
    return values


def identity(depth: int, params: NoParams) -> Samples:
    _, xs = dyadic_grid(check_depth(depth))
    return xs, xs.copy()


def absolute_value(depth: int, params: NoParams) -> Samples:
    _, xs = dyadic_grid(check_depth(depth), -1.0, 1.0)
    return xs, np.abs(xs)


def weierstrass(depth: int, params: WeierstrassParams) -> Samples:
    i, xs = dyadic_grid(check_depth(depth))
    return xs, weierstrass_values(i, depth, params.a, params.b)


def cantor(depth: int, params: NoParams) -> Samples:
    i, xs = dyadic_grid(check_depth(depth))
    return xs, cantor_values(i, 2**depth)
