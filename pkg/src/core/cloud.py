"""
Point cloud record.

A PointCloud is the finite sample of a set E in R^d that every other module
works on. Points are held as an (n, d) float array.
"""

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from ..errors import InputValidationError


class PointCloud(BaseModel):
    """Finite ordered list of d-dimensional points (d >= 2)."""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    points: np.ndarray
    label: str = ""
    allow_duplicates: bool = False

    @field_validator("points", mode="before")
    @classmethod
    def _validate_points(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"points must be a 2-D array, got {arr.ndim}-D")
        if arr.shape[1] < 2:
            raise ValueError(f"dimension must be >= 2, got {arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(arr), axis=1))[0])
            raise ValueError(f"point {bad} has a non-finite coordinate")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_duplicates(self) -> "PointCloud":
        if not self.allow_duplicates and len(self.points) > 1:
            unique = np.unique(self.points, axis=0)
            if len(unique) < len(self.points):
                raise ValueError(f"{len(self.points) - len(unique)} exact duplicate point(s)")
        return self

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @classmethod
    def from_points(cls, points: Any, label: str = "", allow_duplicates: bool = False) -> "PointCloud":
        """
        Build a cloud, converting validation failures into toolkit errors.

        Raises:
            InputValidationError: If the points are malformed.
        """
        try:
            return cls(points=points, label=label, allow_duplicates=allow_duplicates)
        except ValidationError as e:
            messages = "; ".join(err["msg"] for err in e.errors())
            raise InputValidationError(f"Invalid point cloud '{label}': {messages}") from e

    def with_points(self, points: np.ndarray, label: Optional[str] = None) -> "PointCloud":
        """Return a cloud with the same flags and new coordinates."""
        return PointCloud.from_points(
            points,
            label=self.label if label is None else label,
            allow_duplicates=self.allow_duplicates,
        )
