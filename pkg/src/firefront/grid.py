"""Rectangular grids, scalar fields on them, and polygonal boundaries.

Cells are stored row-major with ``y`` varying slowest, so the flat index of
cell ``(i, j)`` (column ``i`` along x, row ``j`` along y) is ``j * nx + i``.
The extents name the first and last cell *centers*; cell size along x is
``(x_max - x_min) / (nx - 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise DataError("nx and ny must be integers")
        if self.nx < 2 or self.ny < 2:
            raise DataError(f"grid needs at least 2 cells per axis, got {self.nx}x{self.ny}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise DataError("grid extents must satisfy x_min < x_max and y_min < y_max")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        for name in ("x_min", "x_max", "y_min", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def n(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(ny, nx)`` of the 2-D view."""
        return (self.ny, self.nx)

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def h(self) -> float:
        """Largest cell size over both axes."""
        return max(self.hx, self.hy)

    @property
    def x(self) -> np.ndarray:
        i = np.arange(self.nx, dtype=float)
        return self.x_min + (self.x_max - self.x_min) * i / (self.nx - 1)

    @property
    def y(self) -> np.ndarray:
        j = np.arange(self.ny, dtype=float)
        return self.y_min + (self.y_max - self.y_min) * j / (self.ny - 1)

    def centers(self) -> np.ndarray:
        """Cell-center coordinates as an ``(N, 2)`` array in flat order."""
        xx, yy = np.meshgrid(self.x, self.y)
        return np.column_stack([xx.ravel(), yy.ravel()])

    def contains_extent(self, other: "GridSpec", rtol: float = 1e-9) -> bool:
        tol = rtol * max(self.x_max - self.x_min, self.y_max - self.y_min)
        return (other.x_min >= self.x_min - tol and other.x_max <= self.x_max + tol
                and other.y_min >= self.y_min - tol and other.y_max <= self.y_max + tol)

    def to_dict(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "x_min": self.x_min, "x_max": self.x_max,
                "y_min": self.y_min, "y_max": self.y_max}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        keys = {"nx", "ny", "x_min", "x_max", "y_min", "y_max"}
        if set(d) != keys:
            raise DataError(f"grid spec must have exactly the keys {sorted(keys)}, got {sorted(d)}")
        return cls(**d)


def check_same_grid(*grids: GridSpec) -> None:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise DataError(f"grid mismatch: {first} vs {g}")


@dataclass
class ScalarField:
    """Values on a :class:`GridSpec`, optionally with an observation mask.

    ``mask[k]`` is True when cell ``k`` is observed. Unobserved cells hold NaN
    so that any accidental numeric use shows up immediately.
    """

    grid: GridSpec
    values: np.ndarray
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size != self.grid.n:
            raise DataError(f"field has {values.size} values, grid needs {self.grid.n}")
        if self.mask is not None:
            mask = np.asarray(self.mask, dtype=bool).ravel()
            if mask.size != self.grid.n:
                raise DataError("mask length does not match grid")
            if mask.all():
                mask = None
            else:
                values[~mask] = np.nan
            self.mask = mask
        self.values = values

    @property
    def observed(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.grid.n, dtype=bool)
        return self.mask

    @property
    def fully_observed(self) -> bool:
        return self.mask is None

    def as_2d(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(),
                           None if self.mask is None else self.mask.copy())

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "ScalarField":
        pts = grid.centers()
        return cls(grid, func(pts[:, 0], pts[:, 1]))


@dataclass
class BoundarySet:
    """Closed polygonal rings at one time stamp (hours since series start)."""

    rings: list = field(default_factory=list)
    timestamp: float = 0.0

    def __post_init__(self):
        rings = []
        for k, ring in enumerate(self.rings):
            arr = np.asarray(ring, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise DataError(f"ring {k} must be a sequence of (x, y) pairs")
            if len(arr) and not np.array_equal(arr[0], arr[-1]):
                arr = np.vstack([arr, arr[:1]])
            if len(arr) < 4:
                raise DataError(f"ring {k} has fewer than 3 distinct vertices")
            rings.append(arr)
        self.rings = rings

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end points of every ring edge, each ``(E, 2)``."""
        if not self.rings:
            return np.empty((0, 2)), np.empty((0, 2))
        a = np.vstack([r[:-1] for r in self.rings])
        b = np.vstack([r[1:] for r in self.rings])
        return a, b

    def vertices(self) -> np.ndarray:
        """Distinct ring vertices (closing duplicates dropped)."""
        if not self.rings:
            return np.empty((0, 2))
        return np.vstack([r[:-1] for r in self.rings])


def polygon_area(ring: Sequence) -> float:
    """Signed shoelace area of a closed ring (positive when counter-clockwise)."""
    r = np.asarray(ring, dtype=float)
    x, y = r[:, 0], r[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def circle_ring(center=(0.0, 0.0), radius: float = 1.0, n: int = 360) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n) / n
    pts = np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])
    return np.vstack([pts, pts[:1]])
