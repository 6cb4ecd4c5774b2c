"""Time-ordered signed-distance observations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import DataError
from .grid import GridSpec, ScalarField, check_same_grid


@dataclass
class ObservationSeries:
    """Observed fields ``Z_1..Z_T`` at strictly increasing times (hours)."""

    grid: GridSpec
    times: np.ndarray
    fields: List[ScalarField]

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).ravel()
        self.fields = list(self.fields)
        if len(self.fields) != len(self.times):
            raise DataError(f"{len(self.fields)} fields but {len(self.times)} timestamps")
        if len(self.times) < 3:
            raise DataError(f"a series needs at least 3 time steps, got {len(self.times)}")
        if np.any(np.diff(self.times) <= 0):
            raise DataError("timestamps must be strictly increasing")
        check_same_grid(self.grid, *[f.grid for f in self.fields])

    @property
    def T(self) -> int:
        return len(self.times)

    @property
    def deltas(self) -> np.ndarray:
        return np.diff(self.times)

    def values(self) -> np.ndarray:
        """``(T, N)`` array of observations with NaN in unobserved cells."""
        return np.vstack([f.values for f in self.fields])

    def masks(self) -> np.ndarray:
        return np.vstack([f.observed for f in self.fields])

    def head(self, n: int) -> "ObservationSeries":
        """First ``n`` time steps."""
        return ObservationSeries(self.grid, self.times[:n], self.fields[:n])

    def with_missing(self, indices: Sequence[int]) -> "ObservationSeries":
        """Copy with the listed (0-based) time steps fully unobserved."""
        fields = [f.copy() for f in self.fields]
        for k in indices:
            if k == 0:
                raise DataError("the first observation initializes the process and cannot be held out")
            fields[k] = ScalarField(self.grid, np.full(self.grid.n, np.nan),
                                    np.zeros(self.grid.n, dtype=bool))
        return ObservationSeries(self.grid, self.times.copy(), fields)
