"""Low-rank spatial basis and the speed-field mixed-effects model."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError
from .grid import GridSpec, ScalarField, check_same_grid


def default_range(grid: GridSpec) -> float:
    """One third of the longer side of the domain."""
    return max(grid.x_max - grid.x_min, grid.y_max - grid.y_min) / 3.0


def exponential_correlation(grid: GridSpec, range_: Optional[float] = None) -> np.ndarray:
    """``exp(-|s_i - s_j| / range)`` over all pairs of cell centers."""
    range_ = default_range(grid) if range_ is None else range_
    if not range_ > 0:
        raise DataError("correlation range must be positive")
    pts = grid.centers()
    return np.exp(-cdist(pts, pts) / range_)


@dataclass(frozen=True)
class BasisMatrix:
    """``J`` orthonormal columns (``N x J``) with their eigenvalues, descending."""

    grid: Optional[GridSpec]
    columns: np.ndarray
    eigenvalues: np.ndarray

    @property
    def J(self) -> int:
        return self.columns.shape[1]


def leading_eigenbasis(corr: np.ndarray, J: int, grid: Optional[GridSpec] = None) -> BasisMatrix:
    """Eigenvectors of the ``J`` largest eigenvalues of a symmetric matrix.

    Each eigenvector is signed so its largest-magnitude entry is positive,
    which keeps chains reproducible across LAPACK builds.
    """
    corr = np.asarray(corr, dtype=float)
    n = corr.shape[0]
    if corr.shape != (n, n):
        raise DataError("correlation matrix must be square")
    if not 1 <= J <= n:
        raise DataError(f"J must lie in [1, {n}], got {J}")
    if grid is not None and grid.n != n:
        raise DataError("correlation matrix does not match the grid")
    w, v = np.linalg.eigh(corr)
    order = np.argsort(w)[::-1][:J]
    w, v = w[order], v[:, order]
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(J)])
    v = v * signs
    return BasisMatrix(grid, v, w)


def exponential_basis(grid: GridSpec, J: int, range_: Optional[float] = None) -> BasisMatrix:
    return leading_eigenbasis(exponential_correlation(grid, range_), J, grid)


@dataclass(frozen=True)
class CovariateMatrix:
    """``N x P`` standardized covariates with column names and provenance."""

    grid: GridSpec
    columns: np.ndarray
    names: List[str] = field(default_factory=list)
    provenance: List[dict] = field(default_factory=list)

    @property
    def P(self) -> int:
        return self.columns.shape[1]

    @classmethod
    def empty(cls, grid: GridSpec) -> "CovariateMatrix":
        return cls(grid, np.zeros((grid.n, 0)), [], [])

    @classmethod
    def from_fields(cls, fields: Sequence[ScalarField], names: Sequence[str],
                    provenance: Optional[Sequence[dict]] = None) -> "CovariateMatrix":
        if len(fields) != len(names):
            raise DataError("one name per covariate field is required")
        if not fields:
            raise DataError("no covariate fields given")
        check_same_grid(*[f.grid for f in fields])
        cols = np.column_stack([np.where(f.observed, f.values, 0.0) for f in fields])
        prov = list(provenance) if provenance is not None else [{} for _ in fields]
        return cls(fields[0].grid, cols, list(names), prov)


def speed_field(X: CovariateMatrix, beta, basis: BasisMatrix, xi) -> ScalarField:
    """``v = X beta + Psi xi`` as a field; negative speed means retreat."""
    beta = np.asarray(beta, dtype=float).ravel()
    xi = np.asarray(xi, dtype=float).ravel()
    if beta.size != X.P or xi.size != basis.J:
        raise DataError(f"dimension mismatch: beta {beta.size} vs P={X.P}, xi {xi.size} vs J={basis.J}")
    if basis.grid is not None:
        check_same_grid(X.grid, basis.grid)
    if basis.columns.shape[0] != X.grid.n:
        raise DataError("basis rows do not match the covariate grid")
    return ScalarField(X.grid, X.columns @ beta + basis.columns @ xi)
