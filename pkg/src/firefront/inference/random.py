"""Multivariate normal, inverse-gamma and Wishart variates."""
from __future__ import annotations

import numpy as np
from scipy.linalg.blas import dtrsv
from scipy.linalg.lapack import dpotrf

from ..errors import NumericalError


def _chol(mat: np.ndarray, what: str) -> np.ndarray:
    # raw LAPACK: these matrices are tiny and called tens of thousands of times
    L, info = dpotrf(mat, lower=1, clean=1)
    if info != 0 or not np.all(np.isfinite(L)):
        raise NumericalError(f"non-SPD {what}")
    return L


def sample_mvn(vec, mat, precision: bool, rng: np.random.Generator) -> np.ndarray:
    """One Gaussian draw via a Cholesky factor.

    With ``precision=True``, ``mat`` is the precision ``D`` and ``vec`` the
    canonical vector ``b``; the draw is from ``N(D^-1 b, D^-1)`` and ``D`` is
    never inverted. Otherwise ``vec`` is the mean and ``mat`` the covariance.
    """
    vec = np.asarray(vec, dtype=float)
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    z = rng.standard_normal(vec.shape[0])
    if precision:
        L = _chol(mat, "conditional precision")
        y = dtrsv(L, vec, lower=1)
        return dtrsv(L, y + z, lower=1, trans=1)
    L = _chol(mat, "covariance")
    return vec + L @ z


def sample_inverse_gamma(shape: float, rate: float, rng: np.random.Generator) -> float:
    if not (shape > 0 and rate > 0):
        raise NumericalError(f"invalid inverse-gamma parameters shape={shape}, rate={rate}")
    return 1.0 / rng.gamma(shape, 1.0 / rate)


def sample_wishart(scale, df: float, rng: np.random.Generator) -> np.ndarray:
    """Bartlett-decomposition draw with ``E[W] = df * scale``."""
    scale = np.atleast_2d(np.asarray(scale, dtype=float))
    p = scale.shape[0]
    if not df > p - 1:
        raise NumericalError(f"Wishart needs df > dim - 1, got df={df}, dim={p}")
    L = _chol(scale, "Wishart scale")
    A = np.zeros((p, p))
    A[np.diag_indices(p)] = np.sqrt(rng.chisquare(df - np.arange(p)))
    A[np.tril_indices(p, -1)] = rng.standard_normal(p * (p - 1) // 2)
    LA = L @ A
    W = LA @ LA.T
    return 0.5 * (W + W.T)
