"""Draw synthetic observation series from the hierarchical model itself."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DataError
from ..grid import GridSpec, ScalarField
from ..series import ObservationSeries
from .random import sample_mvn


@dataclass
class SimulatedTruth:
    """Latent quantities behind a simulated series, indexed like ``ChainState``."""

    phi: np.ndarray
    xi: np.ndarray
    beta: np.ndarray
    transition: np.ndarray
    sigma_eta: np.ndarray
    sigma2_d: float
    sigma2_p: float


def simulate_series(grid: GridSpec, X: np.ndarray, Psi: np.ndarray, beta, transition, sigma_eta,
                    sigma2_d: float, sigma2_p: float, times, phi0, rng: np.random.Generator,
                    xi0: Optional[np.ndarray] = None) -> tuple[ObservationSeries, SimulatedTruth]:
    """Simulate ``Z`` from the data, process and VAR(1) layers.

    The first field equals ``phi0`` exactly since it fixes the initial state of
    the fit. Later fields are ``phi_t + eps_d``. Step ``t`` uses the same
    ``dt`` convention as ``ModelData``: the first transition reuses the first
    time gap. ``transition`` is a ``J x J`` matrix or a vector (diagonal).
    ``xi0`` defaults to a draw from ``N(0, sigma_eta)``.
    """
    X = np.asarray(X, dtype=float).reshape(grid.n, -1)
    Psi = np.asarray(Psi, dtype=float)
    beta = np.asarray(beta, dtype=float)
    times = np.asarray(times, dtype=float)
    sigma_eta = np.asarray(sigma_eta, dtype=float)
    A = np.asarray(transition, dtype=float)
    A = np.diag(A) if A.ndim == 1 else A
    T, J = len(times), Psi.shape[1]
    if T < 2 or np.any(np.diff(times) <= 0):
        raise DataError("need at least two strictly increasing times")
    if Psi.shape[0] != grid.n or A.shape != (J, J) or sigma_eta.shape != (J, J):
        raise DataError("basis, transition and sigma_eta shapes disagree")
    if X.shape[1] != beta.size:
        raise DataError("X and beta disagree on the number of covariates")
    if sigma2_d <= 0 or sigma2_p <= 0:
        raise DataError("variances must be positive")
    deltas = np.diff(times)
    dts = np.concatenate([deltas[:1], deltas])
    xi = np.empty((T, J))
    xi[0] = sample_mvn(np.zeros(J), sigma_eta, False, rng) if xi0 is None else xi0
    for t in range(1, T):
        xi[t] = A @ xi[t - 1] + sample_mvn(np.zeros(J), sigma_eta, False, rng)
    phi = np.empty((T + 1, grid.n))
    phi[0] = np.asarray(phi0, dtype=float)
    drift = X @ beta
    for t in range(1, T + 1):
        v = drift + Psi @ xi[t - 1]
        phi[t] = phi[t - 1] - v * dts[t - 1] + np.sqrt(sigma2_p) * rng.standard_normal(grid.n)
    fields = [ScalarField(grid, phi[0])]
    for t in range(2, T + 1):
        fields.append(ScalarField(grid, phi[t] + np.sqrt(sigma2_d) * rng.standard_normal(grid.n)))
    truth = SimulatedTruth(phi, xi, beta.copy(), np.asarray(transition, dtype=float).copy(),
                           sigma_eta.copy(), float(sigma2_d), float(sigma2_p))
    return ObservationSeries(grid, times, fields), truth
