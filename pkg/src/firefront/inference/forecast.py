"""Posterior predictive draws at the data scale."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from ..errors import DataError
from ..grid import GridSpec, ScalarField
from ..series import ObservationSeries
from .gibbs import PosteriorSamples


@dataclass
class Forecast:
    """Predictive draws: ``phi`` on the process scale and ``z`` on the data scale.

    Both are ``(L, N)`` arrays for the final step; ``steps`` lists the
    step lengths that were rolled forward.
    """

    grid: GridSpec
    phi: np.ndarray
    z: np.ndarray
    steps: list

    @property
    def draws(self) -> list:
        return [ScalarField(self.grid, row) for row in self.z]

    def mean(self) -> ScalarField:
        return ScalarField(self.grid, self.z.mean(axis=0))


def _psd_factor(mat: np.ndarray) -> np.ndarray:
    try:
        return cholesky(mat, lower=True, check_finite=False)
    except LinAlgError:
        w, v = np.linalg.eigh(0.5 * (mat + mat.T))
        return v * np.sqrt(np.clip(w, 0.0, None))


def _model_matrices(samples: PosteriorSamples):
    spec = samples.spec
    Psi = np.asarray(spec.basis.columns, dtype=float)
    if spec.covariates is not None:
        X = np.asarray(spec.covariates.columns, dtype=float)
    else:
        X = np.zeros((Psi.shape[0], 0))
    return X, Psi


def _grid_of(data) -> GridSpec:
    if isinstance(data, ObservationSeries):
        return data.grid
    if isinstance(data, GridSpec):
        return data
    raise DataError("expected an ObservationSeries or a GridSpec")


def forecast(samples: PosteriorSamples, data: Union[ObservationSeries, GridSpec],
             horizon_dt: Union[float, Sequence[float]], seed: Optional[int] = None) -> Forecast:
    """Roll every retained draw forward and add process and data noise.

    For each draw: ``xi_new = M xi_last + eta``, ``v = X beta + Psi xi_new``,
    ``phi = phi_last - v dt + eps_p`` per step, then ``z = phi + eps_d``.
    A sequence ``horizon_dt`` gives one step per entry.
    """
    grid = _grid_of(data)
    steps = [float(horizon_dt)] if np.isscalar(horizon_dt) else [float(h) for h in horizon_dt]
    if not steps or any(not h > 0 for h in steps):
        raise DataError("forecast horizon must be positive")
    T = samples.T
    if T not in samples.phi_times:
        raise DataError("samples do not hold phi at the last time step")
    X, Psi = _model_matrices(samples)
    if Psi.shape[0] != grid.n:
        raise DataError("forecast grid does not match the fitted basis")
    rng = np.random.default_rng(samples.spec.seed + 1 if seed is None else seed)
    d = samples.draws
    L, N = samples.L, grid.n
    phi_out = np.empty((L, N))
    z_out = np.empty((L, N))
    for ell in range(L):
        trans = d["transition"][ell]
        M = np.diag(trans) if trans.ndim == 1 else trans
        chol_eta = _psd_factor(d["sigma_eta"][ell])
        xb = X @ d["beta"][ell]
        xi = d["xi"][ell, -1]
        phi = samples.phi_at(T)[ell].copy()
        sd_p = np.sqrt(d["sigma2_p"][ell])
        for h in steps:
            xi = M @ xi + chol_eta @ rng.standard_normal(len(xi))
            v = xb + Psi @ xi
            phi = phi - v * h + sd_p * rng.standard_normal(N)
        phi_out[ell] = phi
        z_out[ell] = phi + np.sqrt(d["sigma2_d"][ell]) * rng.standard_normal(N)
    return Forecast(grid, phi_out, z_out, steps)


def predict_interior(samples: PosteriorSamples, data: Union[ObservationSeries, GridSpec], t: int,
                     seed: Optional[int] = None) -> Forecast:
    """Data-scale predictive draws at a held-out 1-based time ``t``."""
    grid = _grid_of(data)
    phi = samples.phi_at(t)
    rng = np.random.default_rng(samples.spec.seed + 2 if seed is None else seed)
    sd = np.sqrt(samples.draws["sigma2_d"])[:, None]
    z = phi + sd * rng.standard_normal(phi.shape)
    return Forecast(grid, phi.copy(), z, [])
