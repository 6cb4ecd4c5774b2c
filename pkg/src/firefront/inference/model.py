"""Model specification, prior constants, data arrays and chain state."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..basis import BasisMatrix, CovariateMatrix
from ..errors import ConfigError, DataError
from ..grid import check_same_grid
from ..series import ObservationSeries

VARIANTS = ("M1", "M2")


@dataclass(frozen=True)
class Hyperparameters:
    """Conjugate prior constants.

    The Wishart prior on the VAR innovation precision is
    ``W((wishart_scale_const * (J-1) * I)^-1, J-1)``.
    """

    alpha_d: float = 0.1
    beta_d: float = 0.1
    alpha_p: float = 0.1
    beta_p: float = 0.1
    c_beta: float = 1000.0
    c_xi: float = 1000.0
    c_m: float = 1000.0
    c_gamma: float = 1000.0
    wishart_scale_const: float = 1000.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value > 0:
                raise ConfigError(f"hyperparameter {name} must be positive, got {value}")


@dataclass
class ModelSpec:
    variant: str
    basis: BasisMatrix
    covariates: Optional[CovariateMatrix] = None
    hyper: Hyperparameters = field(default_factory=Hyperparameters)
    n_iter: int = 30_000
    n_burn: int = 20_000
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not 0 <= self.n_burn < self.n_iter:
            raise ConfigError("need 0 <= n_burn < n_iter")
        if self.thin < 1:
            raise ConfigError("thin must be >= 1")
        if self.variant == "M1" and self.J < 2:
            raise ConfigError("the full VAR variant needs J >= 2")

    @property
    def J(self) -> int:
        return self.basis.J

    @property
    def n_keep(self) -> int:
        return len(range(self.n_burn, self.n_iter, self.thin))


@dataclass
class ModelData:
    """Dense arrays the sampler works on.

    ``Z`` is ``(T, N)`` with NaN in unobserved cells and ``obs`` the matching
    mask. ``dts[t]`` is the step length of the transition ``phi_t -> phi_{t+1}``
    for ``t = 0..T-1``; the initial transition reuses the first interval.
    """

    Z: np.ndarray
    obs: np.ndarray
    dts: np.ndarray
    X: np.ndarray
    Psi: np.ndarray
    hyper: Hyperparameters
    variant: str

    def __post_init__(self):
        self.Zf = np.where(self.obs, self.Z, 0.0)
        self.XtX = self.X.T @ self.X
        self.PtP = self.Psi.T @ self.Psi

    @property
    def T(self) -> int:
        return self.Z.shape[0]

    @property
    def N(self) -> int:
        return self.Z.shape[1]

    @property
    def P(self) -> int:
        return self.X.shape[1]

    @property
    def J(self) -> int:
        return self.Psi.shape[1]

    @classmethod
    def build(cls, spec: ModelSpec, series: ObservationSeries) -> "ModelData":
        if spec.basis.grid is not None:
            check_same_grid(series.grid, spec.basis.grid)
        if spec.basis.columns.shape[0] != series.grid.n:
            raise DataError("basis rows do not match the data grid")
        if spec.covariates is not None:
            check_same_grid(series.grid, spec.covariates.grid)
            X = spec.covariates.columns
        else:
            X = np.zeros((series.grid.n, 0))
        if not series.fields[0].fully_observed:
            raise DataError("the first observation must be fully observed (it fixes phi_0)")
        deltas = series.deltas
        dts = np.concatenate([deltas[:1], deltas])
        return cls(series.values(), series.masks(), dts, np.asarray(X, dtype=float),
                   np.asarray(spec.basis.columns, dtype=float), spec.hyper, spec.variant)


@dataclass
class ChainState:
    """All latent blocks of one Gibbs iteration.

    ``phi`` has ``T + 1`` rows; row 0 is the fixed initial field (the first
    observation). ``xi`` holds ``xi_0 .. xi_{T-1}``. ``transition`` is the
    ``J x J`` matrix (M1) or the diagonal vector ``gamma`` (M2).
    """

    phi: np.ndarray
    xi: np.ndarray
    beta: np.ndarray
    transition: np.ndarray
    prec_eta: np.ndarray
    sigma_eta: np.ndarray
    sigma2_d: float
    sigma2_p: float
    rng: np.random.Generator

    def transition_matrix(self) -> np.ndarray:
        if self.transition.ndim == 1:
            return np.diag(self.transition)
        return self.transition

    def copy(self) -> "ChainState":
        return ChainState(self.phi.copy(), self.xi.copy(), self.beta.copy(), self.transition.copy(),
                          self.prec_eta.copy(), self.sigma_eta.copy(), self.sigma2_d, self.sigma2_p,
                          self.rng)


def initial_state(data: ModelData, rng: np.random.Generator) -> ChainState:
    """Observed cells start at the data, missing cells carry the previous field."""
    T, N, J, P = data.T, data.N, data.J, data.P
    phi = np.empty((T + 1, N))
    phi[0] = data.Z[0]
    for t in range(1, T + 1):
        phi[t] = np.where(data.obs[t - 1], data.Z[t - 1], phi[t - 1])
    transition = np.zeros((J, J)) if data.variant == "M1" else np.zeros(J)
    return ChainState(phi=phi, xi=np.zeros((T, J)), beta=np.zeros(P), transition=transition,
                      prec_eta=np.eye(J), sigma_eta=np.eye(J), sigma2_d=1.0, sigma2_p=1.0, rng=rng)
