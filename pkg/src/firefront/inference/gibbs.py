"""Systematic-scan Gibbs sampler."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from ..errors import FirefrontError, NumericalError
from ..series import ObservationSeries
from . import conditionals as cond
from .model import ChainState, ModelData, ModelSpec, initial_state

log = logging.getLogger(__name__)

BLOCKS = ("sigma2_d", "sigma2_p", "beta", "xi", "transition", "sigma_eta", "spectral_radius")


@dataclass
class PosteriorSamples:
    """Retained draws of every block, keyed by block name.

    ``draws["phi"]`` holds ``phi`` at the 1-based data times listed in
    ``phi_times`` (shape ``(L, len(phi_times), N)``). ``spectral_radius_trace``
    covers every iteration, burn-in included.
    """

    spec: ModelSpec
    times: np.ndarray
    iterations: np.ndarray
    draws: Dict[str, np.ndarray]
    phi_times: list
    spectral_radius_trace: np.ndarray
    held_out: list = field(default_factory=list)

    @property
    def L(self) -> int:
        return len(self.iterations)

    @property
    def T(self) -> int:
        return len(self.times)

    def phi_at(self, t: int) -> np.ndarray:
        """Draws of ``phi_t`` (1-based data time), shape ``(L, N)``."""
        try:
            k = self.phi_times.index(t)
        except ValueError:
            raise KeyError(f"phi at t={t} was not stored; stored: {self.phi_times}") from None
        return self.draws["phi"][:, k]


def gibbs_sweep(state: ChainState, data: ModelData) -> ChainState:
    """One scan: variances, phi (ascending), beta, xi (ascending), VAR, Sigma_eta."""
    cond.update_sigma2_d(state, data)
    cond.update_sigma2_p(state, data)
    v = cond.speeds(state, data)
    cond.update_phi_sweep(state, data, v)
    cond.update_beta(state, data)
    # the phi/beta part of each xi conditional does not depend on other xi
    dts = data.dts
    y = state.phi[:-1] - state.phi[1:] - (data.X @ state.beta)[None, :] * dts[:, None]
    data_terms = (y @ data.Psi) * (dts / state.sigma2_p)[:, None]
    for t in range(data.T):
        cond.update_xi(state, data, t, data_terms[t])
    cond.update_transition(state, data)
    cond.update_sigma_eta(state, data)
    return state


def run_chain(spec: ModelSpec, series: ObservationSeries,
              phi_times: Optional[Sequence[int]] = None,
              callback: Optional[Callable[[int, ChainState], None]] = None) -> PosteriorSamples:
    """Run one Gibbs chain and keep thinned post-burn-in draws.

    ``phi_times`` lists the 1-based data times whose ``phi`` draws are kept
    (default: the last time, which seeds forecasts).
    """
    data = ModelData.build(spec, series)
    T, J, P, N = data.T, data.J, data.P, data.N
    phi_times = [T] if phi_times is None else sorted(set(int(t) for t in phi_times))
    for t in phi_times:
        if not 1 <= t <= T:
            raise IndexError(f"phi time {t} outside 1..{T}")
    rng = np.random.default_rng(spec.seed)
    state = initial_state(data, rng)
    L = spec.n_keep
    trans_shape = (J, J) if spec.variant == "M1" else (J,)
    draws = {
        "sigma2_d": np.empty(L), "sigma2_p": np.empty(L), "beta": np.empty((L, P)),
        "xi": np.empty((L, T, J)), "transition": np.empty((L,) + trans_shape),
        "sigma_eta": np.empty((L, J, J)), "spectral_radius": np.empty(L),
        "phi": np.empty((L, len(phi_times), N)),
    }
    rho_trace = np.empty(spec.n_iter)
    kept = []
    phi_rows = np.array(phi_times, dtype=int)
    for it in range(spec.n_iter):
        try:
            gibbs_sweep(state, data)
        except FirefrontError as exc:
            raise type(exc)(f"iteration {it}: {exc}") from exc
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"iteration {it}: {exc}") from exc
        rho = cond.spectral_radius(state.transition)
        rho_trace[it] = rho
        if it >= spec.n_burn and (it - spec.n_burn) % spec.thin == 0:
            k = len(kept)
            kept.append(it)
            draws["sigma2_d"][k] = state.sigma2_d
            draws["sigma2_p"][k] = state.sigma2_p
            draws["beta"][k] = state.beta
            draws["xi"][k] = state.xi
            draws["transition"][k] = state.transition
            draws["sigma_eta"][k] = state.sigma_eta
            draws["spectral_radius"][k] = rho
            draws["phi"][k] = state.phi[phi_rows]
        if callback is not None:
            callback(it, state)
    held_out = [t + 1 for t in range(T) if not data.obs[t].any()]
    log.debug("chain done: %d kept draws, max spectral radius %.3f", L, rho_trace.max())
    return PosteriorSamples(spec, series.times.copy(), np.array(kept), draws, phi_times,
                            rho_trace, held_out)
