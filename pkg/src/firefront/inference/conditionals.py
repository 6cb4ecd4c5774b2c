"""Full conditional distributions and the Gibbs block updates.

Each ``*_conditional`` function returns the parameters of a block's full
conditional given everything else in ``state``; the matching ``update_*``
function draws from it and writes the draw back into ``state`` (which is
also returned). Gaussian conditionals are returned in canonical form
``(D, b)`` for ``N(D^-1 b, D^-1)``.

Time indexing: ``phi`` rows ``0..T`` (row 0 fixed), ``xi`` rows ``0..T-1``,
and transition ``t`` maps ``phi_t -> phi_{t+1}`` with speed
``v_t = X beta + Psi xi_t`` over step ``dts[t]``.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from ..errors import NumericalError
from .model import ChainState, ModelData
from .random import sample_inverse_gamma, sample_mvn, sample_wishart


def speeds(state: ChainState, data: ModelData) -> np.ndarray:
    """``(T, N)`` array of normal speeds ``v_0 .. v_{T-1}``."""
    return state.xi @ data.Psi.T + (data.X @ state.beta)[None, :]


def process_residuals(state: ChainState, data: ModelData) -> np.ndarray:
    """``r_t = phi_{t+1} - phi_t + v_t dt_t`` for every transition."""
    v = speeds(state, data)
    return state.phi[1:] - state.phi[:-1] + v * data.dts[:, None]


# -- variances ---------------------------------------------------------------

def sigma2_d_conditional(state: ChainState, data: ModelData) -> tuple[float, float]:
    resid = np.where(data.obs, data.Zf - state.phi[1:], 0.0)
    n_obs = int(np.count_nonzero(data.obs))
    h = data.hyper
    return h.alpha_d + 0.5 * n_obs, h.beta_d + 0.5 * float(np.sum(resid * resid))


def update_sigma2_d(state: ChainState, data: ModelData) -> ChainState:
    shape, rate = sigma2_d_conditional(state, data)
    state.sigma2_d = sample_inverse_gamma(shape, rate, state.rng)
    return state


def sigma2_p_conditional(state: ChainState, data: ModelData) -> tuple[float, float]:
    r = process_residuals(state, data)
    h = data.hyper
    return h.alpha_p + 0.5 * r.size, h.beta_p + 0.5 * float(np.sum(r * r))


def update_sigma2_p(state: ChainState, data: ModelData) -> ChainState:
    shape, rate = sigma2_p_conditional(state, data)
    state.sigma2_p = sample_inverse_gamma(shape, rate, state.rng)
    return state


# -- level-set process -------------------------------------------------------

def phi_conditional(state: ChainState, data: ModelData, t: int,
                    v: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal precision and canonical vector of ``phi_t``, ``1 <= t <= T``.

    Covers the first, interior, fully or partially missing, and last time
    steps: an unobserved cell drops the data term, the last step has no
    outgoing transition.
    """
    T = data.T
    if not 1 <= t <= T:
        raise IndexError(f"phi index {t} outside 1..{T}")
    if v is None:
        v = speeds(state, data)
    inv_d = 1.0 / state.sigma2_d
    inv_p = 1.0 / state.sigma2_p
    obs = data.obs[t - 1]
    prec = obs * inv_d + inv_p
    b = obs * data.Zf[t - 1] * inv_d + (state.phi[t - 1] - v[t - 1] * data.dts[t - 1]) * inv_p
    if t < T:
        prec = prec + inv_p
        b = b + (state.phi[t + 1] + v[t] * data.dts[t]) * inv_p
    return prec, b


def update_phi(state: ChainState, data: ModelData, t: int,
               v: np.ndarray | None = None) -> ChainState:
    prec, b = phi_conditional(state, data, t, v)
    z = state.rng.standard_normal(data.N)
    state.phi[t] = b / prec + z / np.sqrt(prec)
    return state


def update_phi_sweep(state: ChainState, data: ModelData, v: np.ndarray | None = None) -> ChainState:
    """``update_phi`` for ``t = 1..T`` in ascending order, batched.

    Only the ``(phi_{t-1} + phi_{t+1}) / sigma2_p`` part of each conditional
    depends on the sweep, so everything else is computed for all ``t`` at
    once. Consumes the random stream exactly like the one-at-a-time loop.
    """
    T, N = data.T, data.N
    if v is None:
        v = speeds(state, data)
    inv_d = 1.0 / state.sigma2_d
    inv_p = 1.0 / state.sigma2_p
    z = state.rng.standard_normal((T, N))
    vdt = v * data.dts[:, None]
    prec = data.obs * inv_d + inv_p
    prec[:-1] += inv_p
    fixed = data.Zf * (data.obs * inv_d) - vdt * inv_p
    fixed[:-1] += vdt[1:] * inv_p
    offset = fixed / prec + z / np.sqrt(prec)
    weight = inv_p / prec
    phi = state.phi
    for t in range(1, T):
        phi[t] = offset[t - 1] + weight[t - 1] * (phi[t - 1] + phi[t + 1])
    phi[T] = offset[T - 1] + weight[T - 1] * phi[T - 1]
    return state


# -- regression and basis coefficients --------------------------------------

def beta_conditional(state: ChainState, data: ModelData) -> tuple[np.ndarray, np.ndarray]:
    h = data.hyper
    dts = data.dts
    y = state.phi[:-1] - state.phi[1:] - (state.xi @ data.Psi.T) * dts[:, None]
    D = data.XtX * (np.sum(dts * dts) / state.sigma2_p) + np.eye(data.P) / h.c_beta
    b = data.X.T @ (dts @ y) / state.sigma2_p
    return D, b


def update_beta(state: ChainState, data: ModelData) -> ChainState:
    if data.P == 0:
        return state
    D, b = beta_conditional(state, data)
    state.beta = sample_mvn(b, D, True, state.rng)
    return state


def _xi_data_term(state: ChainState, data: ModelData, t: int) -> np.ndarray:
    dt = data.dts[t]
    y = state.phi[t] - state.phi[t + 1] - (data.X @ state.beta) * dt
    return data.Psi.T @ y * (dt / state.sigma2_p)


def xi_conditional(state: ChainState, data: ModelData, t: int,
                   data_term: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Canonical parameters of ``xi_t`` for ``0 <= t <= T-1``.

    ``xi_0`` carries the ``N(0, c_xi I)`` initial condition, later steps the
    VAR(1) prior from ``xi_{t-1}``; every step except the last also sees the
    VAR transition into ``xi_{t+1}``.
    """
    T = data.T
    if not 0 <= t <= T - 1:
        raise IndexError(f"xi index {t} outside 0..{T - 1}")
    M = state.transition_matrix()
    W = state.prec_eta
    dt = data.dts[t]
    D = data.PtP * (dt * dt / state.sigma2_p)
    b = _xi_data_term(state, data, t) if data_term is None else data_term.copy()
    if t == 0:
        D = D + np.eye(data.J) / data.hyper.c_xi
    else:
        D = D + W
        b = b + W @ (M @ state.xi[t - 1])
    if t < T - 1:
        MtW = M.T @ W
        D = D + MtW @ M
        b = b + MtW @ state.xi[t + 1]
    return D, b


def update_xi(state: ChainState, data: ModelData, t: int,
              data_term: np.ndarray | None = None) -> ChainState:
    D, b = xi_conditional(state, data, t, data_term)
    state.xi[t] = sample_mvn(b, D, True, state.rng)
    return state


# -- VAR(1) parameters -------------------------------------------------------

def transition_conditional(state: ChainState, data: ModelData) -> tuple[np.ndarray, np.ndarray]:
    """Canonical parameters for ``vec(M)`` (column-stacked, M1) or ``gamma`` (M2)."""
    prev, nxt = state.xi[:-1], state.xi[1:]
    W = state.prec_eta
    J = data.J
    S_prev = prev.T @ prev
    if data.variant == "M1":
        D = np.kron(S_prev, W) + np.eye(J * J) / data.hyper.c_m
        b = (W @ nxt.T @ prev).ravel(order="F")
    else:
        D = W * S_prev + np.eye(J) / data.hyper.c_gamma
        b = np.sum(prev * (nxt @ W.T), axis=0)
    return D, b


def update_transition(state: ChainState, data: ModelData) -> ChainState:
    D, b = transition_conditional(state, data)
    draw = sample_mvn(b, D, True, state.rng)
    if data.variant == "M1":
        state.transition = draw.reshape((data.J, data.J), order="F")
    else:
        state.transition = draw
    return state


def spectral_radius(transition: np.ndarray) -> float:
    if transition.ndim == 1:
        return float(np.max(np.abs(transition)))
    return float(np.max(np.abs(np.linalg.eigvals(transition))))


def sigma_eta_conditional(state: ChainState, data: ModelData) -> tuple[np.ndarray, float]:
    """Scale and degrees of freedom of the Wishart conditional of ``Sigma_eta^-1``."""
    J = data.J
    d_alpha = J - 1
    M = state.transition_matrix()
    R = state.xi[1:] - state.xi[:-1] @ M.T
    inv_scale = R.T @ R + data.hyper.wishart_scale_const * d_alpha * np.eye(J)
    try:
        scale = cho_solve(cho_factor(inv_scale, lower=True), np.eye(J))
    except LinAlgError as exc:
        raise NumericalError("non-SPD Wishart scale for Sigma_eta") from exc
    df = (data.T - 1) + d_alpha
    return 0.5 * (scale + scale.T), float(df)


def update_sigma_eta(state: ChainState, data: ModelData) -> ChainState:
    scale, df = sigma_eta_conditional(state, data)
    W = sample_wishart(scale, df, state.rng)
    try:
        sigma = cho_solve(cho_factor(W, lower=True), np.eye(data.J))
    except LinAlgError as exc:
        raise NumericalError("drawn Sigma_eta^-1 is not SPD") from exc
    state.prec_eta = W
    state.sigma_eta = 0.5 * (sigma + sigma.T)
    return state
