"""Unnormalized log joint density of data, latent process and parameters.

Written term by term from the model definition, without reusing any of the
conditional algebra, so it can serve as an independent check on every
Gibbs block: for any block, the log conditional density difference between
two values must equal the log joint difference.
"""
from __future__ import annotations

import numpy as np
from scipy import stats

from .model import ChainState, ModelData


def _gauss_iso(x: np.ndarray, mean: np.ndarray, var: float) -> float:
    return float(np.sum(stats.norm.logpdf(x, loc=mean, scale=np.sqrt(var))))


def _mvn(x: np.ndarray, mean: np.ndarray, prec: np.ndarray) -> float:
    d = x - mean
    sign, logdet = np.linalg.slogdet(prec)
    return 0.5 * logdet - 0.5 * len(x) * np.log(2 * np.pi) - 0.5 * float(d @ prec @ d)


def log_joint(state: ChainState, data: ModelData) -> float:
    h = data.hyper
    T, J = data.T, data.J
    total = 0.0
    # data model, observed cells only
    for t in range(1, T + 1):
        obs = data.obs[t - 1]
        total += _gauss_iso(data.Z[t - 1][obs], state.phi[t][obs], state.sigma2_d)
    # level-set process model
    for t in range(T):
        v = data.X @ state.beta + data.Psi @ state.xi[t]
        mean = state.phi[t] - v * data.dts[t]
        total += _gauss_iso(state.phi[t + 1], mean, state.sigma2_p)
    # VAR(1) on basis coefficients
    if state.transition.ndim == 1:
        M = np.diag(state.transition)
    else:
        M = state.transition
    total += _gauss_iso(state.xi[0], np.zeros(J), h.c_xi)
    for t in range(1, T):
        total += _mvn(state.xi[t], M @ state.xi[t - 1], state.prec_eta)
    # priors
    total += float(stats.invgamma.logpdf(state.sigma2_d, h.alpha_d, scale=h.beta_d))
    total += float(stats.invgamma.logpdf(state.sigma2_p, h.alpha_p, scale=h.beta_p))
    if data.P:
        total += _gauss_iso(state.beta, np.zeros(data.P), h.c_beta)
    if state.transition.ndim == 1:
        total += _gauss_iso(state.transition, np.zeros(J), h.c_gamma)
    else:
        total += _gauss_iso(state.transition.ravel(order="F"), np.zeros(J * J), h.c_m)
    # Wishart prior kernel on Sigma_eta^-1; with df = J - 1 it is improper, so
    # only the kernel is used (normalizers cancel in differences)
    d_alpha = J - 1
    W = state.prec_eta
    inv_scale = h.wishart_scale_const * d_alpha * np.eye(J)
    total += 0.5 * (d_alpha - J - 1) * np.linalg.slogdet(W)[1] - 0.5 * np.trace(inv_scale @ W)
    return total
