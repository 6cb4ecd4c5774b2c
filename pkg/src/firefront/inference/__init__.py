"""Hierarchical level-set model: priors, Gibbs sampler, forecasts, diagnostics."""
from .conditionals import (beta_conditional, phi_conditional, sigma2_d_conditional,
                           sigma2_p_conditional, sigma_eta_conditional, spectral_radius,
                           transition_conditional, update_beta, update_phi, update_sigma2_d,
                           update_sigma2_p, update_sigma_eta, update_transition, update_xi,
                           xi_conditional)
from .diagnostics import ESSResult, batch_means_ess, effective_sample_size
from .forecast import Forecast, forecast, predict_interior
from .gibbs import PosteriorSamples, gibbs_sweep, run_chain
from .joint import log_joint
from .model import ChainState, Hyperparameters, ModelData, ModelSpec, initial_state
from .random import sample_inverse_gamma, sample_mvn, sample_wishart
from .simulate import SimulatedTruth, simulate_series
