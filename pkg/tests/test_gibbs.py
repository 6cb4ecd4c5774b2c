import numpy as np
import pytest
from scipy import stats

from conftest import small_instance
from firefront.basis import exponential_basis
from firefront.errors import DataError
from firefront.grid import GridSpec, ScalarField
from firefront.inference import (ModelSpec, PosteriorSamples, batch_means_ess, effective_sample_size,
                                 forecast, gibbs_sweep, predict_interior, run_chain)
from firefront.inference import conditionals as cond
from firefront.inference.model import Hyperparameters, ModelData
from firefront.levelset import EvolutionConfig, evolve_normal, generate_merging_circles


@pytest.fixture(scope="module")
def tiny_series():
    g = GridSpec(8, 8, -7.0, 7.0, -1.0, 7.0)
    cfg = EvolutionConfig(dt=0.06, n_steps=5)
    return generate_merging_circles(g, cfg, centers=((-3.0, 3.0), (3.0, 3.0)), radius=1.5)


@pytest.fixture(scope="module")
def tiny_spec(tiny_series):
    return ModelSpec("M2", exponential_basis(tiny_series.grid, 3), n_iter=400, n_burn=200, seed=3)


def test_phi_sweep_matches_one_at_a_time():
    rng = np.random.default_rng(0)
    data, st = small_instance(rng, missing_time=2)
    a, b = st.copy(), st.copy()
    a.rng, b.rng = np.random.default_rng(9), np.random.default_rng(9)
    cond.update_phi_sweep(a, data)
    for t in range(1, data.T + 1):
        cond.update_phi(b, data, t)
    assert np.allclose(a.phi, b.phi, rtol=1e-12, atol=1e-12)
    assert a.rng.standard_normal() == b.rng.standard_normal()


def test_chain_is_deterministic(tiny_series, tiny_spec):
    s1 = run_chain(tiny_spec, tiny_series)
    s2 = run_chain(tiny_spec, tiny_series)
    for k in s1.draws:
        assert np.array_equal(s1.draws[k], s2.draws[k]), k
    assert np.array_equal(s1.spectral_radius_trace, s2.spectral_radius_trace)
    assert s1.L == tiny_spec.n_keep == 200


def test_thinning_and_storage(tiny_series):
    spec = ModelSpec("M1", exponential_basis(tiny_series.grid, 2), n_iter=50, n_burn=10, thin=4)
    s = run_chain(spec, tiny_series, phi_times=[2, tiny_series.T])
    assert s.L == len(range(10, 50, 4))
    assert np.array_equal(s.iterations, np.arange(10, 50, 4))
    assert s.draws["transition"].shape == (s.L, 2, 2)
    assert s.phi_at(2).shape == (s.L, tiny_series.grid.n)
    with pytest.raises(KeyError):
        s.phi_at(3)
    assert len(s.spectral_radius_trace) == 50


def test_one_sweep_keeps_state_valid():
    rng = np.random.default_rng(1)
    for variant in ("M1", "M2"):
        data, st = small_instance(rng, variant=variant, missing_time=2)
        gibbs_sweep(st, data)
        for block in (st.phi, st.xi, st.beta, st.transition, st.sigma_eta):
            assert np.all(np.isfinite(block))
        assert np.linalg.eigvalsh(st.sigma_eta).min() > 0
        assert st.sigma2_d > 0 and st.sigma2_p > 0


def test_sigma2_d_prior_recovered_without_data():
    rng = np.random.default_rng(2)
    data, st = small_instance(rng)
    empty = ModelData(np.full_like(data.Z, np.nan), np.zeros_like(data.obs), data.dts, data.X, data.Psi,
                      data.hyper, data.variant)
    draws = []
    for _ in range(10_000):
        cond.update_sigma2_d(st, empty)
        draws.append(st.sigma2_d)
    assert stats.kstest(draws, stats.invgamma(0.1, scale=0.1).cdf).pvalue > 0.01


def test_errors_carry_iteration_index(tiny_series):
    spec = ModelSpec("M2", exponential_basis(tiny_series.grid, 2), n_iter=5, n_burn=1)

    def boom(it, state):
        if it == 2:
            state.prec_eta[:] = np.nan
    with pytest.raises(Exception, match="iteration 3"):
        run_chain(spec, tiny_series, callback=boom)


def test_first_field_must_be_observed(tiny_series):
    masked = ScalarField(tiny_series.grid, tiny_series.fields[0].values,
                         np.r_[False, np.ones(tiny_series.grid.n - 1, bool)])
    bad = type(tiny_series)(tiny_series.grid, tiny_series.times, [masked] + tiny_series.fields[1:])
    with pytest.raises(DataError):
        run_chain(ModelSpec("M2", exponential_basis(tiny_series.grid, 2), n_iter=3, n_burn=1), bad)


def test_held_out_time_reported(tiny_series):
    spec = ModelSpec("M2", exponential_basis(tiny_series.grid, 2), n_iter=30, n_burn=10)
    s = run_chain(spec, tiny_series.with_missing([3]), phi_times=[4, tiny_series.T])
    assert s.held_out == [4]
    fc = predict_interior(s, tiny_series, 4)
    assert fc.z.shape == (s.L, tiny_series.grid.n)


# -- forecasting ------------------------------------------------------------------------

def degenerate_samples(series, J=3, L=4):
    basis = exponential_basis(series.grid, J)
    spec = ModelSpec("M2", basis, n_iter=L + 1, n_burn=1)
    rng = np.random.default_rng(0)
    gamma = rng.normal(size=J)
    xi_last = rng.normal(size=J)
    xi = np.zeros((L, series.T, J))
    xi[:, -1] = xi_last
    phi_T = series.fields[-1].values
    draws = {"sigma2_d": np.zeros(L), "sigma2_p": np.zeros(L), "beta": np.zeros((L, 0)),
             "xi": xi, "transition": np.tile(gamma, (L, 1)), "sigma_eta": np.zeros((L, J, J)),
             "spectral_radius": np.abs(gamma).max() * np.ones(L),
             "phi": np.tile(phi_T, (L, 1, 1))}
    s = PosteriorSamples(spec, series.times, np.arange(1, L + 1), draws, [series.T], np.zeros(L + 1))
    speed = ScalarField(series.grid, basis.columns @ (gamma * xi_last))
    return s, speed


def test_forecast_without_noise_is_evolve_normal(tiny_series):
    s, speed = degenerate_samples(tiny_series)
    fc = forecast(s, tiny_series, 0.3)
    want = evolve_normal(tiny_series.fields[-1], speed, 0.3).values
    assert np.max(np.abs(fc.z - want)) <= 1e-12
    assert np.array_equal(fc.z, fc.phi)


def test_forecast_multistep_matches_repeated_evolution(tiny_series):
    s, _ = degenerate_samples(tiny_series)
    gamma, xi = s.draws["transition"][0], s.draws["xi"][0, -1]
    Psi = s.spec.basis.columns
    phi = tiny_series.fields[-1]
    for h in (0.1, 0.2):
        xi = gamma * xi
        phi = evolve_normal(phi, ScalarField(tiny_series.grid, Psi @ xi), h)
    fc = forecast(s, tiny_series.grid, [0.1, 0.2])
    assert np.max(np.abs(fc.z[0] - phi.values)) <= 1e-12


def test_forecast_data_noise_is_mean_zero(tiny_series, tiny_spec):
    s = run_chain(tiny_spec, tiny_series)
    fc = forecast(s, tiny_series, float(tiny_series.deltas[-1]))
    diff = (fc.z - fc.phi).mean(axis=0)
    sd = np.sqrt(s.draws["sigma2_d"].mean() / s.L)
    assert np.all(np.abs(diff) <= 5 * sd)
    with pytest.raises(DataError):
        forecast(s, tiny_series, 0.0)


# -- effective sample size ------------------------------------------------------------------

def test_ess_iid():
    x = np.random.default_rng(3).standard_normal(10_000)
    ess = batch_means_ess(x).ess[0]
    assert 0.8e4 <= ess <= 1.2e4


def test_ess_constant_chain_flagged():
    res = batch_means_ess(np.ones(500))
    assert res.ess[0] == 0 and res.any_degenerate


def test_ess_ar1():
    rng = np.random.default_rng(4)
    rho, L = 0.9, 100_000
    e = rng.standard_normal(L)
    x = np.empty(L)
    x[0] = e[0] / np.sqrt(1 - rho ** 2)
    for t in range(1, L):
        x[t] = rho * x[t - 1] + e[t]
    ratio = batch_means_ess(x).ess[0] / L
    target = (1 - rho) / (1 + rho)
    assert abs(ratio - target) <= 0.3 * target


def test_ess_requires_100_draws(tiny_series):
    with pytest.raises(DataError):
        batch_means_ess(np.zeros(99))
    spec = ModelSpec("M2", exponential_basis(tiny_series.grid, 2), n_iter=150, n_burn=20)
    s = run_chain(spec, tiny_series)
    assert effective_sample_size(s, "transition").ess.shape == (2,)
    with pytest.raises(DataError):
        effective_sample_size(s, "xi")


def test_hyperparameters_validated():
    with pytest.raises(ValueError):
        Hyperparameters(c_beta=0.0)
    with pytest.raises(ValueError):
        ModelSpec("M1", exponential_basis(GridSpec(3, 3, 0, 1, 0, 1), 1))
    with pytest.raises(ValueError):
        ModelSpec("M3", exponential_basis(GridSpec(3, 3, 0, 1, 0, 1), 2))
