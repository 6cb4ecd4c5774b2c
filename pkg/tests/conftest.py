import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from firefront.grid import GridSpec
from firefront.inference.model import ChainState, Hyperparameters, ModelData

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log():
    def record(criterion, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def random_spd(rng, J, scale=1.0):
    A = rng.standard_normal((J, J))
    return scale * (A @ A.T + J * np.eye(J))


def small_instance(rng, variant="M2", N_side=3, J=2, T=4, P=2, missing_time=None,
                   partial=True, hyper=None):
    """Random ModelData + ChainState with non-uniform steps and partial masks."""
    N = N_side * N_side
    Z = rng.standard_normal((T, N))
    obs = np.ones((T, N), dtype=bool)
    if partial:
        for t in range(1, T):
            obs[t, rng.choice(N, size=2, replace=False)] = False
    if missing_time is not None:
        obs[missing_time] = False
    Z = np.where(obs, Z, np.nan)
    dts = rng.uniform(0.5, 2.0, size=T)
    Psi = np.linalg.qr(rng.standard_normal((N, J)))[0]
    X = rng.standard_normal((N, P))
    data = ModelData(Z, obs, dts, X, Psi, hyper or Hyperparameters(), variant)
    W = random_spd(rng, J, 0.5)
    trans = rng.normal(0, 0.7, (J, J)) if variant == "M1" else rng.normal(0, 0.7, J)
    state = ChainState(
        phi=rng.standard_normal((T + 1, N)), xi=rng.standard_normal((T, J)),
        beta=rng.standard_normal(P), transition=trans, prec_eta=W, sigma_eta=np.linalg.inv(W),
        sigma2_d=rng.uniform(0.3, 2.0), sigma2_p=rng.uniform(0.3, 2.0),
        rng=np.random.default_rng(int(rng.integers(2**31))))
    state.phi[0] = np.where(obs[0], Z[0], 0.0)
    return data, state


@pytest.fixture
def grid_small():
    return GridSpec(5, 4, 0.0, 4.0, 0.0, 3.0)
