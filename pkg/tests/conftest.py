import numpy as np
import pytest

from swingid.grid import bundled_case_path, load_case
from swingid.simulate import SystemState, resample_uniform, simulate


@pytest.fixture(scope="session")
def sys_a():
    return load_case(bundled_case_path("case4_sysA"))


@pytest.fixture(scope="session")
def sys_b():
    return load_case(bundled_case_path("case4_sysB"))


@pytest.fixture(scope="session")
def sys_c():
    return load_case(bundled_case_path("case4_sysC"))


@pytest.fixture(scope="session")
def case6():
    return load_case(bundled_case_path("case6"))


@pytest.fixture(scope="session")
def case39():
    return load_case(bundled_case_path("case39"))


@pytest.fixture(scope="session")
def traj_a(sys_a):
    """Clean 2 s / 100 Hz System A trajectory from the staggered-angle init."""
    model, params = sys_a
    solution = simulate(model, params, SystemState.spread(model), 2.0)
    return resample_uniform(solution, 0.01, 200)


@pytest.fixture(scope="session")
def traj_a_zero_init(sys_a):
    model, params = sys_a
    solution = simulate(model, params, SystemState.zeros(model), 2.0)
    return resample_uniform(solution, 0.01, 200)


def rk4_oracle(model, params, init, horizon, dt, sample_every):
    """Fixed-step classic RK4 integration, independent of the solver under
    test; returns {t: packed state} at every ``sample_every``-th step."""
    gens = np.array(model.generator_buses)
    loads = np.array(model.load_buses)
    m = params.inertia_vector(model)
    d = params.damping_vector(model)
    d_gen, d_load, b = d[gens], d[loads], model.susceptance
    n = model.n_buses
    p_mech, p_load = model.p_mech, model.p_load

    def f(y):
        delta, omega = y[:n], y[n:]
        flows = (b * np.sin(delta[:, None] - delta[None, :])).sum(axis=1)
        dd = np.empty(n)
        dd[gens] = omega
        dd[loads] = (-p_load - flows[loads]) / d_load
        dw = (-d_gen * omega + p_mech - flows[gens]) / m
        return np.concatenate([dd, dw])

    steps = int(round(horizon / dt))
    y = np.concatenate([init.delta, init.omega])
    out = {}
    for k in range(1, steps + 1):
        k1 = f(y)
        k2 = f(y + dt / 2 * k1)
        k3 = f(y + dt / 2 * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if k % sample_every == 0:
            out[round(k * dt, 10)] = y.copy()
    return out
