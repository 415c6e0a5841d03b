import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swingid.grid import bundled_case_path, load_case
from swingid.simulate import (
    NoiseSpec,
    SampledTrajectory,
    SimulationError,
    SolverConfig,
    SystemState,
    add_noise,
    read_trajectory_csv,
    resample_uniform,
    simulate,
    swing_rhs,
    write_trajectory_csv,
)

from conftest import rk4_oracle


# --- right-hand side ----------------------------------------------------------


def test_rhs_zero_state_generator_acceleration(sys_a):
    # all sin terms vanish, so domega_1 = P_mech_1 / M_1 = 0.1 / 0.3
    model, params = sys_a
    dot = swing_rhs(model, params, SystemState.zeros(model))
    assert dot.omega[0] == pytest.approx(0.1 / 0.3, rel=1e-12)
    assert dot.omega[1] == pytest.approx(0.2 / 0.2, rel=1e-12)


def test_rhs_generator_angle_rate_is_omega(sys_a):
    model, params = sys_a
    state = SystemState(np.zeros(4), np.array([0.5, -0.2]))
    dot = swing_rhs(model, params, state)
    assert dot.delta[0] == 0.5
    assert dot.delta[1] == -0.2


def test_rhs_zero_state_load_angle_rate(sys_a):
    # load bus 3 (index 2): ddelta = -P_load/D = -0.1/0.25
    model, params = sys_a
    dot = swing_rhs(model, params, SystemState.zeros(model))
    assert dot.delta[2] == pytest.approx(-0.1 / 0.25, rel=1e-12)
    assert dot.delta[3] == pytest.approx(-0.2 / 0.25, rel=1e-12)


def test_rhs_dimension_mismatch_rejected(sys_a):
    model, params = sys_a
    with pytest.raises(ValueError):
        swing_rhs(model, params, SystemState(np.zeros(3), np.zeros(2)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_coupling_antisymmetry(sys_a, seed):
    """B_ij sin(d_i - d_j) = -B_ji sin(d_j - d_i) for random states."""
    model, _ = sys_a
    delta = np.random.default_rng(seed).uniform(-2, 2, model.n_buses)
    b = model.susceptance
    for i in range(4):
        for j in range(4):
            lhs = b[i, j] * np.sin(delta[i] - delta[j])
            rhs = -b[j, i] * np.sin(delta[j] - delta[i])
            assert lhs == pytest.approx(rhs, abs=1e-15)


# --- integration ----------------------------------------------------------------


@pytest.mark.parametrize("case", ["case4_sysA", "case4_sysB", "case4_sysC"])
def test_adaptive_matches_fixed_step_rk4(case):
    """Dense RK45 output agrees with an independent dt=1e-4 RK4 integration
    to 1e-5 sup-norm at 100 Hz checkpoints over 2 s."""
    model, params = load_case(bundled_case_path(case))
    init = SystemState.spread(model)
    oracle = rk4_oracle(model, params, init, 2.0, 1e-4, 100)
    solution = simulate(model, params, init, 2.0)
    ts = np.array(sorted(oracle))
    delta, omega = solution.eval(ts)
    ours = np.hstack([delta, omega])
    ref = np.array([oracle[t] for t in sorted(oracle)])
    assert np.abs(ours - ref).max() <= 1e-5


def test_equilibrium_stays_constant(sys_a):
    model, params = sys_a
    settled = simulate(model, params, SystemState.zeros(model), 60.0).state_at(60.0)
    dot = swing_rhs(model, params, settled)
    assert np.abs(dot.delta).max() < 1e-6 and np.abs(dot.omega).max() < 1e-6
    traj = resample_uniform(simulate(model, params, settled, 2.0), 0.01, 200)
    assert np.abs(traj.delta - settled.delta).max() < 1e-5
    assert np.abs(traj.omega - settled.omega).max() < 1e-5


def test_zero_horizon_rejected(sys_a):
    model, params = sys_a
    with pytest.raises(SimulationError):
        simulate(model, params, SystemState.zeros(model), 0.0)


def test_bad_tolerances_rejected():
    with pytest.raises(SimulationError):
        SolverConfig(rtol=0.0)


# --- resampling -----------------------------------------------------------------


def test_resample_fills_two_seconds(sys_a, traj_a):
    assert traj_a.n_samples == 200
    assert traj_a.t_s == 0.01
    assert traj_a.times[0] == pytest.approx(0.01)
    assert traj_a.times[-1] == pytest.approx(2.0)


def test_resample_boundary_fit(sys_a):
    model, params = sys_a
    solution = simulate(model, params, SystemState.zeros(model), 2.0)
    traj = resample_uniform(solution, 0.5, 4)
    assert traj.n_samples == 4
    assert traj.times[-1] == pytest.approx(2.0)


def test_resample_window_overrun(sys_a):
    model, params = sys_a
    solution = simulate(model, params, SystemState.zeros(model), 2.0)
    with pytest.raises(SimulationError, match="exceeds"):
        resample_uniform(solution, 0.01, 500)


# --- noise ----------------------------------------------------------------------


def test_noise_none_is_identity(traj_a):
    noisy = add_noise(traj_a, NoiseSpec.none(), seed=1)
    np.testing.assert_array_equal(noisy.delta, traj_a.delta)
    np.testing.assert_array_equal(noisy.omega, traj_a.omega)
    assert noisy.noise == NoiseSpec.none()


def test_gaussian_relative_std_monte_carlo():
    """Monte-Carlo check of the noise generator: 1e5 replicas of x=1.0 at
    level 0.05 must show an empirical std in [0.0495, 0.0505]."""
    base = SampledTrajectory(t_s=0.01, delta=np.ones((100_000, 1)), omega=np.ones((100_000, 0)))
    noisy = add_noise(base, NoiseSpec("gaussian-relative", 0.05), seed=123)
    assert 0.0495 <= np.std(noisy.delta - 1.0) <= 0.0505


def test_logistic_absolute_std_monte_carlo():
    base = SampledTrajectory(t_s=0.01, delta=np.zeros((100_000, 1)), omega=np.zeros((100_000, 0)))
    noisy = add_noise(base, NoiseSpec("logistic-absolute", 0.01), seed=321)
    assert np.std(noisy.delta) == pytest.approx(0.01, rel=0.02)


def test_double_noising_rejected(traj_a):
    noisy = add_noise(traj_a, NoiseSpec("gaussian-relative", 0.05), seed=5)
    with pytest.raises(ValueError, match="twice"):
        add_noise(noisy, NoiseSpec("gaussian-relative", 0.05), seed=6)


def test_noise_determinism_bit_identical(sys_a):
    model, params = sys_a
    spec = NoiseSpec("gaussian-relative", 0.05)
    out = []
    for _ in range(2):
        solution = simulate(model, params, SystemState.spread(model), 2.0)
        traj = add_noise(resample_uniform(solution, 0.01, 200), spec, seed=99)
        out.append(traj)
    np.testing.assert_array_equal(out[0].delta, out[1].delta)
    np.testing.assert_array_equal(out[0].omega, out[1].omega)


def test_unknown_noise_kind_rejected():
    with pytest.raises(ValueError):
        NoiseSpec("uniform", 0.1)
    with pytest.raises(ValueError):
        NoiseSpec("gaussian-relative", -0.1)


# --- trajectory CSV --------------------------------------------------------------


def test_trajectory_csv_round_trip(tmp_path, traj_a):
    noisy = add_noise(traj_a, NoiseSpec("gaussian-relative", 0.05), seed=17)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(noisy, path)
    header = path.read_text().splitlines()[0]
    assert header == "t,delta_1,delta_2,delta_3,delta_4,omega_g1,omega_g2"
    back = read_trajectory_csv(path)
    assert back.t_s == noisy.t_s
    np.testing.assert_array_equal(back.delta, noisy.delta)
    np.testing.assert_array_equal(back.omega, noisy.omega)


def test_trajectory_window(traj_a):
    w = traj_a.window(50)
    assert w.n_samples == 50
    np.testing.assert_array_equal(w.delta, traj_a.delta[:50])
    with pytest.raises(ValueError):
        traj_a.window(500)
