import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from pinn_comparator.io import GridData, Trajectory, read_case, read_trajectory


def primary_case_path(name: str) -> Path:
    """Ask the installed estimation toolkit where its bundled case lives.

    Deliberately a subprocess: the comparator package itself never imports
    the primary, it only consumes its files."""
    out = subprocess.run(
        [sys.executable, "-c",
         f"from swingid.grid import bundled_case_path; print(bundled_case_path('{name}'))"],
        capture_output=True, text=True, check=True,
    )
    return Path(out.stdout.strip())


def simulate_trajectory(tmp_dir: Path, case: str, *, noise: str, seed: int, init: str) -> Path:
    """Produce a trajectory CSV through the primary CLI."""
    out = tmp_dir / f"{case}_{seed}.csv"
    subprocess.run(
        ["swingid", "simulate", "--case", case, "--noise", noise, "--seed", str(seed),
         "--init", init, "--out", str(out)],
        check=True, capture_output=True,
    )
    return out


@pytest.fixture(scope="session")
def grid_a() -> GridData:
    return read_case(primary_case_path("case4_sysA"))


@pytest.fixture(scope="session")
def traj_a_noisy(tmp_path_factory) -> Trajectory:
    tmp = tmp_path_factory.mktemp("traj")
    path = simulate_trajectory(tmp, "case4_sysA", noise="gaussian:0.05", seed=7, init="spread:0.3")
    return read_trajectory(path)


@pytest.fixture(scope="session")
def decoupled_system():
    """A grid with no line coupling plus its closed-form solution.

    Generator: omega(t) = (P/D)(1 - exp(-D t / M)), delta = its integral.
    Load: delta(t) = -(P/D) t. Exact trajectories and exact derivatives,
    so the physics residuals vanish identically at the true parameters.
    """
    m_true = np.array([0.4])
    d_true = np.array([0.25, 0.5])
    grid = GridData(
        n_buses=2,
        generators=[0],
        loads=[1],
        susceptance=np.zeros((2, 2)),
        p_mech=np.array([0.2]),
        p_load=np.array([0.1]),
        m_true=m_true,
        d_true=d_true,
    )
    t = np.arange(1, 201) * 0.01
    p, d_g, m = 0.2, 0.25, 0.4
    lam = d_g / m
    omega = (p / d_g) * (1 - np.exp(-lam * t))
    delta_gen = (p / d_g) * t - (p * m / d_g**2) * (1 - np.exp(-lam * t))
    ddelta_gen = omega
    domega = (p / m) * np.exp(-lam * t)
    delta_load = -(0.1 / 0.5) * t
    ddelta_load = np.full_like(t, -0.1 / 0.5)
    traj = Trajectory(times=t, delta=np.column_stack([delta_gen, delta_load]),
                      omega=omega[:, None])
    derivs = {
        "ddelta": np.column_stack([ddelta_gen, ddelta_load]),
        "domega": domega[:, None],
    }
    return grid, traj, derivs
